//! Command-line front end of the `mkdv` binary.
//!
//! Settings come from three layers: built-in defaults, an optional JSON file
//! given with `--config`, and command flags, with flags winning.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modulation::{modulation_table, ModulationCache};
use crate::oracle::{compare_slice, read_slice, solve_mkdv, write_slice, CompareConfig, GridSpec, SliceFormat, SliceReport};
use crate::phase::{signature_grid, GridSpec2d, PhaseKind};
use crate::scattering::ShockParams;
use crate::specfun::QuadratureSpec;
use crate::wavefield::{profile_csv, WaveConfig, WaveSample, Wavefield};

pub const MANIFEST_NAME: &str = "manifest.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PhaseArg {
    Theta,
    Gc,
    G,
}

impl From<PhaseArg> for PhaseKind {
    fn from(p: PhaseArg) -> Self {
        match p {
            PhaseArg::Theta => PhaseKind::Theta,
            PhaseArg::Gc => PhaseKind::Gc,
            PhaseArg::G => PhaseKind::Gell,
        }
    }
}

/// Everything a command may need; the JSON config file has this shape and
/// may omit any field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub c: f64,
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub wave: WaveConfig,
    pub grid: GridSpec,
    pub eps: f64,
    pub compare: CompareConfig,
    pub output: Option<PathBuf>,
    pub format: OutputFormat,
    pub svg: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let quad = QuadratureSpec::default();
        RunConfig {
            c: 1.0,
            abs_tol: quad.abs_tol,
            rel_tol: quad.rel_tol,
            wave: WaveConfig::default(),
            grid: GridSpec::default(),
            eps: 0.5,
            compare: CompareConfig::default(),
            output: None,
            format: OutputFormat::Csv,
            svg: None,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("invalid config {}: {e}", path.display())))
    }

    pub fn params(&self) -> Result<ShockParams> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return Err(Error::Config("quadrature tolerances must be positive".into()));
        }
        let mut p = ShockParams::new(self.c)?;
        p.quad = p.quad.with_tolerances(self.abs_tol, self.rel_tol);
        Ok(p)
    }

    pub fn wavefield(&self) -> Result<Wavefield> {
        self.wave.validate()?;
        let cache = ModulationCache::from_env(self.wave.cache_capacity);
        Ok(Wavefield::new(self.params()?, self.wave)?.with_cache(cache))
    }
}

#[derive(Debug, Parser)]
#[command(name = "mkdv", version, about = "Long-time asymptotics of the MKdV step problem")]
pub struct Cli {
    /// JSON file overriding the built-in defaults.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Write the main output here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<OutputFormat>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate the asymptotic solution at one point.
    Eval {
        #[arg(long)]
        c: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        x: f64,
        #[arg(long)]
        t: f64,
    },
    /// Asymptotic profile on a uniform grid in x.
    Profile {
        #[arg(long)]
        c: Option<f64>,
        #[arg(long)]
        t: f64,
        #[arg(long, allow_hyphen_values = true)]
        xmin: f64,
        #[arg(long, allow_hyphen_values = true)]
        xmax: f64,
        #[arg(long, default_value_t = 1001)]
        n: usize,
        /// Also write an SVG plot of q and its envelope.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Modulation parameters over a range of x/12t.
    ModulationTable {
        #[arg(long)]
        c: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        xi_min: f64,
        #[arg(long, allow_hyphen_values = true)]
        xi_max: f64,
        #[arg(long, default_value_t = 101)]
        n: usize,
    },
    /// Sign of the imaginary part of a phase on a grid of the spectral plane.
    Sigtable {
        #[arg(long)]
        c: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        xi: f64,
        #[arg(long, value_enum)]
        phase: PhaseArg,
        #[arg(long, allow_hyphen_values = true, default_value_t = -2.0)]
        re_min: f64,
        #[arg(long, allow_hyphen_values = true, default_value_t = 2.0)]
        re_max: f64,
        #[arg(long, allow_hyphen_values = true, default_value_t = -2.0)]
        im_min: f64,
        #[arg(long, allow_hyphen_values = true, default_value_t = 2.0)]
        im_max: f64,
        #[arg(long, default_value_t = 81)]
        nx: usize,
        #[arg(long, default_value_t = 81)]
        ny: usize,
    },
    /// Run the direct solver and write slices plus a manifest.
    Simulate {
        #[arg(long)]
        c: Option<f64>,
        #[arg(long)]
        half_length: Option<f64>,
        #[arg(long)]
        n_points: Option<usize>,
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long)]
        t_end: Option<f64>,
        #[arg(long)]
        eps: Option<f64>,
        /// Comma-separated snapshot times; defaults to `t_end`.
        #[arg(long, value_delimiter = ',')]
        snapshots: Vec<f64>,
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long)]
        binary: bool,
    },
    /// Compare solver slices with the asymptotic solution.
    Compare {
        /// Slice files, or directories written by `simulate`.
        #[arg(long, num_args = 1.., required = true)]
        slices: Vec<PathBuf>,
        #[arg(long)]
        c: Option<f64>,
    },
}

/// Contents of `manifest.json` next to the slices of a simulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub c: f64,
    pub eps: f64,
    pub grid: GridSpec,
    pub snapshots: Vec<f64>,
    pub files: Vec<String>,
    pub mass_drift: f64,
    pub l2_drift: f64,
    pub steps: u64,
    pub wall_time: f64,
    pub blow_up_time: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceEntry {
    pub file: String,
    pub report: SliceReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub c: f64,
    pub thresholds: CompareConfig,
    pub slices: Vec<SliceEntry>,
    pub pass: bool,
}

fn emit(cfg: &RunConfig, stdout: &mut dyn Write, text: &str) -> Result<()> {
    match &cfg.output {
        Some(path) => fs::write(path, text)?,
        None => stdout.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn csv_or_json<T: Serialize>(cfg: &RunConfig, value: &T, csv: impl FnOnce() -> String) -> Result<String> {
    match cfg.format {
        OutputFormat::Csv => Ok(csv()),
        OutputFormat::Json => Ok(serde_json::to_string_pretty(value)? + "\n"),
    }
}

/// Parses nothing; runs an already parsed command line. Reports go to
/// `stdout` (or `--output`), human summaries to `stderr`.
pub fn run(cli: Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if cli.output.is_some() {
        cfg.output = cli.output.clone();
    }
    if let Some(f) = cli.format {
        cfg.format = f;
    }
    let set_c = |cfg: &mut RunConfig, c: Option<f64>| {
        if let Some(c) = c {
            cfg.c = c;
        }
    };

    match cli.command {
        Command::Eval { c, x, t } => {
            set_c(&mut cfg, c);
            let sample = cfg.wavefield()?.sample(x, t)?;
            let text = csv_or_json(&cfg, &sample, || profile_csv(&[sample]))?;
            emit(&cfg, stdout, &text)
        }
        Command::Profile { c, t, xmin, xmax, n, svg } => {
            set_c(&mut cfg, c);
            if svg.is_some() {
                cfg.svg = svg;
            }
            let samples = cfg.wavefield()?.profile(t, xmin, xmax, n)?;
            if let Some(path) = &cfg.svg {
                fs::write(path, profile_svg(&samples))?;
            }
            let text = csv_or_json(&cfg, &samples, || profile_csv(&samples))?;
            emit(&cfg, stdout, &text)
        }
        Command::ModulationTable { c, xi_min, xi_max, n } => {
            set_c(&mut cfg, c);
            let table = modulation_table(xi_min, xi_max, n, &cfg.params()?)?;
            emit(&cfg, stdout, &table)
        }
        Command::Sigtable { c, xi, phase, re_min, re_max, im_min, im_max, nx, ny } => {
            set_c(&mut cfg, c);
            let spec = GridSpec2d::new((re_min, re_max), (im_min, im_max), nx, ny);
            let grid = signature_grid(phase.into(), xi, spec, &cfg.params()?)?;
            emit(&cfg, stdout, &grid.to_csv())
        }
        Command::Simulate { c, half_length, n_points, dt, t_end, eps, snapshots, out_dir, binary } => {
            set_c(&mut cfg, c);
            if let Some(v) = half_length {
                cfg.grid.half_length = v;
            }
            if let Some(v) = n_points {
                cfg.grid.n_points = v;
            }
            if let Some(v) = t_end {
                cfg.grid.t_end = v;
            }
            if let Some(v) = eps {
                cfg.eps = v;
            }
            cfg.grid.dt = match dt {
                Some(v) => v,
                // Keep the default ratio to the stability bound when the
                // grid changed but dt was not given.
                None if half_length.is_some() || n_points.is_some() => 0.25 * cfg.grid.max_dt(),
                None => cfg.grid.dt,
            };
            simulate(&cfg, snapshots, &out_dir, binary, stderr)
        }
        Command::Compare { slices, c } => {
            set_c(&mut cfg, c);
            let report = compare(&cfg, &slices)?;
            let text = serde_json::to_string_pretty(&report)? + "\n";
            emit(&cfg, stdout, &text)?;
            writeln!(stderr, "{}", summary(&report))?;
            if report.pass {
                Ok(())
            } else {
                Err(Error::Comparison(format!("{} slice(s) outside thresholds", report.slices.iter().filter(|s| !s.report.pass).count())))
            }
        }
    }
}

fn simulate(cfg: &RunConfig, snapshots: Vec<f64>, out_dir: &Path, binary: bool, stderr: &mut dyn Write) -> Result<()> {
    if !(cfg.c >= 0.0 && cfg.c.is_finite()) {
        return Err(Error::domain(format!("step height must be nonnegative, got {}", cfg.c)));
    }
    // c = 0 is allowed here: it is the trivial zero solution.
    let params = ShockParams { c: cfg.c, quad: QuadratureSpec::default() };
    let snapshots = if snapshots.is_empty() { vec![cfg.grid.t_end] } else { snapshots };
    let run = solve_mkdv(&params, cfg.grid, cfg.eps, &snapshots)?;
    fs::create_dir_all(out_dir)?;
    let format = if binary { SliceFormat::Binary } else { SliceFormat::Csv };
    let mut files = Vec::new();
    for (i, slice) in run.slices.iter().enumerate() {
        let name = format!("slice_{i:03}.{}", format.extension());
        write_slice(&out_dir.join(&name), slice, format)?;
        files.push(name);
    }
    if let Some(b) = &run.blow_up {
        let name = format!("last_good.{}", format.extension());
        write_slice(&out_dir.join(&name), &b.last_good, format)?;
    }
    let manifest = Manifest {
        c: run.c,
        eps: run.eps,
        grid: run.grid,
        snapshots: run.slices.iter().map(|s| s.t).collect(),
        files,
        mass_drift: run.mass_drift,
        l2_drift: run.l2_drift,
        steps: run.steps,
        wall_time: run.wall_time,
        blow_up_time: run.blow_up.as_ref().map(|b| b.time),
    };
    fs::write(out_dir.join(MANIFEST_NAME), serde_json::to_string_pretty(&manifest)? + "\n")?;
    writeln!(
        stderr,
        "{} slice(s), {} steps in {:.1} s, drift: mass {:.2e}, L2 {:.2e}",
        manifest.files.len(),
        manifest.steps,
        manifest.wall_time,
        manifest.mass_drift,
        manifest.l2_drift
    )?;
    run.into_result().map(|_| ())
}

fn read_manifest(path: &Path) -> Result<Manifest> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Config(format!("invalid manifest {}: {e}", path.display())))
}

fn check_manifest_c(manifest: &Manifest, c: f64, path: &Path) -> Result<()> {
    if (manifest.c - c).abs() > 1e-12 * c.abs().max(1.0) {
        return Err(Error::Config(format!("manifest {} has c = {} but c = {c} was requested", path.display(), manifest.c)));
    }
    Ok(())
}

/// Slice files named on the command line, with directories expanded through
/// their manifest.
fn collect_slices(paths: &[PathBuf], c: f64) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for path in paths {
        if path.is_dir() {
            let mpath = path.join(MANIFEST_NAME);
            let manifest = read_manifest(&mpath)?;
            check_manifest_c(&manifest, c, &mpath)?;
            out.extend(manifest.files.iter().map(|f| path.join(f)));
        } else {
            let mpath = path.parent().unwrap_or(Path::new(".")).join(MANIFEST_NAME);
            if mpath.is_file() {
                check_manifest_c(&read_manifest(&mpath)?, c, &mpath)?;
            }
            out.push(path.clone());
        }
    }
    Ok(out)
}

pub fn compare(cfg: &RunConfig, paths: &[PathBuf]) -> Result<CompareReport> {
    let field = cfg.wavefield()?;
    let files = collect_slices(paths, cfg.c)?;
    if files.is_empty() {
        return Err(Error::Config("no slices to compare".into()));
    }
    let mut slices = Vec::with_capacity(files.len());
    for file in files {
        let slice = read_slice(&file)?;
        let report = compare_slice(&slice, &field, &cfg.compare)?;
        slices.push(SliceEntry { file: file.display().to_string(), report });
    }
    let pass = slices.iter().all(|s| s.report.pass);
    Ok(CompareReport { c: cfg.c, thresholds: cfg.compare, slices, pass })
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|v| format!("{v:.4}")).unwrap_or_else(|| "-".into())
}

pub fn summary(report: &CompareReport) -> String {
    let mut out = String::new();
    for s in &report.slices {
        let r = &s.report;
        let _ = writeln!(
            out,
            "{} t={} {} plateau={} envelope median={} max={} ({} extrema) wavelength median={}",
            s.file,
            r.t,
            if r.pass { "PASS" } else { "FAIL" },
            fmt_opt(r.plateau_mean),
            fmt_opt(r.envelope.median),
            fmt_opt(r.envelope.max),
            r.envelope.entries.len(),
            fmt_opt(r.wavelength.median),
        );
        for f in &r.failures {
            let _ = writeln!(out, "  {f}");
        }
    }
    let _ = write!(out, "overall: {}", if report.pass { "PASS" } else { "FAIL" });
    out
}

/// Polyline plot of `q(x)` with the envelope curves `c ± d` where defined.
pub fn profile_svg(samples: &[WaveSample]) -> String {
    let (w, h, pad) = (800.0, 400.0, 20.0);
    let x0 = samples.first().map_or(0.0, |s| s.x);
    let x1 = samples.last().map_or(1.0, |s| s.x);
    let ymax = samples.iter().map(|s| s.q.abs().max(s.envelope_hi.unwrap_or(0.0))).fold(1e-12, f64::max);
    let px = |x: f64| pad + (w - 2.0 * pad) * (x - x0) / (x1 - x0).max(f64::MIN_POSITIVE);
    let py = |q: f64| h - pad - (h - 2.0 * pad) * (q + ymax) / (2.0 * ymax);

    let mut out = format!("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n");
    let _ = writeln!(out, "<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>");
    let mut polyline = |points: &[(f64, f64)], colour: &str| {
        if points.len() < 2 {
            return;
        }
        let pts: Vec<String> = points.iter().map(|&(x, q)| format!("{:.3},{:.3}", px(x), py(q))).collect();
        let _ = writeln!(out, "<polyline fill=\"none\" stroke=\"{colour}\" stroke-width=\"1\" points=\"{}\"/>", pts.join(" "));
    };
    let curve: Vec<(f64, f64)> = samples.iter().map(|s| (s.x, s.q)).collect();
    polyline(&curve, "black");
    for pick in [|s: &WaveSample| s.envelope_lo, |s: &WaveSample| s.envelope_hi] {
        let mut run = Vec::new();
        for s in samples {
            match pick(s) {
                Some(v) => run.push((s.x, v)),
                None => {
                    polyline(&run, "red");
                    run.clear();
                }
            }
        }
        polyline(&run, "red");
    }
    out.push_str("</svg>\n");
    out
}
