use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use mkdv_shock::cli::Manifest;
use mkdv_shock::oracle::{read_slice, synthetic_slice, write_slice_csv, GridSpec};
use mkdv_shock::scattering::ShockParams;
use mkdv_shock::wavefield::{WaveConfig, Wavefield};

fn mkdv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mkdv")).args(args).env_remove("MKDV_CACHE_DIR").output().unwrap()
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines().skip(1).map(|l| l.split(',').map(str::to_string).collect()).collect()
}

#[test]
fn eval_reports_each_region() {
    let plateau = rows(&stdout(&mkdv(&["eval", "--c", "1", "--x", "-100", "--t", "10"])));
    assert_eq!(plateau[0][3], "Plateau");
    assert_eq!(plateau[0][4].parse::<f64>().unwrap(), 1.0);

    let vanishing = rows(&stdout(&mkdv(&["eval", "--c", "1", "--x", "1000", "--t", "10"])));
    assert_eq!(vanishing[0][3], "Vanishing");
    assert_eq!(vanishing[0][4].parse::<f64>().unwrap(), 0.0);

    let json = stdout(&mkdv(&["eval", "--c", "1", "--x", "0", "--t", "10", "--format", "json"]));
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(v["region"]["tag"], "Elliptic");
    let q = v["q"].as_f64().unwrap();
    let d0 = 0.800_960_866_310_125_7;
    assert!((v["envelope_hi"].as_f64().unwrap() - (1.0 + d0)).abs() < 1e-10);
    assert!(q >= 1.0 - d0 - 1e-12 && q <= 1.0 + d0 + 1e-12);
}

#[test]
fn bad_input_exits_with_domain_code() {
    let out = mkdv(&["eval", "--c", "1", "--x", "0", "--t", "0"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert_eq!(err.lines().count(), 1, "{err}");

    assert_eq!(mkdv(&["eval", "--c", "-1", "--x", "0", "--t", "1"]).status.code(), Some(2));
    let table = mkdv(&["modulation-table", "--c", "1", "--xi-min", "-0.6", "--xi-max", "0", "--n", "3"]);
    assert_eq!(table.status.code(), Some(2));
    let gc = mkdv(&["sigtable", "--c", "1", "--xi", "0", "--phase", "gc", "--nx", "5", "--ny", "5"]);
    assert_eq!(gc.status.code(), Some(2));
}

#[test]
fn profile_rows_labels_and_determinism() {
    let two = stdout(&mkdv(&["profile", "--c", "1", "--t", "10", "--xmin", "-10", "--xmax", "10", "--n", "2"]));
    assert_eq!(rows(&two).len(), 2);

    let args = ["profile", "--c", "1", "--t", "10", "--xmin", "-100", "--xmax", "100", "--n", "2001"];
    let a = stdout(&mkdv(&args));
    let b = stdout(&mkdv(&args));
    assert_eq!(a, b);
    let mut labels: Vec<String> = rows(&a).into_iter().map(|r| r[3].clone()).collect();
    labels.sort();
    labels.dedup();
    assert_eq!(labels, ["BoundaryLayer", "Elliptic", "Plateau", "Vanishing"]);
    for r in rows(&a) {
        let q = &r[4];
        let mantissa = q.trim_start_matches('-').split('e').next().unwrap();
        assert_eq!(mantissa.chars().filter(char::is_ascii_digit).count(), 17, "{q}");
    }
}

#[test]
fn profile_writes_svg() {
    let dir = tempfile::tempdir().unwrap();
    let svg = dir.path().join("p.svg");
    let csv = dir.path().join("p.csv");
    let out = mkdv(&[
        "profile", "--t", "10", "--xmin", "-80", "--xmax", "60", "--n", "500",
        "--svg", svg.to_str().unwrap(), "--output", csv.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let text = fs::read_to_string(&svg).unwrap();
    assert!(text.starts_with("<svg") && text.trim_end().ends_with("</svg>"));
    assert_eq!(text.matches("<polyline").count(), 3);
    assert_eq!(rows(&fs::read_to_string(&csv).unwrap()).len(), 500);
}

#[test]
fn modulation_table_edges_and_monotonicity() {
    let csv = stdout(&mkdv(&["modulation-table", "--c", "1", "--xi-min", "-0.49999", "--xi-max", "0.33333", "--n", "41"]));
    let table = rows(&csv);
    assert_eq!(table.len(), 41);
    let d: Vec<f64> = table.iter().map(|r| r[1].parse().unwrap()).collect();
    assert!(d[0] < 0.01, "{}", d[0]);
    assert!(d[40] > 0.99, "{}", d[40]);
    assert!(d.windows(2).all(|w| w[1] > w[0]));
    assert!(table.iter().all(|r| r[9] == "ok"));
}

#[test]
fn sigtable_is_conjugate_antisymmetric() {
    for (phase, xi) in [("theta", "-1"), ("gc", "-1"), ("g", "0")] {
        let csv = stdout(&mkdv(&["sigtable", "--c", "1", "--xi", xi, "--phase", phase, "--nx", "21", "--ny", "21"]));
        let grid: Vec<Vec<i8>> = csv.lines().skip(2).map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
        assert_eq!(grid.len(), 21);
        for iy in 0..21 {
            for ix in 0..21 {
                assert_eq!(grid[iy][ix], -grid[20 - iy][ix], "{phase} at ({ix}, {iy})");
            }
        }
        assert!(grid.iter().flatten().any(|&s| s == 1) && grid.iter().flatten().any(|&s| s == -1));
    }
}

#[test]
fn simulate_zero_height_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = mkdv(&[
        "simulate", "--c", "0", "--half-length", "64", "--n-points", "1024", "--t-end", "1",
        "--snapshots", "0.25,0.5,1", "--out-dir", dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let manifest: Manifest = serde_json::from_str(&fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest.snapshots, vec![0.25, 0.5, 1.0]);
    assert_eq!(manifest.files.len(), 3);
    assert!(manifest.blow_up_time.is_none());
    for f in &manifest.files {
        let s = read_slice(&dir.path().join(f)).unwrap();
        assert_eq!(s.x.len(), 1024);
        assert!(s.q.iter().all(|&v| v == 0.0));
    }
}

#[test]
fn simulate_small_run_conserves_and_compares() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().to_str().unwrap();
    let out = mkdv(&[
        "simulate", "--half-length", "128", "--n-points", "2048", "--t-end", "4", "--snapshots", "4",
        "--binary", "--out-dir", path,
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let manifest: Manifest = serde_json::from_str(&fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert!(manifest.mass_drift <= 1e-8 && manifest.l2_drift <= 1e-6, "{manifest:?}");
    assert_eq!(manifest.files, ["slice_000.bin"]);

    let mismatch = mkdv(&["compare", "--slices", path, "--c", "2"]);
    assert_eq!(mismatch.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&mismatch.stderr).contains("configuration error"));
}

#[test]
fn simulate_reports_blow_up() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("loose.json");
    fs::write(&config, r#"{"grid": {"stability_const": 4000.0}}"#).unwrap();
    let out = mkdv(&[
        "--config", config.to_str().unwrap(), "simulate", "--half-length", "64", "--n-points", "1024",
        "--dt", "0.4", "--t-end", "5", "--out-dir", dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));
    let manifest: Manifest = serde_json::from_str(&fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert!(manifest.blow_up_time.unwrap() > 0.0);
    assert!(dir.path().join("last_good.csv").is_file());
}

fn write_synthetic(dir: &Path, c: f64, t: f64, name: &str) -> String {
    let f = Wavefield::new(ShockParams::new(c).unwrap(), WaveConfig::default()).unwrap();
    let slice = synthetic_slice(&f, t, GridSpec::default().x()).unwrap();
    let path = dir.join(name);
    write_slice_csv(&path, &slice).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn compare_passes_on_synthetic_slices() {
    let dir = tempfile::tempdir().unwrap();
    let a = write_synthetic(dir.path(), 1.0, 20.0, "a.csv");
    let b = write_synthetic(dir.path(), 1.0, 40.0, "b.csv");
    let config = dir.path().join("strict.json");
    fs::write(&config, r#"{"compare": {"envelope_median": 0.01, "envelope_max": 0.01, "wavelength_median": 0.01}}"#).unwrap();
    let out = mkdv(&["--config", config.to_str().unwrap(), "compare", "--slices", &a, &b, "--c", "1"]);
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["pass"], true);
    assert_eq!(report["thresholds"]["envelope_max"], 0.01);
    assert_eq!(report["slices"].as_array().unwrap().len(), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("overall: PASS"));
}

#[test]
fn compare_failure_exits_with_comparison_code() {
    let dir = tempfile::tempdir().unwrap();
    let a = write_synthetic(dir.path(), 1.2, 40.0, "a.csv");
    let out = mkdv(&["compare", "--slices", &a, "--c", "1"]);
    assert_eq!(out.status.code(), Some(4));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["pass"], false);
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("c2.json");
    fs::write(&config, r#"{"c": 2.0, "format": "json"}"#).unwrap();
    let cfg = config.to_str().unwrap();
    let from_file: serde_json::Value = serde_json::from_str(&stdout(&mkdv(&["--config", cfg, "eval", "--x", "-100", "--t", "1"]))).unwrap();
    assert_eq!(from_file["q"].as_f64().unwrap(), 2.0);
    let from_flag: serde_json::Value =
        serde_json::from_str(&stdout(&mkdv(&["--config", cfg, "eval", "--c", "3", "--x", "-100", "--t", "1"]))).unwrap();
    assert_eq!(from_flag["q"].as_f64().unwrap(), 3.0);
    let csv = stdout(&mkdv(&["--config", cfg, "--format", "csv", "eval", "--x", "-100", "--t", "1"]));
    assert!(csv.starts_with("x,t,xi,region"));

    fs::write(&config, "{ not json").unwrap();
    assert_eq!(mkdv(&["--config", cfg, "eval", "--x", "0", "--t", "1"]).status.code(), Some(2));
}

#[test]
fn cache_dir_receives_spilled_states() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_mkdv"))
        .args(["eval", "--c", "1", "--x", "0", "--t", "10"])
        .env("MKDV_CACHE_DIR", dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(fs::read_dir(dir.path()).unwrap().count() >= 1);
}
