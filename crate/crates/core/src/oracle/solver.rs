//! Fourier pseudospectral solver with an exact integrating factor for the
//! dispersive term and classical RK4 for the nonlinear flux `2q³`.

use std::f64::consts::PI;
use std::sync::Arc;
use std::time::Instant;

use num_complex::Complex64;
use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scattering::ShockParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GridSpec {
    /// The domain is `[−L, L)`.
    pub half_length: f64,
    pub n_points: usize,
    pub dt: f64,
    pub t_end: f64,
    /// Fraction of the resolved wavenumbers kept after each nonlinear
    /// evaluation.
    pub dealias_fraction: f64,
    /// `dt` must not exceed `stability_const·(L/n)³`.
    pub stability_const: f64,
    /// Position of the compensating up-step as a fraction of `L`.
    pub up_step: f64,
    /// Width of the up-step ramp; wider ramps radiate less into the
    /// comparison windows.
    pub up_step_width: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        let (half_length, n_points, stability_const) = (512.0, 8192, 10.0);
        GridSpec {
            half_length,
            n_points,
            dt: 0.25 * stability_const * (half_length / n_points as f64).powi(3),
            t_end: 40.0,
            dealias_fraction: 2.0 / 3.0,
            stability_const,
            up_step: 0.9,
            up_step_width: 8.0,
        }
    }
}

impl GridSpec {
    pub fn dx(&self) -> f64 {
        2.0 * self.half_length / self.n_points as f64
    }

    pub fn max_dt(&self) -> f64 {
        self.stability_const * (self.half_length / self.n_points as f64).powi(3)
    }

    pub fn x(&self) -> Vec<f64> {
        let dx = self.dx();
        (0..self.n_points).map(|i| -self.half_length + dx * i as f64).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.half_length > 0.0 && self.half_length.is_finite()) {
            return Err(Error::domain(format!("half length must be positive, got {}", self.half_length)));
        }
        if self.n_points < 1024 || !self.n_points.is_power_of_two() {
            return Err(Error::domain(format!("n_points must be a power of two >= 1024, got {}", self.n_points)));
        }
        if !(self.dealias_fraction > 0.5 && self.dealias_fraction <= 1.0) {
            return Err(Error::domain(format!("dealias fraction {} must lie in (1/2, 1]", self.dealias_fraction)));
        }
        if !(self.stability_const > 0.0) {
            return Err(Error::domain("stability constant must be positive"));
        }
        if !(self.dt > 0.0) || self.dt > self.max_dt() * (1.0 + 1e-12) {
            return Err(Error::domain(format!(
                "dt = {} violates 0 < dt <= {}·(L/n)³ = {}",
                self.dt,
                self.stability_const,
                self.max_dt()
            )));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(Error::domain(format!("t_end must be positive, got {}", self.t_end)));
        }
        if !(self.up_step_width > 0.0) {
            return Err(Error::domain(format!("up-step width must be positive, got {}", self.up_step_width)));
        }
        if !(self.up_step > 0.0 && self.up_step < 1.0) {
            return Err(Error::domain(format!("up-step position {} must lie in (0, 1)", self.up_step)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldSlice {
    pub t: f64,
    pub x: Vec<f64>,
    pub q: Vec<f64>,
}

impl FieldSlice {
    pub fn validate(&self) -> Result<()> {
        if self.x.len() != self.q.len() {
            return Err(Error::domain(format!("slice has {} x values and {} q values", self.x.len(), self.q.len())));
        }
        if self.x.len() >= 2 {
            let dx = self.x[1] - self.x[0];
            if !(dx > 0.0) {
                return Err(Error::domain("slice x must be strictly increasing"));
            }
            if self.x.windows(2).any(|w| ((w[1] - w[0]) - dx).abs() > 1e-8 * dx) {
                return Err(Error::domain("slice x must be uniformly spaced"));
            }
        }
        Ok(())
    }

    pub fn dx(&self) -> f64 {
        if self.x.len() < 2 {
            0.0
        } else {
            self.x[1] - self.x[0]
        }
    }
}

/// `q₀(x) = c + (c/2)(tanh((x − x_up)/w) − tanh(x/ε))`: height `c` left of
/// the origin, zero on `(0, x_up)`, back to `c` beyond `x_up`.
pub fn initial_profile(x: f64, c: f64, eps: f64, x_up: f64, up_width: f64) -> f64 {
    c + 0.5 * c * (((x - x_up) / up_width).tanh() - (x / eps).tanh())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlowUp {
    pub time: f64,
    pub last_good: FieldSlice,
}

/// Integrator state. The spectrum holds the `n/2 + 1` nonnegative
/// wavenumbers of the real field.
pub struct MkdvSolver {
    grid: GridSpec,
    c: f64,
    t: f64,
    steps: u64,
    spectrum: Vec<Complex64>,
    wavenumber: Vec<f64>,
    keep: Vec<bool>,
    forward: Arc<dyn RealToComplex<f64>>,
    inverse: Arc<dyn ComplexToReal<f64>>,
    real: Vec<f64>,
    freq: Vec<Complex64>,
    scratch: Vec<Complex64>,
    stages: [Vec<Complex64>; 5],
    /// `exp(ik³h/2)` for the step `h` it was built for.
    half_step: (f64, Vec<Complex64>),
    /// Field at the start of the current step, from the first stage.
    current: Vec<f64>,
    last_good: (f64, Vec<f64>),
}

impl MkdvSolver {
    pub fn new(params: &ShockParams, grid: GridSpec, eps: f64) -> Result<Self> {
        grid.validate()?;
        if !(eps > 0.0) {
            return Err(Error::domain(format!("smoothing width must be positive, got {eps}")));
        }
        let x_up = grid.up_step * grid.half_length;
        let period = 2.0 * grid.half_length;
        // Evaluate on the period centred on the zero stretch so the seam
        // falls in the flat part of the plateau.
        let seam = 0.5 * x_up - grid.half_length;
        let q0: Vec<f64> = grid
            .x()
            .iter()
            .map(|&x| {
                let x = if x < seam { x + period } else { x };
                initial_profile(x, params.c, eps, x_up, grid.up_step_width)
            })
            .collect();
        Self::from_profile(grid, params.c, &q0)
    }

    /// Starts from an arbitrary periodic profile sampled on the grid; `c`
    /// sets the blow-up threshold `10c`.
    pub fn from_profile(grid: GridSpec, c: f64, q0: &[f64]) -> Result<Self> {
        grid.validate()?;
        if !(c >= 0.0 && c.is_finite()) {
            return Err(Error::domain(format!("step height must be finite and nonnegative, got {c}")));
        }
        let n = grid.n_points;
        if q0.len() != n {
            return Err(Error::domain(format!("profile has {} samples, grid has {n}", q0.len())));
        }
        let mut planner = RealFftPlanner::<f64>::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let scratch_len = forward.get_scratch_len().max(inverse.get_scratch_len());
        let m = n / 2 + 1;
        let base = PI / grid.half_length;
        // The Nyquist mode gets wavenumber zero and is never fed.
        let wavenumber: Vec<f64> = (0..m).map(|j| if j == n / 2 { 0.0 } else { base * j as f64 }).collect();
        let cutoff = grid.dealias_fraction * (n / 2) as f64;
        let keep = (0..m).map(|j| (j as f64) <= cutoff && j != n / 2).collect();
        let zero = Complex64::new(0.0, 0.0);
        let mut solver = MkdvSolver {
            grid,
            c,
            t: 0.0,
            steps: 0,
            spectrum: vec![zero; m],
            wavenumber,
            keep,
            forward,
            inverse,
            real: vec![0.0; n],
            freq: vec![zero; m],
            scratch: vec![zero; scratch_len],
            stages: std::array::from_fn(|_| vec![zero; m]),
            half_step: (f64::NAN, vec![zero; m]),
            current: q0.to_vec(),
            last_good: (0.0, q0.to_vec()),
        };
        solver.real.copy_from_slice(q0);
        solver
            .forward
            .process_with_scratch(&mut solver.real, &mut solver.spectrum, &mut solver.scratch)
            .map_err(|e| Error::contract(format!("forward transform failed: {e}")))?;
        Ok(solver)
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    fn to_physical(&mut self, u: &[Complex64]) {
        let n = self.grid.n_points as f64;
        self.freq.copy_from_slice(u);
        let last = self.freq.len() - 1;
        self.freq[0].im = 0.0;
        self.freq[last].im = 0.0;
        self.inverse
            .process_with_scratch(&mut self.freq, &mut self.real, &mut self.scratch)
            .expect("inverse transform of a Hermitian spectrum");
        for v in self.real.iter_mut() {
            *v /= n;
        }
    }

    pub fn field(&mut self) -> Vec<f64> {
        let u = self.spectrum.clone();
        self.to_physical(&u);
        self.real.clone()
    }

    pub fn slice(&mut self) -> FieldSlice {
        FieldSlice { t: self.t, x: self.grid.x(), q: self.field() }
    }

    /// `(∫q dx, ∫q² dx)` over the period.
    pub fn invariants(&mut self) -> (f64, f64) {
        let dx = self.grid.dx();
        let q = self.field();
        (dx * q.iter().sum::<f64>(), dx * q.iter().map(|v| v * v).sum::<f64>())
    }

    /// Writes `−ik·P[2q³]^` of stage `from` into stage `to`; with
    /// `record` the physical field is kept in `current`.
    fn nonlinear(&mut self, from: usize, to: usize, record: bool) {
        let u = std::mem::take(&mut self.stages[from]);
        self.to_physical(&u);
        self.stages[from] = u;
        if record {
            self.current.copy_from_slice(&self.real);
        }
        for v in self.real.iter_mut() {
            *v = 2.0 * *v * *v * *v;
        }
        self.forward
            .process_with_scratch(&mut self.real, &mut self.freq, &mut self.scratch)
            .expect("forward transform of a real field");
        let out = &mut self.stages[to];
        for j in 0..out.len() {
            out[j] = if self.keep[j] { Complex64::new(0.0, -self.wavenumber[j]) * self.freq[j] } else { Complex64::new(0.0, 0.0) };
        }
    }

    fn rk4_step(&mut self, h: f64) {
        if self.half_step.0 != h {
            let factors = self.wavenumber.iter().map(|&k| Complex64::from_polar(1.0, k * k * k * 0.5 * h)).collect();
            self.half_step = (h, factors);
        }
        let e = std::mem::take(&mut self.half_step.1);
        let m = self.spectrum.len();
        // stages: 0 input, 1..=4 slopes a, b, c, d
        self.stages[0].copy_from_slice(&self.spectrum);
        self.nonlinear(0, 1, true);
        for j in 0..m {
            self.stages[0][j] = e[j] * (self.spectrum[j] + 0.5 * h * self.stages[1][j]);
        }
        self.nonlinear(0, 2, false);
        for j in 0..m {
            self.stages[0][j] = e[j] * self.spectrum[j] + 0.5 * h * self.stages[2][j];
        }
        self.nonlinear(0, 3, false);
        for j in 0..m {
            self.stages[0][j] = e[j] * (e[j] * self.spectrum[j] + h * self.stages[3][j]);
        }
        self.nonlinear(0, 4, false);
        let [_, a, b, c, d] = &self.stages;
        for j in 0..m {
            let full = e[j] * e[j];
            self.spectrum[j] = full * self.spectrum[j] + h / 6.0 * (full * a[j] + 2.0 * e[j] * (b[j] + c[j]) + d[j]);
        }
        self.half_step.1 = e;
        self.steps += 1;
    }

    fn healthy(&self, q: &[f64]) -> bool {
        q.iter().all(|v| v.is_finite() && v.abs() <= 10.0 * self.c)
    }

    fn roll_back(&mut self, time: f64) -> BlowUp {
        let (good_t, good_q) = self.last_good.clone();
        self.real.copy_from_slice(&good_q);
        self.forward
            .process_with_scratch(&mut self.real, &mut self.spectrum, &mut self.scratch)
            .expect("forward transform of a real field");
        self.t = good_t;
        BlowUp { time, last_good: FieldSlice { t: good_t, x: self.grid.x(), q: good_q } }
    }

    /// Steps to time `t` with a uniform step no larger than `grid.dt`. On
    /// blow-up (`max|q| > 10c` or a non-finite value) the state is rolled back
    /// to the last good field.
    pub fn advance_to(&mut self, t: f64) -> std::result::Result<(), BlowUp> {
        let span = t - self.t;
        if span <= 0.0 {
            return Ok(());
        }
        let count = (span / self.grid.dt - 1e-9).ceil().max(1.0) as u64;
        let h = span / count as f64;
        let start = self.t;
        for i in 0..count {
            self.rk4_step(h);
            // The first stage saw the field at the start of this step.
            let before = start + h * i as f64;
            if !self.healthy(&self.current) {
                return Err(self.roll_back(before));
            }
            self.last_good = (before, self.current.clone());
            self.t = start + h * (i + 1) as f64;
        }
        let q = self.field();
        if !self.healthy(&q) {
            return Err(self.roll_back(self.t));
        }
        self.last_good = (self.t, q);
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationRun {
    pub grid: GridSpec,
    pub c: f64,
    pub eps: f64,
    pub slices: Vec<FieldSlice>,
    /// Largest relative change of `∫q dx` seen at the snapshot times.
    pub mass_drift: f64,
    /// Largest relative change of `∫q² dx`.
    pub l2_drift: f64,
    pub steps: u64,
    pub wall_time: f64,
    pub blow_up: Option<BlowUp>,
}

impl SimulationRun {
    pub fn into_result(self) -> Result<Self> {
        match &self.blow_up {
            Some(b) => Err(Error::Unstable { time: b.time }),
            None => Ok(self),
        }
    }
}

fn relative_change(now: f64, start: f64) -> f64 {
    let diff = (now - start).abs();
    if start == 0.0 {
        diff
    } else {
        diff / start.abs()
    }
}

/// Runs to `grid.t_end`, keeping slices at each of `snapshots` (sorted,
/// within `(0, t_end]`).
pub fn solve_mkdv(params: &ShockParams, grid: GridSpec, eps: f64, snapshots: &[f64]) -> Result<SimulationRun> {
    let clock = Instant::now();
    let mut times: Vec<f64> = snapshots.to_vec();
    if times.iter().any(|&t| !(t > 0.0 && t <= grid.t_end * (1.0 + 1e-12))) {
        return Err(Error::domain(format!("snapshot times must lie in (0, {}]", grid.t_end)));
    }
    times.sort_by(f64::total_cmp);
    times.dedup();
    let mut solver = MkdvSolver::new(params, grid, eps)?;
    let (mass0, l20) = solver.invariants();
    let (mut mass_drift, mut l2_drift) = (0.0_f64, 0.0_f64);
    let mut slices = Vec::with_capacity(times.len());
    let mut blow_up = None;
    let mut stops = times.clone();
    if stops.last().map_or(true, |&t| t < grid.t_end) {
        stops.push(grid.t_end);
    }
    for &t in &stops {
        if let Err(b) = solver.advance_to(t) {
            blow_up = Some(b);
            break;
        }
        let (mass, l2) = solver.invariants();
        mass_drift = mass_drift.max(relative_change(mass, mass0));
        l2_drift = l2_drift.max(relative_change(l2, l20));
        if times.contains(&t) {
            slices.push(solver.slice());
        }
    }
    Ok(SimulationRun {
        grid,
        c: params.c,
        eps,
        slices,
        mass_drift,
        l2_drift,
        steps: solver.steps(),
        wall_time: clock.elapsed().as_secs_f64(),
        blow_up,
    })
}
