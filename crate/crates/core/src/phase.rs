//! Zero-genus phase functions for the plateau region `ξ < −c²/2`: the cubic
//! phase `θ`, the replacement phase `g_c`, the scalar functions `ν`, `χ`,
//! `δ`, the scalar solution `F`, and sign grids of the phases.

use std::cell::Cell;
use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::contour::{cauchy_segment, Side};
use crate::error::{Error, Result};
use crate::scattering::{
    a_real, coefficients_from_kappa, kappa_raw, r_abs_sq_real, root_with_cut, x_branch,
    BranchValue, CutPoint, ShockParams,
};
use crate::specfun::{integrate_semi_infinite, integrate_with_breaks, Singularity};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// `θ(k, ξ) = 4k³ + 12kξ`.
pub fn theta_phase(k: Complex64, xi: f64) -> Complex64 {
    4.0 * k * k * k + 12.0 * k * xi
}

/// `g_c(k, ξ) = (4k² − 2c² + 12ξ)·X(k)`.
pub fn g_c(p: CutPoint, xi: f64, params: &ShockParams) -> Result<BranchValue> {
    let x = x_branch(p, params)?;
    let k = p.k;
    let poly = 4.0 * k * k - 2.0 * params.c * params.c + 12.0 * xi;
    Ok(BranchValue { value: poly * x.value, degenerate: x.degenerate })
}

/// `λ(ξ) = √(−ξ − c²/2)`, the nonzero stationary points of `g_c` are `±λ`.
pub fn lambda_stationary(xi: f64, params: &ShockParams) -> Result<f64> {
    params.validate()?;
    let arg = -xi - 0.5 * params.c * params.c;
    if !(arg >= 0.0) {
        return Err(Error::domain(format!(
            "lambda(xi) needs xi <= -c^2/2 = {}, got {xi}",
            -0.5 * params.c * params.c
        )));
    }
    Ok(arg.sqrt())
}

fn r_abs_sq(s: f64, c: f64) -> f64 {
    // |r(0±)| = 1 from either side; the formula would land on the cut.
    if s == 0.0 {
        1.0
    } else {
        r_abs_sq_real(s, c)
    }
}

/// `ν(ξ) = (1/2π)·ln(1 + |r(λ(ξ))|²)`.
pub fn nu(xi: f64, params: &ShockParams) -> Result<f64> {
    let lambda = lambda_stationary(xi, params)?;
    Ok((r_abs_sq(lambda, params.c)).ln_1p() / (2.0 * PI))
}

/// The plateau-region scalar functions at one fixed `ξ`.
#[derive(Debug, Clone, Copy)]
pub struct PlateauPhase {
    pub params: ShockParams,
    pub xi: f64,
    pub lambda: f64,
    pub nu: f64,
    r_lambda_sq: f64,
}

impl PlateauPhase {
    pub fn new(xi: f64, params: &ShockParams) -> Result<Self> {
        let lambda = lambda_stationary(xi, params)?;
        let r_lambda_sq = r_abs_sq(lambda, params.c);
        Ok(PlateauPhase {
            params: *params,
            xi,
            lambda,
            nu: r_lambda_sq.ln_1p() / (2.0 * PI),
            r_lambda_sq,
        })
    }

    fn on_segment(&self, k: Complex64) -> bool {
        k.im == 0.0 && k.re.abs() < self.lambda
    }

    fn check_side(&self, k: Complex64, side: Side) -> Result<()> {
        match (side, self.on_segment(k)) {
            (Side::Off, true) => Err(Error::contract(format!(
                "k = {k} lies on (-lambda, lambda); a side tag is required"
            ))),
            (Side::Plus | Side::Minus, false) => Err(Error::contract(format!(
                "side {side:?} given for k = {k} off the segment (-lambda, lambda)"
            ))),
            _ => Ok(()),
        }
    }

    /// `log χ(k) = (1/2πi)∫_{−λ}^{λ} ln((1+|r(s)|²)/(1+|r(λ)|²)) ds/(s − k)`.
    /// `Plus` is the boundary value from above.
    pub fn log_chi(&self, k: Complex64, side: Side) -> Result<Complex64> {
        self.check_side(k, side)?;
        if self.lambda == 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let lam = self.lambda;
        let c = self.params.c;
        let norm = self.r_lambda_sq.ln_1p();
        let density = |p: f64| {
            let s = -lam + 2.0 * lam * p;
            Complex64::new(r_abs_sq(s, c).ln_1p() - norm, 0.0)
        };
        let integral = cauchy_segment(
            density,
            Complex64::new(-lam, 0.0),
            Complex64::new(lam, 0.0),
            k,
            side,
            &[0.5],
            &self.params.quad,
        )?;
        Ok(integral / (2.0 * PI * I))
    }

    pub fn chi(&self, k: Complex64, side: Side) -> Result<Complex64> {
        self.log_chi(k, side).map(|l| l.exp())
    }

    /// `log δ(k) = −iν·log((k − λ)/(k + λ)) + log χ(k)`, cut along `[−λ, λ]`.
    pub fn log_delta(&self, k: Complex64, side: Side) -> Result<Complex64> {
        let log_chi = self.log_chi(k, side)?;
        if self.lambda == 0.0 {
            return Ok(log_chi);
        }
        let lam = self.lambda;
        let log_ratio = match side {
            Side::Off => ((k - lam) / (k + lam)).ln(),
            _ => Complex64::new(((lam - k.re) / (lam + k.re)).ln(), side.sign() * PI),
        };
        Ok(-I * self.nu * log_ratio + log_chi)
    }

    pub fn delta(&self, k: Complex64, side: Side) -> Result<Complex64> {
        self.log_delta(k, side).map(|l| l.exp())
    }

    /// `∫_ℝ log a²(s) / ((s − k) X(s)) ds` for `k` off the real axis.
    fn real_line_cauchy(&self, k: Complex64) -> Result<Complex64> {
        let c = self.params.c;
        // The density is odd, so fold onto s > 0: ∫₀^∞ ψ(s)·2s/(s² − k²) ds.
        let kk = if k.re < 0.0 { -k } else { k };
        let psi = |s: f64| (a_real(s, c) * a_real(s, c)).ln() / (s * s + c * c).sqrt();
        let reach = 2.0 * kk.norm() + 10.0 * c;
        let head = cauchy_segment(
            |p: f64| {
                let s = reach * p;
                psi(s) * 2.0 * s / (s + kk)
            },
            Complex64::new(0.0, 0.0),
            Complex64::new(reach, 0.0),
            kk,
            Side::Off,
            &[c / reach],
            &self.params.quad,
        )?;
        let tail = integrate_semi_infinite(
            |s: f64| psi(s) * 2.0 * s / (s * s - kk * kk),
            reach,
            &self.params.quad,
        )?;
        Ok(head + tail)
    }

    /// `∫_{ic}^{−ic} log δ⁻²(s) / (X_+(s)(s − k)) ds` along the downward cut.
    fn cut_cauchy(&self, k: Complex64, side: Side) -> Result<Complex64> {
        let c = self.params.c;
        let failure = Cell::new(None);
        let density = |p: f64| {
            let y = c - 2.0 * c * p;
            let x_plus = (c * c - y * y).max(0.0).sqrt();
            match self.log_delta(Complex64::new(0.0, y), Side::Off) {
                Ok(ld) => -2.0 * ld / x_plus,
                Err(_) => {
                    failure.set(Some(y));
                    Complex64::new(0.0, 0.0)
                }
            }
        };
        let spec = self.params.quad.with_singularity(Singularity::Both);
        let value = cauchy_segment(
            density,
            Complex64::new(0.0, c),
            Complex64::new(0.0, -c),
            k,
            side,
            &[0.5],
            &spec,
        )?;
        if let Some(y) = failure.get() {
            return Err(Error::contract(format!("log delta undefined at cut point {y}i")));
        }
        Ok(value)
    }

    /// `F_aux(k) = exp{X(k)·G(k)}` where `G` is `1/2πi` times the sum of the
    /// real-line and cut Cauchy integrals.
    pub fn f_aux(&self, p: CutPoint) -> Result<Complex64> {
        let c = self.params.c;
        p.validate(c)?;
        if p.k.im == 0.0 {
            return Err(Error::contract(format!("F is not defined on the real axis (k = {})", p.k)));
        }
        let x = x_branch(p, &self.params)?;
        let g = (self.real_line_cauchy(p.k)? + self.cut_cauchy(p.k, p.side)?) / (2.0 * PI * I);
        Ok((x.value * g).exp())
    }

    /// `F = F_aux / a` in the upper half plane and `a·F_aux` in the lower.
    pub fn f_plateau(&self, p: CutPoint) -> Result<Complex64> {
        let aux = self.f_aux(p)?;
        let a = coefficients_from_kappa(kappa_raw(p.k, self.params.c, p.side)).a;
        Ok(if p.k.im > 0.0 { aux / a } else { aux * a })
    }

    /// `F_+ F_−` should equal this on the cut: `δ⁻²/(a_+a_−)` above the real
    /// axis and `a_+a_−δ⁻²` below.
    pub fn f_jump_target(&self, y: f64) -> Result<Complex64> {
        let k = Complex64::new(0.0, y);
        let c = self.params.c;
        let a_plus = coefficients_from_kappa(kappa_raw(k, c, Side::Plus)).a;
        let a_minus = coefficients_from_kappa(kappa_raw(k, c, Side::Minus)).a;
        let delta_m2 = (-2.0 * self.log_delta(k, Side::Off)?).exp();
        Ok(if y > 0.0 { delta_m2 / (a_plus * a_minus) } else { a_plus * a_minus * delta_m2 })
    }

    /// `∫_ℝ log a²(s)/X(s) ds`, integrated directly over both half-lines.
    pub fn real_symmetry_integral(&self) -> Result<f64> {
        let c = self.params.c;
        let f = |s: f64| {
            let x = root_with_cut(Complex64::new(s, 0.0), c, Side::Off).re;
            (a_real(s, c) * a_real(s, c)).ln() / x
        };
        let right = integrate_semi_infinite(f, 0.0, &self.params.quad)?;
        let left = integrate_semi_infinite(|u: f64| f(-u), 0.0, &self.params.quad)?;
        Ok(right + left)
    }

    /// `∫_{−ic}^{ic} log δ⁻²(s)/X_+(s) ds`.
    pub fn cut_symmetry_integral(&self) -> Result<Complex64> {
        let c = self.params.c;
        let spec = self.params.quad.with_singularity(Singularity::Both);
        let failure = Cell::new(None);
        let value = integrate_with_breaks(
            |y: f64| {
                let x_plus = (c * c - y * y).max(0.0).sqrt();
                match self.log_delta(Complex64::new(0.0, y), Side::Off) {
                    Ok(ld) => -2.0 * ld / x_plus * I,
                    Err(_) => {
                        failure.set(Some(y));
                        Complex64::new(0.0, 0.0)
                    }
                }
            },
            -c,
            c,
            &[0.0],
            &spec,
        )?;
        if let Some(y) = failure.get() {
            return Err(Error::contract(format!("log delta undefined at cut point {y}i")));
        }
        Ok(value)
    }
}

/// Which phase a sign grid samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseKind {
    Theta,
    Gc,
    Gell,
}

/// Rectangle and resolution of a sign grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec2d {
    pub re_range: (f64, f64),
    pub im_range: (f64, f64),
    pub nx: usize,
    pub ny: usize,
    /// Relative zero tolerance: `|Im φ| ≤ zero_tol·max(|φ|, 1)` counts as zero.
    pub zero_tol: f64,
}

impl GridSpec2d {
    pub fn new(re_range: (f64, f64), im_range: (f64, f64), nx: usize, ny: usize) -> Self {
        GridSpec2d { re_range, im_range, nx, ny, zero_tol: 1e-9 }
    }

    pub fn node(&self, ix: usize, iy: usize) -> Complex64 {
        let lerp = |(lo, hi): (f64, f64), i: usize, n: usize| lo + (hi - lo) * i as f64 / (n - 1) as f64;
        Complex64::new(lerp(self.re_range, ix, self.nx), lerp(self.im_range, iy, self.ny))
    }
}

/// Signs of the imaginary part of a phase on a rectangular grid. Row `iy`
/// holds the nodes with imaginary part `im_min + iy·Δy`.
#[derive(Debug, Clone, PartialEq)]
pub struct SignGrid {
    pub spec: GridSpec2d,
    pub values: Vec<Vec<i8>>,
}

impl SignGrid {
    pub fn to_csv(&self) -> String {
        let s = &self.spec;
        let mut out = String::from("re_min,re_max,im_min,im_max,nx,ny\n");
        writeln!(
            out,
            "{:.16e},{:.16e},{:.16e},{:.16e},{},{}",
            s.re_range.0, s.re_range.1, s.im_range.0, s.im_range.1, s.nx, s.ny
        )
        .unwrap();
        for row in &self.values {
            let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }
}

fn sign_of(phase: Complex64, zero_tol: f64) -> i8 {
    if phase.im.abs() <= zero_tol * phase.norm().max(1.0) {
        0
    } else if phase.im > 0.0 {
        1
    } else {
        -1
    }
}

/// Sign grid of `Im φ(k)` for any phase. `phase` must accept every node,
/// including nodes on cuts, where it should return a boundary value.
pub fn sign_grid_with<F>(spec: GridSpec2d, phase: F) -> Result<SignGrid>
where
    F: Fn(Complex64) -> Result<Complex64> + Sync,
{
    if spec.nx < 2 || spec.ny < 2 {
        return Err(Error::domain("sign grid resolution must be at least 2x2"));
    }
    let values = (0..spec.ny)
        .into_par_iter()
        .map(|iy| {
            (0..spec.nx)
                .map(|ix| phase(spec.node(ix, iy)).map(|v| sign_of(v, spec.zero_tol)))
                .collect::<Result<Vec<i8>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SignGrid { spec, values })
}

/// `g_c` evaluated anywhere, taking the `Plus` boundary value on the cut.
pub fn g_c_anywhere(k: Complex64, xi: f64, params: &ShockParams) -> Result<Complex64> {
    let side = if k.re == 0.0 && k.im.abs() < params.c { Side::Plus } else { Side::Off };
    g_c(CutPoint { k, side }, xi, params).map(|b| b.value)
}

/// Sign grid of `Im θ` or `Im g_c`. The genus-one phase lives in
/// [`crate::modulation::sign_grid_elliptic`].
pub fn signature_grid(
    which: PhaseKind,
    xi: f64,
    spec: GridSpec2d,
    params: &ShockParams,
) -> Result<SignGrid> {
    match which {
        PhaseKind::Theta => sign_grid_with(spec, |k| Ok(theta_phase(k, xi))),
        PhaseKind::Gc => {
            if xi > -0.5 * params.c * params.c {
                return Err(Error::domain("g_c sign grid requires xi <= -c^2/2"));
            }
            sign_grid_with(spec, |k| g_c_anywhere(k, xi, params))
        }
        PhaseKind::Gell => crate::modulation::sign_grid_elliptic(xi, spec, params),
    }
}
