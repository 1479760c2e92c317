//! Genus-one theta function in the convention
//!
//! ```text
//! Θ(z, τ) = Σ_{m ∈ ℤ} exp(½ τ m² + z m),   τ < 0 real,
//! ```
//!
//! which is 2πi-periodic in `z` and quasi-periodic under `z → z + τ`:
//! `Θ(z + τ) = Θ(z) exp(−τ/2 − z)`.
//!
//! | this module          | classical                           |
//! |----------------------|-------------------------------------|
//! | `Θ(z, τ)`            | `ϑ₃(v, q)` with `q = e^{τ/2}`, `z = 2iv` |
//! | `Θ(z + πi, τ)`       | `ϑ₄(v, q)`                          |
//! | `τ = −2πK'(m)/K(m)`  | nome of parameter `m`               |
//!
//! Two series are available: the direct one, fast for `τ ≤ −2π`, and the
//! Poisson-resummed one
//! `Θ(z, τ) = √(2π/−τ) · exp(−z²/2τ) · Θ(2πiz/τ, 4π²/τ)`, fast for `τ > −2π`.
//! [`theta`] picks between them automatically.
//!
//! Values can overflow for large `|Re z|`, so every evaluator also has a
//! scaled form returning `(mantissa, log_scale)` with `Θ = mantissa·e^{log_scale}`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaParams {
    pub tau: f64,
    pub truncation_tol: f64,
}

impl ThetaParams {
    pub fn new(tau: f64) -> Result<Self> {
        let p = ThetaParams { tau, truncation_tol: 1e-17 };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau < 0.0) || !self.tau.is_finite() {
            return Err(Error::domain(format!("theta requires tau < 0, got {}", self.tau)));
        }
        if !(self.truncation_tol > 0.0) {
            return Err(Error::domain("theta truncation tolerance must be positive"));
        }
        Ok(())
    }

    /// Parameter of the Poisson-resummed series, `4π²/τ`.
    pub fn dual_tau(&self) -> f64 {
        4.0 * PI * PI / self.tau
    }
}

/// A theta value split as `mantissa · exp(log_scale)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledTheta {
    pub mantissa: Complex64,
    pub log_scale: f64,
    pub terms: usize,
}

impl ScaledTheta {
    pub fn value(&self) -> Complex64 {
        self.mantissa * self.log_scale.exp()
    }

    /// `self / other` without forming either value.
    pub fn ratio(&self, other: &ScaledTheta) -> Complex64 {
        self.mantissa / other.mantissa * (self.log_scale - other.log_scale).exp()
    }
}

fn reduce_angle(y: f64) -> f64 {
    let two_pi = 2.0 * PI;
    y - two_pi * (y / two_pi).round()
}

/// Direct series summed outward from its dominant term.
pub fn theta_direct_scaled(z: Complex64, params: &ThetaParams) -> Result<ScaledTheta> {
    params.validate()?;
    let tau = params.tau;
    let x = z.re;
    // Only y mod 2π matters since m is an integer.
    let y = reduce_angle(z.im);
    let exponent = |m: f64| 0.5 * tau * m * m + x * m;
    let center = (-x / tau).round();
    let peak = exponent(center);
    let cutoff = params.truncation_tol.ln();

    let mut sum = Complex64::from_polar(1.0, y * center);
    let mut terms = 1;
    for direction in [1.0, -1.0] {
        let mut j = 1.0;
        loop {
            let m = center + direction * j;
            let rel = exponent(m) - peak;
            if rel < cutoff {
                break;
            }
            sum += Complex64::from_polar(rel.exp(), y * m);
            terms += 1;
            j += 1.0;
        }
    }
    Ok(ScaledTheta { mantissa: sum, log_scale: peak, terms })
}

/// Poisson-resummed evaluation of the same function.
pub fn theta_poisson_scaled(z: Complex64, params: &ThetaParams) -> Result<ScaledTheta> {
    params.validate()?;
    let tau = params.tau;
    // Reduce Im z first; Θ is exactly 2πi-periodic and this keeps the
    // Gaussian prefactor well conditioned.
    let z = Complex64::new(z.re, reduce_angle(z.im));
    let dual = ThetaParams { tau: params.dual_tau(), truncation_tol: params.truncation_tol };
    let w = Complex64::new(0.0, 2.0 * PI) * z / tau;
    let inner = theta_direct_scaled(w, &dual)?;
    let gauss = -z * z / (2.0 * tau);
    let prefactor = (2.0 * PI / -tau).sqrt().ln();
    Ok(ScaledTheta {
        mantissa: inner.mantissa * Complex64::from_polar(1.0, gauss.im),
        log_scale: inner.log_scale + gauss.re + prefactor,
        terms: inner.terms,
    })
}

/// Scaled theta with automatic choice of series: direct for `τ ≤ −2π`,
/// Poisson-resummed otherwise.
pub fn theta_scaled(z: Complex64, params: &ThetaParams) -> Result<ScaledTheta> {
    if params.tau <= -2.0 * PI {
        theta_direct_scaled(z, params)
    } else {
        theta_poisson_scaled(z, params)
    }
}

pub fn theta(z: Complex64, params: &ThetaParams) -> Result<Complex64> {
    theta_scaled(z, params).map(|s| s.value())
}

pub fn theta_direct(z: Complex64, params: &ThetaParams) -> Result<Complex64> {
    theta_direct_scaled(z, params).map(|s| s.value())
}

pub fn theta_poisson(z: Complex64, params: &ThetaParams) -> Result<Complex64> {
    theta_poisson_scaled(z, params).map(|s| s.value())
}
