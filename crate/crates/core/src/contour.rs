//! Oriented segments, side tags for boundary values, and Cauchy integrals
//! `∫ ψ(s)/(s − k) ds` along a segment that stay accurate as `k` approaches
//! (or sits on) the segment.

use num_complex::Complex64;

use crate::error::Result;
use crate::specfun::{integrate_with_breaks, QuadratureSpec, Singularity};

/// Side of an oriented contour from which a boundary value is taken.
///
/// `Plus` is the left side with respect to the orientation. For the
/// downward-oriented cut `[ic, −ic]` that is `Re k > 0`; for the real axis
/// oriented left to right it is `Im k > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Side {
    Plus,
    Minus,
    #[default]
    Off,
}

impl Side {
    /// `+1` for `Plus`, `-1` for `Minus`, `0` for `Off`.
    pub fn sign(self) -> f64 {
        match self {
            Side::Plus => 1.0,
            Side::Minus => -1.0,
            Side::Off => 0.0,
        }
    }

    pub fn flip(self) -> Side {
        match self {
            Side::Plus => Side::Minus,
            Side::Minus => Side::Plus,
            Side::Off => Side::Off,
        }
    }
}

/// `∫_{z0}^{z1} ψ(s) / (s − k) ds` with `ψ` given as a function of the
/// segment parameter `p ∈ [0, 1]`, `s = z0 + p (z1 − z0)`.
///
/// When the projection of `k` falls inside the segment the value `ψ(p*)` is
/// subtracted and its contribution added back in closed form. With
/// `side = Plus/Minus`, `k` must lie on the segment and the corresponding
/// Plemelj boundary value is returned. `breaks` are interior parameter
/// values where `ψ` has kinks or jumps; `spec.singularity` describes the
/// segment ends.
pub fn cauchy_segment<F: Fn(f64) -> Complex64>(
    psi: F,
    z0: Complex64,
    z1: Complex64,
    k: Complex64,
    side: Side,
    breaks: &[f64],
    spec: &QuadratureSpec,
) -> Result<Complex64> {
    let pk = (k - z0) / (z1 - z0);
    let on_segment = side != Side::Off;
    let pole = if on_segment { Complex64::new(pk.re, 0.0) } else { pk };
    let p_star = pk.re;
    let inside = p_star > 0.0 && p_star < 1.0;

    if !inside {
        let integrand = |p: f64| psi(p) / (p - pole);
        return integrate_with_breaks(integrand, 0.0, 1.0, breaks, spec);
    }

    let psi_star = psi(p_star);
    let integrand = |p: f64| {
        let d = p - pole;
        if d.norm() == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            (psi(p) - psi_star) / d
        }
    };
    let mut all_breaks = breaks.to_vec();
    all_breaks.push(p_star);
    let regular = integrate_with_breaks(integrand, 0.0, 1.0, &all_breaks, spec)?;
    let log_term = if on_segment {
        Complex64::new(((1.0 - p_star) / p_star).ln(), side.sign() * std::f64::consts::PI)
    } else {
        (Complex64::new(1.0, 0.0) - pk).ln() - (-pk).ln()
    };
    Ok(regular + psi_star * log_term)
}

/// Convenience: singularity flags for a segment whose ends carry `1/√`
/// behaviour.
pub fn endpoint_flags(left: bool, right: bool) -> Singularity {
    Singularity::from_flags(left, right)
}
