//! Spectral data of the pure step `q(x, 0) = c·1{x < 0}`: the branch functions
//! `X(k) = √(k² + c²)` and `κ(k) = ⁴√((k − ic)/(k + ic))`, and the scattering
//! coefficients built from them.
//!
//! Both branch functions are cut along the segment `[−ic, ic]`, normalised by
//! `X(1) > 0` and `κ(∞) = 1`. Boundary values on the cut are selected with
//! [`Side`]: `Plus` is the limit from `Re k > 0`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use crate::contour::Side;
use crate::error::{Error, Result};
use crate::specfun::QuadratureSpec;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShockParams {
    /// Step height.
    pub c: f64,
    #[serde(skip, default)]
    pub quad: QuadratureSpec,
}

impl ShockParams {
    pub fn new(c: f64) -> Result<Self> {
        let p = ShockParams { c, quad: QuadratureSpec::default() };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0) || !self.c.is_finite() {
            return Err(Error::domain(format!("step height c must be positive, got {}", self.c)));
        }
        Ok(())
    }
}

/// A spectral point, possibly tagged with the side of the cut `[ic, −ic]`
/// from which a boundary value is taken.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutPoint {
    pub k: Complex64,
    pub side: Side,
}

impl CutPoint {
    pub fn off(k: Complex64) -> Self {
        CutPoint { k, side: Side::Off }
    }

    /// The point `iy` of the cut, seen from `side`.
    pub fn on_cut(y: f64, side: Side) -> Self {
        CutPoint { k: Complex64::new(0.0, y), side }
    }

    pub fn new(k: Complex64, side: Side, c: f64) -> Result<Self> {
        let p = CutPoint { k, side };
        p.validate(c)?;
        Ok(p)
    }

    /// A side tag is only meaningful on the closed cut.
    pub fn validate(&self, c: f64) -> Result<()> {
        if self.side != Side::Off && !(self.k.re == 0.0 && self.k.im.abs() <= c) {
            return Err(Error::contract(format!(
                "side {:?} given for k = {} which is not on the cut [-{c}i, {c}i]",
                self.side, self.k
            )));
        }
        Ok(())
    }
}

/// A branch-function value; `degenerate` marks evaluation at a branch point,
/// where the value is the (possibly zero or infinite) limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchValue {
    pub value: Complex64,
    pub degenerate: bool,
}

impl BranchValue {
    fn regular(value: Complex64) -> Self {
        BranchValue { value, degenerate: false }
    }
}

/// `Log((k − ih)/(k + ih))`, cut along `[−ih, ih]`, for a point known not to
/// be a branch point. On the cut the side tag picks `∓iπ`.
pub(crate) fn log_ratio(k: Complex64, h: f64, side: Side) -> Complex64 {
    match side {
        Side::Off => ((k - I * h) / (k + I * h)).ln(),
        _ => {
            let y = k.im;
            Complex64::new(((h - y) / (h + y)).ln(), -side.sign() * PI)
        }
    }
}

/// `√(k² + h²)` on the sheet with `√ ~ k` at infinity, cut along `[−ih, ih]`.
pub(crate) fn root_with_cut(k: Complex64, h: f64, side: Side) -> Complex64 {
    root_from_factors(k - I * h, k + I * h, side)
}

/// Same as [`root_with_cut`] given the factors `k − ih` and `k + ih`, which
/// callers can supply without cancellation near a branch point.
pub(crate) fn root_from_factors(minus: Complex64, plus: Complex64, side: Side) -> Complex64 {
    if side != Side::Off {
        return Complex64::new(side.sign() * (minus * plus).re.max(0.0).sqrt(), 0.0);
    }
    plus * (0.5 * (minus / plus).ln()).exp()
}

fn on_closed_cut(k: Complex64, c: f64) -> bool {
    k.re == 0.0 && k.im.abs() <= c
}

fn is_branch_point(k: Complex64, c: f64) -> bool {
    k.re == 0.0 && k.im.abs() == c
}

fn check(p: &CutPoint, params: &ShockParams) -> Result<()> {
    params.validate()?;
    p.validate(params.c)?;
    if p.side == Side::Off && on_closed_cut(p.k, params.c) && !is_branch_point(p.k, params.c) {
        return Err(Error::contract(format!(
            "k = {} lies on the cut; a side tag is required",
            p.k
        )));
    }
    Ok(())
}

/// `X(k) = √(k² + c²)` with `X(1) > 0`.
pub fn x_branch(p: CutPoint, params: &ShockParams) -> Result<BranchValue> {
    check(&p, params)?;
    if is_branch_point(p.k, params.c) {
        return Ok(BranchValue { value: Complex64::new(0.0, 0.0), degenerate: true });
    }
    Ok(BranchValue::regular(root_with_cut(p.k, params.c, p.side)))
}

/// `κ(k) = ⁴√((k − ic)/(k + ic))` with `κ(∞) = 1`.
pub fn kappa(p: CutPoint, params: &ShockParams) -> Result<BranchValue> {
    check(&p, params)?;
    if is_branch_point(p.k, params.c) {
        let value = if p.k.im > 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(f64::INFINITY, 0.0)
        };
        return Ok(BranchValue { value, degenerate: true });
    }
    Ok(BranchValue::regular(kappa_raw(p.k, params.c, p.side)))
}

pub(crate) fn kappa_raw(k: Complex64, c: f64, side: Side) -> Complex64 {
    (0.25 * log_ratio(k, c, side)).exp()
}

/// The scattering coefficients `(a, b, r)` at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coefficients {
    pub a: Complex64,
    pub b: Complex64,
    pub r: Complex64,
}

pub(crate) fn coefficients_from_kappa(kap: Complex64) -> Coefficients {
    let inv = 1.0 / kap;
    let k2 = kap * kap;
    Coefficients {
        a: 0.5 * (kap + inv),
        b: 0.5 * (kap - inv),
        r: (k2 - 1.0) / (k2 + 1.0),
    }
}

pub fn coefficients(p: CutPoint, params: &ShockParams) -> Result<Coefficients> {
    let kap = kappa(p, params)?;
    if kap.degenerate {
        return Err(Error::domain(format!("scattering coefficients are singular at k = {}", p.k)));
    }
    Ok(coefficients_from_kappa(kap.value))
}

pub fn a_coeff(p: CutPoint, params: &ShockParams) -> Result<Complex64> {
    coefficients(p, params).map(|c| c.a)
}

pub fn b_coeff(p: CutPoint, params: &ShockParams) -> Result<Complex64> {
    coefficients(p, params).map(|c| c.b)
}

pub fn r_coeff(p: CutPoint, params: &ShockParams) -> Result<Complex64> {
    coefficients(p, params).map(|c| c.r)
}

/// `a(s)` for real `s`, which is real and positive.
pub fn a_real(s: f64, c: f64) -> f64 {
    coefficients_from_kappa(kappa_raw(Complex64::new(s, 0.0), c, Side::Off)).a.re
}

/// `|r(s)|²` for real `s`.
pub fn r_abs_sq_real(s: f64, c: f64) -> f64 {
    coefficients_from_kappa(kappa_raw(Complex64::new(s, 0.0), c, Side::Off)).r.norm_sqr()
}

/// `f(k) = i / (a_−(k) a_+(k))` on the cut. Requires a side tag (the value is
/// the same from both sides).
pub fn f_jump(p: CutPoint, params: &ShockParams) -> Result<Complex64> {
    if p.side == Side::Off {
        return Err(Error::contract("f_jump is defined on the cut only; side must be Plus or Minus"));
    }
    check(&p, params)?;
    let plus = a_coeff(CutPoint { side: Side::Plus, ..p }, params)?;
    let minus = a_coeff(CutPoint { side: Side::Minus, ..p }, params)?;
    Ok(I / (plus * minus))
}

/// `f̂(k) = 4/(κ² − κ⁻²) = 2iX(k)/c`.
pub fn f_hat(p: CutPoint, params: &ShockParams) -> Result<Complex64> {
    let x = x_branch(p, params)?;
    Ok(2.0 * I * x.value / params.c)
}
