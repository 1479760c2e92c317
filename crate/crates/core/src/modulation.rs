//! Genus-one quantities of the elliptic region `−c²/2 < ξ < c²/3`.
//!
//! The branch point `d(ξ)` and the double zero `μ(ξ)` of `dg` solve
//!
//! ```text
//! F(μ, d) = ∫₀¹ (μ² − λ²d²) √((1 − λ²)/(c² − λ²d²)) dλ = 0,
//! c²/2 + ξ = μ² + d²/2.
//! ```
//!
//! The surface is `w² = (k² + c²)(k² + d²)` with cuts `[id, ic]` and
//! `[−ic, −id]`, first sheet `w(0) = cd > 0`. Abelian integrals start at `ic`
//! and run along paths that never cross the imaginary segment `(−ic, ic)`;
//! points on that segment carry a [`Side`] tag (`Plus` is the limit from
//! `Re k > 0`).
//!
//! Cycles: the a-cycle encircles the gap `(−id, id)` and the b-cycle the
//! upper cut, so that
//!
//! ```text
//! a-period = −4i ∫₀^d dy/√((c² − y²)(d² − y²)),
//! b-period =  2  ∫_d^c dy/√((c² − y²)(y² − d²)),
//! τ = 2πi · b-period / a-period = −2π K(1 − m)/K(m),  m = 4cd/(c + d)².
//! ```

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::sync::Mutex;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::contour::Side;
use crate::error::{Edge, Error, Result};
use crate::phase::{sign_grid_with, theta_phase, GridSpec2d, SignGrid};
use crate::scattering::{a_real, root_from_factors, BranchValue, ShockParams};
use crate::specfun::{integrate, integrate_semi_infinite, QuadratureSpec, Singularity};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

fn check_d(d: f64, c: f64, allow_c: bool) -> Result<()> {
    let upper_ok = if allow_c { d <= c } else { d < c };
    if !(d >= 0.0 && upper_ok) {
        return Err(Error::domain(format!("branch point d = {d} must lie in [0, {c}{}", if allow_c { "]" } else { ")" })));
    }
    Ok(())
}

/// `F(μ, d)`; strictly increasing in `μ`, strictly decreasing in `d`.
pub fn f_constraint(mu: f64, d: f64, params: &ShockParams) -> Result<f64> {
    let c = params.c;
    check_d(d, c, false)?;
    if !(mu >= 0.0) {
        return Err(Error::domain(format!("mu = {mu} must be nonnegative")));
    }
    let spec = params.quad.with_singularity(Singularity::Right);
    integrate(
        |l: f64| (mu * mu - l * l * d * d) * ((1.0 - l * l) / (c * c - l * l * d * d)).sqrt(),
        0.0,
        1.0,
        &spec,
    )
}

/// `μ²(d)`, the ratio of the two moments of `F`.
pub fn mu_sq_of_d(d: f64, params: &ShockParams) -> Result<f64> {
    let c = params.c;
    check_d(d, c, true)?;
    if d == 0.0 {
        return Ok(0.0);
    }
    if d == c {
        return Ok(c * c / 3.0);
    }
    let spec = params.quad.with_singularity(Singularity::Right);
    let weight = |l: f64| ((1.0 - l * l) / (c * c - l * l * d * d)).sqrt();
    let num = integrate(|l: f64| l * l * weight(l), 0.0, 1.0, &spec)?;
    let den = integrate(weight, 0.0, 1.0, &spec)?;
    Ok(d * d * num / den)
}

pub fn mu_of_d(d: f64, params: &ShockParams) -> Result<f64> {
    mu_sq_of_d(d, params).map(f64::sqrt)
}

fn check_xi(xi: f64, c: f64) -> Result<()> {
    let lower = -0.5 * c * c;
    let upper = c * c / 3.0;
    if xi > lower && xi < upper {
        return Ok(());
    }
    let edge = if xi <= lower || xi.is_nan() { Edge::Lower } else { Edge::Upper };
    Err(Error::OutOfRange { what: "xi", value: xi, lower, upper, edge })
}

/// `d(ξ)` and `μ(ξ)`: the unique root of `μ²(d) + d²/2 = c²/2 + ξ` in
/// `(0, c)`, by Illinois-modified regula falsi on a guaranteed bracket.
pub fn d_of_xi(xi: f64, params: &ShockParams) -> Result<(f64, f64)> {
    params.validate()?;
    let c = params.c;
    check_xi(xi, c)?;
    let target = 0.5 * c * c + xi;
    let h = |d: f64| -> Result<f64> { Ok(mu_sq_of_d(d, params)? + 0.5 * d * d - target) };
    let (mut lo, mut hi) = (0.0, c);
    let (mut f_lo, mut f_hi) = (h(lo)?, h(hi)?);
    if !(f_lo < 0.0 && f_hi > 0.0) {
        return Err(Error::RootFinding(format!("d(xi) bracket lost at xi = {xi}")));
    }
    let tol = 1e-12 * c;
    let mut side = 0i8;
    for _ in 0..200 {
        if hi - lo <= tol {
            break;
        }
        let mut x = (lo * f_hi - hi * f_lo) / (f_hi - f_lo);
        if !(x > lo && x < hi) {
            x = 0.5 * (lo + hi);
        }
        let fx = h(x)?;
        if fx == 0.0 {
            lo = x;
            hi = x;
            break;
        }
        if fx < 0.0 {
            lo = x;
            f_lo = fx;
            if side == -1 {
                f_hi *= 0.5;
            }
            side = -1;
        } else {
            hi = x;
            f_hi = fx;
            if side == 1 {
                f_lo *= 0.5;
            }
            side = 1;
        }
    }
    if hi - lo > tol {
        return Err(Error::RootFinding(format!("d(xi) did not converge at xi = {xi}: [{lo}, {hi}]")));
    }
    let d = 0.5 * (lo + hi);
    let mu_sq = mu_sq_of_d(d, params)?;
    let residual = target - mu_sq - 0.5 * d * d;
    if residual.abs() > 1e-10 * c * c {
        return Err(Error::RootFinding(format!("d(xi) residual {residual} too large at xi = {xi}")));
    }
    Ok((d, mu_sq.sqrt()))
}

/// Sheet of the surface `w² = (k² + c²)(k² + d²)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Sheet {
    #[default]
    First,
    Second,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceSpec {
    pub c: f64,
    pub d: f64,
    pub sheet: Sheet,
}

impl SurfaceSpec {
    pub fn new(c: f64, d: f64) -> Result<Self> {
        let s = SurfaceSpec { c, d, sheet: Sheet::First };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.d > 0.0 && self.d < self.c) {
            return Err(Error::domain(format!(
                "surface needs 0 < d < c, got d = {}, c = {}",
                self.d, self.c
            )));
        }
        Ok(())
    }

    /// `m = 4cd/(c + d)²`.
    pub fn modulus(&self) -> f64 {
        4.0 * self.c * self.d / ((self.c + self.d) * (self.c + self.d))
    }

    /// `1 − m = ((c − d)/(c + d))²`, without cancellation as `d → c`.
    pub fn modulus_complement(&self) -> f64 {
        let r = (self.c - self.d) / (self.c + self.d);
        r * r
    }
}

/// Where an imaginary-axis point sits relative to the cuts.
fn on_axis_segment(k: Complex64, c: f64) -> bool {
    k.re == 0.0 && k.im.abs() < c
}

/// `(X_c(s), X_d(s))` with the side tag applied to whichever factors are cut
/// at `s`. When `s` was reached from a branch point `anchor`, `offset` is
/// `s − anchor` and is used in place of the corresponding factor.
fn root_pair_anchored(
    s: Complex64,
    side: Side,
    c: f64,
    d: f64,
    anchor: Complex64,
    offset: Complex64,
) -> (Complex64, Complex64) {
    let factors = |h: f64| {
        let ih = Complex64::new(0.0, h);
        let minus = if anchor == ih { offset } else { s - ih };
        let plus = if anchor == -ih { offset } else { s + ih };
        (minus, plus)
    };
    let (side_c, side_d) = if s.re != 0.0 || side == Side::Off {
        (Side::Off, Side::Off)
    } else {
        let y = s.im.abs();
        (if y <= c { side } else { Side::Off }, if y <= d { side } else { Side::Off })
    };
    let (cm, cp) = factors(c);
    let (dm, dp) = factors(d);
    (root_from_factors(cm, cp, side_c), root_from_factors(dm, dp, side_d))
}

fn root_pair(s: Complex64, side: Side, c: f64, d: f64) -> (Complex64, Complex64) {
    root_pair_anchored(s, side, c, d, Complex64::new(f64::NAN, f64::NAN), Complex64::new(0.0, 0.0))
}

/// `w(k)` on the chosen sheet; positive on the real axis of the first sheet.
pub fn w_surface(k: Complex64, side: Side, spec: &SurfaceSpec) -> Result<BranchValue> {
    spec.validate()?;
    let (c, d) = (spec.c, spec.d);
    if side != Side::Off && !on_axis_segment(k, c) && !(k.re == 0.0 && k.im.abs() == c) {
        return Err(Error::contract(format!("side {side:?} given for k = {k} off (-ic, ic)")));
    }
    let on_cut = k.re == 0.0 && k.im.abs() > d && k.im.abs() < c;
    if side == Side::Off && on_cut {
        return Err(Error::contract(format!("k = {k} lies on a cut; a side tag is required")));
    }
    let degenerate = k.re == 0.0 && (k.im.abs() == c || k.im.abs() == d);
    // The gap is not a cut of w, so either tag gives the same value there.
    let side = if side == Side::Off && on_axis_segment(k, c) { Side::Plus } else { side };
    let (xc, xd) = root_pair(k, side, c, d);
    let sign = if spec.sheet == Sheet::First { 1.0 } else { -1.0 };
    Ok(BranchValue { value: sign * xc * xd, degenerate })
}

/// One straight piece of an integration path.
#[derive(Debug, Clone, Copy)]
struct Piece {
    z0: Complex64,
    z1: Complex64,
    side: Side,
    singular_start: bool,
    singular_end: bool,
}

/// Path from `ic` to `k` that stays off `(−ic, ic)` except along the chosen
/// side.
fn plan_path(k: Complex64, side: Side, c: f64, d: f64) -> Result<Vec<Piece>> {
    let ic = Complex64::new(0.0, c);
    let id = Complex64::new(0.0, d);
    let piece = |z0, z1, side, singular_start, singular_end| Piece { z0, z1, side, singular_start, singular_end };
    if k.re != 0.0 {
        if side != Side::Off {
            return Err(Error::contract(format!("side {side:?} given for k = {k} off the imaginary axis")));
        }
        if k.im >= c {
            return Ok(vec![piece(ic, k, Side::Off, true, false)]);
        }
        // Detour through ±c so that only the last endpoint can be near the cuts.
        let via = Complex64::new(c.copysign(k.re), 0.0);
        return Ok(vec![piece(ic, via, Side::Off, true, false), piece(via, k, Side::Off, false, false)]);
    }
    let y = k.im;
    if y > c {
        if side != Side::Off {
            return Err(Error::contract(format!("side {side:?} given for k = {k} above ic")));
        }
        return Ok(vec![piece(ic, k, Side::Off, true, false)]);
    }
    if y == c {
        return Ok(Vec::new());
    }
    if y < -c {
        if side != Side::Off {
            return Err(Error::contract(format!("side {side:?} given for k = {k} below -ic")));
        }
        let right = Complex64::new(c, 0.0);
        return Ok(vec![piece(ic, right, Side::Off, true, false), piece(right, k, Side::Off, false, false)]);
    }
    let at_branch = y == d || y == -d || y == -c;
    let side = match side {
        Side::Off if at_branch => Side::Plus,
        Side::Off => {
            return Err(Error::contract(format!("k = {k} lies on (-ic, ic); a side tag is required")));
        }
        s => s,
    };
    let mid = Complex64::new(0.0, -d);
    let bottom = Complex64::new(0.0, -c);
    let mut path = Vec::new();
    if y >= d {
        path.push(piece(ic, k, side, true, y == d));
        return Ok(path);
    }
    path.push(piece(ic, id, side, true, true));
    if y > -d {
        path.push(piece(id, k, side, true, false));
        return Ok(path);
    }
    path.push(piece(id, mid, side, true, true));
    if y == -d {
        return Ok(path);
    }
    path.push(piece(mid, k, side, true, k == bottom));
    Ok(path)
}

/// `∫_{z0}^{z1} f ds` along a straight piece whose start may be a branch
/// point with an inverse-square-root singularity.
fn piece_integral<F>(z0: Complex64, z1: Complex64, side: Side, singular: bool, c: f64, d: f64, quad: &QuadratureSpec, f: &F) -> Result<Complex64>
where
    F: Fn(Complex64, Complex64, Complex64) -> Complex64,
{
    let step = z1 - z0;
    let spec = quad.with_singularity(if singular { Singularity::Left } else { Singularity::None });
    integrate(
        |t: f64| {
            let offset = step * t;
            let s = z0 + offset;
            let (xc, xd) = root_pair_anchored(s, side, c, d, z0, offset);
            f(s, xc, xd) * step
        },
        0.0,
        1.0,
        &spec,
    )
}

/// `∫_{ic}^{k} f(s, X_c(s), X_d(s)) ds` along [`plan_path`]. Pieces with a
/// singular far end are integrated backwards so every singular endpoint is
/// a start point.
fn path_integral<F>(k: Complex64, side: Side, c: f64, d: f64, quad: &QuadratureSpec, f: F) -> Result<Complex64>
where
    F: Fn(Complex64, Complex64, Complex64) -> Complex64,
{
    let mut total = Complex64::new(0.0, 0.0);
    for p in plan_path(k, side, c, d)? {
        total += match (p.singular_start, p.singular_end) {
            (start, false) => piece_integral(p.z0, p.z1, p.side, start, c, d, quad, &f)?,
            (false, true) => -piece_integral(p.z1, p.z0, p.side, true, c, d, quad, &f)?,
            (true, true) => {
                let mid = 0.5 * (p.z0 + p.z1);
                piece_integral(p.z0, mid, p.side, true, c, d, quad, &f)?
                    - piece_integral(p.z1, mid, p.side, true, c, d, quad, &f)?
            }
        };
    }
    Ok(total)
}

/// `∫_{ic}^{i∞} f ds` up the imaginary axis.
fn integral_to_infinity<F>(c: f64, d: f64, quad: &QuadratureSpec, f: F) -> Result<Complex64>
where
    F: Fn(Complex64, Complex64, Complex64) -> Complex64,
{
    let ic = Complex64::new(0.0, c);
    let reach = Complex64::new(0.0, 2.0 * c);
    let head = piece_integral(ic, reach, Side::Off, true, c, d, quad, &f)?;
    let tail = integrate_semi_infinite(
        |y: f64| {
            let s = Complex64::new(0.0, y);
            let (xc, xd) = root_pair(s, Side::Off, c, d);
            f(s, xc, xd) * I
        },
        2.0 * c,
        &quad.with_singularity(Singularity::None),
    )?;
    Ok(head + tail)
}

/// Periods of `dk/w` and the normalised `τ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Periods {
    /// `∫₀^d dy/√((c² − y²)(d² − y²)) = K(d²/c²)/c`.
    pub gap_integral: f64,
    /// `∫_d^c dy/√((c² − y²)(y² − d²)) = K(1 − d²/c²)/c`.
    pub cut_integral: f64,
    pub tau: f64,
}

impl Periods {
    pub fn a_period(&self) -> Complex64 {
        Complex64::new(0.0, -4.0 * self.gap_integral)
    }

    pub fn b_period(&self) -> Complex64 {
        Complex64::new(2.0 * self.cut_integral, 0.0)
    }

    /// `∫_a ω` for `ω = 2πi·dk/(w·a-period)`.
    pub fn a_cycle_of_omega(&self) -> Complex64 {
        2.0 * PI * I * self.a_period() / self.a_period()
    }
}

/// `∫_d^c h(y) dy/√((c² − y²)(y² − d²)) = ∫₀^{π/2} h(y(θ))/y(θ) dθ` with
/// `y² = d²cos²θ + c²sin²θ`.
fn cut_average<F: Fn(f64) -> f64>(c: f64, d: f64, quad: &QuadratureSpec, h: F) -> Result<f64> {
    integrate(
        |th: f64| {
            let (sn, co) = th.sin_cos();
            let y = (d * d * co * co + c * c * sn * sn).sqrt();
            h(y) / y
        },
        0.0,
        0.5 * PI,
        quad,
    )
}

/// `∫₀^d h(y) dy/√((c² − y²)(d² − y²)) = ∫₀^{π/2} h(d sin θ)/√(c² − d²sin²θ) dθ`.
fn gap_average<F: Fn(f64) -> f64>(c: f64, d: f64, quad: &QuadratureSpec, h: F) -> Result<f64> {
    integrate(
        |th: f64| {
            let (sn, co) = th.sin_cos();
            // c² − d²sin²θ = (c² − d²) + d²cos²θ
            h(d * sn) / ((c - d) * (c + d) + d * d * co * co).sqrt()
        },
        0.0,
        0.5 * PI,
        quad,
    )
}

pub fn periods(spec: &SurfaceSpec, quad: &QuadratureSpec) -> Result<Periods> {
    spec.validate()?;
    let (c, d) = (spec.c, spec.d);
    let quad = quad.with_singularity(Singularity::None);
    let gap = gap_average(c, d, &quad, |_| 1.0)?;
    let cut = cut_average(c, d, &quad, |_| 1.0)?;
    Ok(Periods { gap_integral: gap, cut_integral: cut, tau: -PI * cut / gap })
}

/// `e₀` (fixed by `∫₀^{id} (s² + e₀)/w ds = 0`) and `B_Ω = Ω_− − Ω_+` on the
/// gap.
pub fn e0_and_b_omega(spec: &SurfaceSpec, quad: &QuadratureSpec) -> Result<(f64, f64)> {
    spec.validate()?;
    let (c, d) = (spec.c, spec.d);
    let quad = quad.with_singularity(Singularity::None);
    let e0 = gap_average(c, d, &quad, |y| y * y)? / gap_average(c, d, &quad, |_| 1.0)?;
    let b_omega = -2.0 * cut_average(c, d, &quad, |y| y * y - e0)?;
    Ok((e0, b_omega))
}

/// `B_g = 24∫_d^c (s² − μ²)√(s² − d²)/√(c² − s²) ds`.
pub fn b_g(c: f64, d: f64, mu: f64, quad: &QuadratureSpec) -> Result<f64> {
    if d >= c {
        return Ok(0.0);
    }
    let quad = quad.with_singularity(Singularity::None);
    // √(s² − d²)/√(c² − s²) = (s² − d²)/√((c² − s²)(s² − d²)) and s² − d² = (c² − d²)sin²θ.
    let value = integrate(
        |th: f64| {
            let (sn, co) = th.sin_cos();
            let s2 = d * d * co * co + c * c * sn * sn;
            (s2 - mu * mu) * (c * c - d * d) * sn * sn / s2.sqrt()
        },
        0.0,
        0.5 * PI,
        &quad,
    )?;
    Ok(24.0 * value)
}

/// `Δ = (1/π)∫₀^∞ log a²(s)/w(s) ds`, using `a(−s) = a(s)`.
pub fn delta_integral(c: f64, d: f64, quad: &QuadratureSpec) -> Result<f64> {
    let value = integrate_semi_infinite(
        |s: f64| (a_real(s, c) * a_real(s, c)).ln() / ((s * s + c * c) * (s * s + d * d)).sqrt(),
        0.0,
        quad,
    )?;
    Ok(value / PI)
}

/// All `ξ`-dependent genus-one quantities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModulationState {
    pub c: f64,
    pub xi: f64,
    pub d: f64,
    pub mu: f64,
    pub m: f64,
    pub tau: f64,
    pub e0: f64,
    pub b_g: f64,
    pub b_omega: f64,
    pub delta: f64,
    pub gap_integral: f64,
    pub cut_integral: f64,
}

impl ModulationState {
    pub fn resolve(xi: f64, params: &ShockParams) -> Result<Self> {
        let c = params.c;
        let (d, mu) = d_of_xi(xi, params)?;
        let surface = SurfaceSpec::new(c, d)?;
        let per = periods(&surface, &params.quad)?;
        let (e0, b_omega) = e0_and_b_omega(&surface, &params.quad)?;
        Ok(ModulationState {
            c,
            xi,
            d,
            mu,
            m: surface.modulus(),
            tau: per.tau,
            e0,
            b_g: b_g(c, d, mu, &params.quad)?,
            b_omega,
            delta: delta_integral(c, d, &params.quad)?,
            gap_integral: per.gap_integral,
            cut_integral: per.cut_integral,
        })
    }

    pub fn surface(&self) -> SurfaceSpec {
        SurfaceSpec { c: self.c, d: self.d, sheet: Sheet::First }
    }

    pub fn periods(&self) -> Periods {
        Periods { gap_integral: self.gap_integral, cut_integral: self.cut_integral, tau: self.tau }
    }

    pub fn modulus_complement(&self) -> f64 {
        self.surface().modulus_complement()
    }

    /// `c²/2 + ξ − μ² − d²/2`.
    pub fn residual(&self) -> f64 {
        0.5 * self.c * self.c + self.xi - self.mu * self.mu - 0.5 * self.d * self.d
    }

    /// Names of violated sign and ordering invariants.
    pub fn violations(&self) -> Vec<&'static str> {
        let mut v = Vec::new();
        if !(0.0 < self.mu && self.mu < self.d && self.d < self.c) {
            v.push("order");
        }
        if !(self.m > 0.0 && self.m < 1.0) {
            v.push("m");
        }
        if !(self.tau < 0.0) {
            v.push("tau");
        }
        if !(self.e0 > 0.0 && self.e0 < self.d * self.d) {
            v.push("e0");
        }
        if !(self.b_g > 0.0) {
            v.push("B_g");
        }
        if !(self.b_omega < 0.0) {
            v.push("B_Omega");
        }
        if !(self.delta < 0.0) {
            v.push("Delta");
        }
        if self.residual().abs() > 1e-10 * self.c * self.c {
            v.push("residual");
        }
        v
    }

    /// `U = t·B_g + B_Ω·Δ`.
    pub fn u_phase(&self, t: f64) -> f64 {
        t * self.b_g + self.b_omega * self.delta
    }

    /// `∫_{ic}^{k} dk/w`, unnormalised.
    pub fn holomorphic_integral(&self, k: Complex64, side: Side, quad: &QuadratureSpec) -> Result<Complex64> {
        path_integral(k, side, self.c, self.d, quad, |_, xc, xd| 1.0 / (xc * xd))
    }

    /// `A(k) = ∫_{ic}^{k} ω` along the path, without lattice reduction.
    pub fn abel_map_raw(&self, k: Complex64, side: Side, quad: &QuadratureSpec) -> Result<Complex64> {
        let scale = 2.0 * PI * I / self.periods().a_period();
        Ok(scale * self.holomorphic_integral(k, side, quad)?)
    }

    /// `A(∞)`, integrated up the imaginary axis.
    pub fn abel_map_at_infinity(&self, quad: &QuadratureSpec) -> Result<Complex64> {
        let scale = 2.0 * PI * I / self.periods().a_period();
        Ok(scale * integral_to_infinity(self.c, self.d, quad, |_, xc, xd| 1.0 / (xc * xd))?)
    }

    /// Abel map reduced to the cell `τ/2 < Re ≤ −τ/2`, `−π < Im ≤ π`.
    pub fn abel_map(&self, k: Complex64, side: Side, quad: &QuadratureSpec) -> Result<Complex64> {
        Ok(reduce_to_cell(self.abel_map_raw(k, side, quad)?, self.tau))
    }

    /// `(s² + e₀)/w − 1`.
    fn omega_density(&self) -> impl Fn(Complex64, Complex64, Complex64) -> Complex64 {
        let (c, d, e0) = (self.c, self.d, self.e0);
        move |s, xc, xd| {
            let w = xc * xd;
            let s2 = s * s;
            if s.norm() > 2.0 * c {
                // s² − w = −((c² + d²)s² + c²d²)/(s² + w)
                let s2_minus_w = -((c * c + d * d) * s2 + c * c * d * d) / (s2 + w);
                (s2_minus_w + e0) / w
            } else {
                (s2 + e0) / w - 1.0
            }
        }
    }

    /// `Ω(k) = ∫_{ic}^{k} (s² + e₀)/w ds`.
    pub fn omega_integral(&self, k: Complex64, side: Side, quad: &QuadratureSpec) -> Result<Complex64> {
        let ic = Complex64::new(0.0, self.c);
        let rest = path_integral(k, side, self.c, self.d, quad, self.omega_density())?;
        Ok(k - ic + rest)
    }

    /// `lim_{k→∞} (Ω(k) − k)`.
    pub fn omega_offset_at_infinity(&self, quad: &QuadratureSpec) -> Result<Complex64> {
        let rest = integral_to_infinity(self.c, self.d, quad, self.omega_density())?;
        Ok(rest - Complex64::new(0.0, self.c))
    }

    /// The `ξ` that `(d, μ)` solve exactly, `μ² + d²/2 − c²/2`.
    pub fn xi_exact(&self) -> f64 {
        self.mu * self.mu + 0.5 * self.d * self.d - 0.5 * self.c * self.c
    }

    /// `dg/ds − dθ/ds` at the exact `ξ`, written with `X_c² = s² + c²` as
    /// `6(c² − d²)·((d² − c²)X_c/(X_c + X_d) + 2(c² − μ²)) / (X_c(X_c + X_d))`,
    /// which is visibly `O(s⁻²)` and has no cancellation near the branch points.
    fn dg_minus_dtheta(&self) -> impl Fn(Complex64, Complex64, Complex64) -> Complex64 {
        let (c2, d2, mu2) = (self.c * self.c, self.d * self.d, self.mu * self.mu);
        move |_, xc, xd| {
            let sum = xc + xd;
            6.0 * (c2 - d2) * ((d2 - c2) * xc / sum + 2.0 * (c2 - mu2)) / (xc * sum)
        }
    }

    /// `g(k) = ∫_{ic}^{k} 12(s² + μ²)(s² + d²)/w ds`.
    pub fn g_elliptic(&self, k: Complex64, side: Side, quad: &QuadratureSpec) -> Result<Complex64> {
        let ic = Complex64::new(0.0, self.c);
        let xi = self.xi_exact();
        let rest = path_integral(k, side, self.c, self.d, quad, self.dg_minus_dtheta())?;
        Ok(theta_phase(k, xi) - theta_phase(ic, xi) + rest)
    }

    /// `lim_{k→∞} (g(k) − θ(k))`.
    pub fn g_offset_at_infinity(&self, quad: &QuadratureSpec) -> Result<Complex64> {
        let ic = Complex64::new(0.0, self.c);
        let rest = integral_to_infinity(self.c, self.d, quad, self.dg_minus_dtheta())?;
        Ok(rest - theta_phase(ic, self.xi_exact()))
    }
}

/// Representative of `z` modulo `2πiℤ + τℤ` with `τ/2 < Re ≤ −τ/2` and
/// `−π < Im ≤ π`.
pub fn reduce_to_cell(z: Complex64, tau: f64) -> Complex64 {
    let period = -tau;
    let mut re = z.re - period * (z.re / period).round();
    if re <= -0.5 * period {
        re += period;
    }
    let two_pi = 2.0 * PI;
    let mut im = z.im - two_pi * (z.im / two_pi).round();
    if im <= -PI {
        im += two_pi;
    }
    Complex64::new(re, im)
}

type CacheKey = (u64, u64);

/// Memo of resolved states keyed by `(c, ξ)`, least-recently-used eviction,
/// with optional JSON spill to a directory.
#[derive(Debug)]
pub struct ModulationCache {
    capacity: usize,
    spill_dir: Option<PathBuf>,
    inner: Mutex<CacheInner>,
}

#[derive(Debug, Default)]
struct CacheInner {
    entries: HashMap<CacheKey, (ModulationState, u64)>,
    clock: u64,
    hits: u64,
    misses: u64,
}

impl ModulationCache {
    pub fn new(capacity: usize) -> Self {
        ModulationCache { capacity: capacity.max(1), spill_dir: None, inner: Mutex::new(CacheInner::default()) }
    }

    /// Cache that also reads and writes `MKDV_CACHE_DIR` when it is set.
    pub fn from_env(capacity: usize) -> Self {
        let mut cache = ModulationCache::new(capacity);
        cache.spill_dir = std::env::var_os("MKDV_CACHE_DIR").map(PathBuf::from);
        cache
    }

    pub fn with_spill_dir(mut self, dir: impl Into<PathBuf>) -> Self {
        self.spill_dir = Some(dir.into());
        self
    }

    fn spill_path(&self, key: CacheKey) -> Option<PathBuf> {
        self.spill_dir.as_ref().map(|d| d.join(format!("modulation_{:016x}_{:016x}.json", key.0, key.1)))
    }

    pub fn get(&self, xi: f64, params: &ShockParams) -> Result<ModulationState> {
        let key = (params.c.to_bits(), xi.to_bits());
        {
            let mut inner = self.inner.lock().expect("modulation cache poisoned");
            inner.clock += 1;
            let now = inner.clock;
            if let Some(entry) = inner.entries.get_mut(&key) {
                entry.1 = now;
                let state = entry.0;
                inner.hits += 1;
                return Ok(state);
            }
            inner.misses += 1;
        }
        let spilled = self
            .spill_path(key)
            .and_then(|p| std::fs::read_to_string(p).ok())
            .and_then(|s| serde_json::from_str::<ModulationState>(&s).ok())
            .filter(|s| s.c == params.c && s.xi == xi);
        let state = match spilled {
            Some(s) => s,
            None => {
                let s = ModulationState::resolve(xi, params)?;
                if let Some(path) = self.spill_path(key) {
                    if let Some(dir) = path.parent() {
                        std::fs::create_dir_all(dir)?;
                    }
                    std::fs::write(path, serde_json::to_string_pretty(&s)?)?;
                }
                s
            }
        };
        let mut inner = self.inner.lock().expect("modulation cache poisoned");
        if inner.entries.len() >= self.capacity && !inner.entries.contains_key(&key) {
            if let Some(oldest) = inner.entries.iter().min_by_key(|(_, v)| v.1).map(|(k, _)| *k) {
                inner.entries.remove(&oldest);
            }
        }
        let now = inner.clock;
        inner.entries.insert(key, (state, now));
        Ok(state)
    }

    pub fn len(&self) -> usize {
        self.inner.lock().expect("modulation cache poisoned").entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `(hits, misses)` of the in-memory layer.
    pub fn stats(&self) -> (u64, u64) {
        let inner = self.inner.lock().expect("modulation cache poisoned");
        (inner.hits, inner.misses)
    }
}

/// CSV table of states for `n` evenly spaced `ξ` in `[xi_min, xi_max]`.
pub fn modulation_table(xi_min: f64, xi_max: f64, n: usize, params: &ShockParams) -> Result<String> {
    use rayon::prelude::*;
    check_xi(xi_min, params.c)?;
    check_xi(xi_max, params.c)?;
    if n < 1 || xi_max < xi_min {
        return Err(Error::domain("modulation table needs n >= 1 and xi_min <= xi_max"));
    }
    let xis: Vec<f64> = (0..n)
        .map(|i| if n == 1 { xi_min } else { xi_min + (xi_max - xi_min) * i as f64 / (n - 1) as f64 })
        .collect();
    let states = xis
        .par_iter()
        .map(|&xi| ModulationState::resolve(xi, params))
        .collect::<Result<Vec<_>>>()?;
    let mut out = String::from("xi,d,mu,m,tau,e0,B_g,B_Omega,Delta,flags\n");
    for s in &states {
        let flags = s.violations();
        writeln!(
            out,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{}",
            s.xi,
            s.d,
            s.mu,
            s.m,
            s.tau,
            s.e0,
            s.b_g,
            s.b_omega,
            s.delta,
            if flags.is_empty() { "ok".to_string() } else { flags.join(";") }
        )
        .unwrap();
    }
    Ok(out)
}

/// Sign grid of `Im g` for the genus-one phase, `Plus` boundary values on
/// `(−ic, ic)`.
pub fn sign_grid_elliptic(xi: f64, spec: GridSpec2d, params: &ShockParams) -> Result<SignGrid> {
    let state = ModulationState::resolve(xi, params)?;
    let quad = params.quad.with_tolerances(1e-11, 1e-10);
    sign_grid_with(spec, |k| {
        let side = if on_axis_segment(k, state.c) { Side::Plus } else { Side::Off };
        state.g_elliptic(k, side, &quad)
    })
}
