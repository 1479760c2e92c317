//! The asymptotic solution `q(x, t)` assembled region by region.
//!
//! With `ξ = x/12t` the line splits into a plateau (`ξ < −c²/2`, `q → c`), a
//! modulated elliptic wave (`−c²/2 < ξ < c²/3`) and a vanishing region
//! (`ξ > c²/3`, `q → 0`). Inside the elliptic region
//!
//! ```text
//! q_mod = √(c² − d²) Θ(πi + iU, τ) / Θ(iU, τ),   U = t·B_g(ξ) + B_Ω(ξ)Δ(ξ),
//! ```
//!
//! equivalently `(c + d) dn(K(U/π + 1) | m) = (c − d) / dn(KU/π | m)`.
//! A band of half-width `edge_width·c²` around each edge is flagged rather
//! than interpolated.

use std::f64::consts::PI;
use std::fmt::{self, Write as _};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::contour::Side;
use crate::error::{Edge, Error, Result};
use crate::modulation::{ModulationCache, ModulationState};
use crate::scattering::ShockParams;
use crate::specfun::{complete_elliptic_k_mc, jacobi_dn_mc, theta, theta_scaled, QuadratureSpec, ThetaParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RegionTag {
    Plateau,
    Elliptic,
    Vanishing,
    BoundaryLayer,
}

impl RegionTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            RegionTag::Plateau => "Plateau",
            RegionTag::Elliptic => "Elliptic",
            RegionTag::Vanishing => "Vanishing",
            RegionTag::BoundaryLayer => "BoundaryLayer",
        }
    }
}

impl fmt::Display for RegionTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionLabel {
    pub tag: RegionTag,
    /// Distance of `ξ` to the nearest edge in units of `c²`; positive inside
    /// the elliptic interval.
    pub boundary_distance: f64,
}

/// Lower and upper edges `(−c²/2, c²/3)` of the elliptic region.
pub fn elliptic_edges(c: f64) -> (f64, f64) {
    (-0.5 * c * c, c * c / 3.0)
}

pub fn classify_xi(xi: f64, c: f64, edge_width: f64) -> RegionLabel {
    let (lo, hi) = elliptic_edges(c);
    let c2 = c * c;
    let boundary_distance = (xi - lo).min(hi - xi) / c2;
    let band = edge_width * c2;
    let tag = if xi < lo - band {
        RegionTag::Plateau
    } else if xi > hi + band {
        RegionTag::Vanishing
    } else if xi > lo + band && xi < hi - band {
        RegionTag::Elliptic
    } else {
        RegionTag::BoundaryLayer
    };
    RegionLabel { tag, boundary_distance }
}

pub fn classify(x: f64, t: f64, c: f64, edge_width: f64) -> Result<RegionLabel> {
    if !(t > 0.0) || !t.is_finite() || !x.is_finite() {
        return Err(Error::domain(format!("need finite x and t > 0, got x = {x}, t = {t}")));
    }
    Ok(classify_xi(x / (12.0 * t), c, edge_width))
}

fn check_elliptic(xi: f64, c: f64) -> Result<()> {
    let (lo, hi) = elliptic_edges(c);
    if xi > lo && xi < hi {
        return Ok(());
    }
    let edge = if xi <= lo { Edge::Lower } else { Edge::Upper };
    Err(Error::OutOfRange { what: "xi", value: xi, lower: lo, upper: hi, edge })
}

fn wrap_phase(u: f64) -> f64 {
    let two_pi = 2.0 * PI;
    u - two_pi * (u / two_pi).round()
}

/// Theta form of the elliptic wave at phase `U`.
pub fn q_mod_theta_at(state: &ModulationState, u: f64) -> Result<f64> {
    let params = ThetaParams::new(state.tau)?;
    let u = wrap_phase(u);
    let num = theta_scaled(Complex64::new(0.0, PI + u), &params)?;
    let den = theta_scaled(Complex64::new(0.0, u), &params)?;
    let ratio = num.ratio(&den);
    let (c, d) = (state.c, state.d);
    Ok(((c - d) * (c + d)).sqrt() * ratio.re)
}

/// Both Jacobi forms at phase `U`, `((c + d) dn(K(U/π + 1)), (c − d)/dn(KU/π))`.
pub fn q_mod_dn_pair(state: &ModulationState, u: f64) -> Result<(f64, f64)> {
    let (c, d, mc) = (state.c, state.d, state.modulus_complement());
    let k = complete_elliptic_k_mc(mc)?;
    let u = wrap_phase(u) / PI;
    let first = (c + d) * jacobi_dn_mc(k * (u + 1.0), mc)?;
    let second = (c - d) / jacobi_dn_mc(k * u, mc)?;
    Ok((first, second))
}

/// Jacobi form at phase `U`; fails if the two printed forms disagree by more
/// than `1e-10` relative.
pub fn q_mod_dn_at(state: &ModulationState, u: f64) -> Result<f64> {
    let (first, second) = q_mod_dn_pair(state, u)?;
    if (first - second).abs() > 1e-10 * (state.c + state.d) {
        return Err(Error::Inconsistent { what: "dn forms of q_mod", first, second });
    }
    Ok(first)
}

/// `Θ(0)/Θ(πi)` at the state's `τ`; equals `√((c + d)/(c − d))`.
pub fn theta_null_ratio(state: &ModulationState) -> Result<f64> {
    let params = ThetaParams::new(state.tau)?;
    let a = theta_scaled(Complex64::new(0.0, 0.0), &params)?;
    let b = theta_scaled(Complex64::new(0.0, PI), &params)?;
    Ok(a.ratio(&b).re)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModelForm {
    /// Built on `γ(k) = ((k − ic)/(k − id))^{1/4}((k + id)/(k + ic))^{1/4}`.
    Gamma,
    /// Built on `λ(k) = ((k − ic)/(k + ic))^{1/4}((k − id)/(k + id))^{1/4}`.
    Lambda,
}

fn quartic_root(num: Complex64, den: Complex64, num2: Complex64, den2: Complex64) -> Complex64 {
    (0.25 * ((num / den).ln() + (num2 / den2).ln())).exp()
}

pub fn gamma_factor(k: Complex64, c: f64, d: f64) -> Complex64 {
    let (ic, id) = (Complex64::new(0.0, c), Complex64::new(0.0, d));
    quartic_root(k - ic, k - id, k + id, k + ic)
}

pub fn lambda_factor(k: Complex64, c: f64, d: f64) -> Complex64 {
    let (ic, id) = (Complex64::new(0.0, c), Complex64::new(0.0, d));
    quartic_root(k - ic, k + ic, k - id, k + id)
}

/// Entries of the elliptic model solution at a point `k` of the first sheet,
/// off the imaginary axis segment `[−ic, ic]`.
pub fn model_matrix_entries(
    state: &ModulationState,
    t: f64,
    k: Complex64,
    form: ModelForm,
    quad: &QuadratureSpec,
) -> Result<[[Complex64; 2]; 2]> {
    if !(t > 0.0) {
        return Err(Error::domain(format!("need t > 0, got {t}")));
    }
    if k.re == 0.0 && k.im.abs() <= state.c {
        return Err(Error::contract("model matrix is evaluated off the cut [-ic, ic]"));
    }
    let params = ThetaParams::new(state.tau)?;
    let th = |z: Complex64| theta(z, &params);
    let a = state.abel_map_raw(k, Side::Off, quad)?;
    let half = Complex64::new(0.0, 0.5 * PI);
    let iu = Complex64::new(0.0, wrap_phase(state.u_phase(t)));
    let (fac, norm) = match form {
        ModelForm::Gamma => (gamma_factor(k, state.c, state.d), th(Complex64::new(0.0, 0.0))?),
        ModelForm::Lambda => (lambda_factor(k, state.c, state.d), th(Complex64::new(0.0, PI))?),
    };
    let norm = norm / th(iu)?;
    let plus = 0.5 * (fac + 1.0 / fac);
    let minus = 0.5 * (fac - 1.0 / fac);
    // The Gamma form divides by the unshifted argument; the Lambda form by the
    // argument moved half a period, πi ≡ −πi.
    let flip = match form {
        ModelForm::Gamma => Complex64::new(0.0, 0.0),
        ModelForm::Lambda => 2.0 * half,
    };
    let entry = |pref: Complex64, arg: Complex64| -> Result<Complex64> { Ok(pref * th(arg - iu)? / th(arg + flip)? * norm) };
    Ok([
        [entry(plus, a - half)?, entry(minus, -a - half)?],
        [entry(minus, a + half)?, entry(plus, -a + half)?],
    ])
}

/// `lim 2ik (M − I)` for the off-diagonal entry `(row, col)`, by repeated
/// Richardson extrapolation along the positive real axis from `radius`.
pub fn model_matrix_limit(
    state: &ModulationState,
    t: f64,
    form: ModelForm,
    (row, col): (usize, usize),
    radius: f64,
    quad: &QuadratureSpec,
) -> Result<f64> {
    if row == col || row > 1 || col > 1 {
        return Err(Error::domain("limit is defined for the off-diagonal entries (0,1) and (1,0)"));
    }
    const LEVELS: usize = 5;
    let mut table = Vec::with_capacity(LEVELS);
    for j in 0..LEVELS {
        let r = radius * f64::powi(2.0, j as i32);
        let k = Complex64::new(r, 0.0);
        let m = model_matrix_entries(state, t, k, form, quad)?;
        table.push(Complex64::new(0.0, 2.0) * k * m[row][col]);
    }
    for level in 1..LEVELS {
        let factor = f64::powi(2.0, level as i32);
        for j in (level..LEVELS).rev() {
            table[j] = (factor * table[j] - table[j - 1]) / (factor - 1.0);
        }
    }
    let v = table[LEVELS - 1];
    if v.im.abs() > 1e-6 * v.norm().max(state.c) {
        return Err(Error::Inconsistent { what: "imaginary part of the model-matrix limit", first: v.re, second: v.im });
    }
    Ok(v.re)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WaveConfig {
    /// Half-width of the flagged band around each edge, in units of `c²`.
    pub edge_width: f64,
    /// Central-difference step in `ξ` for the local wavenumber, in units of `c²`.
    pub fd_step: f64,
    pub cache_capacity: usize,
}

impl Default for WaveConfig {
    fn default() -> Self {
        WaveConfig { edge_width: 0.01, fd_step: 1e-5, cache_capacity: 4096 }
    }
}

impl WaveConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.edge_width >= 0.0 && self.edge_width < 0.4) {
            return Err(Error::domain(format!("edge width {} must lie in [0, 0.4)", self.edge_width)));
        }
        if !(self.fd_step > 0.0 && self.fd_step < 0.1) {
            return Err(Error::domain(format!("finite-difference step {} must lie in (0, 0.1)", self.fd_step)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Wavenumber {
    /// `∂U/∂x` from central differences of `U` in `ξ`.
    pub du_dx: f64,
    /// `B_Ω(ξ)`, the `t → ∞` limit of `∂U/∂x`.
    pub leading: f64,
    pub wavelength: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveSample {
    pub x: f64,
    pub t: f64,
    pub xi: f64,
    pub q: f64,
    pub region: RegionLabel,
    pub envelope_lo: Option<f64>,
    pub envelope_hi: Option<f64>,
    pub wavelength: Option<f64>,
    /// Set inside the edge bands, where the value is that of the region on
    /// the same side of the sharp threshold.
    pub low_confidence: bool,
    pub error_order: &'static str,
}

/// Evaluator for one step height, with a shared memo of modulation states.
pub struct Wavefield {
    params: ShockParams,
    config: WaveConfig,
    cache: ModulationCache,
}

impl Wavefield {
    pub fn new(params: ShockParams, config: WaveConfig) -> Result<Self> {
        params.validate()?;
        config.validate()?;
        let cache = ModulationCache::new(config.cache_capacity);
        Ok(Wavefield { params, config, cache })
    }

    pub fn with_cache(mut self, cache: ModulationCache) -> Self {
        self.cache = cache;
        self
    }

    pub fn params(&self) -> &ShockParams {
        &self.params
    }

    pub fn config(&self) -> &WaveConfig {
        &self.config
    }

    pub fn cache(&self) -> &ModulationCache {
        &self.cache
    }

    pub fn state(&self, xi: f64) -> Result<ModulationState> {
        self.cache.get(xi, &self.params)
    }

    pub fn classify(&self, x: f64, t: f64) -> Result<RegionLabel> {
        classify(x, t, self.params.c, self.config.edge_width)
    }

    fn elliptic_state(&self, x: f64, t: f64) -> Result<ModulationState> {
        if !(t > 0.0) {
            return Err(Error::domain(format!("need t > 0, got {t}")));
        }
        let xi = x / (12.0 * t);
        check_elliptic(xi, self.params.c)?;
        self.state(xi)
    }

    pub fn u_phase(&self, x: f64, t: f64) -> Result<f64> {
        Ok(self.elliptic_state(x, t)?.u_phase(t))
    }

    pub fn q_mod_theta(&self, x: f64, t: f64) -> Result<f64> {
        let st = self.elliptic_state(x, t)?;
        q_mod_theta_at(&st, st.u_phase(t))
    }

    pub fn q_mod_dn(&self, x: f64, t: f64) -> Result<f64> {
        let st = self.elliptic_state(x, t)?;
        q_mod_dn_at(&st, st.u_phase(t))
    }

    /// `(c − d(ξ), c + d(ξ))`.
    pub fn envelope(&self, xi: f64) -> Result<(f64, f64)> {
        let c = self.params.c;
        check_elliptic(xi, c)?;
        let d = self.state(xi)?.d;
        Ok((c - d, c + d))
    }

    pub fn local_wavenumber(&self, xi: f64, t: f64) -> Result<Wavenumber> {
        let c = self.params.c;
        check_elliptic(xi, c)?;
        if !(t > 0.0) {
            return Err(Error::domain(format!("need t > 0, got {t}")));
        }
        let (lo, hi) = elliptic_edges(c);
        let room = (xi - lo).min(hi - xi);
        let h = (self.config.fd_step * c * c).min(0.5 * room);
        if h < 1e-10 * c * c {
            let edge = if xi - lo < hi - xi { Edge::Lower } else { Edge::Upper };
            return Err(Error::OutOfRange { what: "xi (finite-difference stencil)", value: xi, lower: lo, upper: hi, edge });
        }
        let up = self.state(xi + h)?;
        let down = self.state(xi - h)?;
        let du_dxi = (up.u_phase(t) - down.u_phase(t)) / (2.0 * h);
        let du_dx = du_dxi / (12.0 * t);
        Ok(Wavenumber { du_dx, leading: self.state(xi)?.b_omega, wavelength: 2.0 * PI / du_dx.abs() })
    }

    pub fn sample(&self, x: f64, t: f64) -> Result<WaveSample> {
        let c = self.params.c;
        let region = self.classify(x, t)?;
        let xi = x / (12.0 * t);
        let (lo, hi) = elliptic_edges(c);
        let mut out = WaveSample {
            x,
            t,
            xi,
            q: 0.0,
            region,
            envelope_lo: None,
            envelope_hi: None,
            wavelength: None,
            low_confidence: region.tag == RegionTag::BoundaryLayer,
            error_order: "O(t^-1/2)",
        };
        if xi <= lo {
            out.q = c;
        } else if xi >= hi {
            out.error_order = "O(t^-1/2) dispersive decay";
        } else {
            let st = self.state(xi)?;
            let u = st.u_phase(t);
            let q = q_mod_theta_at(&st, u)?;
            let check = q_mod_dn_at(&st, u)?;
            if (q - check).abs() > 1e-8 * (c + st.d) {
                return Err(Error::Inconsistent { what: "theta and dn forms of q_mod", first: q, second: check });
            }
            out.q = q;
            out.envelope_lo = Some(c - st.d);
            out.envelope_hi = Some(c + st.d);
            out.wavelength = self.local_wavenumber(xi, t).ok().map(|w| w.wavelength);
            out.error_order = "modulated elliptic wave";
        }
        Ok(out)
    }

    /// `n` evenly spaced samples on `[x_min, x_max]`, evaluated in parallel.
    pub fn profile(&self, t: f64, x_min: f64, x_max: f64, n: usize) -> Result<Vec<WaveSample>> {
        if n < 2 || !(x_max > x_min) {
            return Err(Error::domain("profile needs n >= 2 and x_max > x_min"));
        }
        let step = (x_max - x_min) / (n - 1) as f64;
        (0..n)
            .into_par_iter()
            .map(|i| {
                let x = if i == n - 1 { x_max } else { x_min + step * i as f64 };
                self.sample(x, t)
            })
            .collect()
    }
}

fn opt_field(v: Option<f64>) -> String {
    v.map(|v| format!("{v:.16e}")).unwrap_or_default()
}

pub fn profile_csv(samples: &[WaveSample]) -> String {
    let mut out = String::from("x,t,xi,region,q,env_lo,env_hi,wavelength\n");
    for s in samples {
        let _ = writeln!(
            out,
            "{:.16e},{:.16e},{:.16e},{},{:.16e},{},{},{}",
            s.x,
            s.t,
            s.xi,
            s.region.tag,
            s.q,
            opt_field(s.envelope_lo),
            opt_field(s.envelope_hi),
            opt_field(s.wavelength)
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn field() -> Wavefield {
        Wavefield::new(ShockParams::new(1.0).unwrap(), WaveConfig::default()).unwrap()
    }

    fn state(xi: f64) -> ModulationState {
        ModulationState::resolve(xi, &ShockParams::new(1.0).unwrap()).unwrap()
    }

    #[test]
    fn classification_thresholds() {
        assert_eq!(classify(-100.0, 10.0, 1.0, 0.01).unwrap().tag, RegionTag::Plateau);
        assert_eq!(classify(0.0, 10.0, 1.0, 0.01).unwrap().tag, RegionTag::Elliptic);
        assert_eq!(classify(40.0 + 1e-9, 10.0, 1.0, 0.01).unwrap().tag, RegionTag::BoundaryLayer);
        assert_eq!(classify(1000.0, 10.0, 1.0, 0.01).unwrap().tag, RegionTag::Vanishing);
        assert!(classify(0.0, 0.0, 1.0, 0.01).is_err());
        assert!(classify(0.0, -1.0, 1.0, 0.01).is_err());
        let inside = classify_xi(0.0, 1.0, 0.01);
        assert!((inside.boundary_distance - 1.0 / 3.0).abs() < 1e-15);
        assert!(classify_xi(-0.6, 1.0, 0.01).boundary_distance < 0.0);
        // Band scales with c².
        assert_eq!(classify_xi(-2.0 + 0.03, 2.0, 0.01).tag, RegionTag::BoundaryLayer);
        assert_eq!(classify_xi(-2.0 + 0.05, 2.0, 0.01).tag, RegionTag::Elliptic);
    }

    #[test]
    fn special_phases() {
        for &xi in &[-0.4, 0.0, 0.3] {
            let st = state(xi);
            let (c, d) = (st.c, st.d);
            assert!((q_mod_theta_at(&st, 0.0).unwrap() - (c - d)).abs() < 1e-12);
            assert!((q_mod_dn_at(&st, 0.0).unwrap() - (c - d)).abs() < 1e-12);
            assert!((q_mod_dn_pair(&st, PI).unwrap().0 - (c + d)).abs() < 1e-12);
            assert!((q_mod_theta_at(&st, PI).unwrap() - (c + d)).abs() < 1e-10);
        }
    }

    #[test]
    fn theta_and_dn_forms_agree_on_lattice() {
        let mut worst: f64 = 0.0;
        for i in 0..20 {
            let xi = -0.49 + 0.8 * i as f64 / 19.0;
            let st = state(xi);
            for j in 0..10 {
                let u = -PI + 2.0 * PI * j as f64 / 10.0 + 0.1;
                let qt = q_mod_theta_at(&st, u).unwrap();
                let qd = q_mod_dn_at(&st, u).unwrap();
                worst = worst.max((qt - qd).abs() / (st.c + st.d));
                assert!(qt >= st.c - st.d - 1e-10 && qt <= st.c + st.d + 1e-10);
            }
        }
        assert!(worst <= 1e-8, "{worst}");
    }

    #[test]
    fn theta_null_ratio_matches_branch_points() {
        for i in 0..25 {
            let xi = -0.49 + 0.81 * i as f64 / 24.0;
            let st = state(xi);
            let expected = ((st.c + st.d) / (st.c - st.d)).sqrt();
            assert!((theta_null_ratio(&st).unwrap() - expected).abs() <= 1e-8 * expected, "xi={xi}");
        }
    }

    #[test]
    fn small_gap_limit_is_plateau_height() {
        let st = state(-0.5 + 1e-7);
        assert!(st.d <= 1e-3);
        for j in 0..8 {
            let u = j as f64 * 0.8;
            assert!((q_mod_theta_at(&st, u).unwrap() - 1.0).abs() <= 1e-3);
        }
    }

    #[test]
    fn envelope_limits() {
        let w = field();
        let (lo, hi) = w.envelope(-0.5 + 1e-9).unwrap();
        assert!((lo - 1.0).abs() < 1e-3 && (hi - 1.0).abs() < 1e-3);
        let (lo, hi) = w.envelope(1.0 / 3.0 - 1e-9).unwrap();
        assert!(lo.abs() < 1e-3 && (hi - 2.0).abs() < 1e-3);
        let (lo, hi) = w.envelope(0.1).unwrap();
        assert!((0.5 * (lo + hi) - 1.0).abs() < 1e-15);
        assert!(w.envelope(0.4).is_err());
    }

    #[test]
    fn model_matrix_forms_agree_and_are_unimodular() {
        let q = QuadratureSpec::default();
        for &xi in &[-0.45, 0.0, 0.3] {
            let st = state(xi);
            for k in [Complex64::new(2.0, 1.5), Complex64::new(-0.7, 0.4), Complex64::new(0.3, -2.0)] {
                let g = model_matrix_entries(&st, 10.0, k, ModelForm::Gamma, &q).unwrap();
                let l = model_matrix_entries(&st, 10.0, k, ModelForm::Lambda, &q).unwrap();
                for r in 0..2 {
                    for s in 0..2 {
                        assert!((g[r][s] - l[r][s]).norm() < 1e-10, "xi={xi} k={k}");
                    }
                }
                let det = g[0][0] * g[1][1] - g[0][1] * g[1][0];
                assert!((det - 1.0).norm() < 1e-10);
            }
            let far = model_matrix_entries(&st, 10.0, Complex64::new(0.0, 1e6), ModelForm::Gamma, &q).unwrap();
            assert!((far[0][0] - 1.0).norm() < 1e-5 && far[0][1].norm() < 1e-5);
            assert!(model_matrix_entries(&st, 10.0, Complex64::new(0.0, 0.5), ModelForm::Gamma, &q).is_err());
        }
    }

    #[test]
    fn model_matrix_reconstructs_q_mod() {
        let q = QuadratureSpec::default();
        for &xi in &[-0.45, 0.0, 0.3] {
            let st = state(xi);
            for &t in &[1.0, 10.0] {
                let expected = q_mod_theta_at(&st, st.u_phase(t)).unwrap();
                for form in [ModelForm::Gamma, ModelForm::Lambda] {
                    for entry in [(0, 1), (1, 0)] {
                        let v = model_matrix_limit(&st, t, form, entry, 50.0, &q).unwrap();
                        assert!((v - expected).abs() <= 1e-8, "xi={xi} t={t} {form:?} {entry:?}: {v} vs {expected}");
                    }
                }
            }
        }
        assert!(model_matrix_limit(&state(0.0), 1.0, ModelForm::Gamma, (0, 0), 50.0, &q).is_err());
    }

    #[test]
    fn wavenumber_tends_to_b_omega() {
        let w = field();
        for &xi in &[-0.4, 0.0, 0.25] {
            let near = w.local_wavenumber(xi, 1e4).unwrap();
            assert!(near.wavelength > 0.0);
            assert!((near.du_dx - near.leading).abs() < 1e-3 * near.leading.abs(), "xi={xi}");
            let a = w.local_wavenumber(xi, 100.0).unwrap().wavelength;
            let b = w.local_wavenumber(xi, 200.0).unwrap().wavelength;
            let c = w.local_wavenumber(xi, 400.0).unwrap().wavelength;
            // O(1/t) corrections halve with each doubling of t.
            assert!(((a - b) / (b - c) - 2.0).abs() < 0.05, "xi={xi}");
        }
        // Harmonic edge: wavenumber 2c.
        let edge = w.local_wavenumber(-0.5 + 1e-4, 1e6).unwrap();
        assert!((edge.wavelength - PI).abs() < 1e-3);
        assert!(matches!(w.local_wavenumber(-0.5 + 1e-13, 1.0), Err(Error::OutOfRange { edge: Edge::Lower, .. })));
    }

    #[test]
    fn samples_by_region() {
        let w = field();
        let p = w.sample(-100.0, 10.0).unwrap();
        assert_eq!((p.region.tag, p.q, p.error_order), (RegionTag::Plateau, 1.0, "O(t^-1/2)"));
        assert!(p.envelope_lo.is_none() && !p.low_confidence);
        let v = w.sample(1000.0, 10.0).unwrap();
        assert_eq!((v.region.tag, v.q), (RegionTag::Vanishing, 0.0));
        assert!(v.error_order.contains("dispersive"));
        let e = w.sample(0.0, 10.0).unwrap();
        let st = state(0.0);
        assert_eq!(e.region.tag, RegionTag::Elliptic);
        assert!(e.q >= 1.0 - st.d && e.q <= 1.0 + st.d);
        assert_eq!(e.envelope_lo, Some(1.0 - st.d));
        assert!(e.wavelength.unwrap() > 0.0);
        let b = w.sample(40.0 + 1e-9, 10.0).unwrap();
        assert!(b.low_confidence && b.region.tag == RegionTag::BoundaryLayer && b.q == 0.0);
        assert!(w.sample(0.0, 0.0).is_err());
    }

    #[test]
    fn continuity_across_lower_edge() {
        let w = field();
        let t = 10.0;
        let below = w.sample(12.0 * t * (-0.5 - 1e-4), t).unwrap();
        let above = w.sample(12.0 * t * (-0.5 + 1e-4), t).unwrap();
        assert!(below.low_confidence && above.low_confidence);
        assert!((below.q - above.q).abs() <= 2e-2);
        let top = w.sample(12.0 * t * (1.0 / 3.0 - 1e-7), t).unwrap();
        assert!(top.envelope_lo.unwrap() < 1e-3);
    }

    #[test]
    fn profile_csv_shape_and_determinism() {
        let w = field();
        let two = profile_csv(&w.profile(10.0, -100.0, 100.0, 2).unwrap());
        assert_eq!(two.lines().count(), 3);
        assert_eq!(two.lines().next().unwrap(), "x,t,xi,region,q,env_lo,env_hi,wavelength");
        let all = w.profile(1.0, -7.0, 5.0, 241).unwrap();
        let csv = profile_csv(&all);
        for tag in ["Plateau", "Elliptic", "Vanishing", "BoundaryLayer"] {
            assert!(csv.lines().skip(1).any(|l| l.split(',').nth(3) == Some(tag)), "{tag}");
        }
        assert_eq!(csv, profile_csv(&field().profile(1.0, -7.0, 5.0, 241).unwrap()));
        let first: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
        assert_eq!(first[0].parse::<f64>().unwrap(), -7.0);
        assert!(first[5].is_empty());
        assert!(w.profile(1.0, 0.0, 1.0, 1).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn q_mod_stays_in_envelope(xi in -0.499f64..0.333, u in -50.0f64..50.0) {
            let st = state(xi);
            let q = q_mod_theta_at(&st, u).unwrap();
            prop_assert!(q >= st.c - st.d - 1e-10 && q <= st.c + st.d + 1e-10);
            let shifted = q_mod_theta_at(&st, u + 2.0 * PI).unwrap();
            prop_assert!((q - shifted).abs() <= 1e-10 * (st.c + st.d));
        }
    }
}
