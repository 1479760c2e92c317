//! Adaptive Gauss-Kronrod (7/15) quadrature with change of variables for
//! inverse-square-root endpoint singularities and for semi-infinite ranges.
//!
//! A declared singular endpoint `e` is removed with `x = e ± u²`, which turns
//! `(x - e)^{-1/2} g(x)` into the smooth `2 g(e ± u²)`. When both endpoints are
//! singular the interval is split at its midpoint first.

use std::collections::BinaryHeap;
use std::cmp::Ordering;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Values that can be integrated: real or complex scalars.
pub trait QuadValue: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
    fn magnitude(&self) -> f64;
    fn is_finite_value(&self) -> bool;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
    fn is_finite_value(&self) -> bool {
        self.is_finite()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
    fn is_finite_value(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

/// Which endpoints of `[a, b]` carry an inverse-square-root singularity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Singularity {
    #[default]
    None,
    Left,
    Right,
    Both,
}

impl Singularity {
    pub fn left(self) -> bool {
        matches!(self, Singularity::Left | Singularity::Both)
    }

    pub fn right(self) -> bool {
        matches!(self, Singularity::Right | Singularity::Both)
    }

    pub fn from_flags(left: bool, right: bool) -> Self {
        match (left, right) {
            (false, false) => Singularity::None,
            (true, false) => Singularity::Left,
            (false, true) => Singularity::Right,
            (true, true) => Singularity::Both,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Maximum bisection depth of any subinterval.
    pub max_depth: u32,
    /// Hard cap on the number of subintervals.
    pub max_intervals: usize,
    pub singularity: Singularity,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            abs_tol: 1e-13,
            rel_tol: 1e-12,
            max_depth: 48,
            max_intervals: 4000,
            singularity: Singularity::None,
        }
    }
}

impl QuadratureSpec {
    pub fn with_singularity(mut self, singularity: Singularity) -> Self {
        self.singularity = singularity;
        self
    }

    pub fn with_tolerances(mut self, abs_tol: f64, rel_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self.rel_tol = rel_tol;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return Err(Error::domain("quadrature tolerances must be positive"));
        }
        if self.max_depth == 0 || self.max_depth > 64 {
            return Err(Error::domain("quadrature max_depth must lie in 1..=64"));
        }
        Ok(())
    }
}

// Kronrod 15-point abscissae and weights; every second abscissa is a
// Gauss 7-point node.
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

struct Panel<T> {
    a: f64,
    b: f64,
    depth: u32,
    value: T,
    error: f64,
}

impl<T> PartialEq for Panel<T> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl<T> Eq for Panel<T> {}
impl<T> PartialOrd for Panel<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T> Ord for Panel<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gauss_kronrod<T: QuadValue, F: FnMut(f64) -> T>(f: &mut F, a: f64, b: f64) -> (T, f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut abs_sum = fc.magnitude() * WGK[7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        kronrod = kronrod + (f1 + f2) * WGK[j];
        abs_sum += (f1.magnitude() + f2.magnitude()) * WGK[j];
        if j % 2 == 1 {
            gauss = gauss + (f1 + f2) * WG[j / 2];
        }
    }
    let value = kronrod * half;
    let error = ((kronrod - gauss) * half).magnitude();
    (value, error, abs_sum * half.abs())
}

/// Integrates a smooth (or integrably mild) function over a finite interval,
/// ignoring the singularity flags of `spec`.
fn integrate_smooth<T: QuadValue, F: FnMut(f64) -> T>(
    mut f: F,
    a: f64,
    b: f64,
    spec: &QuadratureSpec,
) -> Result<T> {
    if a == b {
        return Ok(T::zero());
    }
    let (v, e, abs_sum) = gauss_kronrod(&mut f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Panel { a, b, depth: 0, value: v, error: e });
    let mut total = v;
    let mut total_err = e;
    let mut roundoff = abs_sum * 50.0 * f64::EPSILON;
    loop {
        if !total.is_finite_value() {
            return Err(Error::Convergence {
                estimate: f64::NAN,
                error_bound: f64::INFINITY,
            });
        }
        let target = spec
            .abs_tol
            .max(spec.rel_tol * total.magnitude())
            .max(roundoff);
        if total_err <= target {
            return Ok(total);
        }
        let worst = heap.pop().expect("heap never empties");
        if worst.depth >= spec.max_depth || heap.len() + 2 > spec.max_intervals {
            return Err(Error::Convergence {
                estimate: total.magnitude(),
                error_bound: total_err,
            });
        }
        let mid = 0.5 * (worst.a + worst.b);
        let (v1, e1, s1) = gauss_kronrod(&mut f, worst.a, mid);
        let (v2, e2, s2) = gauss_kronrod(&mut f, mid, worst.b);
        total = total - worst.value + v1 + v2;
        total_err = total_err - worst.error + e1 + e2;
        roundoff = roundoff.max((s1 + s2) * 50.0 * f64::EPSILON);
        heap.push(Panel { a: worst.a, b: mid, depth: worst.depth + 1, value: v1, error: e1 });
        heap.push(Panel { a: mid, b: worst.b, depth: worst.depth + 1, value: v2, error: e2 });
    }
}

/// Adaptive integral of `f` over `[a, b]`.
///
/// Declared endpoint singularities must be of inverse-square-root type (or
/// milder); they are removed by the substitution `x = endpoint ± u²`.
pub fn integrate<T: QuadValue, F: Fn(f64) -> T>(
    f: F,
    a: f64,
    b: f64,
    spec: &QuadratureSpec,
) -> Result<T> {
    integrate_ref(&f, a, b, spec)
}

fn integrate_ref<T: QuadValue, F: Fn(f64) -> T>(
    f: &F,
    a: f64,
    b: f64,
    spec: &QuadratureSpec,
) -> Result<T> {
    spec.validate()?;
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::domain("integration limits must be finite; use integrate_semi_infinite"));
    }
    if a == b {
        return Ok(T::zero());
    }
    if a > b {
        let spec = spec.with_singularity(Singularity::from_flags(
            spec.singularity.right(),
            spec.singularity.left(),
        ));
        return integrate_ref(f, b, a, &spec).map(|v| v * -1.0);
    }
    match spec.singularity {
        Singularity::None => integrate_smooth(f, a, b, spec),
        Singularity::Left => {
            let h = (b - a).sqrt();
            integrate_smooth(|u: f64| f(a + u * u) * (2.0 * u), 0.0, h, spec)
        }
        Singularity::Right => {
            let h = (b - a).sqrt();
            integrate_smooth(|u: f64| f(b - u * u) * (2.0 * u), 0.0, h, spec)
        }
        Singularity::Both => {
            let mid = 0.5 * (a + b);
            let left = integrate_ref(f, a, mid, &spec.with_singularity(Singularity::Left))?;
            let right = integrate_ref(f, mid, b, &spec.with_singularity(Singularity::Right))?;
            Ok(left + right)
        }
    }
}

/// Integral over a finite interval split at interior breakpoints (kinks or
/// jumps of the integrand). Endpoint singularity flags apply to the outer
/// ends only.
pub fn integrate_with_breaks<T: QuadValue, F: Fn(f64) -> T>(
    f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    spec: &QuadratureSpec,
) -> Result<T> {
    let mut interior: Vec<f64> =
        breaks.iter().copied().filter(|&p| p > a.min(b) && p < a.max(b)).collect();
    if a > b {
        interior.sort_by(|x, y| y.total_cmp(x));
    } else {
        interior.sort_by(|x, y| x.total_cmp(y));
    }
    interior.dedup();
    let mut points = vec![a];
    points.extend(interior);
    points.push(b);
    let n = points.len() - 1;
    let mut total = T::zero();
    for i in 0..n {
        let left = i == 0 && spec.singularity.left();
        let right = i == n - 1 && spec.singularity.right();
        let piece_spec = spec.with_singularity(Singularity::from_flags(left, right));
        total = total + integrate_ref(&f, points[i], points[i + 1], &piece_spec)?;
    }
    Ok(total)
}

/// Integral of `f` over `[a, ∞)` through `x = a + u / (1 - u)`.
///
/// The integrand must decay at least like `x^{-1-ε}`.
pub fn integrate_semi_infinite<T: QuadValue, F: Fn(f64) -> T>(
    f: F,
    a: f64,
    spec: &QuadratureSpec,
) -> Result<T> {
    spec.validate()?;
    let left_singular = spec.singularity.left();
    let inner = spec.with_singularity(Singularity::None);
    // Peel off [a, a+1] so the square-root substitution sees a finite panel.
    let (head, start) = if left_singular {
        (integrate_ref(&f, a, a + 1.0, &spec.with_singularity(Singularity::Left))?, a + 1.0)
    } else {
        (T::zero(), a)
    };
    let mapped = |u: f64| {
        let v = 1.0 - u;
        let x = start + u / v;
        let g = f(x) * (1.0 / (v * v));
        if g.is_finite_value() {
            g
        } else {
            T::zero()
        }
    };
    Ok(head + integrate_smooth(mapped, 0.0, 1.0, &inner)?)
}
