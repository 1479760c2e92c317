//! Complete elliptic integral of the first kind and the Jacobi `dn` function,
//! both in the parameter convention `m = k²`.

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};

/// Cap on the descending Landen / AGM recursion.
const MAX_LANDEN_STEPS: usize = 32;

fn check_parameter(m: f64) -> Result<()> {
    if !(0.0..1.0).contains(&m) {
        return Err(Error::domain(format!("elliptic parameter m = {m} must lie in [0, 1)")));
    }
    Ok(())
}

fn check_complement(mc: f64) -> Result<()> {
    if !(mc > 0.0 && mc <= 1.0) {
        return Err(Error::domain(format!("complementary parameter 1 − m = {mc} must lie in (0, 1]")));
    }
    Ok(())
}

/// `K(m) = ∫₀^{π/2} dθ / √(1 − m sin²θ)` via the arithmetic-geometric mean.
pub fn complete_elliptic_k(m: f64) -> Result<f64> {
    check_parameter(m)?;
    complete_elliptic_k_mc(1.0 - m)
}

/// `K` as a function of the complementary parameter `1 − m`, accurate as
/// `m → 1`.
pub fn complete_elliptic_k_mc(mc: f64) -> Result<f64> {
    check_complement(mc)?;
    let mut a = 1.0_f64;
    let mut b = mc.sqrt();
    for _ in 0..MAX_LANDEN_STEPS {
        if (a - b).abs() <= 1e-16 * a {
            break;
        }
        let next = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = next;
    }
    Ok(FRAC_PI_2 / a)
}

/// Jacobi elliptic functions `(sn, cn, dn)` by descending Landen transformation.
pub fn jacobi_sncndn(u: f64, m: f64) -> Result<(f64, f64, f64)> {
    check_parameter(m)?;
    jacobi_sncndn_mc(u, 1.0 - m)
}

/// Same as [`jacobi_sncndn`] with the complementary parameter `1 − m`.
pub fn jacobi_sncndn_mc(u: f64, mc: f64) -> Result<(f64, f64, f64)> {
    check_complement(mc)?;
    let m = 1.0 - mc;
    if m == 0.0 {
        return Ok((u.sin(), u.cos(), 1.0));
    }
    // Reduce to one real period 4K first; dn alone has period 2K.
    let quarter = complete_elliptic_k_mc(mc)?;
    let period = 4.0 * quarter;
    let u = u - period * (u / period).round();

    let mut a = [0.0_f64; MAX_LANDEN_STEPS + 1];
    let mut c = [0.0_f64; MAX_LANDEN_STEPS + 1];
    a[0] = 1.0;
    let mut b = mc.sqrt();
    c[0] = m.sqrt();
    let mut n = 0;
    while n < MAX_LANDEN_STEPS && c[n].abs() > 1e-16 {
        a[n + 1] = 0.5 * (a[n] + b);
        c[n + 1] = 0.5 * (a[n] - b);
        b = (a[n] * b).sqrt();
        n += 1;
    }
    let mut phi = (1u64 << n) as f64 * a[n] * u;
    let mut prev = phi;
    for j in (1..=n).rev() {
        prev = phi;
        phi = 0.5 * (phi + (c[j] / a[j] * phi.sin()).asin());
    }
    let sn = phi.sin();
    let cn = phi.cos();
    let dn = if n == 0 {
        1.0
    } else if cn.abs() < 0.5 {
        (mc + m * cn * cn).sqrt()
    } else {
        cn / (prev - phi).cos()
    };
    Ok((sn, cn, dn))
}

/// `dn(u | m)`; periodic with period `2K(m)` and valued in `[√(1−m), 1]`.
pub fn jacobi_dn(u: f64, m: f64) -> Result<f64> {
    jacobi_sncndn(u, m).map(|(_, _, dn)| dn)
}

pub fn jacobi_dn_mc(u: f64, mc: f64) -> Result<f64> {
    jacobi_sncndn_mc(u, mc).map(|(_, _, dn)| dn)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::quad::{integrate, QuadratureSpec};
    use std::f64::consts::PI;

    fn k_by_quadrature(m: f64) -> f64 {
        integrate(
            |th: f64| 1.0 / (1.0 - m * th.sin().powi(2)).sqrt(),
            0.0,
            PI / 2.0,
            &QuadratureSpec::default().with_tolerances(1e-15, 1e-14),
        )
        .unwrap()
    }

    #[test]
    fn k_at_zero_is_half_pi() {
        assert_eq!(complete_elliptic_k(0.0).unwrap(), PI / 2.0);
    }

    #[test]
    fn k_at_half_matches_quadrature_oracle() {
        // 1.8540746773013719 from the defining integral
        let oracle = k_by_quadrature(0.5);
        assert!((oracle - 1.854_074_677_301_372).abs() < 1e-14);
        assert!((complete_elliptic_k(0.5).unwrap() - oracle).abs() < 1e-12 * oracle);
    }

    #[test]
    fn k_near_one_is_large_and_finite() {
        let k = complete_elliptic_k(1.0 - 1e-8).unwrap();
        assert!(k.is_finite() && k > 10.0);
        // Logarithmic asymptote ln(4/√(1−m)).
        assert!((k - (4.0 / 1e-4_f64).ln()).abs() < 1e-6);
    }

    #[test]
    fn k_matches_integral_on_grid() {
        for i in 1..10 {
            let m = i as f64 / 10.0;
            let oracle = k_by_quadrature(m);
            assert!((complete_elliptic_k(m).unwrap() - oracle).abs() <= 1e-11 * oracle, "m={m}");
        }
    }

    #[test]
    fn parameter_out_of_range_is_domain_error() {
        assert!(complete_elliptic_k(1.0).is_err());
        assert!(complete_elliptic_k(-0.1).is_err());
        assert!(jacobi_dn(0.3, 1.2).is_err());
    }

    #[test]
    fn dn_special_values() {
        assert_eq!(jacobi_dn(0.0, 0.7).unwrap(), 1.0);
        assert_eq!(jacobi_dn(3.7, 0.0).unwrap(), 1.0);
        let k = complete_elliptic_k(0.5).unwrap();
        assert!((jacobi_dn(k, 0.5).unwrap() - 0.5_f64.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn dn_periodicity_and_quarter_period_identity() {
        for &m in &[0.01, 0.3, 0.5, 0.9, 0.999] {
            let k = complete_elliptic_k(m).unwrap();
            for i in 0..25 {
                let u = -3.0 + 0.37 * i as f64;
                let dn = jacobi_dn(u, m).unwrap();
                assert!((jacobi_dn(u + 2.0 * k, m).unwrap() - dn).abs() < 1e-12);
                let prod = jacobi_dn(u + k, m).unwrap() * dn;
                assert!((prod - (1.0 - m).sqrt()).abs() < 1e-12, "m={m} u={u}");
                assert!(dn >= (1.0 - m).sqrt() - 1e-14 && dn <= 1.0 + 1e-14);
            }
        }
    }

    #[test]
    fn complementary_forms_near_one() {
        let mc = 1e-20;
        let k = complete_elliptic_k_mc(mc).unwrap();
        assert!((k - (4.0 / 1e-10_f64).ln()).abs() < 1e-12);
        assert!((jacobi_dn_mc(k, mc).unwrap() - 1e-10).abs() < 1e-16);
        assert_eq!(complete_elliptic_k_mc(0.5).unwrap(), complete_elliptic_k(0.5).unwrap());
        assert!(complete_elliptic_k_mc(0.0).is_err());
    }

    #[test]
    fn sn_cn_dn_pythagorean() {
        for &m in &[0.2, 0.8] {
            for i in 0..10 {
                let u = 0.4 * i as f64;
                let (sn, cn, dn) = jacobi_sncndn(u, m).unwrap();
                assert!((sn * sn + cn * cn - 1.0).abs() < 1e-14);
                assert!((dn * dn + m * sn * sn - 1.0).abs() < 1e-14);
            }
        }
    }
}
