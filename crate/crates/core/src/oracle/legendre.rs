//! Legendre polynomials of integer degree by the three-term recurrence.

use std::f64::consts::PI;

use crate::error::{ArdcError, Result};
use crate::oracle::gamma::ln_gamma_ratio_half;

/// Degrees above this are refused; the recurrence cost and error grow with `nu`.
pub const MAX_DEGREE: u64 = 1_000_000;

/// `(P_nu(t), P_nu'(t))` for `|t| < 1`.
pub fn legendre_ref(nu: u64, t: f64) -> Result<(f64, f64)> {
    if nu > MAX_DEGREE {
        return Err(ArdcError::OracleRefusal(format!(
            "degree {nu} above the recurrence limit {MAX_DEGREE}"
        )));
    }
    if !(t.abs() < 1.0) {
        return Err(ArdcError::Domain { t });
    }
    if nu == 0 {
        return Ok((1.0, 0.0));
    }
    let mut p_prev = 1.0f64;
    let mut p = t;
    for k in 1..nu {
        let kf = k as f64;
        // (k+1) P_{k+1} = (2k+1) t P_k - k P_{k-1}
        let tp = t * p;
        let next = tp + kf / (kf + 1.0) * (tp - p_prev);
        p_prev = p;
        p = next;
    }
    let nf = nu as f64;
    let dp = nf * (p_prev - t * p) / (1.0 - t * t);
    Ok((p, dp))
}

/// `P_nu(0)` and `P_nu'(0)` from the gamma-function closed forms.
pub fn legendre_at_zero(nu: u64) -> Result<(f64, f64)> {
    // P_{2k}(0) = (-1)^k Gamma(k + 1/2) / (sqrt(pi) Gamma(k + 1)),
    // P_nu'(0) = nu P_{nu-1}(0)
    let even_value = |k: u64| -> Result<f64> {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        Ok(sign * ln_gamma_ratio_half(k as f64)?.exp() / PI.sqrt())
    };
    if nu % 2 == 0 {
        Ok((even_value(nu / 2)?, 0.0))
    } else {
        Ok((0.0, nu as f64 * even_value((nu - 1) / 2)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn small_degrees() {
        assert_eq!(legendre_ref(2, 0.0).unwrap().0, -0.5);
        let t = 0.3;
        let (p3, dp3) = legendre_ref(3, t).unwrap();
        assert_relative_eq!(p3, 0.5 * (5.0 * t * t * t - 3.0 * t), max_relative = 1e-15);
        assert_relative_eq!(dp3, 0.5 * (15.0 * t * t - 3.0), max_relative = 1e-14);
    }

    #[test]
    fn degree_ten_against_exact_rational() {
        // explicit P_10 coefficients over 256
        let c = [-63.0, 3465.0, -30030.0, 90090.0, -109395.0, 46189.0];
        let x: f64 = 0.5;
        let mut acc = 0.0;
        for (i, ci) in c.iter().enumerate() {
            acc += ci * x.powi(2 * i as i32);
        }
        let exact = acc / 256.0;
        assert_relative_eq!(legendre_ref(10, x).unwrap().0, exact, max_relative = 1e-14);
        assert_relative_eq!(exact, -0.188_228_607_177_734_4, max_relative = 1e-12);
    }

    #[test]
    fn closed_forms_at_zero_match_recurrence() {
        for nu in [1u64, 2, 3, 4, 7, 10, 25, 100, 101, 1000, 1001] {
            let (p, dp) = legendre_ref(nu, 0.0).unwrap();
            let (p0, dp0) = legendre_at_zero(nu).unwrap();
            assert!((p - p0).abs() <= 1e-13 * p0.abs().max(1e-300) + 1e-300, "nu={nu}");
            assert!((dp - dp0).abs() <= 1e-12 * dp0.abs().max(1.0), "nu={nu}");
        }
        assert_relative_eq!(legendre_at_zero(2).unwrap().0, -0.5, max_relative = 1e-14);
    }

    #[test]
    fn refuses_out_of_range() {
        assert!(matches!(
            legendre_ref(MAX_DEGREE + 1, 0.5),
            Err(ArdcError::OracleRefusal(_))
        ));
        assert!(matches!(legendre_ref(10, 1.0), Err(ArdcError::Domain { .. })));
    }
}
