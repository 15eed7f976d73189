//! Airy functions on the negative real axis, `Ai(-t)`, `Bi(-t)` and their
//! derivatives, for `t` in `[0, 1e8]`.
//!
//! Below [`CROSSOVER`] the values come from Taylor series marched out from the
//! origin along `v'' = -s v`. Above it the large-argument expansions are used,
//! with the phase `2/3 t^{3/2}` formed and reduced modulo `2 pi` in
//! double-double arithmetic so that huge arguments keep their digits.

#![allow(clippy::excessive_precision)]

use std::f64::consts::PI;

use crate::error::{ArdcError, Result};

/// Switch point between the series and the asymptotic expansion.
pub const CROSSOVER: f64 = 8.0;

/// Largest supported argument.
pub const T_MAX: f64 = 1e8;

pub const AI0: f64 = 0.355_028_053_887_817_239_26;
pub const AIP0: f64 = -0.258_819_403_792_806_798_40;
const SQRT3: f64 = 1.732_050_807_568_877_293_5;

/// Taylor march step on the series branch.
const MARCH: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AiryValues {
    /// `Ai(-t)`
    pub ai: f64,
    /// `Bi(-t)`
    pub bi: f64,
    /// `Ai'(-t)`, the derivative of `Ai` evaluated at `-t`.
    pub ai_prime: f64,
    /// `Bi'(-t)`
    pub bi_prime: f64,
    /// Estimated absolute error, relative to the local amplitude.
    pub est_err: f64,
}

impl AiryValues {
    /// `u(t) = Ai(-t) + i Bi(-t)` and `u'(t) = -Ai'(-t) - i Bi'(-t)`.
    pub fn solution(&self) -> (num_complex::Complex64, num_complex::Complex64) {
        (
            num_complex::Complex64::new(self.ai, self.bi),
            num_complex::Complex64::new(-self.ai_prime, -self.bi_prime),
        )
    }
}

/// Evaluates `Ai(-t)`, `Bi(-t)`, `Ai'(-t)`, `Bi'(-t)`.
pub fn airy_ref(t: f64) -> Result<AiryValues> {
    if !(0.0..=T_MAX).contains(&t) {
        return Err(ArdcError::OutOfRange {
            value: t,
            lo: 0.0,
            hi: T_MAX,
        });
    }
    if t <= CROSSOVER {
        Ok(airy_series(t))
    } else {
        Ok(airy_asymptotic(t))
    }
}

/// Series branch, valid for any `t >= 0` but only efficient and accurate up to
/// moderate `t`.
pub fn airy_series(t: f64) -> AiryValues {
    // v(s) = Ai(-s): v(0) = Ai(0), v'(0) = -Ai'(0); likewise for Bi.
    let mut a = (AI0, -AIP0);
    let mut b = (SQRT3 * AI0, SQRT3 * AIP0);
    let steps = (t / MARCH).ceil().max(1.0) as usize;
    let ds = t / steps as f64;
    let mut s0 = 0.0;
    for _ in 0..steps {
        a = taylor_step(s0, ds, a);
        b = taylor_step(s0, ds, b);
        s0 += ds;
    }
    AiryValues {
        ai: a.0,
        bi: b.0,
        ai_prime: -a.1,
        bi_prime: -b.1,
        est_err: 1e-15 * steps as f64,
    }
}

/// One Taylor step of `v'' = -s v` from `s0` over `ds`.
fn taylor_step(s0: f64, ds: f64, (v, dv): (f64, f64)) -> (f64, f64) {
    // (k+2)(k+1) b_{k+2} = -(s0 b_k + b_{k-1})
    let mut b = vec![v, dv];
    let mut val = v + dv * ds;
    let mut der = dv;
    let mut pow = ds; // ds^(k-1) for the derivative term of b_k
    let mut small = 0;
    for k in 0..80usize {
        let bkm1 = if k >= 1 { b[k - 1] } else { 0.0 };
        let next = -(s0 * b[k] + bkm1) / ((k + 2) as f64 * (k + 1) as f64);
        b.push(next);
        let kk = k + 2;
        let dterm = kk as f64 * next * pow;
        pow *= ds;
        let term = next * pow;
        val += term;
        der += dterm;
        let scale = v.abs() + dv.abs();
        if term.abs() <= 1e-19 * scale && dterm.abs() <= 1e-19 * scale {
            small += 1;
            if small >= 3 {
                break;
            }
        } else {
            small = 0;
        }
    }
    (val, der)
}

// double-double helpers
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

const TWO_PI_HI: f64 = std::f64::consts::TAU;
const TWO_PI_LO: f64 = 2.449_293_598_294_706_4e-16;
const QUARTER_PI_HI: f64 = std::f64::consts::FRAC_PI_4;
const QUARTER_PI_LO: f64 = 3.061_616_997_868_383e-17;
const TWO_THIRDS_HI: f64 = 0.666_666_666_666_666_6;
const TWO_THIRDS_LO: f64 = 3.700_743_415_417_188e-17;

/// `zeta = 2/3 t^{3/2}` as a double-double.
fn zeta_dd(t: f64) -> (f64, f64) {
    let s = t.sqrt();
    let r = (-s).mul_add(s, t);
    let s_lo = r / (2.0 * s);
    let (p, mut e) = two_prod(t, s);
    e += t * s_lo;
    let (p, e) = two_sum(p, e);
    let (m, mut me) = two_prod(p, TWO_THIRDS_HI);
    me += p * TWO_THIRDS_LO + e * TWO_THIRDS_HI;
    two_sum(m, me)
}

/// `zeta - pi/4` reduced into roughly `[-pi, pi]`.
fn reduced_phase(zeta: (f64, f64)) -> f64 {
    let k = (zeta.0 / TWO_PI_HI).round();
    let (a, ae) = two_prod(k, TWO_PI_HI);
    // zeta.0 and a agree to within a period, so this subtraction is exact
    let r = zeta.0 - a;
    let r = r - ae + zeta.1 - k * TWO_PI_LO;
    let (q, qe) = two_sum(r, -QUARTER_PI_HI);
    q + (qe - QUARTER_PI_LO)
}

/// Asymptotic branch; accurate for `t` at and above [`CROSSOVER`].
pub fn airy_asymptotic(t: f64) -> AiryValues {
    let zeta = zeta_dd(t);
    let z = zeta.0;
    // coefficients u_k, v_k until the terms stop shrinking
    let mut u = vec![1.0f64];
    let mut v = vec![1.0f64];
    let mut last = 1.0f64;
    let mut k = 1usize;
    loop {
        let kf = k as f64;
        let uk = u[k - 1] * (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0) / ((2.0 * kf - 1.0) * 216.0 * kf);
        let vk = -(6.0 * kf + 1.0) / (6.0 * kf - 1.0) * uk;
        let term = (uk.abs().max(vk.abs())) / z.powi(k as i32);
        if term > last || term < 1e-18 || k > 60 {
            last = term;
            break;
        }
        u.push(uk);
        v.push(vk);
        last = term;
        k += 1;
    }
    let zi = 1.0 / z;
    let (mut pu, mut qu, mut pv, mut qv) = (0.0, 0.0, 0.0, 0.0);
    // sum smallest terms first
    for j in (0..u.len()).rev() {
        let sign = if (j / 2) % 2 == 0 { 1.0 } else { -1.0 };
        let zp = zi.powi(j as i32);
        if j % 2 == 0 {
            pu += sign * u[j] * zp;
            pv += sign * v[j] * zp;
        } else {
            qu += sign * u[j] * zp;
            qv += sign * v[j] * zp;
        }
    }
    let theta = reduced_phase(zeta);
    let (sn, cs) = theta.sin_cos();
    let amp = 1.0 / (PI.sqrt() * t.powf(0.25));
    let damp = t.powf(0.25) / PI.sqrt();
    AiryValues {
        ai: amp * (cs * pu + sn * qu),
        bi: amp * (-sn * pu + cs * qu),
        ai_prime: damp * (sn * pv - cs * qv),
        bi_prime: damp * (cs * pv + sn * qv),
        est_err: last.max(4.0 * f64::EPSILON),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::gamma::ln_gamma;
    use approx::assert_relative_eq;

    #[test]
    fn origin_values() {
        let v = airy_ref(0.0).unwrap();
        let ai0 = 3f64.powf(-2.0 / 3.0) / ln_gamma(2.0 / 3.0).unwrap().exp();
        assert_relative_eq!(v.ai, ai0, max_relative = 1e-14);
        assert_relative_eq!(v.bi, SQRT3 * ai0, max_relative = 1e-14);
        let aip0 = -(3f64.powf(-1.0 / 3.0)) / ln_gamma(1.0 / 3.0).unwrap().exp();
        assert_relative_eq!(v.ai_prime, aip0, max_relative = 1e-14);
    }

    #[test]
    fn value_at_one() {
        let v = airy_ref(1.0).unwrap();
        assert_relative_eq!(v.ai, 0.535_560_883_292_352_1, max_relative = 1e-13);
        assert_relative_eq!(v.bi, 0.103_997_389_496_944_6, max_relative = 1e-12);
    }

    #[test]
    fn wronskian() {
        for &t in &[0.0, 0.3, 1.0, 2.5, 7.9, 8.0, 8.1, 12.0, 100.0, 3.7e3, 1e6, 1e8] {
            let v = airy_ref(t).unwrap();
            let w = v.ai * v.bi_prime - v.ai_prime * v.bi;
            assert!((w * PI - 1.0).abs() < 1e-11, "t={t} w*pi={}", w * PI);
        }
    }

    #[test]
    fn branches_agree_in_overlap_band() {
        for i in 0..=20 {
            let t = CROSSOVER + i as f64 * 0.05;
            let a = airy_series(t);
            let b = airy_asymptotic(t);
            let scale = t.powf(-0.25);
            let dscale = t.powf(0.25);
            assert!((a.ai - b.ai).abs() < 1e-12 * scale, "t={t}");
            assert!((a.bi - b.bi).abs() < 1e-12 * scale, "t={t}");
            assert!((a.ai_prime - b.ai_prime).abs() < 1e-12 * dscale, "t={t}");
            assert!((a.bi_prime - b.bi_prime).abs() < 1e-12 * dscale, "t={t}");
        }
    }

    #[test]
    fn phase_reduction_is_exact_for_large_arguments() {
        // t = 9 * 4^k gives zeta = 18 * 8^k, an exact integer
        for k in 0..12 {
            let t = 9.0 * 4f64.powi(k);
            let z = zeta_dd(t);
            assert_eq!(z.0 + z.1, 18.0 * 8f64.powi(k));
        }
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(airy_ref(-1.0).is_err());
        assert!(airy_ref(2e8).is_err());
    }
}
