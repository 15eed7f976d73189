//! Numerical checks of the residual bound for the continuous Riccati
//! iteration, and the residual-decay and roundoff experiments.

use num_complex::Complex64;
use serde::Serialize;

use crate::chebyshev::{basis, mat_rvec};
use crate::error::{ArdcError, Result};
use crate::problem::{BuiltinProblem, CoefficientPair};
use crate::riccati_step::{initial_iterate, one_defect_iteration, RiccatiIterate};

/// Concentric circles sampled by [`compute_ball_bounds`].
pub const CIRCLES: usize = 8;
/// Samples per circle used by default.
pub const SAMPLES_PER_CIRCLE: usize = 256;
/// Node count of the grid standing in for exact arithmetic.
pub const PROXY_N: usize = 64;
/// Observed residuals below `ROUNDING_ALLOWANCE * eta2^2` are rounding noise.
pub const ROUNDING_ALLOWANCE: f64 = 1e-13;
/// Deepest iteration examined by [`check_theorem`].
pub const J_CAP: usize = 24;
/// A sample this many times larger than `|omega(t)|` is taken as a pole.
const POLE_RATIO: f64 = 1e8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BallBounds {
    pub t_center: f64,
    pub rho: f64,
    /// `eta1 <= |omega| <= eta2`, `|omega'| <= eta3`, `|gamma| <= eta4` on the ball.
    pub eta1: f64,
    pub eta2: f64,
    pub eta3: f64,
    pub eta4: f64,
    pub samples_per_circle: usize,
}

impl BallBounds {
    /// `eta3 <= eta1^2 / 17` and `eta4 <= eta1^2 / (34 eta2)`.
    pub fn preconditions_hold(&self) -> bool {
        let e1sq = self.eta1 * self.eta1;
        self.eta1 > 0.0 && self.eta3 <= e1sq / 17.0 && self.eta4 <= e1sq / (34.0 * self.eta2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TheoremRow {
    pub j: usize,
    /// Rate `r(j)`, the smallest admissible for this `j`.
    pub r: f64,
    pub bound: f64,
    pub observed: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SuperasymptoticCheck {
    pub alpha: f64,
    pub k: usize,
    pub bound: f64,
    pub observed: f64,
    /// `k` lies beyond the validation depth; `observed` is taken at the depth.
    pub rounding_limited: bool,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TheoremCheck {
    pub bounds: BallBounds,
    pub eta_t1: f64,
    pub eta_t2: f64,
    pub eta_t3: f64,
    /// Largest `k` with `r(k) <= 3/4`.
    pub k_max: usize,
    /// Last `j` before the grid residual stopped decreasing.
    pub validation_depth: usize,
    pub allowance: f64,
    pub rows: Vec<TheoremRow>,
    pub superasymptotic: SuperasymptoticCheck,
}

impl TheoremCheck {
    pub fn all_hold(&self) -> bool {
        self.rows.iter().all(|r| r.holds) && self.superasymptotic.holds
    }
}

fn sample_omega(coeffs: &CoefficientPair, z: Complex64) -> Result<Complex64> {
    coeffs
        .omega_complex(z)
        .ok_or_else(|| ArdcError::InvalidParameter("ball bounds need a complex omega evaluator".into()))
}

fn sample_gamma(coeffs: &CoefficientPair, z: Complex64) -> Result<Complex64> {
    coeffs
        .gamma_complex(z)
        .ok_or_else(|| ArdcError::InvalidParameter("ball bounds need a complex gamma evaluator".into()))
}

/// Bounds on `|omega|`, `|omega'|` and `|gamma|` over the closed ball of
/// radius `rho` about `t`, from `CIRCLES` concentric circles of `samples`
/// points each plus the center. `omega'` uses complex central differences.
pub fn compute_ball_bounds(coeffs: &CoefficientPair, t: f64, rho: f64, samples: usize) -> Result<BallBounds> {
    if !(rho > 0.0 && rho.is_finite()) || !t.is_finite() {
        return Err(ArdcError::InvalidParameter(format!(
            "need finite t and rho > 0, got t = {t}, rho = {rho}"
        )));
    }
    if samples < 4 {
        return Err(ArdcError::InvalidParameter(format!(
            "need at least 4 samples per circle, got {samples}"
        )));
    }
    let center = Complex64::new(t, 0.0);
    let w_center = sample_omega(coeffs, center)?.norm();
    if !w_center.is_finite() {
        return Err(ArdcError::InvalidBall(format!(
            "omega is not finite at the center t = {t}"
        )));
    }
    let dz = 1e-5 * rho;
    let pole_level = POLE_RATIO * w_center.max(1.0);
    let mut b = BallBounds {
        t_center: t,
        rho,
        eta1: f64::INFINITY,
        eta2: 0.0,
        eta3: 0.0,
        eta4: 0.0,
        samples_per_circle: samples,
    };
    let mut visit = |z: Complex64| -> Result<()> {
        let w = sample_omega(coeffs, z)?;
        let dw = (sample_omega(coeffs, z + dz)? - sample_omega(coeffs, z - dz)?) / (2.0 * dz);
        let g = sample_gamma(coeffs, z)?;
        let (wa, dwa, ga) = (w.norm(), dw.norm(), g.norm());
        if !(wa.is_finite() && dwa.is_finite() && ga.is_finite()) || wa > pole_level || dwa * rho > pole_level {
            return Err(ArdcError::InvalidBall(format!(
                "coefficients blow up near z = {z} inside the ball of radius {rho} about {t}"
            )));
        }
        b.eta1 = b.eta1.min(wa);
        b.eta2 = b.eta2.max(wa);
        b.eta3 = b.eta3.max(dwa);
        b.eta4 = b.eta4.max(ga);
        Ok(())
    };
    visit(center)?;
    for c in 1..=CIRCLES {
        let radius = rho * c as f64 / CIRCLES as f64;
        for s in 0..samples {
            let theta = 2.0 * std::f64::consts::PI * s as f64 / samples as f64;
            visit(center + Complex64::from_polar(radius, theta))?;
        }
    }
    Ok(b)
}

/// `(eta~1, eta~2, eta~3)`; not applicable when the preconditions fail.
pub fn modified_constants(b: &BallBounds) -> Result<(f64, f64, f64)> {
    if !b.preconditions_hold() {
        return Err(ArdcError::NotApplicable(format!(
            "preconditions fail: eta3 = {:e} vs eta1^2/17 = {:e}, eta4 = {:e} vs eta1^2/(34 eta2) = {:e}",
            b.eta3,
            b.eta1 * b.eta1 / 17.0,
            b.eta4,
            b.eta1 * b.eta1 / (34.0 * b.eta2)
        )));
    }
    let e3 = b.eta3 + 2.0 * b.eta2 * b.eta4;
    let shift = 17.0 * e3 / (4.0 * b.eta1);
    Ok((b.eta1 - b.eta4 - shift, b.eta2 + b.eta4 + shift, e3))
}

/// `alpha = (1 + eta~2/eta~1) / (2 eta~1 rho)`, the per-iteration part of `r`.
pub fn rate_slope(rho: f64, e1: f64, e2: f64) -> f64 {
    (1.0 + e2 / e1) / (2.0 * e1 * rho)
}

/// `r(k) = alpha k + eta~3 / (4 eta~1^2)`.
pub fn rate(rho: f64, (e1, e2, e3): (f64, f64, f64), k: usize) -> f64 {
    rate_slope(rho, e1, e2) * k as f64 + e3 / (4.0 * e1 * e1)
}

/// Largest `k` with `r(k) <= 3/4`.
pub fn k_max(rho: f64, consts: (f64, f64, f64)) -> Result<usize> {
    let (e1, e2, e3) = consts;
    let alpha = rate_slope(rho, e1, e2);
    let slack = 0.75 - e3 / (4.0 * e1 * e1);
    if slack < 0.0 {
        return Err(ArdcError::NotApplicable(format!(
            "r(0) = {:e} exceeds 3/4",
            0.75 - slack
        )));
    }
    let mut k = (slack / alpha).floor().min(1e9) as usize;
    // floor of a ratio can land one past the boundary
    while k > 0 && rate(rho, consts, k) > 0.75 {
        k -= 1;
    }
    Ok(k)
}

/// `|R_j(t)|` for `j = 0..=j_count` at the center node of a `PROXY_N` grid on
/// `[t - rho/2, t + rho/2]`, and the grid max-norm of each residual.
pub fn observed_residuals(coeffs: &CoefficientPair, t: f64, rho: f64, j_count: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let b = basis(PROXY_N)?;
    let h = rho;
    let nodes = b.scaled_nodes(t - 0.5 * rho, h)?;
    let omega = nodes.iter().map(|&s| coeffs.omega(s)).collect::<Result<Vec<_>>>()?;
    let gamma = nodes.iter().map(|&s| coeffs.gamma(s)).collect::<Result<Vec<_>>>()?;
    let mid = PROXY_N / 2;
    let mut it = initial_iterate(&b, h, &omega, &gamma, 1)?;
    let mut at_t = vec![it.residual[mid].norm()];
    let mut norms = vec![it.res_norm];
    for _ in 0..j_count {
        it = match one_defect_iteration(&b, h, &it, &omega, &gamma) {
            Ok(next) => next,
            Err(ArdcError::DegenerateDenominator { .. }) => break,
            Err(e) => return Err(e),
        };
        at_t.push(it.residual[mid].norm());
        norms.push(it.res_norm);
    }
    Ok((at_t, norms))
}

/// Compares observed residuals at the ball center with the bound
/// `eta~3 r(j)^j` for `j <= min(k_max, j_cap)`, stopping where rounding takes
/// over the grid iteration.
pub fn check_theorem(bounds: &BallBounds, coeffs: &CoefficientPair, j_cap: usize) -> Result<TheoremCheck> {
    let consts = modified_constants(bounds)?;
    let (e1, e2, e3) = consts;
    let rho = bounds.rho;
    let kmax = k_max(rho, consts)?;
    let alpha = rate_slope(rho, e1, e2);
    let inv = 1.0 / (5.0 * alpha);
    let k_super = (inv - 1.0).ceil().max(0.0) as usize;
    let j_count = kmax.min(j_cap).max(k_super.min(j_cap));
    let (at_t, norms) = observed_residuals(coeffs, bounds.t_center, rho, j_count)?;
    let mut depth = 0;
    while depth + 1 < norms.len() && norms[depth + 1] < norms[depth] {
        depth += 1;
    }
    let allowance = ROUNDING_ALLOWANCE * bounds.eta2 * bounds.eta2;
    let rows = (0..=kmax.min(j_cap).min(depth))
        .map(|j| {
            let r = rate(rho, consts, j);
            let bound = e3 * r.powi(j as i32);
            let observed = at_t[j];
            TheoremRow {
                j,
                r,
                bound,
                observed,
                holds: observed <= bound + allowance,
            }
        })
        .collect();
    let kk = k_super.min(depth);
    let s_bound = std::f64::consts::E * e3 * (-inv).exp();
    let s_obs = at_t[kk];
    let superasymptotic = SuperasymptoticCheck {
        alpha,
        k: k_super,
        bound: s_bound,
        observed: s_obs,
        rounding_limited: kk < k_super,
        holds: s_obs <= s_bound + allowance,
    };
    Ok(TheoremCheck {
        bounds: *bounds,
        eta_t1: e1,
        eta_t2: e2,
        eta_t3: e3,
        k_max: kmax,
        validation_depth: depth,
        allowance,
        rows,
        superasymptotic,
    })
}

/// The constant-frequency limit `r = k / (omega rho)`: the largest `k` with
/// `r <= 3/4` for a ball `periods` oscillations wide.
pub fn constant_limit_k(periods: f64) -> usize {
    let omega_rho = 2.0 * std::f64::consts::PI * periods;
    (0.75 * omega_rho).floor() as usize
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualSeries {
    pub omega_max: f64,
    /// `None` for the Burst curve, the constant frequency for a roundoff model.
    pub omega_const: Option<f64>,
    pub res_norm: Vec<f64>,
}

fn sweep(
    b: &crate::chebyshev::ChebyshevBasis,
    h: f64,
    first: RiccatiIterate,
    omega: &[f64],
    j_count: usize,
) -> Result<Vec<f64>> {
    let gamma = vec![0.0; omega.len()];
    let mut it = first;
    let mut out = vec![it.res_norm];
    for _ in 0..j_count {
        it = one_defect_iteration(b, h, &it, omega, &gamma)?;
        out.push(it.res_norm);
    }
    Ok(out)
}

/// Grid max-norm of `R_j` for `j = 0..=j_count` on Burst with each peak
/// frequency, over `interval` as one step of `n` nodes.
pub fn residual_decay_experiment(
    omega_max: &[f64],
    n: usize,
    interval: (f64, f64),
    j_count: usize,
) -> Result<Vec<ResidualSeries>> {
    let (a, c) = interval;
    let h = c - a;
    let b = basis(n)?;
    let nodes = b.scaled_nodes(a, h)?;
    omega_max
        .iter()
        .map(|&wm| {
            let pair = BuiltinProblem::burst_with_peak(wm).coefficients()?;
            let omega = nodes.iter().map(|&t| pair.omega(t)).collect::<Result<Vec<_>>>()?;
            let gamma = vec![0.0; omega.len()];
            let first = initial_iterate(&b, h, &omega, &gamma, 1)?;
            Ok(ResidualSeries {
                omega_max: wm,
                omega_const: None,
                res_norm: sweep(&b, h, first, &omega, j_count)?,
            })
        })
        .collect()
}

/// The same sweep for constant `omega_const`, whose exact residual is zero.
///
/// The starting residual uses the unshifted product `D omega`, so it holds
/// exactly the rounding of the differentiation matrix; everything after
/// that is its amplification.
pub fn roundoff_model_experiment(omega_const: f64, n: usize, interval: (f64, f64), j_count: usize) -> Result<Vec<f64>> {
    let (a, c) = interval;
    let h = c - a;
    let b = basis(n)?;
    b.scaled_nodes(a, h)?;
    let omega = vec![omega_const; b.len()];
    let dw = mat_rvec(&b.scaled_diff(h)?, &omega);
    let x = omega.iter().map(|&w| Complex64::new(0.0, w)).collect();
    let r = dw.iter().map(|&d| Complex64::new(0.0, d)).collect();
    sweep(&b, h, RiccatiIterate::new(x, r, 0), &omega, j_count)
}

/// Burst curves followed by one roundoff model per peak frequency, the
/// model frequency being the smallest Burst frequency on the interval.
pub fn residual_demo(omega_max: &[f64], n: usize, interval: (f64, f64), j_count: usize) -> Result<Vec<ResidualSeries>> {
    let mut out = residual_decay_experiment(omega_max, n, interval, j_count)?;
    for &wm in omega_max {
        let pair = BuiltinProblem::burst_with_peak(wm).coefficients()?;
        let w_min = pair.omega(interval.0)?.min(pair.omega(interval.1)?);
        out.push(ResidualSeries {
            omega_max: wm,
            omega_const: Some(w_min),
            res_norm: roundoff_model_experiment(w_min, n, interval, j_count)?,
        });
    }
    Ok(out)
}

/// Geometric-mean reduction factor per iteration between `j_lo` and `j_hi`.
pub fn decay_rate(res_norm: &[f64], j_lo: usize, j_hi: usize) -> Result<f64> {
    if j_hi <= j_lo || j_hi >= res_norm.len() {
        return Err(ArdcError::InvalidParameter(format!(
            "need j_lo < j_hi < {}, got {j_lo}, {j_hi}",
            res_norm.len()
        )));
    }
    Ok((res_norm[j_hi] / res_norm[j_lo]).powf(1.0 / (j_hi - j_lo) as f64))
}

/// `ceil(log(1/eps) / log(rho omega))`, the predicted iteration count.
pub fn k_eps_heuristic(eps: f64, rho: f64, omega: f64) -> Result<usize> {
    if !(eps > 0.0) {
        return Err(ArdcError::InvalidParameter(format!("eps must be positive, got {eps}")));
    }
    let ro = rho * omega;
    if !(ro > 1.0) {
        return Err(ArdcError::NotApplicable(format!("rho omega = {ro} must exceed 1")));
    }
    if eps >= 1.0 {
        return Ok(0);
    }
    Ok(((1.0 / eps).ln() / ro.ln() - 1e-9).ceil() as usize)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn constant_frequency_bounds() {
        let pair = BuiltinProblem::Tone { omega: 40.0 }.coefficients().unwrap();
        let b = compute_ball_bounds(&pair, 0.5, 0.3, 64).unwrap();
        assert_eq!((b.eta1, b.eta2, b.eta3, b.eta4), (40.0, 40.0, 0.0, 0.0));
        let c = check_theorem(&b, &pair, 12).unwrap();
        assert_eq!(c.eta_t3, 0.0);
        assert!(c.rows.iter().all(|r| r.bound == 0.0 && r.observed == 0.0 && r.holds));
        assert_eq!(c.k_max, 9);
    }

    #[test]
    fn burst_bounds_match_closed_form() {
        let wm = 100.0;
        let pair = BuiltinProblem::burst_with_peak(wm).coefficients().unwrap();
        let (t, rho) = (0.25, 0.25);
        let b = compute_ball_bounds(&pair, t, rho, SAMPLES_PER_CIRCLE).unwrap();
        // |1 + z^2| on the outer circle, sampled far more finely
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for s in 0..100_000 {
            let z = Complex64::new(t, 0.0) + Complex64::from_polar(rho, s as f64 * 2.0 * std::f64::consts::PI / 1e5);
            let m = (1.0 + z * z).norm();
            lo = lo.min(m);
            hi = hi.max(m);
        }
        assert_relative_eq!(b.eta2, wm / lo, max_relative = 1e-3);
        assert_relative_eq!(b.eta1, wm / hi, max_relative = 1e-3);
        assert_eq!(b.eta4, 0.0);
        assert!(b.preconditions_hold());
    }

    #[test]
    fn pole_inside_ball_is_rejected() {
        let pair = BuiltinProblem::burst_with_peak(10.0).coefficients().unwrap();
        let err = compute_ball_bounds(&pair, 0.0, 1.0, 256).unwrap_err();
        assert!(matches!(err, ArdcError::InvalidBall(_)), "{err}");
    }

    #[test]
    fn slow_frequency_is_not_applicable() {
        let pair = BuiltinProblem::burst_with_peak(2.0).coefficients().unwrap();
        let b = compute_ball_bounds(&pair, 0.25, 0.5, 64).unwrap();
        assert!(matches!(check_theorem(&b, &pair, 8), Err(ArdcError::NotApplicable(_))));
    }

    #[test]
    fn burst_bound_holds() {
        for wm in [1e2, 1e3] {
            let pair = BuiltinProblem::burst_with_peak(wm).coefficients().unwrap();
            let b = compute_ball_bounds(&pair, 0.25, 0.2, SAMPLES_PER_CIRCLE).unwrap();
            let c = check_theorem(&b, &pair, J_CAP).unwrap();
            assert!(c.rows.len() >= 3);
            assert!(c.all_hold(), "{c:#?}");
        }
    }

    #[test]
    fn remark_limit() {
        assert_eq!(constant_limit_k(5.0), 23);
    }

    #[test]
    fn k_eps_examples() {
        assert_eq!(k_eps_heuristic(1e-12, 1.0, 1e4).unwrap(), 3);
        assert_eq!(k_eps_heuristic(1e-12, 0.1, 1e3).unwrap(), 6);
        assert_eq!(k_eps_heuristic(1.0, 1.0, 50.0).unwrap(), 0);
        assert!(matches!(
            k_eps_heuristic(1e-12, 0.1, 5.0),
            Err(ArdcError::NotApplicable(_))
        ));
    }

    #[test]
    fn roundoff_model_starts_at_rounding_level() {
        let r = roundoff_model_experiment(80.0, 16, (0.0, 0.5), 12).unwrap();
        assert_eq!(r.len(), 13);
        assert!(r[0] <= 1e-12 * 80.0 * 80.0);
    }
}
