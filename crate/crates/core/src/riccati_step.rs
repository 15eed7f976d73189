//! Oscillatory steps: defect correction for the Riccati phase derivative
//! `x = u'/u` on one Chebyshev grid, then matching to the step's initial data.
//!
//! Only the `+` branch (`x ~ i omega`) is iterated. With real coefficients the
//! `-` branch is its complex conjugate.

use num_complex::Complex64;

use crate::chebyshev::ChebyshevBasis;
use crate::error::{ArdcError, Result};

/// Default iteration cap; the non-decrease rule stops far earlier in practice.
pub const J_MAX: usize = 32;

/// Relative size of `|x + gamma|` below which an update is refused.
const DENOMINATOR_FLOOR: f64 = 1e-14;

/// Relative size of `Im x+(t_i)` below which the matching system is singular.
const MATCHING_FLOOR: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq)]
pub struct RiccatiIterate {
    pub x: Vec<Complex64>,
    pub residual: Vec<Complex64>,
    pub res_norm: f64,
    pub j: usize,
}

impl RiccatiIterate {
    pub(crate) fn new(x: Vec<Complex64>, residual: Vec<Complex64>, j: usize) -> Self {
        let res_norm = max_abs(&residual);
        Self {
            x,
            residual,
            res_norm,
            j,
        }
    }

    fn conj(&self) -> Self {
        Self {
            x: self.x.iter().map(|v| v.conj()).collect(),
            residual: self.residual.iter().map(|v| v.conj()).collect(),
            res_norm: self.res_norm,
            j: self.j,
        }
    }
}

/// Result of [`defect_correct`].
#[derive(Debug, Clone, PartialEq)]
pub struct DefectCorrection {
    pub iterate: RiccatiIterate,
    pub converged: bool,
    /// `res_norm` of every iterate computed, including a final rejected one.
    pub history: Vec<f64>,
}

/// One attempted oscillatory step.
#[derive(Debug, Clone, PartialEq)]
pub struct RiccatiStepResult {
    pub accepted: bool,
    pub t_i: f64,
    pub h: f64,
    pub u_end: Complex64,
    pub du_end: Complex64,
    /// Final `+` branch iterate at the nodes.
    pub x_plus: Vec<Complex64>,
    /// `z+(t_i + h) - z+(t_i)`.
    pub phase_increment: Complex64,
    pub iterations: usize,
    pub res_norm_final: f64,
    /// `z+` at the nodes (zero at `t_i`); absent in endpoint-only mode.
    pub z_plus: Option<Vec<Complex64>>,
    pub a_plus: Complex64,
    pub a_minus: Complex64,
    pub history: Vec<f64>,
    /// Why the step was rejected, when it was.
    pub failure: Option<ArdcError>,
}

pub(crate) fn max_abs(v: &[Complex64]) -> f64 {
    v.iter().fold(0.0f64, |m, z| {
        let a = z.norm();
        if a.is_nan() || m.is_nan() {
            f64::NAN
        } else {
            m.max(a)
        }
    })
}

fn check_lengths(basis: &ChebyshevBasis, lens: &[usize]) -> Result<()> {
    for &l in lens {
        if l != basis.len() {
            return Err(ArdcError::InvalidParameter(format!(
                "expected vectors of length {}, got {l}",
                basis.len()
            )));
        }
    }
    Ok(())
}

/// `R[x] = D x + x^2 + 2 gamma x + omega^2` at the nodes, evaluated from scratch.
pub fn riccati_residual(
    basis: &ChebyshevBasis,
    h: f64,
    x: &[Complex64],
    omega: &[f64],
    gamma: &[f64],
) -> Result<Vec<Complex64>> {
    check_lengths(basis, &[x.len(), omega.len(), gamma.len()])?;
    if x.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(ArdcError::NonFinite("Riccati residual input".into()));
    }
    let dx = basis.diff_c(h, x);
    Ok((0..x.len())
        .map(|l| dx[l] + x[l] * x[l] + 2.0 * gamma[l] * x[l] + omega[l] * omega[l])
        .collect())
}

/// `x0 = branch * i omega` with its residual `branch * i (omega' + 2 gamma omega)`.
pub fn initial_iterate(
    basis: &ChebyshevBasis,
    h: f64,
    omega: &[f64],
    gamma: &[f64],
    branch: i8,
) -> Result<RiccatiIterate> {
    check_lengths(basis, &[omega.len(), gamma.len()])?;
    let s = if branch < 0 { -1.0 } else { 1.0 };
    let dw = basis.diff_r(h, omega);
    let x: Vec<Complex64> = omega.iter().map(|&w| Complex64::new(0.0, s * w)).collect();
    let r: Vec<Complex64> = (0..omega.len())
        .map(|l| Complex64::new(0.0, s * (dw[l] + 2.0 * gamma[l] * omega[l])))
        .collect();
    Ok(RiccatiIterate::new(x, r, 0))
}

/// One update `x <- x + delta`, `delta = -R / (2 (x + gamma))`.
///
/// The new residual is `D delta + delta^2`, which equals `R[x + delta]`
/// exactly in exact arithmetic and avoids the `omega^2` cancellation of the
/// from-scratch formula.
pub fn one_defect_iteration(
    basis: &ChebyshevBasis,
    h: f64,
    it: &RiccatiIterate,
    omega: &[f64],
    gamma: &[f64],
) -> Result<RiccatiIterate> {
    check_lengths(basis, &[it.x.len(), omega.len(), gamma.len()])?;
    let mut delta = Vec::with_capacity(it.x.len());
    for l in 0..it.x.len() {
        let den = it.x[l] + gamma[l];
        let mag = den.norm();
        if !(mag >= DENOMINATOR_FLOOR * omega[l].abs().max(1.0)) {
            return Err(ArdcError::DegenerateDenominator {
                node: l,
                magnitude: mag,
            });
        }
        delta.push(-it.residual[l] / (2.0 * den));
    }
    let dd = basis.diff_c(h, &delta);
    let x: Vec<Complex64> = it.x.iter().zip(&delta).map(|(x, d)| x + d).collect();
    let r: Vec<Complex64> = dd.iter().zip(&delta).map(|(a, d)| a + d * d).collect();
    Ok(RiccatiIterate::new(x, r, it.j + 1))
}

/// Iterates until `res_norm < eps` (converged) or the residual stops
/// decreasing (not converged; the previous iterate is returned).
///
/// `x0 = i omega` carries no amplitude variation, so unless its residual is
/// exactly zero at least one correction is taken before testing against
/// `eps`. On long steps the absolute residual of `x0` can fall below a loose
/// `eps` while the missing amplitude factor is still O(1).
pub fn defect_correct(
    basis: &ChebyshevBasis,
    h: f64,
    omega: &[f64],
    gamma: &[f64],
    eps: f64,
    branch: i8,
    j_max: usize,
) -> Result<DefectCorrection> {
    let mut it = initial_iterate(basis, h, omega, gamma, 1)?;
    let mut history = vec![it.res_norm];
    let mut converged = it.res_norm == 0.0;
    while !converged && it.j < j_max {
        let next = one_defect_iteration(basis, h, &it, omega, gamma)?;
        history.push(next.res_norm);
        if !(next.res_norm < it.res_norm) {
            converged = it.res_norm < eps;
            break;
        }
        it = next;
        converged = it.res_norm < eps;
    }
    if branch < 0 {
        it = it.conj();
    }
    Ok(DefectCorrection {
        iterate: it,
        converged,
        history,
    })
}

/// Residual norms for `j = 0..=j_count` with no stopping rule.
pub fn residual_sweep(
    basis: &ChebyshevBasis,
    h: f64,
    omega: &[f64],
    gamma: &[f64],
    j_count: usize,
) -> Result<Vec<f64>> {
    let mut it = initial_iterate(basis, h, omega, gamma, 1)?;
    let mut out = vec![it.res_norm];
    for _ in 0..j_count {
        it = one_defect_iteration(basis, h, &it, omega, gamma)?;
        out.push(it.res_norm);
    }
    Ok(out)
}

/// `u = A+ e^{z+} + A- e^{z-}`, `u' = A+ x+ e^{z+} + A- x- e^{z-}` with the
/// `-` quantities taken as conjugates.
pub fn combine_branches(
    a_plus: Complex64,
    a_minus: Complex64,
    z_plus: Complex64,
    x_plus: Complex64,
) -> (Complex64, Complex64) {
    let ep = z_plus.exp();
    let em = z_plus.conj().exp();
    let u = a_plus * ep + a_minus * em;
    let du = a_plus * x_plus * ep + a_minus * x_plus.conj() * em;
    (u, du)
}

/// Matching coefficients `A+-` for data `(u_i, du_i)` at `t_i`.
pub fn matching_coefficients(
    t_i: f64,
    x_plus_ti: Complex64,
    u_i: Complex64,
    du_i: Complex64,
) -> Result<(Complex64, Complex64)> {
    let x_minus = x_plus_ti.conj();
    if !(x_plus_ti.im.abs() > MATCHING_FLOOR * x_plus_ti.norm()) {
        return Err(ArdcError::DegenerateMatching {
            t: t_i,
            im_x: x_plus_ti.im,
        });
    }
    let a_plus = (du_i - u_i * x_minus) / (x_plus_ti - x_minus);
    let a_minus = (du_i - u_i * x_plus_ti) / (x_minus - x_plus_ti);
    Ok((a_plus, a_minus))
}

/// Matches the `+` iterate to `(u_i, du_i)` at `t_i` and reconstructs the
/// endpoint values. The returned result is marked accepted.
pub fn match_and_reconstruct(
    basis: &ChebyshevBasis,
    t_i: f64,
    h: f64,
    x_plus: &[Complex64],
    u_i: Complex64,
    du_i: Complex64,
    endpoint_only: bool,
) -> Result<RiccatiStepResult> {
    check_lengths(basis, &[x_plus.len()])?;
    let n = basis.n();
    let (a_plus, a_minus) = matching_coefficients(t_i, x_plus[n], u_i, du_i)?;
    let (z_end, z_plus) = if endpoint_only {
        (basis.quad_c(h, x_plus), None)
    } else {
        let z = basis.antideriv_c(h, x_plus);
        (z[0], Some(z))
    };
    let (u_end, du_end) = combine_branches(a_plus, a_minus, z_end, x_plus[0]);
    if !(u_end.re.is_finite() && u_end.im.is_finite() && du_end.re.is_finite() && du_end.im.is_finite()) {
        return Err(ArdcError::NonFinite(format!(
            "reconstructed endpoint of step at t = {t_i}"
        )));
    }
    Ok(RiccatiStepResult {
        accepted: true,
        t_i,
        h,
        u_end,
        du_end,
        x_plus: x_plus.to_vec(),
        phase_increment: z_end,
        iterations: 0,
        res_norm_final: f64::NAN,
        z_plus,
        a_plus,
        a_minus,
        history: Vec::new(),
        failure: None,
    })
}

/// Full oscillatory step: iterate, then match if the iteration converged.
/// Non-convergence and degenerate systems come back as a rejected result.
#[allow(clippy::too_many_arguments)]
pub fn riccati_step(
    basis: &ChebyshevBasis,
    t_i: f64,
    h: f64,
    omega: &[f64],
    gamma: &[f64],
    u_i: Complex64,
    du_i: Complex64,
    eps: f64,
    endpoint_only: bool,
) -> Result<RiccatiStepResult> {
    let rejected =
        |iterations: usize, res: f64, x: Vec<Complex64>, history: Vec<f64>, failure: ArdcError| RiccatiStepResult {
            accepted: false,
            t_i,
            h,
            u_end: Complex64::new(f64::NAN, f64::NAN),
            du_end: Complex64::new(f64::NAN, f64::NAN),
            x_plus: x,
            phase_increment: Complex64::new(0.0, 0.0),
            iterations,
            res_norm_final: res,
            z_plus: None,
            a_plus: Complex64::new(0.0, 0.0),
            a_minus: Complex64::new(0.0, 0.0),
            history,
            failure: Some(failure),
        };
    let dc = match defect_correct(basis, h, omega, gamma, eps, 1, J_MAX) {
        Ok(dc) => dc,
        Err(e @ ArdcError::DegenerateDenominator { .. }) => {
            return Ok(rejected(0, f64::NAN, Vec::new(), Vec::new(), e));
        }
        Err(e) => return Err(e),
    };
    let it = dc.iterate;
    if !dc.converged {
        let failure = ArdcError::NotConverged {
            residual: it.res_norm,
            iterations: it.j,
        };
        return Ok(rejected(it.j, it.res_norm, it.x, dc.history, failure));
    }
    match match_and_reconstruct(basis, t_i, h, &it.x, u_i, du_i, endpoint_only) {
        Ok(mut r) => {
            r.iterations = it.j;
            r.res_norm_final = it.res_norm;
            r.history = dc.history;
            Ok(r)
        }
        Err(e @ (ArdcError::DegenerateMatching { .. } | ArdcError::NonFinite(_))) => {
            Ok(rejected(it.j, it.res_norm, it.x, dc.history, e))
        }
        Err(e) => Err(e),
    }
}

/// `R~[u]/u` at the nodes for the single branch `u = e^{z+}`, with `u'` and
/// `u''` obtained by spectral differentiation of `u` itself. Meaningful only
/// when the step's grid resolves the oscillation. Nodes where `u` vanishes
/// are reported as `None`.
pub fn ode_relative_residual(
    basis: &ChebyshevBasis,
    h: f64,
    result: &RiccatiStepResult,
    omega: &[f64],
    gamma: &[f64],
) -> Result<Vec<Option<Complex64>>> {
    let z = result
        .z_plus
        .as_ref()
        .ok_or_else(|| ArdcError::InvalidParameter("step has no dense phase data".into()))?;
    check_lengths(basis, &[z.len(), omega.len(), gamma.len()])?;
    let u: Vec<Complex64> = z.iter().map(|v| v.exp()).collect();
    let du = basis.diff_c(h, &u);
    let ddu = basis.diff_c(h, &du);
    Ok((0..u.len())
        .map(|l| {
            if u[l].norm() == 0.0 {
                None
            } else {
                Some((ddu[l] + 2.0 * gamma[l] * du[l] + omega[l] * omega[l] * u[l]) / u[l])
            }
        })
        .collect())
}
