//! Nonoscillatory steps by Chebyshev collocation of the full second-order
//! equation, with the endpoint error estimated by doubling the node count.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::chebyshev::{basis, ChebyshevBasis};
use crate::error::{ArdcError, Result};
use crate::problem::CountingCoefficients;

/// Denominators below this switch the error estimate to an absolute difference.
const REL_FLOOR: f64 = 1e-280;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralConfig {
    pub eps: f64,
    pub base_n: usize,
    pub n_max: usize,
    pub h_min: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralStepResult {
    pub accepted: bool,
    pub t_i: f64,
    /// Length of the accepted step, after any halvings.
    pub h: f64,
    pub u_end: Complex64,
    pub du_end: Complex64,
    pub n_used: usize,
    pub halvings: usize,
    pub rel_err_est: f64,
    /// `u` and `u'` at the `n_used + 1` nodes of the accepted grid.
    pub u_nodes: Vec<Complex64>,
    pub du_nodes: Vec<Complex64>,
    /// `omega` and `gamma` on the accepted grid.
    pub omega_nodes: Vec<f64>,
    pub gamma_nodes: Vec<f64>,
    /// Least-squares solves performed, including those of discarded attempts.
    pub n_ls: u64,
    /// Every step length tried, in order.
    pub h_history: Vec<f64>,
}

/// Solves the collocation system on one grid in the least-squares sense.
///
/// Rows: `F = D^2 + 2 diag(gamma) D + diag(omega^2)` at every node, then the
/// derivative and value conditions at `t_i` (node `n`), each row scaled to
/// unit max-norm. Returns `u` and `u'` at the nodes, with `u'` recovered as
/// `u'(t_i) - int (omega^2 u + 2 gamma D u)`.
#[allow(clippy::too_many_arguments)]
pub fn collocation_solve(
    basis: &ChebyshevBasis,
    h: f64,
    omega: &[f64],
    gamma: &[f64],
    u_i: Complex64,
    du_i: Complex64,
) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    let np1 = basis.len();
    let n = basis.n();
    if omega.len() != np1 || gamma.len() != np1 {
        return Err(ArdcError::InvalidParameter(format!(
            "expected {np1} coefficient values, got {} and {}",
            omega.len(),
            gamma.len()
        )));
    }
    let d = basis.scaled_diff(h)?;
    let d2 = &d * &d;
    let mut a = DMatrix::<f64>::zeros(np1 + 2, np1);
    for i in 0..np1 {
        for j in 0..np1 {
            a[(i, j)] = d2[(i, j)] + 2.0 * gamma[i] * d[(i, j)];
        }
        a[(i, i)] += omega[i] * omega[i];
    }
    for j in 0..np1 {
        a[(np1, j)] = d[(n, j)];
    }
    a[(np1 + 1, n)] = 1.0;
    let mut b = DMatrix::<f64>::zeros(np1 + 2, 2);
    b[(np1, 0)] = du_i.re;
    b[(np1, 1)] = du_i.im;
    b[(np1 + 1, 0)] = u_i.re;
    b[(np1 + 1, 1)] = u_i.im;
    // unit max-norm rows keep the initial conditions from being swamped by
    // the O((n^2/h)^2) collocation rows
    for i in 0..np1 + 2 {
        let m = a.row(i).iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if m > 0.0 {
            a.row_mut(i).unscale_mut(m);
            b.row_mut(i).unscale_mut(m);
        }
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(ArdcError::NumericalFailure("non-finite collocation matrix".into()));
    }
    let svd = a.svd(true, true);
    let sol = svd
        .solve(&b, 0.0)
        .map_err(|e| ArdcError::NumericalFailure(e.to_string()))?;
    let u: Vec<Complex64> = (0..np1).map(|j| Complex64::new(sol[(j, 0)], sol[(j, 1)])).collect();
    if u.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(ArdcError::NumericalFailure("non-finite collocation solution".into()));
    }
    // u' from integrating the equation; D u loses ~n^2/h relative accuracy
    let du_raw = basis.diff_c(h, &u);
    let rhs: Vec<Complex64> = (0..np1)
        .map(|l| -(omega[l] * omega[l] * u[l] + 2.0 * gamma[l] * du_raw[l]))
        .collect();
    let du = basis.antideriv_c(h, &rhs).into_iter().map(|v| v + du_i).collect();
    Ok((u, du))
}

/// Endpoint disagreement in `u` between two grids, relative to the local envelope
/// `sqrt(|u|^2 + |u'/omega|^2)` so zeros of `u` do not inflate it.
fn endpoint_difference(fine: (Complex64, Complex64), coarse: Complex64, omega: f64, h: f64) -> f64 {
    // below one oscillation per step the natural derivative scale is 1/h
    let rate = omega.abs().max(1.0 / h);
    let env = (fine.0.norm_sqr() + (fine.1 / rate).norm_sqr()).sqrt();
    let diff = (fine.0 - coarse).norm();
    if env < REL_FLOOR {
        diff
    } else {
        diff / env
    }
}

/// One spectral step from `t_i` with proposed length `h`.
///
/// Solves at `n` and `2n`; accepts the `2n` solution once the endpoint values
/// agree to `eps`, doubling up to `n_max`, then halving `h` down to `h_min`.
pub fn spectral_step(
    coeffs: &CountingCoefficients<'_>,
    t_i: f64,
    h: f64,
    u_i: Complex64,
    du_i: Complex64,
    cfg: &SpectralConfig,
) -> Result<SpectralStepResult> {
    if cfg.base_n < 4 {
        return Err(ArdcError::InvalidParameter(format!(
            "spectral base node count must be >= 4, got {}",
            cfg.base_n
        )));
    }
    if cfg.n_max < 2 * cfg.base_n {
        return Err(ArdcError::InvalidParameter(format!(
            "n_max = {} leaves no room to double base n = {}",
            cfg.n_max, cfg.base_n
        )));
    }
    let mut h = h;
    let mut halvings = 0;
    let mut n_ls = 0u64;
    let mut h_history = vec![h];
    loop {
        if !(h >= cfg.h_min) {
            return Err(ArdcError::StepUnderflow {
                t: t_i,
                h,
                h_min: cfg.h_min,
                history: h_history,
            });
        }
        let mut n = cfg.base_n;
        let b = basis(n)?;
        let nodes = b.scaled_nodes(t_i, h)?;
        let (w, g) = coeffs.eval_on_grid(&nodes)?;
        n_ls += 1;
        let mut coarse = collocation_solve(&b, h, &w, &g, u_i, du_i);
        let mut last_err = f64::INFINITY;
        while 2 * n <= cfg.n_max {
            let m = 2 * n;
            let bm = basis(m)?;
            let nodes_m = bm.scaled_nodes(t_i, h)?;
            let (wm, gm) = coeffs.eval_on_grid(&nodes_m)?;
            n_ls += 1;
            let fine = collocation_solve(&bm, h, &wm, &gm, u_i, du_i);
            if let (Ok((uc, _)), Ok((uf, duf))) = (&coarse, &fine) {
                last_err = endpoint_difference((uf[0], duf[0]), uc[0], wm[0], h);
                if last_err <= cfg.eps {
                    return Ok(SpectralStepResult {
                        accepted: true,
                        t_i,
                        h,
                        u_end: uf[0],
                        du_end: duf[0],
                        n_used: m,
                        halvings,
                        rel_err_est: last_err,
                        u_nodes: uf.clone(),
                        du_nodes: duf.clone(),
                        omega_nodes: wm,
                        gamma_nodes: gm,
                        n_ls,
                        h_history,
                    });
                }
            }
            n = m;
            coarse = fine;
        }
        log::debug!("spectral step at t = {t_i}: h = {h:e} failed with estimate {last_err:e}; halving");
        h *= 0.5;
        halvings += 1;
        h_history.push(h);
    }
}
