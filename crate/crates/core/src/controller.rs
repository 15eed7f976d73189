//! Step-size proposals and the choice between oscillatory and spectral steps.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::chebyshev::ChebyshevBasis;
use crate::error::{ArdcError, Result};
use crate::problem::CountingCoefficients;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControllerConfig {
    /// Relative interpolation tolerance for the oscillatory grid.
    pub eps_h: f64,
    /// Spectral steps must satisfy `1/omega >= sigma h` at the midpoints.
    pub sigma: f64,
    /// Oscillatory steps need `h_osc > osc_factor * h_slo`.
    pub osc_factor: f64,
    /// ... and `omega(t_i) h_osc > phase_threshold`.
    pub phase_threshold: f64,
    pub max_osc_refinements: usize,
    pub max_slo_halvings: usize,
}

impl Default for ControllerConfig {
    fn default() -> Self {
        Self {
            eps_h: 1e-13,
            sigma: 0.8,
            osc_factor: 5.0,
            phase_threshold: 2.0 * PI,
            max_osc_refinements: 20,
            max_slo_halvings: 60,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StepKind {
    Oscillatory,
    Spectral,
}

/// A refined oscillatory grid with the coefficient values already sampled.
#[derive(Debug, Clone, PartialEq)]
pub struct OscGrid {
    pub h: f64,
    pub nodes: Vec<f64>,
    pub omega: Vec<f64>,
    pub gamma: Vec<f64>,
    /// Interpolation error estimate at the final `h`.
    pub delta: f64,
    pub refinements: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepProposal {
    pub h_osc: f64,
    pub h_slo: f64,
    pub choice: StepKind,
    pub omega_ti: f64,
    pub domega_ti: f64,
    /// Present when the oscillatory size was refined.
    pub osc_grid: Option<OscGrid>,
}

/// `h_osc0 = |omega / omega'|` and `h_slo0 = 1 / omega`, both clamped to the
/// remaining interval. With `omega <= 0` only a spectral step of `h_init` is
/// proposed.
pub fn initial_estimates(omega_ti: f64, domega_ti: f64, remaining: f64, h_init: f64) -> (f64, f64) {
    if !(omega_ti > 0.0) {
        return (0.0, h_init.min(remaining));
    }
    let h_osc = if domega_ti == 0.0 {
        f64::INFINITY
    } else {
        (omega_ti / domega_ti).abs()
    };
    (h_osc.min(remaining), (1.0 / omega_ti).min(remaining))
}

/// `omega(t0)` and `omega'(t0)` from a throwaway grid of width `h_init`.
pub fn start_derivative(
    basis: &ChebyshevBasis,
    coeffs: &CountingCoefficients<'_>,
    t0: f64,
    h_init: f64,
) -> Result<(f64, f64)> {
    let nodes = basis.scaled_nodes(t0, h_init)?;
    let w = coeffs.omega_on_grid(&nodes)?;
    let dw = basis.diff_r(h_init, &w);
    let n = basis.n();
    Ok((w[n], dw[n]))
}

/// Largest relative deviation between `f` at the midpoints and the
/// interpolant through its node values.
pub fn interpolation_error(basis: &ChebyshevBasis, f_nodes: &[f64], f_mid: &[f64]) -> Result<f64> {
    let interp = basis.interpolate_to_midpoints(f_nodes)?;
    let scale = f_nodes.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut delta = 0.0f64;
    for (exact, approx) in f_mid.iter().zip(&interp) {
        let err = (exact - approx).abs();
        let rel = if *exact != 0.0 {
            err / exact.abs()
        } else if scale > 0.0 {
            err / scale
        } else {
            err
        };
        if !rel.is_finite() {
            return Ok(f64::INFINITY);
        }
        delta = delta.max(rel);
    }
    Ok(delta)
}

/// Shrinks `h` until the grid interpolates `omega` (and `gamma`) to `eps_h`
/// at the midpoints, returning the final grid with its sampled values.
pub fn refine_osc_h(
    basis: &ChebyshevBasis,
    coeffs: &CountingCoefficients<'_>,
    t_i: f64,
    h0: f64,
    cfg: &ControllerConfig,
) -> Result<OscGrid> {
    if !(cfg.eps_h > 0.0) {
        return Err(ArdcError::InvalidParameter(format!(
            "eps_h must be positive, got {}",
            cfg.eps_h
        )));
    }
    let exponent = 1.0 / (basis.n() as f64 + 1.0);
    let mut h = h0;
    let mut refinements = 0;
    loop {
        let nodes = basis.scaled_nodes(t_i, h)?;
        let mids = basis.scaled_midpoints(t_i, h)?;
        let omega = coeffs.omega_on_grid(&nodes)?;
        let omega_mid = coeffs.omega_on_grid(&mids)?;
        let mut delta = interpolation_error(basis, &omega, &omega_mid)?;
        let gamma = coeffs.gamma_on_grid(&nodes)?;
        let gamma_mid = coeffs.gamma_on_grid(&mids)?;
        delta = delta.max(interpolation_error(basis, &gamma, &gamma_mid)?);
        if delta <= cfg.eps_h || refinements >= cfg.max_osc_refinements {
            if delta > cfg.eps_h {
                log::debug!("oscillatory refinement cap at t = {t_i}: h = {h:e}, delta = {delta:e}");
            }
            return Ok(OscGrid {
                h,
                nodes,
                omega,
                gamma,
                delta,
                refinements,
            });
        }
        h = next_osc_h(h, delta, cfg.eps_h, exponent);
        refinements += 1;
    }
}

/// `min(0.7 h, 0.9 h (eps_h / delta)^{1/(n+1)})`.
pub fn next_osc_h(h: f64, delta: f64, eps_h: f64, exponent: f64) -> f64 {
    if !delta.is_finite() {
        return 0.25 * h;
    }
    (0.7 * h).min(0.9 * h * (eps_h / delta).powf(exponent))
}

/// Halves `h` while `min 1/|omega|` over the midpoints is below `sigma h`.
pub fn refine_slo_h(
    basis: &ChebyshevBasis,
    coeffs: &CountingCoefficients<'_>,
    t_i: f64,
    h0: f64,
    cfg: &ControllerConfig,
) -> Result<f64> {
    let mut h = h0;
    let mut history = vec![h];
    for _ in 0..=cfg.max_slo_halvings {
        let mids = basis.scaled_midpoints(t_i, h)?;
        let w = coeffs.omega_on_grid(&mids)?;
        let wmax = w.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        // min 1/|omega| < sigma h  <=>  max |omega| sigma h > 1
        if !(wmax * cfg.sigma * h > 1.0) {
            return Ok(h);
        }
        h *= 0.5;
        history.push(h);
    }
    Err(ArdcError::StepUnderflow {
        t: t_i,
        h,
        h_min: 0.0,
        history,
    })
}

pub fn choose_step(h_osc: f64, h_slo: f64, omega_ti: f64, cfg: &ControllerConfig) -> StepKind {
    if h_osc > cfg.osc_factor * h_slo && omega_ti * h_osc > cfg.phase_threshold {
        StepKind::Oscillatory
    } else {
        StepKind::Spectral
    }
}

/// Initial estimates, both refinements and the step-type decision. The
/// oscillatory refinement is skipped when even the unrefined size could not
/// pass the decision test, since refinement never grows `h`.
#[allow(clippy::too_many_arguments)]
pub fn propose(
    osc_basis: &ChebyshevBasis,
    slo_basis: &ChebyshevBasis,
    coeffs: &CountingCoefficients<'_>,
    t_i: f64,
    remaining: f64,
    omega_ti: f64,
    domega_ti: f64,
    h_init: f64,
    cfg: &ControllerConfig,
) -> Result<StepProposal> {
    let (h_osc0, h_slo0) = initial_estimates(omega_ti, domega_ti, remaining, h_init);
    let h_slo = if omega_ti > 0.0 {
        refine_slo_h(slo_basis, coeffs, t_i, h_slo0, cfg)?
    } else {
        h_slo0
    };
    let mut proposal = StepProposal {
        h_osc: h_osc0,
        h_slo,
        choice: StepKind::Spectral,
        omega_ti,
        domega_ti,
        osc_grid: None,
    };
    if choose_step(h_osc0, h_slo, omega_ti, cfg) == StepKind::Spectral {
        return Ok(proposal);
    }
    let grid = refine_osc_h(osc_basis, coeffs, t_i, h_osc0, cfg)?;
    proposal.h_osc = grid.h;
    proposal.choice = choose_step(grid.h, h_slo, omega_ti, cfg);
    proposal.osc_grid = Some(grid);
    Ok(proposal)
}
