//! The adaptive driver: proposes a step, tries an oscillatory step when the
//! controller allows it, falls back to a spectral step otherwise, and keeps
//! the per-step data needed for dense output.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::chebyshev::basis;
use crate::controller::{propose, start_derivative, ControllerConfig, StepKind};
use crate::error::{ArdcError, Result};
use crate::problem::{CountingCoefficients, InitialValueProblem};
use crate::riccati_step::{combine_branches, riccati_step};
use crate::spectral_step::{spectral_step, SpectralConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Local tolerance: Riccati residual for oscillatory steps, endpoint
    /// relative difference for spectral steps.
    pub eps: f64,
    /// Node count of oscillatory steps.
    pub n_ricc: usize,
    /// Base node count of spectral steps (doubled at least once).
    pub n_spec: usize,
    /// Largest node count a spectral step may double to.
    pub n_max: usize,
    /// Skip the antiderivative and integrate the phase by quadrature only.
    /// Dense output is unavailable inside oscillatory steps in this mode.
    pub endpoint_only: bool,
    /// Times at which to report `(u, u')` after the solve.
    pub dense_points: Option<Vec<f64>>,
    pub max_steps: usize,
    /// Spectral steps below `h_min_factor * (t1 - t0)` abort the solve.
    pub h_min_factor: f64,
    pub controller: ControllerConfig,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            eps: 1e-12,
            n_ricc: 16,
            n_spec: 16,
            n_max: 64,
            endpoint_only: false,
            dense_points: None,
            max_steps: 1_000_000,
            h_min_factor: 1e-14,
            controller: ControllerConfig::default(),
        }
    }
}

impl SolverOptions {
    pub fn with_eps(mut self, eps: f64) -> Self {
        self.eps = eps;
        self
    }

    pub fn with_eps_h(mut self, eps_h: f64) -> Self {
        self.controller.eps_h = eps_h;
        self
    }

    pub fn with_n_ricc(mut self, n: usize) -> Self {
        self.n_ricc = n;
        self
    }

    pub fn with_n_spec(mut self, n: usize) -> Self {
        self.n_spec = n;
        self
    }

    pub fn with_dense(mut self, points: Vec<f64>) -> Self {
        self.dense_points = Some(points);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(ArdcError::InvalidParameter(m));
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return bad(format!("eps must lie in (0, 1), got {}", self.eps));
        }
        if !(self.controller.eps_h > 0.0 && self.controller.eps_h < 1.0) {
            return bad(format!("eps_h must lie in (0, 1), got {}", self.controller.eps_h));
        }
        if !(4..=crate::chebyshev::MAX_NODES).contains(&self.n_ricc) {
            return bad(format!("n_ricc must lie in [4, 64], got {}", self.n_ricc));
        }
        if self.n_spec < 4 || 2 * self.n_spec > self.n_max || self.n_max > crate::chebyshev::MAX_NODES {
            return bad(format!(
                "need 4 <= n_spec and 2 n_spec <= n_max <= 64, got n_spec = {}, n_max = {}",
                self.n_spec, self.n_max
            ));
        }
        if self.endpoint_only && self.dense_points.is_some() {
            return bad("dense output needs the phase antiderivative; unset endpoint_only".into());
        }
        if let Some(p) = &self.dense_points {
            if p.iter().any(|t| !t.is_finite()) {
                return bad("dense points must be finite".into());
            }
        }
        if !(self.h_min_factor > 0.0) {
            return bad("h_min_factor must be positive".into());
        }
        Ok(())
    }
}

/// One attempted step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub kind: StepKind,
    pub t_i: f64,
    pub h: f64,
    pub accepted: bool,
    /// Defect-correction iterations (oscillatory) or halvings (spectral).
    pub iterations_or_halvings: usize,
    pub u_end: Complex64,
    pub du_end: Complex64,
    /// Final residual norm (oscillatory) or endpoint error estimate (spectral).
    pub res_or_err: f64,
    pub phase_im_increment: f64,
}

/// `(attempted, accepted)` counts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepCount {
    pub attempted: u64,
    pub accepted: u64,
}

impl std::ops::Add for StepCount {
    type Output = StepCount;
    fn add(self, o: StepCount) -> StepCount {
        StepCount {
            attempted: self.attempted + o.attempted,
            accepted: self.accepted + o.accepted,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveStats {
    pub n_s_osc: StepCount,
    pub n_s_slo: StepCount,
    pub n_s_tot: StepCount,
    /// Scalar evaluations of `omega` and `gamma`.
    pub n_f: u64,
    /// Least-squares solves in spectral steps.
    pub n_ls: u64,
}

/// Node data of an accepted step, enough to evaluate the solution inside it.
#[derive(Debug, Clone, PartialEq)]
pub enum StepData {
    Oscillatory {
        n: usize,
        x_plus: Vec<Complex64>,
        z_plus: Option<Vec<Complex64>>,
        a_plus: Complex64,
        a_minus: Complex64,
    },
    Spectral {
        n: usize,
        u_nodes: Vec<Complex64>,
        du_nodes: Vec<Complex64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensePoint {
    pub t: f64,
    pub u: Complex64,
    pub du: Complex64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    /// Every attempted step, in order.
    pub steps: Vec<StepRecord>,
    /// `t0` followed by the endpoint of each accepted step.
    pub t_grid: Vec<f64>,
    pub u: Vec<Complex64>,
    pub du: Vec<Complex64>,
    /// Running condition estimate at each entry of `t_grid`.
    pub kappa_trace: Vec<f64>,
    pub stats: SolveStats,
    pub kappa: f64,
    pub eps_floor: f64,
    pub dense: Option<Vec<DensePoint>>,
    step_data: Vec<StepData>,
}

impl SolveReport {
    pub fn u_end(&self) -> Complex64 {
        *self.u.last().expect("report always holds the initial point")
    }

    pub fn du_end(&self) -> Complex64 {
        *self.du.last().expect("report always holds the initial point")
    }

    pub fn accepted_steps(&self) -> impl Iterator<Item = &StepRecord> {
        self.steps.iter().filter(|s| s.accepted)
    }

    pub fn step_data(&self) -> &[StepData] {
        &self.step_data
    }

    pub fn t0(&self) -> f64 {
        self.t_grid[0]
    }

    pub fn t1(&self) -> f64 {
        *self.t_grid.last().expect("non-empty grid")
    }
}

/// Solves the initial value problem on `[t0, t1]`.
pub fn solve(ivp: &InitialValueProblem, opts: &SolverOptions) -> Result<SolveReport> {
    opts.validate()?;
    let coeffs = CountingCoefficients::new(&ivp.coeffs);
    let b_ricc = basis(opts.n_ricc)?;
    let b_slo = basis(opts.n_spec)?;
    let span = ivp.t1 - ivp.t0;
    let spec_cfg = SpectralConfig {
        eps: opts.eps,
        base_n: opts.n_spec,
        n_max: opts.n_max,
        h_min: span * opts.h_min_factor,
    };

    let mut t = ivp.t0;
    let mut u = ivp.u0;
    let mut du = ivp.du0;
    let mut stats = SolveStats::default();
    let mut steps = Vec::new();
    let mut t_grid = vec![t];
    let mut us = vec![u];
    let mut dus = vec![du];
    let mut step_data = Vec::new();
    let mut kappa = 0.0f64;
    let mut kappa_trace = vec![0.0];
    let mut phase_sum = 0.0f64;

    let (mut omega_t, mut domega_t) = start_derivative(&b_ricc, &coeffs, t, ivp.h_init.min(span))?;

    while t < ivp.t1 {
        if steps.len() >= opts.max_steps {
            return Err(ArdcError::InvalidParameter(format!(
                "step limit {} reached at t = {t}",
                opts.max_steps
            )));
        }
        let remaining = ivp.t1 - t;
        let proposal = propose(
            &b_ricc,
            &b_slo,
            &coeffs,
            t,
            remaining,
            omega_t,
            domega_t,
            ivp.h_init,
            &opts.controller,
        )?;

        if proposal.choice == StepKind::Oscillatory {
            let grid = proposal.osc_grid.as_ref().expect("oscillatory proposals carry a grid");
            let r = riccati_step(
                &b_ricc,
                t,
                grid.h,
                &grid.omega,
                &grid.gamma,
                u,
                du,
                opts.eps,
                opts.endpoint_only,
            )?;
            stats.n_s_osc.attempted += 1;
            if r.accepted {
                stats.n_s_osc.accepted += 1;
                let t_next = if grid.h >= remaining { ivp.t1 } else { t + grid.h };
                phase_sum += r.phase_increment.im.abs();
                kappa = kappa.max(phase_sum).max((t_next * r.x_plus[0]).norm());
                steps.push(StepRecord {
                    kind: StepKind::Oscillatory,
                    t_i: t,
                    h: grid.h,
                    accepted: true,
                    iterations_or_halvings: r.iterations,
                    u_end: r.u_end,
                    du_end: r.du_end,
                    res_or_err: r.res_norm_final,
                    phase_im_increment: r.phase_increment.im,
                });
                step_data.push(StepData::Oscillatory {
                    n: opts.n_ricc,
                    x_plus: r.x_plus,
                    z_plus: r.z_plus,
                    a_plus: r.a_plus,
                    a_minus: r.a_minus,
                });
                omega_t = grid.omega[0];
                domega_t = b_ricc.diff_r(grid.h, &grid.omega)[0];
                t = t_next;
                u = r.u_end;
                du = r.du_end;
                t_grid.push(t);
                us.push(u);
                dus.push(du);
                kappa_trace.push(kappa);
                continue;
            }
            log::debug!(
                "oscillatory step rejected at t = {t} (h = {:e}): {:?}",
                grid.h,
                r.failure
            );
            steps.push(StepRecord {
                kind: StepKind::Oscillatory,
                t_i: t,
                h: grid.h,
                accepted: false,
                iterations_or_halvings: r.iterations,
                u_end: r.u_end,
                du_end: r.du_end,
                res_or_err: r.res_norm_final,
                phase_im_increment: 0.0,
            });
        }

        let s = spectral_step(&coeffs, t, proposal.h_slo, u, du, &spec_cfg)?;
        stats.n_ls += s.n_ls;
        stats.n_s_slo.attempted += 1 + s.halvings as u64;
        stats.n_s_slo.accepted += 1;
        let t_next = if s.h >= remaining { ivp.t1 } else { t + s.h };
        let b_used = basis(s.n_used)?;
        let nodes = b_used.scaled_nodes(t, s.h)?;
        for (tn, w) in nodes.iter().zip(&s.omega_nodes) {
            kappa = kappa.max((tn * w).abs());
        }
        steps.push(StepRecord {
            kind: StepKind::Spectral,
            t_i: t,
            h: s.h,
            accepted: true,
            iterations_or_halvings: s.halvings,
            u_end: s.u_end,
            du_end: s.du_end,
            res_or_err: s.rel_err_est,
            phase_im_increment: 0.0,
        });
        omega_t = s.omega_nodes[0];
        domega_t = b_used.diff_r(s.h, &s.omega_nodes)[0];
        step_data.push(StepData::Spectral {
            n: s.n_used,
            u_nodes: s.u_nodes,
            du_nodes: s.du_nodes,
        });
        t = t_next;
        u = s.u_end;
        du = s.du_end;
        t_grid.push(t);
        us.push(u);
        dus.push(du);
        kappa_trace.push(kappa);
    }

    stats.n_s_tot = stats.n_s_osc + stats.n_s_slo;
    stats.n_f = coeffs.evals();
    let mut report = SolveReport {
        steps,
        t_grid,
        u: us,
        du: dus,
        kappa_trace,
        stats,
        kappa,
        eps_floor: kappa * f64::EPSILON,
        dense: None,
        step_data,
    };
    if let Some(points) = &opts.dense_points {
        let mut dense = Vec::with_capacity(points.len());
        for &tq in points {
            let (uq, duq) = dense_eval(&report, tq)?;
            dense.push(DensePoint { t: tq, u: uq, du: duq });
        }
        report.dense = Some(dense);
    }
    Ok(report)
}

/// `(u, u')` at any `t` in `[t0, t1]`. Step endpoints return the stored
/// values; inside oscillatory steps the phase is interpolated, not `u`.
pub fn dense_eval(report: &SolveReport, t: f64) -> Result<(Complex64, Complex64)> {
    let (t0, t1) = (report.t0(), report.t1());
    if !(t >= t0 && t <= t1) {
        return Err(ArdcError::OutOfRange {
            value: t,
            lo: t0,
            hi: t1,
        });
    }
    // first grid index with t_grid[k] >= t
    let k = report.t_grid.partition_point(|&tk| tk < t);
    if report.t_grid[k] == t {
        return Ok((report.u[k], report.du[k]));
    }
    let step = k - 1;
    let t_i = report.t_grid[step];
    let h = report.t_grid[k] - t_i;
    match &report.step_data[step] {
        StepData::Oscillatory {
            n,
            x_plus,
            z_plus,
            a_plus,
            a_minus,
        } => {
            let z_plus = z_plus.as_ref().ok_or_else(|| {
                ArdcError::InvalidParameter("dense output inside an endpoint-only oscillatory step".into())
            })?;
            let b = basis(*n)?;
            let z = b.barycentric_eval(z_plus, t_i, h, t)?;
            let x = b.barycentric_eval(x_plus, t_i, h, t)?;
            Ok(combine_branches(*a_plus, *a_minus, z, x))
        }
        StepData::Spectral { n, u_nodes, du_nodes } => {
            let b = basis(*n)?;
            Ok((
                b.barycentric_eval(u_nodes, t_i, h, t)?,
                b.barycentric_eval(du_nodes, t_i, h, t)?,
            ))
        }
    }
}

/// The condition estimate carried by the report: the larger of `|t x(t)|` at
/// step ends and the accrued imaginary phase.
pub fn condition_estimate(report: &SolveReport) -> f64 {
    report.kappa
}
