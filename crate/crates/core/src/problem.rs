//! Problem definitions: coefficient evaluators, initial value problems and the
//! built-in test equations `u'' + 2 gamma(t) u' + omega(t)^2 u = 0`.

use std::cell::Cell;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{ArdcError, Result};
use crate::oracle::{airy_ref, legendre_at_zero};

pub type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type ComplexFn = Arc<dyn Fn(Complex64) -> Complex64 + Send + Sync>;

/// The frequency `omega(t)` and damping `gamma(t)` of the equation.
///
/// A missing `gamma` means it is identically zero. Evaluation counts still
/// include the zero `gamma` wherever the solver reads it.
#[derive(Clone)]
pub struct CoefficientPair {
    omega: RealFn,
    gamma: Option<RealFn>,
    omega_complex: Option<ComplexFn>,
    gamma_complex: Option<ComplexFn>,
    domain: Option<(f64, f64)>,
    description: String,
}

impl fmt::Debug for CoefficientPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CoefficientPair")
            .field("description", &self.description)
            .field("has_gamma", &self.gamma.is_some())
            .field("has_complex", &self.omega_complex.is_some())
            .field("domain", &self.domain)
            .finish()
    }
}

impl CoefficientPair {
    pub fn new(omega: impl Fn(f64) -> f64 + Send + Sync + 'static, description: impl Into<String>) -> Self {
        Self {
            omega: Arc::new(omega),
            gamma: None,
            omega_complex: None,
            gamma_complex: None,
            domain: None,
            description: description.into(),
        }
    }

    pub fn with_gamma(mut self, gamma: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.gamma = Some(Arc::new(gamma));
        self
    }

    /// Attaches complex-argument versions of the evaluators. `gamma` may be
    /// omitted when the real `gamma` is identically zero.
    pub fn with_complex(
        mut self,
        omega: impl Fn(Complex64) -> Complex64 + Send + Sync + 'static,
        gamma: Option<ComplexFn>,
    ) -> Self {
        self.omega_complex = Some(Arc::new(omega));
        self.gamma_complex = gamma;
        self
    }

    /// Restricts evaluation to the open interval `(lo, hi)`.
    pub fn with_open_domain(mut self, lo: f64, hi: f64) -> Self {
        self.domain = Some((lo, hi));
        self
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    pub fn has_gamma(&self) -> bool {
        self.gamma.is_some()
    }

    pub fn has_complex(&self) -> bool {
        self.omega_complex.is_some()
    }

    fn check_domain(&self, t: f64) -> Result<()> {
        if let Some((lo, hi)) = self.domain {
            if !(t > lo && t < hi) {
                return Err(ArdcError::Domain { t });
            }
        }
        Ok(())
    }

    pub fn omega(&self, t: f64) -> Result<f64> {
        self.check_domain(t)?;
        let w = (self.omega)(t);
        if !w.is_finite() {
            return Err(ArdcError::NonFinite(format!("omega({t}) = {w}")));
        }
        Ok(w)
    }

    pub fn gamma(&self, t: f64) -> Result<f64> {
        self.check_domain(t)?;
        match &self.gamma {
            None => Ok(0.0),
            Some(g) => {
                let v = g(t);
                if !v.is_finite() {
                    return Err(ArdcError::NonFinite(format!("gamma({t}) = {v}")));
                }
                Ok(v)
            }
        }
    }

    pub fn omega_complex(&self, z: Complex64) -> Option<Complex64> {
        self.omega_complex.as_ref().map(|f| f(z))
    }

    /// Complex `gamma`; zero when the pair has no damping.
    pub fn gamma_complex(&self, z: Complex64) -> Option<Complex64> {
        match (&self.gamma, &self.gamma_complex) {
            (None, _) => Some(Complex64::new(0.0, 0.0)),
            (Some(_), Some(g)) => Some(g(z)),
            (Some(_), None) => None,
        }
    }
}

/// Wraps a [`CoefficientPair`] and counts scalar evaluations for one solve.
#[derive(Debug)]
pub struct CountingCoefficients<'a> {
    pair: &'a CoefficientPair,
    evals: Cell<u64>,
}

impl<'a> CountingCoefficients<'a> {
    pub fn new(pair: &'a CoefficientPair) -> Self {
        Self {
            pair,
            evals: Cell::new(0),
        }
    }

    pub fn pair(&self) -> &CoefficientPair {
        self.pair
    }

    /// Scalar evaluations of `omega` or `gamma` so far.
    pub fn evals(&self) -> u64 {
        self.evals.get()
    }

    /// `omega` and `gamma` at each node. Counts `2 len` evaluations.
    pub fn eval_on_grid(&self, nodes: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let omega = self.omega_on_grid(nodes)?;
        let gamma = self.gamma_on_grid(nodes)?;
        Ok((omega, gamma))
    }

    pub fn omega_on_grid(&self, nodes: &[f64]) -> Result<Vec<f64>> {
        self.evals.set(self.evals.get() + nodes.len() as u64);
        nodes.iter().map(|&t| self.pair.omega(t)).collect()
    }

    pub fn gamma_on_grid(&self, nodes: &[f64]) -> Result<Vec<f64>> {
        self.evals.set(self.evals.get() + nodes.len() as u64);
        if !self.pair.has_gamma() {
            for &t in nodes {
                self.pair.check_domain(t)?;
            }
            return Ok(vec![0.0; nodes.len()]);
        }
        nodes.iter().map(|&t| self.pair.gamma(t)).collect()
    }
}

/// Pointwise `(omega, gamma)` on a grid, counted against `coeffs`.
pub fn eval_coeffs_on_grid(coeffs: &CountingCoefficients<'_>, nodes: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    coeffs.eval_on_grid(nodes)
}

/// Coefficients, interval and initial data.
#[derive(Debug, Clone)]
pub struct InitialValueProblem {
    pub coeffs: CoefficientPair,
    pub t0: f64,
    pub t1: f64,
    pub u0: Complex64,
    pub du0: Complex64,
    /// Width of the grid used to estimate `omega'` at `t0`, and the fallback
    /// step where `omega <= 0`.
    pub h_init: f64,
}

impl InitialValueProblem {
    pub fn new(coeffs: CoefficientPair, t0: f64, t1: f64, u0: Complex64, du0: Complex64, h_init: f64) -> Result<Self> {
        if !(t0.is_finite() && t1.is_finite() && t0 < t1) {
            return Err(ArdcError::InvalidParameter(format!(
                "need finite t0 < t1, got [{t0}, {t1}]"
            )));
        }
        if !(h_init > 0.0 && h_init.is_finite()) {
            return Err(ArdcError::InvalidParameter(format!(
                "h_init must be positive, got {h_init}"
            )));
        }
        if !(u0.re.is_finite() && u0.im.is_finite() && du0.re.is_finite() && du0.im.is_finite()) {
            return Err(ArdcError::InvalidParameter("initial data must be finite".into()));
        }
        Ok(Self {
            coeffs,
            t0,
            t1,
            u0,
            du0,
            h_init,
        })
    }

    pub fn with_interval(mut self, t0: f64, t1: f64) -> Result<Self> {
        if !(t0.is_finite() && t1.is_finite() && t0 < t1) {
            return Err(ArdcError::InvalidParameter(format!(
                "need finite t0 < t1, got [{t0}, {t1}]"
            )));
        }
        self.t0 = t0;
        self.t1 = t1;
        Ok(self)
    }

    pub fn with_initial_data(mut self, u0: Complex64, du0: Complex64) -> Self {
        self.u0 = u0;
        self.du0 = du0;
        self
    }
}

/// The equations used throughout the tests and experiments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BuiltinProblem {
    /// `u'' + t u = 0` on `[1, 1e8]`, solution `Ai(-t) + i Bi(-t)`.
    Airy,
    /// `omega^2 = lambda^2 (1 - t^2 cos 3t)` on `[-1, 1]`, `u = 0`, `u' = lambda`.
    Bremer237 { lambda: f64 },
    /// Legendre's equation of degree `nu` on `[0, 0.9]`, solution `P_nu`.
    Legendre { nu: u64 },
    /// `omega = sqrt(m^2 - 1) / (1 + t^2)` on `[0, 0.5]`.
    Burst { m: f64 },
    /// Constant frequency on `[0, 1]` with `u = 1`, `u' = 0`, solution `cos(omega t)`.
    Tone { omega: f64 },
}

impl BuiltinProblem {
    /// Burst whose peak frequency `omega(0)` equals `omega_max`.
    pub fn burst_with_peak(omega_max: f64) -> Self {
        BuiltinProblem::Burst {
            m: (omega_max * omega_max + 1.0).sqrt(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            BuiltinProblem::Airy => "airy",
            BuiltinProblem::Bremer237 { .. } => "bremer237",
            BuiltinProblem::Legendre { .. } => "legendre",
            BuiltinProblem::Burst { .. } => "burst",
            BuiltinProblem::Tone { .. } => "tone",
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            BuiltinProblem::Airy => Ok(()),
            BuiltinProblem::Bremer237 { lambda } => {
                if !(10.0..=1e7).contains(&lambda) {
                    return Err(ArdcError::InvalidParameter(format!(
                        "lambda must lie in [10, 1e7], got {lambda}"
                    )));
                }
                Ok(())
            }
            BuiltinProblem::Legendre { nu } => {
                if nu < 1 {
                    return Err(ArdcError::InvalidParameter("Legendre degree must be >= 1".into()));
                }
                Ok(())
            }
            BuiltinProblem::Burst { m } => {
                if !(m > 1.0 && m.is_finite()) {
                    return Err(ArdcError::InvalidParameter(format!(
                        "burst parameter m must exceed 1, got {m}"
                    )));
                }
                Ok(())
            }
            BuiltinProblem::Tone { omega } => {
                if !(omega >= 0.0 && omega.is_finite()) {
                    return Err(ArdcError::InvalidParameter(format!(
                        "tone frequency must be >= 0, got {omega}"
                    )));
                }
                Ok(())
            }
        }
    }

    pub fn coefficients(&self) -> Result<CoefficientPair> {
        self.validate()?;
        let pair = match *self {
            BuiltinProblem::Airy => {
                CoefficientPair::new(f64::sqrt, "airy: omega = sqrt(t)").with_complex(|z| z.sqrt(), None)
            }
            BuiltinProblem::Bremer237 { lambda } => CoefficientPair::new(
                move |t| lambda * (1.0 - t * t * (3.0 * t).cos()).sqrt(),
                format!("bremer237: lambda = {lambda:e}"),
            )
            .with_complex(move |z| lambda * (1.0 - z * z * (3.0 * z).cos()).sqrt(), None),
            BuiltinProblem::Legendre { nu } => {
                let nf = nu as f64;
                let c = nf * (nf + 1.0);
                let gc: ComplexFn = Arc::new(|z: Complex64| -z / (1.0 - z * z));
                CoefficientPair::new(move |t| (c / (1.0 - t * t)).sqrt(), format!("legendre: nu = {nu}"))
                    .with_gamma(|t| -t / (1.0 - t * t))
                    .with_complex(move |z| (c / (1.0 - z * z)).sqrt(), Some(gc))
                    .with_open_domain(-1.0, 1.0)
            }
            BuiltinProblem::Burst { m } => {
                let a = (m * m - 1.0).sqrt();
                CoefficientPair::new(move |t| a / (1.0 + t * t), format!("burst: m = {m}"))
                    .with_complex(move |z| a / (1.0 + z * z), None)
            }
            BuiltinProblem::Tone { omega } => CoefficientPair::new(move |_| omega, format!("tone: omega = {omega}"))
                .with_complex(move |_| Complex64::new(omega, 0.0), None),
        };
        Ok(pair)
    }

    /// The problem with its standard interval and initial data.
    pub fn ivp(&self) -> Result<InitialValueProblem> {
        let coeffs = self.coefficients()?;
        let zero = Complex64::new(0.0, 0.0);
        match *self {
            BuiltinProblem::Airy => {
                let (u0, du0) = airy_ref(1.0)?.solution();
                InitialValueProblem::new(coeffs, 1.0, 1e8, u0, du0, 0.1)
            }
            BuiltinProblem::Bremer237 { lambda } => {
                InitialValueProblem::new(coeffs, -1.0, 1.0, zero, Complex64::new(lambda, 0.0), 0.1)
            }
            BuiltinProblem::Legendre { nu } => {
                let (p, dp) = legendre_at_zero(nu)?;
                InitialValueProblem::new(coeffs, 0.0, 0.9, Complex64::new(p, 0.0), Complex64::new(dp, 0.0), 0.1)
            }
            BuiltinProblem::Burst { m } => {
                let w0 = (m * m - 1.0).sqrt();
                InitialValueProblem::new(coeffs, 0.0, 0.5, Complex64::new(1.0, 0.0), Complex64::new(0.0, w0), 0.1)
            }
            BuiltinProblem::Tone { .. } => {
                InitialValueProblem::new(coeffs, 0.0, 1.0, Complex64::new(1.0, 0.0), zero, 0.1)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn bremer_initial_data() {
        let ivp = BuiltinProblem::Bremer237 { lambda: 10.0 }.ivp().unwrap();
        assert_eq!((ivp.t0, ivp.t1), (-1.0, 1.0));
        assert_eq!(ivp.u0, Complex64::new(0.0, 0.0));
        assert_eq!(ivp.du0, Complex64::new(10.0, 0.0));
        assert!(BuiltinProblem::Bremer237 { lambda: 5.0 }.ivp().is_err());
        assert!(BuiltinProblem::Bremer237 { lambda: 2e7 }.ivp().is_err());
    }

    #[test]
    fn legendre_initial_data() {
        let ivp = BuiltinProblem::Legendre { nu: 2 }.ivp().unwrap();
        assert_relative_eq!(ivp.u0.re, -0.5, max_relative = 1e-14);
        assert_eq!(ivp.du0, Complex64::new(0.0, 0.0));
        assert!(BuiltinProblem::Legendre { nu: 0 }.ivp().is_err());
    }

    #[test]
    fn airy_initial_data() {
        let ivp = BuiltinProblem::Airy.ivp().unwrap();
        assert!((ivp.u0.re - 0.535_561).abs() < 1e-6);
        assert!((ivp.u0.im - 0.103_997).abs() < 1e-6);
        assert_eq!((ivp.t0, ivp.t1), (1.0, 1e8));
    }

    #[test]
    fn grid_evaluation_and_counting() {
        let airy = BuiltinProblem::Airy.coefficients().unwrap();
        let c = CountingCoefficients::new(&airy);
        let (w, g) = eval_coeffs_on_grid(&c, &[1.0, 4.0, 9.0]).unwrap();
        assert_eq!(w, vec![1.0, 2.0, 3.0]);
        assert_eq!(g, vec![0.0; 3]);
        assert_eq!(c.evals(), 6);

        let leg = BuiltinProblem::Legendre { nu: 1 }.coefficients().unwrap();
        let c = CountingCoefficients::new(&leg);
        let (w, g) = c.eval_on_grid(&[0.0]).unwrap();
        assert_relative_eq!(w[0], 2f64.sqrt());
        assert_eq!(g[0], 0.0);
        assert_eq!(c.evals(), 2);
        assert!(matches!(c.eval_on_grid(&[1.0]), Err(ArdcError::Domain { .. })));

        let burst = BuiltinProblem::Burst { m: 101f64.sqrt() }.coefficients().unwrap();
        assert_relative_eq!(burst.omega(0.0).unwrap(), 10.0, max_relative = 1e-15);
    }

    #[test]
    fn builtins_are_finite_inside_their_intervals() {
        for p in [
            BuiltinProblem::Airy,
            BuiltinProblem::Bremer237 { lambda: 1e3 },
            BuiltinProblem::Legendre { nu: 1000 },
            BuiltinProblem::burst_with_peak(1e3),
            BuiltinProblem::Tone { omega: 5.0 },
        ] {
            let ivp = p.ivp().unwrap();
            for i in 0..=100 {
                let t = ivp.t0 + (ivp.t1 - ivp.t0) * i as f64 / 100.0;
                let w = ivp.coeffs.omega(t).unwrap();
                let g = ivp.coeffs.gamma(t).unwrap();
                assert!(w.is_finite() && w > 0.0 && g.is_finite(), "{p:?} at {t}");
            }
        }
    }

    #[test]
    fn complex_evaluators_agree_on_real_axis() {
        let leg = BuiltinProblem::Legendre { nu: 7 }.coefficients().unwrap();
        for &t in &[0.0, 0.3, 0.8] {
            let z = Complex64::new(t, 0.0);
            assert_relative_eq!(
                leg.omega_complex(z).unwrap().re,
                leg.omega(t).unwrap(),
                max_relative = 1e-14
            );
            assert_relative_eq!(leg.gamma_complex(z).unwrap().re, leg.gamma(t).unwrap(), epsilon = 1e-15);
        }
    }
}
