use thiserror::Error;

/// Errors produced anywhere in the solver stack.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ArdcError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("value {value} outside [{lo}, {hi}]")]
    OutOfRange { value: f64, lo: f64, hi: f64 },

    #[error("coefficient evaluation outside domain at t = {t}")]
    Domain { t: f64 },

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("degenerate denominator x + gamma at node {node} (|x + gamma| = {magnitude:e})")]
    DegenerateDenominator { node: usize, magnitude: f64 },

    #[error("degenerate matching system at t = {t} (Im x+ = {im_x:e})")]
    DegenerateMatching { t: f64, im_x: f64 },

    #[error("defect correction stalled at residual {residual:e} after {iterations} iterations")]
    NotConverged { residual: f64, iterations: usize },

    #[error("least-squares factorization failed: {0}")]
    NumericalFailure(String),

    #[error("step size underflow at t = {t}: h = {h:e} < h_min = {h_min:e} (h history: {history:?})")]
    StepUnderflow {
        t: f64,
        h: f64,
        h_min: f64,
        history: Vec<f64>,
    },

    #[error("oracle refused: {0}")]
    OracleRefusal(String),

    #[error("analysis not applicable: {0}")]
    NotApplicable(String),

    #[error("invalid ball: {0}")]
    InvalidBall(String),
}

pub type Result<T> = std::result::Result<T, ArdcError>;

impl ArdcError {
    /// Stable snake_case name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            ArdcError::InvalidParameter(_) => "invalid_parameter",
            ArdcError::OutOfRange { .. } => "out_of_range",
            ArdcError::Domain { .. } => "domain",
            ArdcError::NonFinite(_) => "non_finite",
            ArdcError::DegenerateDenominator { .. } => "degenerate_denominator",
            ArdcError::DegenerateMatching { .. } => "degenerate_matching",
            ArdcError::NotConverged { .. } => "not_converged",
            ArdcError::NumericalFailure(_) => "numerical_failure",
            ArdcError::StepUnderflow { .. } => "step_underflow",
            ArdcError::OracleRefusal(_) => "oracle_refusal",
            ArdcError::NotApplicable(_) => "not_applicable",
            ArdcError::InvalidBall(_) => "invalid_ball",
        }
    }
}
