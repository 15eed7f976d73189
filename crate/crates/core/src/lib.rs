//! Adaptive Riccati defect correction for oscillatory second-order linear ODEs
//!
//! Solves `u'' + 2 gamma(t) u' + omega(t)^2 u = 0` from initial data, switching
//! between phase-function steps (where the solution oscillates) and Chebyshev
//! collocation steps (where it does not). The cost of an oscillatory step does
//! not grow with the frequency.
//!
//! ```no_run
//! use ardc::{solve, BuiltinProblem, SolverOptions};
//!
//! let ivp = BuiltinProblem::Bremer237 { lambda: 1e5 }.ivp().unwrap();
//! let report = solve(&ivp, &SolverOptions::default()).unwrap();
//! println!("u(1) = {}", report.u_end());
//! ```

// `!(x > 0.0)` is used on purpose: it rejects NaN along with the bad values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// parity tests read more plainly as `% 2 == 0` next to the formulas
#![allow(clippy::manual_is_multiple_of)]
// node loops index several parallel arrays at once
#![allow(clippy::needless_range_loop)]

pub mod analysis;
pub mod chebyshev;
pub mod cli;
pub mod controller;
pub mod error;
pub mod oracle;
pub mod problem;
pub mod riccati_step;
pub mod solver;
pub mod spectral_step;

pub use controller::StepKind;
pub use error::{ArdcError, Result};
pub use problem::{BuiltinProblem, CoefficientPair, InitialValueProblem};
pub use solver::{condition_estimate, dense_eval, solve, SolveReport, SolveStats, SolverOptions, StepRecord};
