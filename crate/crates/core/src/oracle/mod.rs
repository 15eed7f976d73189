//! Independent reference solutions used to measure the solver's accuracy.
//!
//! Nothing here calls into the phase-function or collocation code.

pub mod airy;
pub mod gamma;
pub mod legendre;
pub mod rk;

pub use airy::{airy_ref, AiryValues};
pub use gamma::{ln_gamma, ln_gamma_ratio_half};
pub use legendre::{legendre_at_zero, legendre_ref};
pub use rk::{rk_reference, OracleResult};
