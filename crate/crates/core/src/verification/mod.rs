//! Independent oracles and property harnesses for the sensitivity pipeline:
//! finite-difference quotients along extensions, the ci-differentiability
//! residual, free-term limits, the oscillating-history counterexample and
//! solver self-consistency checks.

pub mod appendix;
pub mod consistency;
pub mod fd;
pub mod freeterm;
pub mod residual;
pub mod tolerance;

pub use appendix::{appendix_example, AppendixReport};
pub use fd::{fd_directional, FdReport, FdSchedule};
pub use freeterm::{free_term_limits, FreeTermReport};
pub use residual::{ci_residual, CiResidualReport};
pub use tolerance::{richardson, tol_solver, Extrapolation, CALIBRATED_C};
