//! Endpoint sensitivities of Caputo fractional Cauchy problems with
//! history-type initial data.
//!
//! For a problem
//!
//! ```text
//! (ᶜD^α x)(τ) = f(τ, x(τ)),  τ ∈ [t, T],   x(τ) = w(τ) on [0, t],
//! ```
//!
//! with α ∈ (0, 1), the crate computes the endpoint value ρ(t, w) = x(T) and
//! its coinvariant derivatives of order α, `∂ₜ^α ρ = p(T)` and `∇^α ρ = q(T)`,
//! by solving linear weakly-singular Volterra equations. The
//! [`verification`] module contains the finite-difference and closed-form
//! oracles used to check those quantities.

pub mod cli;
pub mod config;
pub mod error;
pub mod expr;
pub mod kernel;
pub mod problem;
pub mod sensitivity;
pub mod special;
pub mod verification;
pub mod volterra;

pub use error::{Error, Result};
