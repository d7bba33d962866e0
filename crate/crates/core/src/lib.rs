//! Positive and odd solitary waves of two linearly coupled stationary
//! nonlinear Schrödinger equations with piecewise-constant coefficients.
//!
//! The solver inverts the linear parts with Green's functions built from
//! decaying solutions, iterates the resulting integral operator inside a
//! cone of non-negative functions, and cross-checks every answer against an
//! independent finite-difference Newton solver.

mod banded;
pub mod config;
pub mod continuation;
pub mod error;
pub mod greens;
pub mod hypotheses;
pub mod model;
pub mod operator;
pub mod oracle;
pub mod solver;
mod quadrature;

pub use error::{Error, Result};
