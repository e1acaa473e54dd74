//! Simulation and verification tools for the thin-film equation
//! ∂ₜu + div(∇Δu − g(∇u)) = 0.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod cli;
pub mod error;
pub mod grid;
pub mod kernel;
pub mod mild;
pub mod nonlinearity;
pub mod rothe;

pub use error::{Error, Result};
