//! Numerical laboratory for transition fronts of reaction-advection-diffusion
//! equations `u_t + q.grad u = div(A grad u) + f(x, u)` on cylinders with periodic
//! or disordered media.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cell;
pub mod error;
pub mod evolve;
pub mod fronts;
pub mod grid;
pub mod medium;
pub mod optimize;
pub mod presets;
pub mod random;
pub mod stats;

pub use error::{Error, Result};
pub use medium::{CoefficientField, ReactionField, ReactionKind, ReactionProfile};
