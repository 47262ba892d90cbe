//! Dynamics of front-back pulses in a bistable reaction-diffusion system.
//!
//! Three tiers are provided: the full two-component PDE ([`pde`]), its sharp-interface
//! limit with a diffusing inhibitor ([`hybrid`]), and four-dimensional interface
//! equations ([`reduced_ode`]). [`analysis`] holds the closed-form stationary states and
//! bifurcation points, and [`classify`] turns trajectories into behavior labels and phase
//! diagrams.

// NaN-rejecting range checks are written as `!(x > 0.0)` throughout.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod classify;
mod error;
pub mod hybrid;
pub mod io;
pub mod linalg;
pub mod model;
pub mod pde;
pub mod reduced_ode;

pub use error::{Error, Result};
