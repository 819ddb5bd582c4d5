//! Finite-N approximations of infinite-dimensional interacting Brownian
//! motions: drifts, exact kernels, equilibrium samplers, an SDE integrator
//! and the diagnostics that tie them together.

pub mod cli;
pub mod domain;
pub mod error;
pub mod kernels;
pub mod models;
pub mod numeric;
pub mod sampling;
pub mod sde;
pub mod stats;
pub mod verify;

pub use domain::{
    delabel, label, Configuration, Family, FreePotential, LabelScheme, LabeledState, ModelSpec,
    RngStream,
};
pub use error::{Error, Result};
