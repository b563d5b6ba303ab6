//! Reservoir computing with a quantum detector accelerated inside a cavity.
//!
//! Inputs are encoded as piecewise-constant proper-acceleration profiles.
//! The detector–field system is evolved exactly with Gaussian (symplectic)
//! dynamics, or on a truncated Fock space for a two-level detector, and the
//! detector observables sampled along the trajectory form the feature vector
//! of a ridge-regression readout. Relativistic and Newtonian kinematics can be
//! swapped to compare their expressivity.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cli;
pub mod cqed_drive;
pub mod datasets;
pub mod dense_engine;
pub mod encoding;
pub mod error;
pub mod gaussian_engine;
pub mod learning;
pub mod reservoir;
mod stepping;
pub mod worldline;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;

/// Version tag embedded in every artifact written by the runner.
pub const ARTIFACT_VERSION: &str = concat!("relqrc-", env!("CARGO_PKG_VERSION"));
