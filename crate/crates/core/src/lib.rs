//! Numerical construction of random exponential attractors.
//!
//! Noise paths and their shift group ([`noise`]), concrete random dynamical
//! systems ([`systems`]), discrete cocycles and Lipschitz estimates
//! ([`cocycle`]), covering nets ([`nets`]), the attractor construction
//! ([`attractor`]), measurement tools ([`diagnostics`]) and the
//! experiment runner ([`cli`]).

// `!(x > 0.0)` rejects NaN along with non-positive values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod attractor;
pub mod cli;
pub mod cocycle;
pub mod config;
pub mod diagnostics;
pub mod error;
pub mod grid;
pub mod nets;
pub mod noise;
pub mod rng;
pub mod systems;

pub use error::{Error, Result};
pub use noise::NoisePath;
pub use systems::state::StateVector;
