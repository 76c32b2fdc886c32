//! Two-state Markov-switching extreme-value model for daily maximum
//! temperatures.
//!
//! A latent chain `S_t ∈ {0, 1}` marks heat-wave days. Outside heat waves the
//! temperatures follow a Gaussian AR(1) process; inside heat waves they follow
//! a generalized Pareto distribution above a threshold `u`, with day-to-day
//! extremal dependence given by the bivariate logistic extreme-value model.
//! Transitions into and out of heat waves use the same logistic dependence
//! with one Gaussian and one GPD margin.
//!
//! The crate is organised by pipeline stage:
//!
//! - [`model`]: densities, transforms and the exact likelihood
//! - [`inference`]: block Gibbs sampler (FFBS states, conjugate transition
//!   probabilities, adaptive Metropolis, missing-value imputation)
//! - [`generator`]: weather generator and heat-wave detectors
//! - [`diagnostics`]: χ̂(u), extremal index, PACF, rank transforms and
//!   posterior predictive checks
//! - [`preprocess`]: station file parsing, summer extraction and
//!   de-seasonalization
//! - [`io`]: plain CSV interchange formats shared by the command-line tool

pub mod diagnostics;
pub mod error;
pub mod generator;
pub mod inference;
pub mod io;
pub mod model;
pub mod preprocess;
pub mod stats;

pub use error::{Error, Result};
pub use model::{ModelParams, State, StateSequence, SummerSegment};

/// Version string written next to every output file set.
pub const VERSION: &str = concat!("heatwave ", env!("CARGO_PKG_VERSION"));
