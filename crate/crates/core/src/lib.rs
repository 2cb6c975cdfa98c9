//! Sparse covariance estimation by hard thresholding.
//!
//! The crate provides the estimators (sample, pairwise-complete,
//! thresholded, banded, Ledoit-Wolf shrinkage), cross-validated selection
//! of the threshold or band width, seeded data generators, sparsity
//! diagnostics, and the simulation studies behind the `covthresh` binary.

pub mod cli;
pub mod datagen;
pub mod error;
pub mod estimators;
pub mod experiments;
pub mod io;
pub mod matcore;
pub mod selection;
pub mod sparsity;

pub use error::{Error, Result};
pub use estimators::{
    band, ledoit_wolf, pairwise_covariance, sample_covariance, threshold, ObsMatrix, ThresholdSpec,
};
pub use matcore::SymMatrix;
