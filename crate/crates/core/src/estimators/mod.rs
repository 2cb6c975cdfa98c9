//! Covariance estimators and the regularizing operators applied to them.

mod covariance;
mod obs;
mod regularize;
mod shrinkage;

pub use covariance::{covariance_auto, pairwise_covariance, sample_covariance};
pub use obs::ObsMatrix;
pub use regularize::{
    band, gaussian_threshold, heavy_tail_threshold, inverse_estimate, pd_margin_check, threshold,
    HeavyTailParams, ThresholdSpec,
};
pub use shrinkage::{ledoit_wolf, ledoit_wolf_fit, LedoitWolf};
