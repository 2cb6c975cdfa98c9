//! Simulation studies and the spatial EOF pipeline.
//!
//! Replications run in parallel; replication `r` draws all of its
//! randomness from seeds derived from `(seed, r)`, so results do not depend
//! on the thread count.

mod cvoracle;
mod eof;
mod losses;
mod rate;
mod simulate;
mod summary;

pub use cvoracle::{cv_vs_oracle, oracle_ratio, CvOracleConfig, CvOracleResult};
pub use eof::{eof_pipeline, Eof, EofResult, EofThreshold};
pub use losses::{compute_losses, losses_with_spectra, Estimator, LossRecord};
pub use rate::{rate_study, RateConfig, RateModel, RatePoint, RateStudy};
pub use simulate::{
    run_replications, run_table1, scree, Replication, ScreeConfig, Table1Config, Table1Output,
};
pub use summary::{percentile, ScreeData, ScreeRow, SummaryRow, SummaryTable};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::estimators::ObsMatrix;
use crate::selection::{default_threshold_grid, SplitRule, SplitScheme, TuningGrid};

/// Cross-validation settings shared by the experiments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CvConfig {
    pub n_splits: usize,
    pub split: SplitRule,
    /// Pieces each base threshold step is divided into.
    pub grid_subdivisions: usize,
}

impl Default for CvConfig {
    fn default() -> Self {
        Self {
            n_splits: crate::selection::DEFAULT_SPLITS,
            split: SplitRule::LogN,
            grid_subdivisions: 1,
        }
    }
}

impl CvConfig {
    /// Settings used by the AR(1) comparison studies: one third of the rows
    /// fit the estimate and a ten-fold refined threshold grid.
    pub fn simulation() -> Self {
        Self {
            n_splits: crate::selection::DEFAULT_SPLITS,
            split: SplitRule::TrainFraction {
                fraction: 1.0 / 3.0,
            },
            grid_subdivisions: 10,
        }
    }

    pub fn scheme(&self, n: usize, seed: u64) -> Result<SplitScheme> {
        SplitScheme::from_rule(self.split, n, self.n_splits, seed)
    }

    pub fn threshold_grid(&self, x: &ObsMatrix) -> Result<TuningGrid> {
        default_threshold_grid(x, self.grid_subdivisions)
    }
}

fn simulation_cv() -> CvConfig {
    CvConfig::simulation()
}
