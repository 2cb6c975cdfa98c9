use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::datagen::{build_covariance, child_seed, sample, ModelSpec, SampleSpec};
use crate::error::{Error, Result};
use crate::estimators::{sample_covariance, threshold, ThresholdSpec};
use crate::matcore::SymMatrix;
use crate::selection::{oracle_select, select, TuningGrid};

use super::CvConfig;

fn default_cv() -> CvConfig {
    CvConfig {
        grid_subdivisions: 10,
        ..CvConfig::default()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvOracleConfig {
    pub p: usize,
    pub n: usize,
    pub rho: f64,
    pub replications: usize,
    pub seed: u64,
    #[serde(default = "default_cv")]
    pub cv: CvConfig,
}

impl Default for CvOracleConfig {
    fn default() -> Self {
        Self {
            p: 100,
            n: 100,
            rho: 0.7,
            replications: 50,
            seed: 1,
            cv: default_cv(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvOracleResult {
    /// `||T_cv - Sigma||_F / ||T_oracle - Sigma||_F` for each replication.
    pub ratios: Vec<f64>,
    pub chosen_cv: Vec<f64>,
    pub chosen_oracle: Vec<f64>,
    pub mean: f64,
    pub median: f64,
    pub max: f64,
}

/// Frobenius loss at `chosen` relative to the best loss on `grid`.
/// Both zero gives 1.
pub fn oracle_ratio(
    sigma_hat: &SymMatrix,
    truth: &SymMatrix,
    chosen: f64,
    grid: &TuningGrid,
) -> Result<f64> {
    let oracle = oracle_select(sigma_hat, truth, grid)?;
    let best = oracle.min_risk().sqrt();
    let loss = threshold(sigma_hat, ThresholdSpec::all_entries(chosen)?)
        .frobenius_dist_sq(truth)?
        .sqrt();
    Ok(if best == 0.0 && loss == 0.0 {
        1.0
    } else {
        loss / best
    })
}

pub fn cv_vs_oracle(cfg: &CvOracleConfig) -> Result<CvOracleResult> {
    if cfg.replications == 0 {
        return Err(Error::InvalidParameter(
            "replications must be positive".into(),
        ));
    }
    let truth = build_covariance(&ModelSpec::ar1(cfg.p, cfg.rho))?;
    let runs = (0..cfg.replications)
        .into_par_iter()
        .map(|r| {
            let rep_seed = child_seed(cfg.seed, r as u64);
            let x = sample(
                &truth,
                &SampleSpec::gaussian(cfg.n, child_seed(rep_seed, 0)),
            )?;
            let s = sample_covariance(&x)?;
            let grid = cfg.cv.threshold_grid(&x)?;
            let scheme = cfg.cv.scheme(cfg.n, child_seed(rep_seed, 2))?;
            let cv = select(&x, &grid, &scheme)?.chosen;
            let oracle = oracle_select(&s, &truth, &grid)?.chosen;
            let ratio = oracle_ratio(&s, &truth, cv, &grid)?;
            assert!(
                ratio >= 1.0 - 1e-12,
                "CV loss below the oracle loss on a shared grid: {ratio}"
            );
            Ok((ratio, cv, oracle))
        })
        .collect::<Result<Vec<_>>>()?;

    let ratios: Vec<f64> = runs.iter().map(|r| r.0).collect();
    let mut sorted = ratios.clone();
    sorted.sort_by(f64::total_cmp);
    let k = sorted.len();
    let median = if k % 2 == 1 {
        sorted[k / 2]
    } else {
        0.5 * (sorted[k / 2 - 1] + sorted[k / 2])
    };
    Ok(CvOracleResult {
        mean: ratios.iter().sum::<f64>() / k as f64,
        median,
        max: sorted[k - 1],
        chosen_cv: runs.iter().map(|r| r.1).collect(),
        chosen_oracle: runs.iter().map(|r| r.2).collect(),
        ratios,
    })
}
