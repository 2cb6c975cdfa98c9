use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::datagen::{build_covariance, child_seed, sample, substream, ModelSpec, SampleSpec};
use crate::error::{Error, Result};
use crate::estimators::{sample_covariance, threshold, ThresholdSpec};
use crate::matcore::{operator_norm, SymMatrix};
use crate::selection::{argmin_last, default_j_max, split_risk, threshold_step, TuningGrid};

/// Truth used along the ladder.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RateModel {
    #[default]
    Identity,
    PolynomialDecay {
        alpha: f64,
        eps: f64,
    },
}

impl RateModel {
    fn covariance(self, p: usize) -> Result<SymMatrix> {
        match self {
            RateModel::Identity => Ok(SymMatrix::identity(p)),
            RateModel::PolynomialDecay { alpha, eps } => {
                build_covariance(&ModelSpec::polynomial_decay(p, alpha, eps))
            }
        }
    }
}

fn default_subdivisions() -> usize {
    10
}

fn default_bootstrap() -> usize {
    200
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateConfig {
    /// `(p, n)` pairs.
    pub ladder: Vec<(usize, usize)>,
    pub replications: usize,
    pub seed: u64,
    #[serde(default)]
    pub model: RateModel,
    #[serde(default = "default_subdivisions")]
    pub grid_subdivisions: usize,
    #[serde(default = "default_bootstrap")]
    pub bootstrap: usize,
}

impl Default for RateConfig {
    fn default() -> Self {
        Self {
            ladder: vec![(50, 200), (100, 400), (200, 800), (400, 1600)],
            replications: 30,
            seed: 1,
            model: RateModel::Identity,
            grid_subdivisions: default_subdivisions(),
            bootstrap: default_bootstrap(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatePoint {
    pub p: usize,
    pub n: usize,
    /// `ln p / n`.
    pub log_ratio: f64,
    pub threshold: f64,
    pub mean_loss: f64,
    /// Operator-norm loss of each replication.
    pub losses: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateStudy {
    pub m_prime: f64,
    pub calibration_point: (usize, usize),
    pub points: Vec<RatePoint>,
    /// OLS slope of `ln(mean loss)` on `ln(ln p / n)`.
    pub slope: f64,
    pub intercept: f64,
    /// Bootstrap standard error of the slope, resampling replications
    /// within each ladder point.
    pub slope_se: f64,
}

fn ols(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

fn validate(cfg: &RateConfig) -> Result<()> {
    if cfg.ladder.len() < 4 {
        return Err(Error::LadderDegenerate(format!(
            "need at least 4 ladder points, got {}",
            cfg.ladder.len()
        )));
    }
    if let Some(&(p, n)) = cfg.ladder.iter().find(|(p, n)| *p < 2 || *n < 2) {
        return Err(Error::LadderDegenerate(format!(
            "ladder point ({p}, {n}) needs p >= 2 and n >= 2"
        )));
    }
    let ratios: Vec<f64> = cfg
        .ladder
        .iter()
        .map(|&(p, n)| (p as f64).ln() / n as f64)
        .collect();
    if ratios.iter().all(|r| *r == ratios[0]) {
        return Err(Error::LadderDegenerate(
            "ln p / n is constant along the ladder".into(),
        ));
    }
    if cfg.replications < 2 {
        return Err(Error::InvalidParameter(
            "rate study needs at least 2 replications".into(),
        ));
    }
    if cfg.grid_subdivisions == 0 {
        return Err(Error::InvalidParameter(
            "grid_subdivisions must be positive".into(),
        ));
    }
    Ok(())
}

fn simulate_point(cfg: &RateConfig, index: usize) -> Result<(SymMatrix, Vec<SymMatrix>)> {
    let (p, n) = cfg.ladder[index];
    let truth = cfg.model.covariance(p)?;
    let family = child_seed(cfg.seed, index as u64);
    let estimates = (0..cfg.replications)
        .into_par_iter()
        .map(|r| {
            let x = sample(
                &truth,
                &SampleSpec::gaussian(n, child_seed(family, r as u64)),
            )?;
            sample_covariance(&x)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((truth, estimates))
}

/// Calibrates `M'` once, by pooling the oracle Frobenius risk over the
/// replications at the ladder point with the smallest `p`, then measures
/// the operator-norm loss of `T_{M' sqrt(ln p / n)}` along the ladder.
pub fn rate_study(cfg: &RateConfig) -> Result<RateStudy> {
    validate(cfg)?;
    let calib = (0..cfg.ladder.len())
        .min_by_key(|&i| cfg.ladder[i].0)
        .expect("non-empty ladder");
    let simulated = (0..cfg.ladder.len())
        .map(|i| simulate_point(cfg, i))
        .collect::<Result<Vec<_>>>()?;

    let (cp, cn) = cfg.ladder[calib];
    let (truth, estimates) = &simulated[calib];
    let max_abs = estimates.iter().map(SymMatrix::max_abs).fold(0.0, f64::max);
    let grid = TuningGrid::refined_thresholds(
        cp,
        cn,
        default_j_max(cp, cn, max_abs),
        cfg.grid_subdivisions,
    )?;
    let mut pooled = vec![0.0; grid.len()];
    for s in estimates {
        for (t, r) in pooled.iter_mut().zip(split_risk(s, truth, &grid)?) {
            *t += r;
        }
    }
    let curve: Vec<(f64, f64)> = grid.points().iter().copied().zip(pooled).collect();
    let m_prime = curve[argmin_last(&curve)].0 / threshold_step(cp, cn);

    let mut points = Vec::with_capacity(cfg.ladder.len());
    for (&(p, n), (truth, estimates)) in cfg.ladder.iter().zip(&simulated) {
        let t = m_prime * threshold_step(p, n);
        let spec = ThresholdSpec::all_entries(t)?;
        let losses = estimates
            .par_iter()
            .map(|s| operator_norm(&threshold(s, spec).sub(truth)?))
            .collect::<Result<Vec<f64>>>()?;
        points.push(RatePoint {
            p,
            n,
            log_ratio: (p as f64).ln() / n as f64,
            threshold: t,
            mean_loss: losses.iter().sum::<f64>() / losses.len() as f64,
            losses,
        });
    }

    let x: Vec<f64> = points.iter().map(|pt| pt.log_ratio.ln()).collect();
    let y: Vec<f64> = points.iter().map(|pt| pt.mean_loss.ln()).collect();
    let (slope, intercept) = ols(&x, &y);

    let mut rng = substream(cfg.seed, u64::MAX);
    let mut boot = Vec::with_capacity(cfg.bootstrap);
    for _ in 0..cfg.bootstrap {
        let yb: Vec<f64> = points
            .iter()
            .map(|pt| {
                let k = pt.losses.len();
                let total: f64 = (0..k).map(|_| pt.losses[rng.gen_range(0..k)]).sum();
                (total / k as f64).ln()
            })
            .collect();
        boot.push(ols(&x, &yb).0);
    }
    let slope_se = if boot.len() < 2 {
        f64::NAN
    } else {
        let m = boot.iter().sum::<f64>() / boot.len() as f64;
        (boot.iter().map(|b| (b - m).powi(2)).sum::<f64>() / (boot.len() - 1) as f64).sqrt()
    };

    Ok(RateStudy {
        m_prime,
        calibration_point: (cp, cn),
        points,
        slope,
        intercept,
        slope_se,
    })
}
