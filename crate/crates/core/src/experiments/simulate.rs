use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::datagen::{
    build_covariance, child_seed, invert_permutation, permute_variables, sample, ModelSpec,
    SampleSpec,
};
use crate::error::{Error, Result};
use crate::estimators::{band, ledoit_wolf_fit, sample_covariance, threshold, ThresholdSpec};
use crate::matcore::{sym_eigen, SymMatrix};
use crate::selection::{full_band_grid, select};

use super::losses::{losses_with_spectra, Estimator, LossRecord};
use super::summary::{ScreeData, SummaryTable};
use super::{simulation_cv, CvConfig};

/// AR(1) comparison of the five estimators over several dimensions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table1Config {
    pub p_list: Vec<usize>,
    pub n: usize,
    pub replications: usize,
    pub rho: f64,
    pub seed: u64,
    #[serde(default = "simulation_cv")]
    pub cv: CvConfig,
}

impl Default for Table1Config {
    fn default() -> Self {
        Self {
            p_list: vec![30, 100, 200],
            n: 100,
            replications: 100,
            rho: 0.7,
            seed: 1,
            cv: CvConfig::simulation(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScreeConfig {
    pub p: usize,
    pub n: usize,
    pub replications: usize,
    pub rho: f64,
    pub seed: u64,
    #[serde(default = "simulation_cv")]
    pub cv: CvConfig,
}

impl Default for ScreeConfig {
    fn default() -> Self {
        Self {
            p: 100,
            n: 100,
            replications: 100,
            rho: 0.7,
            seed: 1,
            cv: CvConfig::simulation(),
        }
    }
}

/// Results of one replication, in [`Estimator::ALL`] order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Replication {
    pub p: usize,
    pub rep: usize,
    pub records: Vec<LossRecord>,
    /// Descending eigenvalues of each estimate.
    pub spectra: Vec<Vec<f64>>,
}

impl Replication {
    pub fn record(&self, e: Estimator) -> &LossRecord {
        &self.records[Estimator::ALL
            .iter()
            .position(|x| *x == e)
            .expect("known estimator")]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table1Output {
    pub summary: SummaryTable,
    pub replications: Vec<Replication>,
}

fn check_sizes(n: usize, reps: usize) -> Result<()> {
    if n < 6 {
        return Err(Error::TooFewSamples {
            required: 6,
            actual: n,
        });
    }
    if reps == 0 {
        return Err(Error::InvalidParameter(
            "replications must be positive".into(),
        ));
    }
    Ok(())
}

/// Simulates `reps` AR(1) datasets of size `n x p` and evaluates every
/// estimator on each.
pub fn run_replications(
    p: usize,
    n: usize,
    rho: f64,
    reps: usize,
    seed: u64,
    cv: &CvConfig,
) -> Result<Vec<Replication>> {
    check_sizes(n, reps)?;
    let truth = build_covariance(&ModelSpec::ar1(p, rho))?;
    let truth_eig = sym_eigen(&truth)?;
    let family = child_seed(seed, p as u64);
    (0..reps)
        .into_par_iter()
        .map(|rep| {
            let rep_seed = child_seed(family, rep as u64);
            let x = sample(&truth, &SampleSpec::gaussian(n, child_seed(rep_seed, 0)))?;
            let cv_seed = child_seed(rep_seed, 2);
            let s = sample_covariance(&x)?;

            let lw = ledoit_wolf_fit(&x)?;

            let scheme = cv.scheme(n, cv_seed)?;
            let band_grid = full_band_grid(p)?;
            let k = select(&x, &band_grid, &scheme)?.chosen;
            let banded = band(&s, k as usize);

            let (xp, perm) = permute_variables(&x, child_seed(rep_seed, 1));
            let k_perm = select(&xp, &band_grid, &scheme)?.chosen;
            let banded_perm = band(&sample_covariance(&xp)?, k_perm as usize)
                .permute(&invert_permutation(&perm))?;

            let grid = cv.threshold_grid(&x)?;
            let t = select(&x, &grid, &scheme)?.chosen;
            let thresholded = threshold(&s, ThresholdSpec::all_entries(t)?);

            let estimates = [
                (Estimator::Sample, s, None),
                (Estimator::LedoitWolf, lw.estimate, Some(lw.intensity)),
                (Estimator::Banding, banded, Some(k)),
                (Estimator::BandingPerm, banded_perm, Some(k_perm)),
                (Estimator::Thresholding, thresholded, Some(t)),
            ];
            let mut records = Vec::with_capacity(estimates.len());
            let mut spectra = Vec::with_capacity(estimates.len());
            for (e, m, chosen) in estimates {
                let eig = sym_eigen(&m)?;
                records.push(losses_with_spectra(
                    &m,
                    &eig,
                    &truth,
                    &truth_eig,
                    e.label(),
                    chosen,
                )?);
                spectra.push(eig.values);
            }
            Ok(Replication {
                p,
                rep,
                records,
                spectra,
            })
        })
        .collect()
}

pub fn run_table1(cfg: &Table1Config) -> Result<Table1Output> {
    if cfg.p_list.is_empty() {
        return Err(Error::InvalidParameter("p_list must be non-empty".into()));
    }
    let mut all = Vec::new();
    for &p in &cfg.p_list {
        all.extend(run_replications(
            p,
            cfg.n,
            cfg.rho,
            cfg.replications,
            cfg.seed,
            &cfg.cv,
        )?);
    }
    let summary = SummaryTable::from_records(
        all.iter()
            .flat_map(|r| r.records.iter().map(move |rec| (r.p, rec))),
    );
    Ok(Table1Output {
        summary,
        replications: all,
    })
}

/// Scree summaries from already simulated replications of one dimension.
pub(crate) fn scree_from(truth: &SymMatrix, reps: &[Replication]) -> Result<ScreeData> {
    let truth_values = sym_eigen(truth)?.values;
    let labels: Vec<&str> = Estimator::ALL.iter().map(|e| e.label()).collect();
    let spectra: Vec<Vec<Vec<f64>>> = (0..Estimator::ALL.len())
        .map(|e| reps.iter().map(|r| r.spectra[e].clone()).collect())
        .collect();
    Ok(ScreeData::from_spectra(&truth_values, &labels, &spectra))
}

pub fn scree(cfg: &ScreeConfig) -> Result<ScreeData> {
    let reps = run_replications(cfg.p, cfg.n, cfg.rho, cfg.replications, cfg.seed, &cfg.cv)?;
    scree_from(&build_covariance(&ModelSpec::ar1(cfg.p, cfg.rho))?, &reps)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> Table1Config {
        Table1Config {
            p_list: vec![8, 12],
            n: 40,
            replications: 3,
            rho: 0.6,
            seed: 5,
            cv: CvConfig::simulation(),
        }
    }

    #[test]
    fn table_shape_and_reproducibility() {
        let cfg = small();
        let a = run_table1(&cfg).unwrap();
        assert_eq!(a.replications.len(), 6);
        for r in &a.replications {
            assert_eq!(r.records.len(), 5);
            assert!(r.spectra.iter().all(|s| s.len() == r.p));
        }
        // five estimators, five loss measures, selected for four of them
        assert_eq!(a.summary.rows.len(), 2 * (5 * 5 + 4));
        assert_eq!(a, run_table1(&cfg).unwrap());
    }

    #[test]
    fn thread_count_does_not_matter() {
        let cfg = small();
        let one = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let four = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap();
        let a = one.install(|| run_table1(&cfg)).unwrap();
        let b = four.install(|| run_table1(&cfg)).unwrap();
        assert_eq!(a.summary.to_csv(), b.summary.to_csv());
    }

    #[test]
    fn sample_estimate_loss_is_its_own() {
        let cfg = small();
        let out = run_table1(&cfg).unwrap();
        let r = &out.replications[0];
        let rec = r.record(Estimator::Sample);
        assert_eq!(rec.estimator, "sample");
        assert!(rec.chosen_param.is_none());
        assert!(rec.op_norm_loss <= rec.frob_loss + 1e-12);
    }

    #[test]
    fn scree_summary() {
        let cfg = ScreeConfig {
            p: 10,
            n: 30,
            replications: 4,
            rho: 0.5,
            seed: 2,
            cv: CvConfig::simulation(),
        };
        let d = scree(&cfg).unwrap();
        assert_eq!(d.rows.len(), 5 * 10);
        assert!(d
            .rows
            .iter()
            .all(|r| r.p2_5 <= r.mean + 1e-12 && r.mean <= r.p97_5 + 1e-12));
    }

    #[test]
    fn rejects_bad_sizes() {
        let mut cfg = small();
        cfg.replications = 0;
        assert!(run_table1(&cfg).is_err());
        cfg.replications = 1;
        cfg.n = 3;
        assert!(run_table1(&cfg).is_err());
    }
}
