//! Ground-truth covariance models, seeded samplers and a synthetic
//! two-region spatial field.
//!
//! Every random draw comes from a ChaCha8 stream selected by
//! `(seed, key)`, so rows, replications and splits can be generated in any
//! order (or in parallel) with identical results.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, StudentT};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::ObsMatrix;
use crate::matcore::{cholesky, min_eigenvalue, SymMatrix};

/// Independent stream `key` of the generator family seeded by `seed`.
pub fn substream(seed: u64, key: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(key);
    rng
}

/// Seed for a child stream family, e.g. one replication of an experiment.
pub fn child_seed(seed: u64, key: u64) -> u64 {
    substream(seed, key).gen()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelKind {
    Ar1 { rho: f64 },
    PolynomialDecay { alpha: f64, eps: f64 },
    Diagonal { values: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    #[serde(flatten)]
    pub kind: ModelKind,
    pub p: usize,
}

impl ModelSpec {
    pub fn ar1(p: usize, rho: f64) -> Self {
        Self {
            kind: ModelKind::Ar1 { rho },
            p,
        }
    }

    pub fn polynomial_decay(p: usize, alpha: f64, eps: f64) -> Self {
        Self {
            kind: ModelKind::PolynomialDecay { alpha, eps },
            p,
        }
    }

    pub fn diagonal(values: Vec<f64>) -> Self {
        Self {
            p: values.len(),
            kind: ModelKind::Diagonal { values },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "noise", rename_all = "snake_case")]
pub enum Noise {
    Gaussian,
    /// Student-t rescaled to unit variance.
    ScaledStudentT {
        dof: u32,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleSpec {
    pub n: usize,
    pub seed: u64,
    #[serde(flatten)]
    pub noise: Noise,
}

impl SampleSpec {
    pub fn gaussian(n: usize, seed: u64) -> Self {
        Self {
            n,
            seed,
            noise: Noise::Gaussian,
        }
    }
}

/// Builds the population covariance and verifies it is positive definite.
pub fn build_covariance(spec: &ModelSpec) -> Result<SymMatrix> {
    let p = spec.p;
    let m = match &spec.kind {
        ModelKind::Ar1 { rho } => {
            if !(rho.abs() < 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "AR(1) needs |rho| < 1, got {rho}"
                )));
            }
            SymMatrix::from_fn(p, |i, j| rho.powi((j - i) as i32))?
        }
        ModelKind::PolynomialDecay { alpha, eps } => {
            if !(*alpha > 0.0 && *eps > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "polynomial decay needs alpha, eps > 0, got {alpha}, {eps}"
                )));
            }
            SymMatrix::from_fn(p, |i, j| {
                if i == j {
                    1.0
                } else {
                    eps * ((j - i) as f64).powf(-(alpha + 1.0))
                }
            })?
        }
        ModelKind::Diagonal { values } => {
            if values.len() != p {
                return Err(Error::DimensionMismatch {
                    expected: p,
                    actual: values.len(),
                });
            }
            SymMatrix::diagonal(values)?
        }
    };
    let lmin = min_eigenvalue(&m)?;
    if lmin <= 0.0 {
        return Err(Error::NotPositiveDefinite(format!(
            "model covariance has smallest eigenvalue {lmin}"
        )));
    }
    Ok(m)
}

/// Draws `n` mean-zero rows `X_k = L Z_k` with `L = chol(sigma)`.
/// Row `k` uses substream `k` of `spec.seed`.
pub fn sample(sigma: &SymMatrix, spec: &SampleSpec) -> Result<ObsMatrix> {
    if spec.n < 2 {
        return Err(Error::TooFewSamples {
            required: 2,
            actual: spec.n,
        });
    }
    let l = cholesky(sigma)?;
    let p = sigma.dim();
    let student = match spec.noise {
        Noise::Gaussian => None,
        Noise::ScaledStudentT { dof } => {
            if dof <= 2 {
                return Err(Error::InvalidParameter(format!(
                    "Student-t needs dof > 2 for finite variance, got {dof}"
                )));
            }
            let dist =
                StudentT::new(dof as f64).map_err(|e| Error::InvalidParameter(e.to_string()))?;
            Some((dist, ((dof as f64 - 2.0) / dof as f64).sqrt()))
        }
    };
    let mut data = Vec::with_capacity(spec.n * p);
    let mut z = vec![0.0; p];
    for k in 0..spec.n {
        let mut rng = substream(spec.seed, k as u64);
        match &student {
            None => z
                .iter_mut()
                .for_each(|v| *v = StandardNormal.sample(&mut rng)),
            Some((dist, scale)) => z
                .iter_mut()
                .for_each(|v| *v = scale * dist.sample(&mut rng)),
        }
        data.extend(l.mul_vec(&z));
    }
    ObsMatrix::from_flat(spec.n, p, data)
}

/// Uniformly random seeded column permutation. Returns the permuted data
/// and `perm`, where column `j` of the result is column `perm[j]` of `x`.
pub fn permute_variables(x: &ObsMatrix, seed: u64) -> (ObsMatrix, Vec<usize>) {
    let perm = random_permutation(x.p(), seed);
    let permuted = x.permute_columns(&perm).expect("permutation has length p");
    (permuted, perm)
}

pub fn random_permutation(len: usize, seed: u64) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..len).collect();
    perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    perm
}

pub fn invert_permutation(perm: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; perm.len()];
    for (i, &j) in perm.iter().enumerate() {
        inv[j] = i;
    }
    inv
}

/// Configuration of the synthetic two-region field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldConfig {
    pub grid_rows: usize,
    pub grid_cols: usize,
    pub length_scale: f64,
    pub n_years: usize,
    pub missing_rate: f64,
    pub seed: u64,
}

impl Default for FieldConfig {
    /// 60 stations observed over 150 years with 10% of entries missing.
    fn default() -> Self {
        Self {
            grid_rows: 6,
            grid_cols: 10,
            length_scale: 3.0,
            n_years: 150,
            missing_rate: 0.1,
            seed: 1,
        }
    }
}

/// Synthetic spatial field: stations on a `grid_rows x grid_cols` lattice
/// (row-major station index), split by column into a western region holding
/// `ceil(0.6 * grid_cols)` columns and an eastern region holding the rest.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialField {
    pub data: ObsMatrix,
    pub truth: SymMatrix,
    /// Region index (0 or 1) of every station.
    pub region: Vec<u8>,
    pub grid_rows: usize,
    pub grid_cols: usize,
}

/// Within a region the covariance is `exp(-d / length_scale)` in lattice
/// distance; across regions it is exactly zero. Samples are Gaussian and
/// each entry is independently missing with probability `missing_rate`.
pub fn synthetic_spatial_field(cfg: &FieldConfig) -> Result<SpatialField> {
    if cfg.grid_rows == 0 || cfg.grid_cols < 2 {
        return Err(Error::InvalidParameter(
            "spatial field needs at least one row and two columns".into(),
        ));
    }
    if !(0.0..0.5).contains(&cfg.missing_rate) {
        return Err(Error::InvalidParameter(format!(
            "missing_rate must lie in [0, 0.5), got {}",
            cfg.missing_rate
        )));
    }
    if !(cfg.length_scale > 0.0) {
        return Err(Error::InvalidParameter(
            "length_scale must be positive".into(),
        ));
    }
    let cols = cfg.grid_cols;
    let split = ((cols as f64) * 0.6).ceil() as usize;
    let split = split.clamp(1, cols - 1);
    let p = cfg.grid_rows * cols;
    let coord = |s: usize| ((s / cols) as f64, (s % cols) as f64);
    let region: Vec<u8> = (0..p).map(|s| u8::from(s % cols >= split)).collect();

    let truth = SymMatrix::from_fn(p, |a, b| {
        if region[a] != region[b] {
            return 0.0;
        }
        let (ra, ca) = coord(a);
        let (rb, cb) = coord(b);
        let d = ((ra - rb).powi(2) + (ca - cb).powi(2)).sqrt();
        (-d / cfg.length_scale).exp()
    })?;

    let mut data = sample(&truth, &SampleSpec::gaussian(cfg.n_years, cfg.seed))?;
    if cfg.missing_rate > 0.0 {
        let mut rng = substream(cfg.seed, u64::MAX);
        for k in 0..data.n() {
            for j in 0..p {
                if rng.gen::<f64>() < cfg.missing_rate {
                    data.set_missing(k, j);
                }
            }
        }
    }
    Ok(SpatialField {
        data,
        truth,
        region,
        grid_rows: cfg.grid_rows,
        grid_cols: cols,
    })
}
