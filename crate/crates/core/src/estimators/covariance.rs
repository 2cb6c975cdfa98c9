use super::ObsMatrix;
use crate::error::{Error, Result};
use crate::matcore::SymMatrix;

/// Sample covariance with divisor `n`:
/// `(1/n) sum_k (X_k - mean)(X_k - mean)^T`.
pub fn sample_covariance(x: &ObsMatrix) -> Result<SymMatrix> {
    if x.has_missing() {
        return Err(Error::MissingData);
    }
    let (n, p) = (x.n(), x.p());
    if n < 2 {
        return Err(Error::TooFewSamples {
            required: 2,
            actual: n,
        });
    }
    let mut mean = vec![0.0; p];
    for k in 0..n {
        for (m, v) in mean.iter_mut().zip(x.row_raw(k)) {
            *m += v;
        }
    }
    let nf = n as f64;
    mean.iter_mut().for_each(|m| *m /= nf);

    let mut acc = vec![0.0; p * p];
    let mut centered = vec![0.0; p];
    for k in 0..n {
        for ((c, v), m) in centered.iter_mut().zip(x.row_raw(k)).zip(&mean) {
            *c = v - m;
        }
        for i in 0..p {
            let ci = centered[i];
            let row = &mut acc[i * p..(i + 1) * p];
            for j in i..p {
                row[j] += ci * centered[j];
            }
        }
    }
    SymMatrix::from_fn(p, |i, j| acc[i * p + j] / nf)
}

/// Covariance where entry `(i, j)` uses only the rows in which both
/// columns are present, centred by means over that same row subset.
///
/// The result is symmetric but not necessarily positive semidefinite.
pub fn pairwise_covariance(x: &ObsMatrix) -> Result<SymMatrix> {
    if !x.has_missing() {
        return sample_covariance(x).map_err(|e| match e {
            Error::TooFewSamples { .. } => Error::InsufficientOverlap { i: 0, j: 0 },
            other => other,
        });
    }
    let (n, p) = (x.n(), x.p());
    let mut out = vec![0.0; p * p];
    let mut rows = Vec::with_capacity(n);
    for i in 0..p {
        for j in i..p {
            rows.clear();
            rows.extend((0..n).filter(|&k| x.get(k, i).is_some() && x.get(k, j).is_some()));
            if rows.len() < 2 {
                return Err(Error::InsufficientOverlap { i, j });
            }
            let cnt = rows.len() as f64;
            let raw = |k: usize, c: usize| x.row_raw(k)[c];
            let mi = rows.iter().map(|&k| raw(k, i)).sum::<f64>() / cnt;
            let mj = rows.iter().map(|&k| raw(k, j)).sum::<f64>() / cnt;
            let s: f64 = rows
                .iter()
                .map(|&k| (raw(k, i) - mi) * (raw(k, j) - mj))
                .sum();
            out[i * p + j] = s / cnt;
        }
    }
    SymMatrix::from_fn(p, |i, j| out[i * p + j])
}

/// Covariance from whichever route the data supports: the plain sample
/// covariance for complete data, pairwise-complete otherwise.
pub fn covariance_auto(x: &ObsMatrix) -> Result<SymMatrix> {
    if x.has_missing() {
        pairwise_covariance(x)
    } else {
        sample_covariance(x)
    }
}
