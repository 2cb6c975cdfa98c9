//! Ledoit–Wolf shrinkage toward a scaled identity.
//!
//! `LW = rho * mu * I + (1 - rho) * S` with `mu = tr(S) / p`,
//! `d^2 = ||S - mu I||_F^2 / p`,
//! `b^2 = min(d^2, (1 / (n^2 p)) sum_k ||x_k x_k^T - S||_F^2)` over centred
//! rows `x_k`, and `rho = b^2 / d^2`.

use super::{sample_covariance, ObsMatrix};
use crate::error::Result;
use crate::matcore::SymMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct LedoitWolf {
    pub estimate: SymMatrix,
    /// Shrinkage intensity in `[0, 1]`.
    pub intensity: f64,
    /// Scale of the identity target, `tr(S) / p`.
    pub target_scale: f64,
}

pub fn ledoit_wolf(x: &ObsMatrix) -> Result<SymMatrix> {
    ledoit_wolf_fit(x).map(|f| f.estimate)
}

pub fn ledoit_wolf_fit(x: &ObsMatrix) -> Result<LedoitWolf> {
    let s = sample_covariance(x)?;
    let (n, p) = (x.n(), x.p());
    let pf = p as f64;
    let mu = s.trace() / pf;

    let d2 = (0..p)
        .flat_map(|i| (0..p).map(move |j| (i, j)))
        .map(|(i, j)| {
            let t = if i == j { mu } else { 0.0 };
            (s.get(i, j) - t).powi(2)
        })
        .sum::<f64>()
        / pf;
    if d2 == 0.0 {
        return Ok(LedoitWolf {
            estimate: s,
            intensity: 0.0,
            target_scale: mu,
        });
    }

    let mut mean = vec![0.0; p];
    for k in 0..n {
        for (m, v) in mean.iter_mut().zip(x.row_raw(k)) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);

    // ||x x^T - S||_F^2 = ||x||^4 - 2 x^T S x + ||S||_F^2
    let s_fro_sq: f64 = s.as_slice().iter().map(|v| v * v).sum();
    let mut centered = vec![0.0; p];
    let mut total = 0.0;
    for k in 0..n {
        for ((c, v), m) in centered.iter_mut().zip(x.row_raw(k)).zip(&mean) {
            *c = v - m;
        }
        let norm_sq: f64 = centered.iter().map(|c| c * c).sum();
        let term = norm_sq * norm_sq - 2.0 * s.quad_form(&centered) + s_fro_sq;
        total += term.max(0.0);
    }
    let nf = n as f64;
    let b2 = (total / (nf * nf * pf)).min(d2);
    let intensity = (b2 / d2).clamp(0.0, 1.0);

    let estimate = SymMatrix::from_fn(p, |i, j| {
        let target = if i == j { mu } else { 0.0 };
        intensity * target + (1.0 - intensity) * s.get(i, j)
    })?;
    Ok(LedoitWolf {
        estimate,
        intensity,
        target_scale: mu,
    })
}
