//! Tuning-parameter selection by repeated random sample splitting.
//!
//! For each split the rows are permuted, the first `n1` rows give
//! `S1`, the remaining `n2` rows give `S2`, and the risk of a grid point is
//! `||regularize(S1, point) - S2||_F^2`, averaged over splits.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::datagen::substream;
use crate::error::{Error, Result};
use crate::estimators::{band, covariance_auto, threshold, ObsMatrix, ThresholdSpec};
use crate::matcore::SymMatrix;
use rand::seq::SliceRandom;

pub const DEFAULT_SPLITS: usize = 10;

/// Cap on the number of base grid steps used by the default grid.
pub const MAX_GRID_STEPS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regularizer {
    Threshold,
    Band,
}

impl Regularizer {
    pub fn apply(self, m: &SymMatrix, point: f64) -> SymMatrix {
        match self {
            Regularizer::Threshold => threshold(
                m,
                ThresholdSpec::all_entries(point).expect("grid points are nonnegative"),
            ),
            Regularizer::Band => band(m, point as usize),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Regularizer::Threshold => "threshold",
            Regularizer::Band => "band",
        }
    }
}

/// How to size the two halves of each split.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum SplitRule {
    /// `n2 = max(1, round(n / ln n))`, `n1 = n - n2`.
    #[default]
    LogN,
    /// `n1 = floor(n * fraction)`.
    TrainFraction { fraction: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitScheme {
    pub n1: usize,
    pub n2: usize,
    pub n_splits: usize,
    pub seed: u64,
}

impl SplitScheme {
    pub fn new(n1: usize, n2: usize, n_splits: usize, seed: u64) -> Result<Self> {
        if n1 < 2 || n2 < 1 {
            return Err(Error::InvalidParameter(format!(
                "split sizes need n1 >= 2 and n2 >= 1, got n1={n1}, n2={n2}"
            )));
        }
        if n_splits == 0 {
            return Err(Error::InvalidParameter("n_splits must be positive".into()));
        }
        Ok(Self {
            n1,
            n2,
            n_splits,
            seed,
        })
    }

    /// Default sizing: `n2 = max(1, round(n / ln n))` (half rounded up).
    pub fn log_rule(n: usize, n_splits: usize, seed: u64) -> Result<Self> {
        Self::from_rule(SplitRule::LogN, n, n_splits, seed)
    }

    pub fn from_rule(rule: SplitRule, n: usize, n_splits: usize, seed: u64) -> Result<Self> {
        if n < 3 {
            return Err(Error::TooFewSamples {
                required: 3,
                actual: n,
            });
        }
        let n1 = match rule {
            SplitRule::LogN => {
                let n2 = ((n as f64 / (n as f64).ln()).round() as usize).max(1);
                n.saturating_sub(n2)
            }
            SplitRule::TrainFraction { fraction } => {
                if !(fraction > 0.0 && fraction < 1.0) {
                    return Err(Error::InvalidParameter(format!(
                        "train fraction must lie in (0, 1), got {fraction}"
                    )));
                }
                (n as f64 * fraction).floor() as usize
            }
        };
        Self::new(n1, n - n1, n_splits, seed)
    }

    pub fn n(&self) -> usize {
        self.n1 + self.n2
    }
}

/// Ascending candidate values for a tuning parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuningGrid {
    points: Vec<f64>,
    kind: Regularizer,
}

impl TuningGrid {
    pub fn from_points(points: Vec<f64>, kind: Regularizer) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidParameter("grid must be non-empty".into()));
        }
        if points.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::InvalidParameter(
                "grid points must be finite and nonnegative".into(),
            ));
        }
        if points.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter(
                "grid points must be strictly increasing".into(),
            ));
        }
        if kind == Regularizer::Band && points.iter().any(|v| v.fract() != 0.0) {
            return Err(Error::InvalidParameter(
                "band widths must be integers".into(),
            ));
        }
        Ok(Self { points, kind })
    }

    /// Thresholds spaced at `step / subdivisions` up to `j_max * step`,
    /// where `step = sqrt(ln p / n)`.
    pub fn refined_thresholds(
        p: usize,
        n: usize,
        j_max: usize,
        subdivisions: usize,
    ) -> Result<Self> {
        if p < 2 {
            return Err(Error::DimensionTooSmall {
                required: 2,
                actual: p,
            });
        }
        if n == 0 || subdivisions == 0 {
            return Err(Error::InvalidParameter(
                "n and subdivisions must be positive".into(),
            ));
        }
        let step = threshold_step(p, n) / subdivisions as f64;
        let points = (0..=j_max * subdivisions)
            .map(|j| j as f64 * step)
            .collect();
        Self::from_points(points, Regularizer::Threshold)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn kind(&self) -> Regularizer {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Drops threshold points below `cutoff`, keeping at least the largest.
    pub fn with_lower_cutoff(&self, cutoff: f64) -> TuningGrid {
        let kept: Vec<f64> = self
            .points
            .iter()
            .copied()
            .filter(|v| *v >= cutoff)
            .collect();
        let points = if kept.is_empty() {
            vec![*self.points.last().expect("non-empty grid")]
        } else {
            kept
        };
        TuningGrid {
            points,
            kind: self.kind,
        }
    }
}

/// `sqrt(ln p / n)`.
pub fn threshold_step(p: usize, n: usize) -> f64 {
    ((p as f64).ln() / n as f64).sqrt()
}

/// Thresholds `{j sqrt(ln p / n) : 0 <= j <= j_max}` or band widths
/// `{0, 1, ..., min(j_max, p - 1)}`.
pub fn make_grid(p: usize, n: usize, j_max: usize, kind: Regularizer) -> Result<TuningGrid> {
    match kind {
        Regularizer::Threshold => TuningGrid::refined_thresholds(p, n, j_max, 1),
        Regularizer::Band => {
            if p == 0 {
                return Err(Error::DimensionTooSmall {
                    required: 1,
                    actual: 0,
                });
            }
            let top = j_max.min(p - 1);
            TuningGrid::from_points((0..=top).map(|k| k as f64).collect(), kind)
        }
    }
}

/// Smallest `j` with `j * step >= max_abs`, capped at [`MAX_GRID_STEPS`].
pub fn default_j_max(p: usize, n: usize, max_abs: f64) -> usize {
    let step = threshold_step(p, n);
    if step <= 0.0 || !step.is_finite() {
        return MAX_GRID_STEPS;
    }
    ((max_abs / step).ceil() as usize).min(MAX_GRID_STEPS)
}

/// Default threshold grid for a dataset: covers every entry magnitude of
/// its covariance, each base step split into `subdivisions` pieces.
pub fn default_threshold_grid(x: &ObsMatrix, subdivisions: usize) -> Result<TuningGrid> {
    let s = covariance_auto(x)?;
    let j_max = default_j_max(x.p(), x.n(), s.max_abs());
    TuningGrid::refined_thresholds(x.p(), x.n(), j_max, subdivisions)
}

/// Every band width `0..=p-1`.
pub fn full_band_grid(p: usize) -> Result<TuningGrid> {
    make_grid(p, 1, p.saturating_sub(1), Regularizer::Band)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionResult {
    pub kind: Regularizer,
    pub chosen: f64,
    pub risk_curve: Vec<(f64, f64)>,
    /// Absent for oracle selections.
    pub scheme: Option<SplitScheme>,
}

#[derive(Serialize, Deserialize)]
struct SelectionJson {
    kind: Regularizer,
    chosen: f64,
    grid: Vec<f64>,
    risk: Vec<f64>,
    n1: Option<usize>,
    n2: Option<usize>,
    n_splits: Option<usize>,
    seed: Option<u64>,
}

impl SelectionResult {
    pub fn to_json(&self) -> String {
        let j = SelectionJson {
            kind: self.kind,
            chosen: self.chosen,
            grid: self.risk_curve.iter().map(|r| r.0).collect(),
            risk: self.risk_curve.iter().map(|r| r.1).collect(),
            n1: self.scheme.map(|s| s.n1),
            n2: self.scheme.map(|s| s.n2),
            n_splits: self.scheme.map(|s| s.n_splits),
            seed: self.scheme.map(|s| s.seed),
        };
        serde_json::to_string_pretty(&j).expect("selection serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let j: SelectionJson = serde_json::from_str(text).map_err(|e| Error::Parse {
            source_name: "selection JSON".into(),
            line: e.line(),
            message: e.to_string(),
        })?;
        if j.grid.len() != j.risk.len() {
            return Err(Error::DimensionMismatch {
                expected: j.grid.len(),
                actual: j.risk.len(),
            });
        }
        let scheme = match (j.n1, j.n2, j.n_splits, j.seed) {
            (Some(n1), Some(n2), Some(ns), Some(seed)) => Some(SplitScheme::new(n1, n2, ns, seed)?),
            _ => None,
        };
        Ok(Self {
            kind: j.kind,
            chosen: j.chosen,
            risk_curve: j.grid.into_iter().zip(j.risk).collect(),
            scheme,
        })
    }

    /// Risk at the chosen point.
    pub fn min_risk(&self) -> f64 {
        self.risk_curve
            .iter()
            .find(|(g, _)| *g == self.chosen)
            .map(|r| r.1)
            .unwrap_or(f64::NAN)
    }
}

/// Per-split rows `(S1 rows, S2 rows)` for split `index`.
pub fn split_rows(scheme: &SplitScheme, index: usize) -> (Vec<usize>, Vec<usize>) {
    let mut order: Vec<usize> = (0..scheme.n()).collect();
    order.shuffle(&mut substream(scheme.seed, index as u64));
    let second = order.split_off(scheme.n1);
    (order, second)
}

/// Risk of every grid point for one pair of half-sample covariances.
pub fn split_risk(s1: &SymMatrix, s2: &SymMatrix, grid: &TuningGrid) -> Result<Vec<f64>> {
    if s1.dim() != s2.dim() {
        return Err(Error::DimensionMismatch {
            expected: s1.dim(),
            actual: s2.dim(),
        });
    }
    let p = s1.dim();
    let a = s1.as_slice();
    let b = s2.as_slice();
    match grid.kind() {
        Regularizer::Threshold => {
            // Entries sorted by |a|: entries below s contribute b^2, the
            // rest (a - b)^2.
            let mut idx: Vec<usize> = (0..p * p).collect();
            idx.sort_by(|&x, &y| a[x].abs().total_cmp(&a[y].abs()).then(x.cmp(&y)));
            let mags: Vec<f64> = idx.iter().map(|&t| a[t].abs()).collect();
            let mut below = vec![0.0; p * p + 1];
            for (t, &e) in idx.iter().enumerate() {
                below[t + 1] = below[t] + b[e] * b[e];
            }
            let mut above = vec![0.0; p * p + 1];
            for (t, &e) in idx.iter().enumerate().rev() {
                above[t] = above[t + 1] + (a[e] - b[e]).powi(2);
            }
            Ok(grid
                .points()
                .iter()
                .map(|&s| {
                    let cut = mags.partition_point(|m| *m < s);
                    below[cut] + above[cut]
                })
                .collect())
        }
        Regularizer::Band => {
            let mut kept = vec![0.0; p];
            let mut dropped = vec![0.0; p];
            for i in 0..p {
                for j in 0..p {
                    let d = i.abs_diff(j);
                    let (x, y) = (a[i * p + j], b[i * p + j]);
                    kept[d] += (x - y) * (x - y);
                    dropped[d] += y * y;
                }
            }
            // prefix of kept, suffix of dropped
            let mut kept_prefix = vec![0.0; p + 1];
            for d in 0..p {
                kept_prefix[d + 1] = kept_prefix[d] + kept[d];
            }
            let mut dropped_suffix = vec![0.0; p + 1];
            for d in (0..p).rev() {
                dropped_suffix[d] = dropped_suffix[d + 1] + dropped[d];
            }
            Ok(grid
                .points()
                .iter()
                .map(|&k| {
                    let k = (k as usize).min(p - 1);
                    kept_prefix[k + 1] + dropped_suffix[k + 1]
                })
                .collect())
        }
    }
}

/// Average split risk over `scheme.n_splits` random splits.
///
/// Complete data uses the divisor-`n` sample covariance on each half; data
/// with missing entries uses the pairwise-complete covariance.
pub fn cv_risk(x: &ObsMatrix, grid: &TuningGrid, scheme: &SplitScheme) -> Result<Vec<(f64, f64)>> {
    if scheme.n() != x.n() {
        return Err(Error::DimensionMismatch {
            expected: x.n(),
            actual: scheme.n(),
        });
    }
    if scheme.n1 < 2 || scheme.n2 < 2 {
        return Err(Error::TooFewSamples {
            required: 2,
            actual: scheme.n1.min(scheme.n2),
        });
    }
    let per_split: Vec<Vec<f64>> = (0..scheme.n_splits)
        .into_par_iter()
        .map(|v| {
            let (r1, r2) = split_rows(scheme, v);
            let s1 = covariance_auto(&x.select_rows(&r1))?;
            let s2 = covariance_auto(&x.select_rows(&r2))?;
            split_risk(&s1, &s2, grid)
        })
        .collect::<Result<_>>()?;

    let mut total = vec![0.0; grid.len()];
    for risks in &per_split {
        for (t, r) in total.iter_mut().zip(risks) {
            *t += r;
        }
    }
    let nf = scheme.n_splits as f64;
    Ok(grid
        .points()
        .iter()
        .zip(total)
        .map(|(&g, t)| (g, t / nf))
        .collect())
}

/// Index of the minimum, ties going to the largest grid point.
pub(crate) fn argmin_last(curve: &[(f64, f64)]) -> usize {
    let mut best = 0;
    for (i, (_, r)) in curve.iter().enumerate() {
        if *r <= curve[best].1 {
            best = i;
        }
    }
    best
}

pub fn select(x: &ObsMatrix, grid: &TuningGrid, scheme: &SplitScheme) -> Result<SelectionResult> {
    let curve = cv_risk(x, grid, scheme)?;
    let best = argmin_last(&curve);
    Ok(SelectionResult {
        kind: grid.kind(),
        chosen: curve[best].0,
        risk_curve: curve,
        scheme: Some(*scheme),
    })
}

/// Chooses the grid point closest to the truth in Frobenius norm.
pub fn oracle_select(
    sigma_hat: &SymMatrix,
    sigma_true: &SymMatrix,
    grid: &TuningGrid,
) -> Result<SelectionResult> {
    if sigma_hat.dim() != sigma_true.dim() {
        return Err(Error::DimensionMismatch {
            expected: sigma_true.dim(),
            actual: sigma_hat.dim(),
        });
    }
    let risks = split_risk(sigma_hat, sigma_true, grid)?;
    let curve: Vec<(f64, f64)> = grid.points().iter().copied().zip(risks).collect();
    let best = argmin_last(&curve);
    Ok(SelectionResult {
        kind: grid.kind(),
        chosen: curve[best].0,
        risk_curve: curve,
        scheme: None,
    })
}
