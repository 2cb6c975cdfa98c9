use crate::error::{Error, Result};
use crate::matcore::{cholesky, min_eigenvalue, operator_norm, SymMatrix};

/// Hard-threshold level and whether the diagonal is exempt.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdSpec {
    s: f64,
    keep_diagonal: bool,
}

impl ThresholdSpec {
    pub fn new(s: f64, keep_diagonal: bool) -> Result<Self> {
        if !(s >= 0.0 && s.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "threshold must be a finite nonnegative number, got {s}"
            )));
        }
        Ok(Self { s, keep_diagonal })
    }

    /// Thresholds every entry, diagonal included.
    pub fn all_entries(s: f64) -> Result<Self> {
        Self::new(s, false)
    }

    pub fn level(&self) -> f64 {
        self.s
    }

    pub fn keep_diagonal(&self) -> bool {
        self.keep_diagonal
    }
}

/// Parameters of the heavy-tailed threshold `M p^{2/(1+gamma)} / sqrt(n)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeavyTailParams {
    gamma: f64,
    scale: f64,
}

impl HeavyTailParams {
    pub fn new(gamma: f64, scale: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) || !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "heavy-tail parameters must be positive, got gamma={gamma}, scale={scale}"
            )));
        }
        Ok(Self { gamma, scale })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }
}

/// Keeps `m_ij` iff `|m_ij| >= s` (ties kept); zeroes the rest.
pub fn threshold(m: &SymMatrix, spec: ThresholdSpec) -> SymMatrix {
    let s = spec.s;
    let keep_diag = spec.keep_diagonal;
    m.mask(|i, j, v| (keep_diag && i == j) || v.abs() >= s)
}

/// Zeroes every entry with `|i - j| > k`.
pub fn band(m: &SymMatrix, k: usize) -> SymMatrix {
    m.mask(|i, j, _| j - i <= k)
}

/// `m_prime * sqrt(ln p / n)`.
pub fn gaussian_threshold(p: usize, n: usize, m_prime: f64) -> Result<f64> {
    if p < 2 {
        return Err(Error::DimensionTooSmall {
            required: 2,
            actual: p,
        });
    }
    if n == 0 {
        return Err(Error::TooFewSamples {
            required: 1,
            actual: 0,
        });
    }
    if !(m_prime >= 0.0 && m_prime.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "threshold multiplier must be nonnegative, got {m_prime}"
        )));
    }
    Ok(m_prime * ((p as f64).ln() / n as f64).sqrt())
}

/// `scale * p^{2/(1+gamma)} / sqrt(n)`.
pub fn heavy_tail_threshold(p: usize, n: usize, params: HeavyTailParams) -> Result<f64> {
    if p == 0 || n == 0 {
        return Err(Error::InvalidParameter("p and n must be positive".into()));
    }
    let exponent = 2.0 / (1.0 + params.gamma);
    Ok(params.scale * (p as f64).powf(exponent) / (n as f64).sqrt())
}

/// Sufficient condition for the thresholded matrix to stay positive
/// definite: `||thresholded - original|| < lambda_min(original)`.
pub fn pd_margin_check(original: &SymMatrix, thresholded: &SymMatrix) -> Result<bool> {
    let diff = thresholded.sub(original)?;
    let holds = operator_norm(&diff)? < min_eigenvalue(original)?;
    debug_assert!(!holds || min_eigenvalue(thresholded)? > 0.0);
    Ok(holds)
}

/// Inverse via Cholesky; requires `lambda_min(m) > 1e-10`.
pub fn inverse_estimate(m: &SymMatrix) -> Result<SymMatrix> {
    let lmin = min_eigenvalue(m)?;
    if lmin <= 1e-10 {
        return Err(Error::NotPositiveDefinite(format!(
            "smallest eigenvalue {lmin} is not above 1e-10"
        )));
    }
    Ok(cholesky(m)?.inverse())
}
