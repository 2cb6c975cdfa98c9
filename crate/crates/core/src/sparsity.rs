//! Row-wise sparsity diagnostics for covariance matrices and the
//! convergence-rate expressions used by the rate studies.
//!
//! Logarithms are natural throughout.

use crate::error::{Error, Result};
use crate::matcore::{sym_eigenvalues, SymMatrix};

/// Row-wise `l_q` summary of a matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SparsityProfile {
    pub q: f64,
    /// `max_i sum_j |m_ij|^q` (nonzero count when `q = 0`).
    pub c0_hat: f64,
    /// Largest diagonal entry.
    pub m_hat: f64,
    pub min_eig: f64,
    pub max_eig: f64,
    /// `m_hat^{1-q} * c0_hat`, an upper bound on `max_eig` whenever every
    /// entry is bounded by `m_hat` in absolute value.
    pub lambda_max_bound: f64,
}

/// Parameters of the polynomial-decay class: `|m_ij| <= C |i-j|^{-(alpha+1)}`
/// off the diagonal and `eps0 <= lambda_min <= lambda_max <= 1/eps0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayClassParams {
    alpha: f64,
    big_c: f64,
    eps0: f64,
}

impl DecayClassParams {
    pub fn new(alpha: f64, big_c: f64, eps0: f64) -> Result<Self> {
        for (name, v) in [("alpha", alpha), ("C", big_c), ("eps0", eps0)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        Ok(Self { alpha, big_c, eps0 })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn big_c(&self) -> f64 {
        self.big_c
    }

    pub fn eps0(&self) -> f64 {
        self.eps0
    }
}

/// First reason a matrix falls outside the decay class.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DecayViolation {
    Entry {
        i: usize,
        j: usize,
        value: f64,
        bound: f64,
    },
    MinEigenvalue {
        value: f64,
        bound: f64,
    },
    MaxEigenvalue {
        value: f64,
        bound: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayCheck {
    pub holds: bool,
    pub violation: Option<DecayViolation>,
}

fn check_q(q: f64) -> Result<()> {
    if (0.0..1.0).contains(&q) {
        Ok(())
    } else {
        Err(Error::InvalidQ(q))
    }
}

/// `max_i sum_j |m_ij|^q`, with `0^0 = 0` so `q = 0` counts nonzeros.
pub fn sparsity_radius(m: &SymMatrix, q: f64) -> Result<f64> {
    check_q(q)?;
    let p = m.dim();
    let radius = (0..p)
        .map(|i| {
            m.row(i)
                .iter()
                .filter(|v| **v != 0.0)
                .map(|v| if q == 0.0 { 1.0 } else { v.abs().powf(q) })
                .sum::<f64>()
        })
        .fold(0.0, f64::max);
    Ok(radius)
}

pub fn profile(m: &SymMatrix, q: f64) -> Result<SparsityProfile> {
    let c0_hat = sparsity_radius(m, q)?;
    let m_hat = m.diag().into_iter().fold(f64::NEG_INFINITY, f64::max);
    let values = sym_eigenvalues(m)?;
    let max_eig = values[0];
    let min_eig = *values.last().expect("nonempty spectrum");
    let lambda_max_bound = m_hat.max(0.0).powf(1.0 - q) * c0_hat;
    if m.max_abs() <= m_hat {
        debug_assert!(max_eig <= lambda_max_bound + 1e-9);
    }
    Ok(SparsityProfile {
        q,
        c0_hat,
        m_hat,
        min_eig,
        max_eig,
        lambda_max_bound,
    })
}

/// Checks entry decay (row-major over the upper triangle) and then the
/// two eigenvalue bounds, reporting the first violation.
pub fn decay_class_check(m: &SymMatrix, params: DecayClassParams) -> Result<DecayCheck> {
    let p = m.dim();
    for i in 0..p {
        for j in (i + 1)..p {
            let bound = params.big_c * ((j - i) as f64).powf(-(params.alpha + 1.0));
            let value = m.get(i, j);
            if value.abs() > bound {
                return Ok(DecayCheck {
                    holds: false,
                    violation: Some(DecayViolation::Entry { i, j, value, bound }),
                });
            }
        }
    }
    let values = sym_eigenvalues(m)?;
    let lmax = values[0];
    let lmin = values[p - 1];
    let violation = if lmin < params.eps0 {
        Some(DecayViolation::MinEigenvalue {
            value: lmin,
            bound: params.eps0,
        })
    } else if lmax > 1.0 / params.eps0 {
        Some(DecayViolation::MaxEigenvalue {
            value: lmax,
            bound: 1.0 / params.eps0,
        })
    } else {
        None
    };
    Ok(DecayCheck {
        holds: violation.is_none(),
        violation,
    })
}

/// Row-radius bound for members of the decay class with `(alpha+1) q > 1`:
/// the diagonal contributes at most `eps0^{-q}` and each side of the row at
/// most `C^q * s/(s-1)` with `s = (alpha+1) q`.
pub fn decay_class_radius_bound(params: DecayClassParams, q: f64) -> Result<f64> {
    check_q(q)?;
    let s = (params.alpha + 1.0) * q;
    if s <= 1.0 {
        return Err(Error::InvalidParameter(format!(
            "need (alpha+1) q > 1, got {s}"
        )));
    }
    Ok(params.eps0.powf(-q) + 2.0 * params.big_c.powf(q) * s / (s - 1.0))
}

fn log_ratio(p: usize, n: usize) -> Result<f64> {
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
    Ok((p as f64).ln() / n as f64)
}

/// Operator-norm rate `c0 (ln p / n)^{(1-q)/2}`.
pub fn operator_rate(q: f64, c0: f64, p: usize, n: usize) -> Result<f64> {
    Ok(c0 * log_ratio(p, n)?.powf((1.0 - q) / 2.0))
}

/// Per-coordinate squared-Frobenius rate `c0 (ln p / n)^{1-q/2}`.
pub fn frobenius_rate(q: f64, c0: f64, p: usize, n: usize) -> Result<f64> {
    Ok(c0 * log_ratio(p, n)?.powf(1.0 - q / 2.0))
}

/// Heavy-tailed operator-norm rate `c0 (p^{2/(1+gamma)} / sqrt(n))^{1-q}`.
pub fn heavy_tail_rate(q: f64, c0: f64, p: usize, n: usize, gamma: f64) -> Result<f64> {
    if !(gamma > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "gamma must be positive, got {gamma}"
        )));
    }
    if p == 0 || n == 0 {
        return Err(Error::InvalidParameter("p and n must be positive".into()));
    }
    let base = (p as f64).powf(2.0 / (1.0 + gamma)) / (n as f64).sqrt();
    Ok(c0 * base.powf(1.0 - q))
}
