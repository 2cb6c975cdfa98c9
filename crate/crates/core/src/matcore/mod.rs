//! Dense symmetric matrices, the three matrix norms used for losses,
//! a cyclic Jacobi eigensolver and Cholesky factorization.

mod cholesky;
mod eigen;

pub use cholesky::{cholesky, LowerTriangular};
pub use eigen::{sym_eigen, sym_eigenvalues, EigenDecomp, MAX_SWEEPS};

use crate::error::{Error, Result};

/// Dense `p x p` real symmetric matrix stored row-major in full.
///
/// Construction guarantees bit-exact symmetry and finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    p: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    /// Builds a matrix from a function evaluated on the upper triangle
    /// (`i <= j`); the lower triangle is mirrored.
    pub fn from_fn(p: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        if p == 0 {
            return Err(Error::DimensionTooSmall {
                required: 1,
                actual: 0,
            });
        }
        let mut data = vec![0.0; p * p];
        for i in 0..p {
            for j in i..p {
                let v = f(i, j);
                if !v.is_finite() {
                    return Err(Error::NonFinite { i, j });
                }
                data[i * p + j] = v;
                data[j * p + i] = v;
            }
        }
        Ok(Self { p, data })
    }

    /// Builds from rows; requires exact symmetry.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::from_rows_with_tolerance(rows, 0.0)
    }

    /// Builds from rows, accepting `|a_ij - a_ji| <= tol * max(1, |a_ij|, |a_ji|)`
    /// and averaging the two triangles.
    pub fn from_rows_with_tolerance(rows: &[Vec<f64>], tol: f64) -> Result<Self> {
        let p = rows.len();
        for row in rows {
            if row.len() != p {
                return Err(Error::DimensionMismatch {
                    expected: p,
                    actual: row.len(),
                });
            }
        }
        for (i, row) in rows.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::NonFinite { i, j });
                }
            }
        }
        for i in 0..p {
            for j in (i + 1)..p {
                let (u, l) = (rows[i][j], rows[j][i]);
                let scale = 1.0f64.max(u.abs()).max(l.abs());
                if (u - l).abs() > tol * scale {
                    return Err(Error::Asymmetric {
                        i,
                        j,
                        upper: u,
                        lower: l,
                    });
                }
            }
        }
        Self::from_fn(p, |i, j| {
            if i == j {
                rows[i][i]
            } else {
                0.5 * (rows[i][j] + rows[j][i])
            }
        })
    }

    pub fn zeros(p: usize) -> Self {
        assert!(p > 0, "dimension must be positive");
        Self {
            p,
            data: vec![0.0; p * p],
        }
    }

    pub fn identity(p: usize) -> Self {
        Self::diagonal(&vec![1.0; p]).expect("identity is finite")
    }

    pub fn diagonal(values: &[f64]) -> Result<Self> {
        Self::from_fn(values.len(), |i, j| if i == j { values[i] } else { 0.0 })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.p
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.p + j]
    }

    /// Row-major view of all `p * p` entries.
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.p..(i + 1) * self.p]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.p).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.p).map(|i| self.get(i, i)).collect()
    }

    pub fn trace(&self) -> f64 {
        (0..self.p).map(|i| self.get(i, i)).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Returns a copy where entries failing `keep(i, j, value)` are zeroed.
    /// `keep` is queried on the upper triangle only.
    pub fn mask(&self, mut keep: impl FnMut(usize, usize, f64) -> bool) -> SymMatrix {
        let p = self.p;
        let mut data = self.data.clone();
        for i in 0..p {
            for j in i..p {
                if !keep(i, j, self.get(i, j)) {
                    data[i * p + j] = 0.0;
                    data[j * p + i] = 0.0;
                }
            }
        }
        SymMatrix { p, data }
    }

    /// Entrywise map applied to the upper triangle and mirrored.
    pub fn map(&self, mut f: impl FnMut(f64) -> f64) -> Result<SymMatrix> {
        Self::from_fn(self.p, |i, j| f(self.get(i, j)))
    }

    fn check_dim(&self, other: &SymMatrix) -> Result<()> {
        if self.p != other.p {
            return Err(Error::DimensionMismatch {
                expected: self.p,
                actual: other.p,
            });
        }
        Ok(())
    }

    pub fn sub(&self, other: &SymMatrix) -> Result<SymMatrix> {
        self.check_dim(other)?;
        Ok(SymMatrix {
            p: self.p,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    pub fn add(&self, other: &SymMatrix) -> Result<SymMatrix> {
        self.check_dim(other)?;
        Ok(SymMatrix {
            p: self.p,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn scale(&self, factor: f64) -> SymMatrix {
        SymMatrix {
            p: self.p,
            data: self.data.iter().map(|v| v * factor).collect(),
        }
    }

    /// Squared Frobenius distance `||self - other||_F^2`.
    pub fn frobenius_dist_sq(&self, other: &SymMatrix) -> Result<f64> {
        self.check_dim(other)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b) * (a - b))
            .sum())
    }

    /// Symmetric permutation `P M P^T` where row `i` of the result is
    /// row `perm[i]` of `self`.
    pub fn permute(&self, perm: &[usize]) -> Result<SymMatrix> {
        if perm.len() != self.p {
            return Err(Error::DimensionMismatch {
                expected: self.p,
                actual: perm.len(),
            });
        }
        Self::from_fn(self.p, |i, j| self.get(perm[i], perm[j]))
    }

    /// `x^T M x`.
    pub fn quad_form(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.p);
        let mut acc = 0.0;
        for i in 0..self.p {
            let row = self.row(i);
            let dot: f64 = row.iter().zip(x).map(|(a, b)| a * b).sum();
            acc += x[i] * dot;
        }
        acc
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.p)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }
}

/// Maximum absolute column sum, `||M||_(1,1)`.
pub fn one_norm(m: &SymMatrix) -> f64 {
    let p = m.dim();
    (0..p)
        .map(|j| (0..p).map(|i| m.get(i, j).abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn frobenius_norm(m: &SymMatrix) -> f64 {
    m.as_slice().iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Spectral norm: largest absolute eigenvalue.
pub fn operator_norm(m: &SymMatrix) -> Result<f64> {
    let values = sym_eigenvalues(m)?;
    Ok(values.iter().fold(0.0f64, |acc, v| acc.max(v.abs())))
}

pub fn min_eigenvalue(m: &SymMatrix) -> Result<f64> {
    let values = sym_eigenvalues(m)?;
    Ok(*values.last().expect("dimension is positive"))
}

pub fn max_eigenvalue(m: &SymMatrix) -> Result<f64> {
    let values = sym_eigenvalues(m)?;
    Ok(values[0])
}

pub fn is_positive_definite(m: &SymMatrix) -> Result<bool> {
    Ok(min_eigenvalue(m)? > 0.0)
}
