use super::SymMatrix;
use crate::error::{Error, Result};

/// Dense lower-triangular factor `L` with `L L^T = M`.
#[derive(Debug, Clone, PartialEq)]
pub struct LowerTriangular {
    p: usize,
    data: Vec<f64>,
}

impl LowerTriangular {
    /// Builds from row-major entries; the strict upper triangle is ignored.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let p = rows.len();
        let mut data = vec![0.0; p * p];
        for (i, row) in rows.iter().enumerate() {
            if row.len() != p {
                return Err(Error::DimensionMismatch {
                    expected: p,
                    actual: row.len(),
                });
            }
            data[i * p..i * p + i + 1].copy_from_slice(&row[..=i]);
        }
        Ok(Self { p, data })
    }

    pub fn dim(&self) -> usize {
        self.p
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.p + j]
    }

    /// `L z`.
    pub fn mul_vec(&self, z: &[f64]) -> Vec<f64> {
        (0..self.p)
            .map(|i| {
                self.data[i * self.p..i * self.p + i + 1]
                    .iter()
                    .zip(z)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    /// `L L^T`.
    pub fn reconstruct(&self) -> SymMatrix {
        let p = self.p;
        SymMatrix::from_fn(p, |i, j| {
            (0..=i.min(j))
                .map(|k| self.get(i, k) * self.get(j, k))
                .sum()
        })
        .expect("finite factor")
    }

    /// Solves `L L^T x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let p = self.p;
        let mut y = b.to_vec();
        for i in 0..p {
            let mut s = y[i];
            for k in 0..i {
                s -= self.get(i, k) * y[k];
            }
            y[i] = s / self.get(i, i);
        }
        for i in (0..p).rev() {
            let mut s = y[i];
            for k in (i + 1)..p {
                s -= self.get(k, i) * y[k];
            }
            y[i] = s / self.get(i, i);
        }
        y
    }

    /// `(L L^T)^{-1}`, symmetrized.
    pub fn inverse(&self) -> SymMatrix {
        let p = self.p;
        let mut cols = Vec::with_capacity(p);
        for j in 0..p {
            let mut e = vec![0.0; p];
            e[j] = 1.0;
            cols.push(self.solve(&e));
        }
        SymMatrix::from_fn(p, |i, j| 0.5 * (cols[j][i] + cols[i][j])).expect("finite inverse")
    }
}

/// Cholesky–Banachiewicz factorization.
pub fn cholesky(m: &SymMatrix) -> Result<LowerTriangular> {
    let p = m.dim();
    let mut data = vec![0.0; p * p];
    for i in 0..p {
        for j in 0..=i {
            let mut s = m.get(i, j);
            for k in 0..j {
                s -= data[i * p + k] * data[j * p + k];
            }
            if i == j {
                if s <= 0.0 || !s.is_finite() {
                    return Err(Error::NotPositiveDefinite(format!(
                        "Cholesky pivot {s} at index {i}"
                    )));
                }
                data[i * p + i] = s.sqrt();
            } else {
                data[i * p + j] = s / data[j * p + j];
            }
        }
    }
    Ok(LowerTriangular { p, data })
}
