use crate::error::{Error, Result};

/// `n x p` observation matrix; rows are samples, entries may be missing.
///
/// Missing entries are stored as NaN; every present entry is finite.
#[derive(Debug, Clone)]
pub struct ObsMatrix {
    n: usize,
    p: usize,
    data: Vec<f64>,
}

/// Equal shape, equal present values, missing in the same places.
impl PartialEq for ObsMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n
            && self.p == other.p
            && self
                .data
                .iter()
                .zip(&other.data)
                .all(|(a, b)| a == b || (a.is_nan() && b.is_nan()))
    }
}

impl ObsMatrix {
    /// Complete data, one inner vector per sample.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let opt: Vec<Vec<Option<f64>>> = rows
            .iter()
            .map(|r| r.iter().map(|v| Some(*v)).collect())
            .collect();
        Self::from_option_rows(&opt)
    }

    pub fn from_option_rows(rows: &[Vec<Option<f64>>]) -> Result<Self> {
        let n = rows.len();
        let p = rows.first().map_or(0, Vec::len);
        if n == 0 || p == 0 {
            return Err(Error::InvalidParameter(
                "observation matrix must be non-empty".into(),
            ));
        }
        let mut data = Vec::with_capacity(n * p);
        for (k, row) in rows.iter().enumerate() {
            if row.len() != p {
                return Err(Error::DimensionMismatch {
                    expected: p,
                    actual: row.len(),
                });
            }
            for (j, v) in row.iter().enumerate() {
                match v {
                    Some(x) if !x.is_finite() => return Err(Error::NonFinite { i: k, j }),
                    Some(x) => data.push(*x),
                    None => data.push(f64::NAN),
                }
            }
        }
        Ok(Self { n, p, data })
    }

    /// Complete data from a row-major buffer.
    pub fn from_flat(n: usize, p: usize, data: Vec<f64>) -> Result<Self> {
        if n == 0 || p == 0 {
            return Err(Error::InvalidParameter(
                "observation matrix must be non-empty".into(),
            ));
        }
        if data.len() != n * p {
            return Err(Error::DimensionMismatch {
                expected: n * p,
                actual: data.len(),
            });
        }
        if let Some(idx) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                i: idx / p,
                j: idx % p,
            });
        }
        Ok(Self { n, p, data })
    }

    /// Row-major buffer where NaN marks a missing entry.
    pub fn from_flat_with_missing(n: usize, p: usize, data: Vec<f64>) -> Result<Self> {
        if n == 0 || p == 0 {
            return Err(Error::InvalidParameter(
                "observation matrix must be non-empty".into(),
            ));
        }
        if data.len() != n * p {
            return Err(Error::DimensionMismatch {
                expected: n * p,
                actual: data.len(),
            });
        }
        if let Some(idx) = data.iter().position(|v| v.is_infinite()) {
            return Err(Error::NonFinite {
                i: idx / p,
                j: idx % p,
            });
        }
        Ok(Self { n, p, data })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn p(&self) -> usize {
        self.p
    }

    #[inline]
    pub fn get(&self, k: usize, j: usize) -> Option<f64> {
        let v = self.data[k * self.p + j];
        (!v.is_nan()).then_some(v)
    }

    /// Raw row with NaN for missing entries.
    pub fn row_raw(&self, k: usize) -> &[f64] {
        &self.data[k * self.p..(k + 1) * self.p]
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.data
    }

    pub fn has_missing(&self) -> bool {
        self.data.iter().any(|v| v.is_nan())
    }

    pub fn missing_count(&self) -> usize {
        self.data.iter().filter(|v| v.is_nan()).count()
    }

    /// Marks entry `(k, j)` missing.
    pub fn set_missing(&mut self, k: usize, j: usize) {
        self.data[k * self.p + j] = f64::NAN;
    }

    /// New matrix holding the given rows in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> ObsMatrix {
        let mut data = Vec::with_capacity(rows.len() * self.p);
        for &k in rows {
            data.extend_from_slice(self.row_raw(k));
        }
        ObsMatrix {
            n: rows.len(),
            p: self.p,
            data,
        }
    }

    /// Column `j` of the result is column `perm[j]` of `self`.
    pub fn permute_columns(&self, perm: &[usize]) -> Result<ObsMatrix> {
        if perm.len() != self.p {
            return Err(Error::DimensionMismatch {
                expected: self.p,
                actual: perm.len(),
            });
        }
        let mut data = Vec::with_capacity(self.data.len());
        for k in 0..self.n {
            let row = self.row_raw(k);
            data.extend(perm.iter().map(|&j| row[j]));
        }
        Ok(ObsMatrix {
            n: self.n,
            p: self.p,
            data,
        })
    }

    pub fn to_option_rows(&self) -> Vec<Vec<Option<f64>>> {
        (0..self.n)
            .map(|k| (0..self.p).map(|j| self.get(k, j)).collect())
            .collect()
    }
}
