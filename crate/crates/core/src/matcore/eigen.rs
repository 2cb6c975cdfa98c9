use super::SymMatrix;
use crate::error::{Error, Result};

/// Sweep cap for the cyclic Jacobi iteration.
pub const MAX_SWEEPS: usize = 100;

/// Convergence target: off-diagonal Frobenius mass relative to `||M||_F`.
const REL_OFF_TOL: f64 = 1e-12;

/// Eigenvalues sorted descending with orthonormal eigenvectors.
///
/// `vectors[j]` is the unit eigenvector paired with `values[j]`; its
/// largest-magnitude component is positive (lowest index on ties).
#[derive(Debug, Clone, PartialEq)]
pub struct EigenDecomp {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
}

impl EigenDecomp {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// `V diag(values) V^T`.
    pub fn reconstruct(&self) -> SymMatrix {
        let p = self.dim();
        SymMatrix::from_fn(p, |i, j| {
            (0..p)
                .map(|k| self.vectors[k][i] * self.values[k] * self.vectors[k][j])
                .sum()
        })
        .expect("finite decomposition")
    }
}

/// Full eigendecomposition by cyclic Jacobi rotations.
pub fn sym_eigen(m: &SymMatrix) -> Result<EigenDecomp> {
    let p = m.dim();
    let mut a = m.as_slice().to_vec();
    let mut v = vec![0.0; p * p];
    for i in 0..p {
        v[i * p + i] = 1.0;
    }
    jacobi(&mut a, Some(&mut v), p)?;

    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&x, &y| a[y * p + y].total_cmp(&a[x * p + x]));

    let values = order.iter().map(|&k| a[k * p + k]).collect();
    // v is stored with eigenvectors in columns.
    let vectors = order
        .iter()
        .map(|&k| {
            let mut col: Vec<f64> = (0..p).map(|i| v[i * p + k]).collect();
            fix_sign(&mut col);
            col
        })
        .collect();
    Ok(EigenDecomp { values, vectors })
}

/// Eigenvalues only, sorted descending. Bit-identical to `sym_eigen(m).values`.
pub fn sym_eigenvalues(m: &SymMatrix) -> Result<Vec<f64>> {
    let p = m.dim();
    let mut a = m.as_slice().to_vec();
    jacobi(&mut a, None, p)?;
    let mut values: Vec<f64> = (0..p).map(|k| a[k * p + k]).collect();
    values.sort_by(|x, y| y.total_cmp(x));
    Ok(values)
}

fn fix_sign(col: &mut [f64]) {
    let mut best = 0;
    for (i, x) in col.iter().enumerate() {
        if x.abs() > col[best].abs() {
            best = i;
        }
    }
    if col[best] < 0.0 {
        col.iter_mut().for_each(|x| *x = -*x);
    }
}

fn off_diagonal_sq(a: &[f64], p: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..p {
        for j in (i + 1)..p {
            s += a[i * p + j] * a[i * p + j];
        }
    }
    2.0 * s
}

fn jacobi(a: &mut [f64], mut v: Option<&mut [f64]>, p: usize) -> Result<()> {
    let norm_sq: f64 = a.iter().map(|x| x * x).sum();
    let target_sq = REL_OFF_TOL * REL_OFF_TOL * norm_sq;

    for _ in 0..MAX_SWEEPS {
        if off_diagonal_sq(a, p) <= target_sq {
            return Ok(());
        }
        for i in 0..p {
            for j in (i + 1)..p {
                let apq = a[i * p + j];
                if apq == 0.0 {
                    continue;
                }
                let app = a[i * p + i];
                let aqq = a[j * p + j];
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta.is_finite() {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                } else {
                    // |apq| negligible against the diagonal gap
                    apq / (aqq - app)
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                a[i * p + i] = app - t * apq;
                a[j * p + j] = aqq + t * apq;
                a[i * p + j] = 0.0;
                a[j * p + i] = 0.0;
                for k in 0..p {
                    if k == i || k == j {
                        continue;
                    }
                    let akp = a[k * p + i];
                    let akq = a[k * p + j];
                    let new_kp = c * akp - s * akq;
                    let new_kq = s * akp + c * akq;
                    a[k * p + i] = new_kp;
                    a[i * p + k] = new_kp;
                    a[k * p + j] = new_kq;
                    a[j * p + k] = new_kq;
                }
                if let Some(v) = v.as_deref_mut() {
                    for k in 0..p {
                        let vkp = v[k * p + i];
                        let vkq = v[k * p + j];
                        v[k * p + i] = c * vkp - s * vkq;
                        v[k * p + j] = s * vkp + c * vkq;
                    }
                }
            }
        }
    }
    if off_diagonal_sq(a, p) <= target_sq {
        Ok(())
    } else {
        Err(Error::NoConvergence { sweeps: MAX_SWEEPS })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::frobenius_norm;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_sym(p: usize, rng: &mut ChaCha8Rng) -> SymMatrix {
        SymMatrix::from_fn(p, |_, _| rng.gen_range(-1.0..1.0)).unwrap()
    }

    fn orthonormality_error(e: &EigenDecomp) -> f64 {
        let p = e.dim();
        let mut s = 0.0;
        for a in 0..p {
            for b in 0..p {
                let dot: f64 = e.vectors[a]
                    .iter()
                    .zip(&e.vectors[b])
                    .map(|(x, y)| x * y)
                    .sum();
                let target = if a == b { 1.0 } else { 0.0 };
                s += (dot - target).powi(2);
            }
        }
        s.sqrt()
    }

    #[test]
    fn diagonal_input() {
        let e = sym_eigen(&SymMatrix::diagonal(&[3.0, -5.0]).unwrap()).unwrap();
        assert_eq!(e.values, vec![3.0, -5.0]);
        assert_eq!(e.vectors, vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
    }

    #[test]
    fn equicorrelation_2x2() {
        let m = SymMatrix::from_rows(&[vec![1.0, 0.7], vec![0.7, 1.0]]).unwrap();
        let e = sym_eigen(&m).unwrap();
        assert!((e.values[0] - 1.7).abs() < 1e-14);
        assert!((e.values[1] - 0.3).abs() < 1e-14);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((e.vectors[0][0] - h).abs() < 1e-14 && (e.vectors[0][1] - h).abs() < 1e-14);
        // tie in magnitude: lowest index carries the positive sign
        assert!(e.vectors[1][0] > 0.0 && e.vectors[1][1] < 0.0);
    }

    #[test]
    fn zero_matrix_converges_immediately() {
        let e = sym_eigen(&SymMatrix::zeros(4)).unwrap();
        assert!(e.values.iter().all(|v| *v == 0.0));
        assert!(orthonormality_error(&e) == 0.0);
    }

    #[test]
    fn reconstruction_and_orthonormality_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let p = rng.gen_range(2..=20);
            let m = random_sym(p, &mut rng);
            let e = sym_eigen(&m).unwrap();
            let err = frobenius_norm(&m.sub(&e.reconstruct()).unwrap());
            assert!(err <= 1e-8 * frobenius_norm(&m).max(1.0));
            assert!(orthonormality_error(&e) <= 1e-10 * p as f64);
            assert!(e.values.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn values_only_path_is_bit_identical() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for p in [2, 7, 15] {
            let m = random_sym(p, &mut rng);
            assert_eq!(sym_eigen(&m).unwrap().values, sym_eigenvalues(&m).unwrap());
        }
    }

    #[test]
    fn deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let m = random_sym(12, &mut rng);
        assert_eq!(sym_eigen(&m).unwrap(), sym_eigen(&m).unwrap());
    }
}
