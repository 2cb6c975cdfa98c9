use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::matcore::{frobenius_norm, one_norm, sym_eigen, EigenDecomp, SymMatrix};

/// Estimators compared in the AR(1) simulations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    Sample,
    LedoitWolf,
    Banding,
    BandingPerm,
    Thresholding,
}

impl Estimator {
    pub const ALL: [Estimator; 5] = [
        Estimator::Sample,
        Estimator::LedoitWolf,
        Estimator::Banding,
        Estimator::BandingPerm,
        Estimator::Thresholding,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Estimator::Sample => "sample",
            Estimator::LedoitWolf => "ledoit_wolf",
            Estimator::Banding => "banding",
            Estimator::BandingPerm => "banding_perm",
            Estimator::Thresholding => "thresholding",
        }
    }
}

/// Loss measures of one estimate against the truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossRecord {
    pub estimator: String,
    pub one_norm_loss: f64,
    pub op_norm_loss: f64,
    pub frob_loss: f64,
    pub lambda_max_abs_err: f64,
    pub pc1_abs_cos: f64,
    pub chosen_param: Option<f64>,
}

pub fn compute_losses(
    estimate: &SymMatrix,
    truth: &SymMatrix,
    label: &str,
    chosen_param: Option<f64>,
) -> Result<LossRecord> {
    let truth_eig = sym_eigen(truth)?;
    let est_eig = sym_eigen(estimate)?;
    losses_with_spectra(estimate, &est_eig, truth, &truth_eig, label, chosen_param)
}

/// Same as [`compute_losses`] with both decompositions precomputed.
pub fn losses_with_spectra(
    estimate: &SymMatrix,
    est_eig: &EigenDecomp,
    truth: &SymMatrix,
    truth_eig: &EigenDecomp,
    label: &str,
    chosen_param: Option<f64>,
) -> Result<LossRecord> {
    let diff = estimate.sub(truth)?;
    let diff_values = crate::matcore::sym_eigenvalues(&diff)?;
    let op = diff_values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let cos: f64 = est_eig.vectors[0]
        .iter()
        .zip(&truth_eig.vectors[0])
        .map(|(a, b)| a * b)
        .sum();
    Ok(LossRecord {
        estimator: label.to_string(),
        one_norm_loss: one_norm(&diff),
        op_norm_loss: op,
        frob_loss: frobenius_norm(&diff),
        lambda_max_abs_err: (est_eig.values[0] - truth_eig.values[0]).abs(),
        pc1_abs_cos: cos.abs().min(1.0),
        chosen_param,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ar1(p: usize, rho: f64) -> SymMatrix {
        SymMatrix::from_fn(p, |i, j| rho.powi((j - i) as i32)).unwrap()
    }

    #[test]
    fn perfect_estimate() {
        let t = ar1(6, 0.7);
        let r = compute_losses(&t, &t, "x", None).unwrap();
        assert_eq!(
            (
                r.one_norm_loss,
                r.op_norm_loss,
                r.frob_loss,
                r.lambda_max_abs_err
            ),
            (0.0, 0.0, 0.0, 0.0)
        );
        assert!((r.pc1_abs_cos - 1.0).abs() < 1e-12);
    }

    #[test]
    fn shifted_spectrum() {
        let t = ar1(5, 0.4);
        let e = t.add(&SymMatrix::identity(5)).unwrap();
        let r = compute_losses(&e, &t, "shift", Some(2.0)).unwrap();
        assert!((r.op_norm_loss - 1.0).abs() < 1e-12);
        assert!((r.frob_loss - 5f64.sqrt()).abs() < 1e-12);
        assert!((r.lambda_max_abs_err - 1.0).abs() < 1e-12);
        assert!((r.pc1_abs_cos - 1.0).abs() < 1e-9);
        assert_eq!(r.chosen_param, Some(2.0));
    }

    #[test]
    fn orthogonal_leading_vectors() {
        let t = SymMatrix::diagonal(&[2.0, 1.0]).unwrap();
        let e = SymMatrix::diagonal(&[1.0, 2.0]).unwrap();
        let r = compute_losses(&e, &t, "swap", None).unwrap();
        assert_eq!(r.pc1_abs_cos, 0.0);
        assert!(compute_losses(&e, &SymMatrix::identity(3), "bad", None).is_err());
    }
}
