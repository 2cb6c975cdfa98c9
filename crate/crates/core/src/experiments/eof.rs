use serde::{Deserialize, Serialize};

use crate::datagen::SpatialField;
use crate::error::{Error, Result};
use crate::estimators::{pairwise_covariance, threshold, ThresholdSpec};
use crate::io::format_g17;
use crate::matcore::sym_eigen;
use crate::selection::{oracle_select, select};

use super::CvConfig;

/// How the threshold of the EOF pipeline is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum EofThreshold {
    Fixed {
        s: f64,
    },
    Cv {
        cv: CvConfig,
        seed: u64,
    },
    /// Uses the field's true covariance; only meaningful for synthetic data.
    Oracle {
        grid_subdivisions: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Eof {
    /// 1-based rank.
    pub index: usize,
    pub eigenvalue: f64,
    /// Eigenvalue over the sum of positive eigenvalues.
    pub variance_fraction: f64,
    /// Squared loading mass in each region; sums to 1.
    pub region_mass: [f64; 2],
    /// Loadings laid out on the station grid.
    pub raster: Vec<Vec<f64>>,
}

impl Eof {
    pub fn dominant_region_mass(&self) -> f64 {
        self.region_mass[0].max(self.region_mass[1])
    }

    pub fn raster_csv(&self) -> String {
        let mut out = String::new();
        for row in &self.raster {
            let cells: Vec<String> = row.iter().map(|v| format_g17(*v)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EofResult {
    pub threshold: f64,
    pub components: Vec<Eof>,
    /// `sum |negative eigenvalues| / sum |eigenvalues|`.
    pub negative_mass_fraction: f64,
}

/// Pairwise-complete covariance, hard thresholding, then the leading
/// `n_components` eigenvectors as spatial patterns.
pub fn eof_pipeline(
    field: &SpatialField,
    mode: &EofThreshold,
    n_components: usize,
) -> Result<EofResult> {
    let p = field.grid_rows * field.grid_cols;
    if field.data.p() != p || field.region.len() != p {
        return Err(Error::DimensionMismatch {
            expected: p,
            actual: field.data.p(),
        });
    }
    if n_components == 0 || n_components > p {
        return Err(Error::InvalidParameter(format!(
            "n_components must lie in 1..={p}, got {n_components}"
        )));
    }
    let s_hat = pairwise_covariance(&field.data)?;
    let s = match mode {
        EofThreshold::Fixed { s } => *s,
        EofThreshold::Cv { cv, seed } => {
            let grid = cv.threshold_grid(&field.data)?;
            let scheme = cv.scheme(field.data.n(), *seed)?;
            select(&field.data, &grid, &scheme)?.chosen
        }
        EofThreshold::Oracle { grid_subdivisions } => {
            let grid = crate::selection::default_threshold_grid(&field.data, *grid_subdivisions)?;
            oracle_select(&s_hat, &field.truth, &grid)?.chosen
        }
    };
    let estimate = threshold(&s_hat, ThresholdSpec::all_entries(s)?);
    let eig = sym_eigen(&estimate)?;

    let positive: f64 = eig.values.iter().filter(|v| **v > 0.0).sum();
    let total_abs: f64 = eig.values.iter().map(|v| v.abs()).sum();
    let negative: f64 = eig.values.iter().filter(|v| **v < 0.0).map(|v| -v).sum();

    let components = (0..n_components)
        .map(|k| {
            let v = &eig.vectors[k];
            let mut mass = [0.0; 2];
            for (station, &load) in v.iter().enumerate() {
                mass[field.region[station] as usize] += load * load;
            }
            let total = mass[0] + mass[1];
            Eof {
                index: k + 1,
                eigenvalue: eig.values[k],
                variance_fraction: if positive > 0.0 {
                    eig.values[k] / positive
                } else {
                    0.0
                },
                region_mass: [mass[0] / total, mass[1] / total],
                raster: v.chunks(field.grid_cols).map(<[f64]>::to_vec).collect(),
            }
        })
        .collect();

    Ok(EofResult {
        threshold: s,
        components,
        negative_mass_fraction: if total_abs > 0.0 {
            negative / total_abs
        } else {
            0.0
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::{synthetic_spatial_field, FieldConfig};
    use crate::estimators::sample_covariance;

    fn field(missing_rate: f64, seed: u64) -> SpatialField {
        synthetic_spatial_field(&FieldConfig {
            grid_rows: 4,
            grid_cols: 5,
            length_scale: 2.0,
            n_years: 40,
            missing_rate,
            seed,
        })
        .unwrap()
    }

    #[test]
    fn unthresholded_complete_data_is_plain_pca() {
        let f = field(0.0, 3);
        let r = eof_pipeline(&f, &EofThreshold::Fixed { s: 0.0 }, 3).unwrap();
        let eig = sym_eigen(&sample_covariance(&f.data).unwrap()).unwrap();
        for c in &r.components {
            assert_eq!(c.eigenvalue, eig.values[c.index - 1]);
            let flat: Vec<f64> = c.raster.concat();
            assert_eq!(flat, eig.vectors[c.index - 1]);
        }
        assert!(r.negative_mass_fraction < 1e-12);
    }

    #[test]
    fn shapes_and_masses() {
        let f = field(0.1, 5);
        let r = eof_pipeline(
            &f,
            &EofThreshold::Oracle {
                grid_subdivisions: 5,
            },
            2,
        )
        .unwrap();
        assert_eq!(r.components.len(), 2);
        for c in &r.components {
            assert_eq!(c.raster.len(), 4);
            assert!(c.raster.iter().all(|row| row.len() == 5));
            assert!((c.region_mass[0] + c.region_mass[1] - 1.0).abs() < 1e-12);
        }
        assert!(r.components[0].variance_fraction >= r.components[1].variance_fraction);
        assert!(r.components[0].raster_csv().lines().count() == 4);
    }

    #[test]
    fn cv_mode_runs() {
        let f = field(0.05, 7);
        let mode = EofThreshold::Cv {
            cv: CvConfig::default(),
            seed: 1,
        };
        let r = eof_pipeline(&f, &mode, 1).unwrap();
        assert!(r.threshold >= 0.0);
        assert!(eof_pipeline(&f, &mode, 0).is_err());
    }
}
