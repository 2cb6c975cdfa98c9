use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::io::format_g17;

use super::losses::LossRecord;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub p: usize,
    pub estimator: String,
    pub measure: String,
    pub mean: f64,
    /// Standard deviation over replications divided by `sqrt(reps)`.
    pub se: f64,
    pub reps: usize,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SummaryTable {
    pub rows: Vec<SummaryRow>,
}

const MEASURES: [&str; 6] = [
    "one_norm",
    "operator",
    "frobenius",
    "lambda_max_err",
    "pc1_cos",
    "selected",
];

fn measure(r: &LossRecord, name: &str) -> Option<f64> {
    match name {
        "one_norm" => Some(r.one_norm_loss),
        "operator" => Some(r.op_norm_loss),
        "frobenius" => Some(r.frob_loss),
        "lambda_max_err" => Some(r.lambda_max_abs_err),
        "pc1_cos" => Some(r.pc1_abs_cos),
        "selected" => r.chosen_param,
        _ => None,
    }
}

pub(crate) fn mean_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

impl SummaryTable {
    /// Aggregates `(p, record)` pairs into one row per
    /// `(p, estimator, measure)`, in order of first appearance.
    pub fn from_records<'a>(records: impl IntoIterator<Item = (usize, &'a LossRecord)>) -> Self {
        let mut order: Vec<(usize, String)> = Vec::new();
        let mut groups: BTreeMap<(usize, String), Vec<&LossRecord>> = BTreeMap::new();
        for (p, r) in records {
            let key = (p, r.estimator.clone());
            if !groups.contains_key(&key) {
                order.push(key.clone());
            }
            groups.entry(key).or_default().push(r);
        }
        let mut rows = Vec::new();
        for key in order {
            let recs = &groups[&key];
            for m in MEASURES {
                let values: Vec<f64> = recs.iter().filter_map(|r| measure(r, m)).collect();
                if values.is_empty() {
                    continue;
                }
                let (mean, se) = mean_se(&values);
                rows.push(SummaryRow {
                    p: key.0,
                    estimator: key.1.clone(),
                    measure: m.to_string(),
                    mean,
                    se,
                    reps: values.len(),
                });
            }
        }
        Self { rows }
    }

    pub fn get(&self, p: usize, estimator: &str, measure: &str) -> Option<&SummaryRow> {
        self.rows
            .iter()
            .find(|r| r.p == p && r.estimator == estimator && r.measure == measure)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("p,estimator,measure,mean,se,reps\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.p,
                r.estimator,
                r.measure,
                format_g17(r.mean),
                format_g17(r.se),
                r.reps
            ));
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("summary serializes")
    }
}

/// Type-7 sample quantile (linear interpolation between order statistics).
pub fn percentile(values: &[f64], q: f64) -> f64 {
    assert!(!values.is_empty(), "percentile of empty sample");
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let h = (v.len() - 1) as f64 * q.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(v.len() - 1);
    v[lo] + (h - lo as f64) * (v[hi] - v[lo])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScreeRow {
    pub estimator: String,
    /// 1-based eigenvalue rank.
    pub index: usize,
    pub truth: f64,
    pub mean: f64,
    pub p2_5: f64,
    pub p97_5: f64,
}

/// Eigenvalue-by-rank summaries across replications.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScreeData {
    pub p: usize,
    pub reps: usize,
    pub rows: Vec<ScreeRow>,
}

impl ScreeData {
    /// `spectra[e]` holds one descending spectrum per replication for
    /// estimator `labels[e]`.
    pub fn from_spectra(truth: &[f64], labels: &[&str], spectra: &[Vec<Vec<f64>>]) -> Self {
        let p = truth.len();
        let mut rows = Vec::new();
        let mut reps = 0;
        for (label, runs) in labels.iter().zip(spectra) {
            reps = runs.len();
            for k in 0..p {
                let column: Vec<f64> = runs.iter().map(|s| s[k]).collect();
                rows.push(ScreeRow {
                    estimator: label.to_string(),
                    index: k + 1,
                    truth: truth[k],
                    mean: column.iter().sum::<f64>() / column.len() as f64,
                    p2_5: percentile(&column, 0.025),
                    p97_5: percentile(&column, 0.975),
                });
            }
        }
        Self { p, reps, rows }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("estimator,index,truth,mean,p2_5,p97_5\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.estimator,
                r.index,
                format_g17(r.truth),
                format_g17(r.mean),
                format_g17(r.p2_5),
                format_g17(r.p97_5)
            ));
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scree data serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(est: &str, op: f64, chosen: Option<f64>) -> LossRecord {
        LossRecord {
            estimator: est.into(),
            one_norm_loss: 2.0 * op,
            op_norm_loss: op,
            frob_loss: 3.0 * op,
            lambda_max_abs_err: 0.0,
            pc1_abs_cos: 1.0,
            chosen_param: chosen,
        }
    }

    #[test]
    fn mean_and_standard_error() {
        let recs = [
            rec("a", 1.0, None),
            rec("a", 3.0, None),
            rec("b", 2.0, Some(4.0)),
        ];
        let t = SummaryTable::from_records(recs.iter().map(|r| (10, r)));
        let row = t.get(10, "a", "operator").unwrap();
        assert_eq!(row.mean, 2.0);
        // sd = sqrt(2), se = sqrt(2)/sqrt(2)
        assert!((row.se - 1.0).abs() < 1e-15);
        assert_eq!(row.reps, 2);
        assert!(t.get(10, "a", "selected").is_none());
        assert_eq!(t.get(10, "b", "selected").unwrap().mean, 4.0);
        assert!(t.get(10, "b", "operator").unwrap().se.is_nan());
        let csv = t.to_csv();
        assert!(csv.starts_with("p,estimator,measure,mean,se,reps\n10,a,one_norm,4,"));
    }

    #[test]
    fn type7_percentiles() {
        let v: Vec<f64> = (1..=5).map(f64::from).collect();
        assert_eq!(percentile(&v, 0.0), 1.0);
        assert_eq!(percentile(&v, 1.0), 5.0);
        assert_eq!(percentile(&v, 0.5), 3.0);
        assert!((percentile(&v, 0.025) - 1.1).abs() < 1e-12);
        assert!((percentile(&v, 0.975) - 4.9).abs() < 1e-12);
        assert_eq!(percentile(&[7.0], 0.3), 7.0);
    }

    #[test]
    fn scree_rows() {
        let spectra = vec![vec![vec![3.0, 1.0], vec![5.0, 0.0]]];
        let d = ScreeData::from_spectra(&[4.0, 0.5], &["sample"], &spectra);
        assert_eq!(d.rows.len(), 2);
        assert_eq!(d.rows[0].mean, 4.0);
        assert_eq!(d.rows[1].index, 2);
        assert!(d.to_csv().contains("sample,1,4,4,"));
    }
}
