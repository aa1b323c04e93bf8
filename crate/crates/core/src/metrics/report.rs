use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::roc::{auroc, fpr_at_tpr, roc_curve, RocCurve};
use super::summary::{five_number_summary, FiveNumber};
use super::threshold::{calibrate_threshold, confusion_at, Criterion};
use crate::detectors::ScoreSet;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Default TPR target for the FPR column of a report.
pub const FPR95_TARGET: f64 = 0.95;

/// Detector evaluation against one ID/OOD pair. Serializes to a JSON object
/// with exactly these keys, in this order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    /// `MSP`, `EBM`, `MAH`, or `unspecified` for external scores.
    pub method: String,
    pub auroc: f64,
    pub fpr95: f64,
    pub threshold: f64,
    pub tpr_at_threshold: f64,
    pub fpr_at_threshold: f64,
    pub accuracy_at_threshold: f64,
    pub id_quartiles: FiveNumber<f64>,
    pub ood_quartiles: FiveNumber<f64>,
    pub n_id: usize,
    pub n_ood: usize,
}

impl EvalReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }
}

/// Builds a full report. The threshold is picked by `criterion`; `fpr95` is
/// always measured at [`FPR95_TARGET`].
pub fn evaluate<T: Scalar>(
    id: &ScoreSet<T>,
    ood: &ScoreSet<T>,
    criterion: Criterion,
) -> Result<(EvalReport, RocCurve<T>)> {
    let curve = roc_curve(id, ood)?;
    let calibration = calibrate_threshold(id, ood, criterion)?;
    let (tp, tn) = confusion_at(id, ood, calibration.threshold);
    let report = EvalReport {
        method: id
            .method()
            .map_or_else(|| "unspecified".to_string(), |m| m.to_string()),
        auroc: auroc(&curve),
        fpr95: fpr_at_tpr(&curve, FPR95_TARGET),
        threshold: calibration.threshold.as_f64(),
        tpr_at_threshold: calibration.tpr,
        fpr_at_threshold: calibration.fpr,
        accuracy_at_threshold: (tp + tn) as f64 / (id.len() + ood.len()) as f64,
        id_quartiles: five_number_summary(id).to_f64(),
        ood_quartiles: five_number_summary(ood).to_f64(),
        n_id: id.len(),
        n_ood: ood.len(),
    };
    Ok((report, curve))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(v: &[f64]) -> ScoreSet<f64> {
        ScoreSet::new(None, v.to_vec()).unwrap()
    }

    #[test]
    fn json_has_exact_keys() {
        let (report, _) =
            evaluate(&set(&[3.0, 2.0]), &set(&[1.0, 0.0]), Criterion::Youden).unwrap();
        let value: serde_json::Value = serde_json::from_str(&report.to_json()).unwrap();
        let keys: Vec<&str> = value
            .as_object()
            .unwrap()
            .keys()
            .map(String::as_str)
            .collect();
        let mut expected = vec![
            "method",
            "auroc",
            "fpr95",
            "threshold",
            "tpr_at_threshold",
            "fpr_at_threshold",
            "accuracy_at_threshold",
            "id_quartiles",
            "ood_quartiles",
            "n_id",
            "n_ood",
        ];
        let mut got = keys.clone();
        got.sort_unstable();
        expected.sort_unstable();
        assert_eq!(got, expected);
        assert_eq!(report.threshold, 2.0);
        assert_eq!(report.auroc, 1.0);
        assert_eq!(report.fpr95, 0.0);
        assert_eq!(report.accuracy_at_threshold, 1.0);
        assert_eq!(report.method, "unspecified");
    }

    #[test]
    fn perfect_auroc_implies_zero_fpr95() {
        let (report, _) = evaluate(
            &set(&[10.0, 11.0, 12.0]),
            &set(&[-1.0, 0.0]),
            Criterion::FprAtTpr(0.95),
        )
        .unwrap();
        assert_eq!(report.auroc, 1.0);
        assert_eq!(report.fpr95, 0.0);
    }
}
