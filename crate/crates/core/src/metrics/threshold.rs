use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::roc::{first_reaching, roc_curve};
use crate::detectors::ScoreSet;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// How an operating threshold is picked from the observed scores.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Criterion {
    /// Maximize `TPR - FPR`; ties go to the smaller threshold.
    Youden,
    /// Largest threshold whose TPR reaches the target.
    FprAtTpr(f64),
}

impl Criterion {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Criterion::FprAtTpr(t) if !(t > 0.0 && t <= 1.0) => Err(Error::Config(format!(
                "target TPR must lie in (0, 1], got {t}"
            ))),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Criterion::Youden => f.write_str("youden"),
            Criterion::FprAtTpr(t) => write!(f, "tpr:{t}"),
        }
    }
}

/// Accepts `youden`, `tpr` (target 0.95) or `tpr:<target>`.
impl FromStr for Criterion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        let criterion = match lower.as_str() {
            "youden" => Criterion::Youden,
            "tpr" | "fpr-at-tpr" | "tpr95" => Criterion::FprAtTpr(0.95),
            other => {
                let target = other
                    .strip_prefix("tpr:")
                    .or_else(|| other.strip_prefix("fpr-at-tpr:"))
                    .and_then(|t| t.parse::<f64>().ok())
                    .ok_or_else(|| {
                        Error::Config(format!("unknown criterion `{s}` (youden | tpr:<target>)"))
                    })?;
                Criterion::FprAtTpr(target)
            }
        };
        criterion.validate()?;
        Ok(criterion)
    }
}

impl Serialize for Criterion {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Criterion {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Calibration<T> {
    pub threshold: T,
    pub tpr: f64,
    pub fpr: f64,
}

/// Picks a cut among the observed scores.
pub fn calibrate_threshold<T: Scalar>(
    id: &ScoreSet<T>,
    ood: &ScoreSet<T>,
    criterion: Criterion,
) -> Result<Calibration<T>> {
    criterion.validate()?;
    let curve = roc_curve(id, ood)?;
    let index = match criterion {
        Criterion::Youden => {
            // J = tp/N - fp/M compared exactly as tp*M - fp*N
            let (n, m) = (curve.n_id() as i128, curve.n_ood() as i128);
            let mut best = 1;
            let mut best_j = i128::MIN;
            for i in 1..curve.len() {
                let j = curve.true_positives(i) as i128 * m - curve.false_positives(i) as i128 * n;
                if j >= best_j {
                    best_j = j;
                    best = i;
                }
            }
            best
        }
        Criterion::FprAtTpr(target) => first_reaching(&curve, target).max(1),
    };
    Ok(Calibration {
        threshold: curve.thresholds()[index],
        tpr: curve.tpr(index),
        fpr: curve.fpr(index),
    })
}

/// `(#{id >= t} + #{ood < t}) / (n_id + n_ood)`.
pub fn accuracy_at_threshold<T: Scalar>(id: &ScoreSet<T>, ood: &ScoreSet<T>, threshold: T) -> f64 {
    let (tp, tn) = confusion_at(id, ood, threshold);
    (tp + tn) as f64 / (id.len() + ood.len()) as f64
}

/// `(true positives, true negatives)` at `threshold`.
pub(crate) fn confusion_at<T: Scalar>(
    id: &ScoreSet<T>,
    ood: &ScoreSet<T>,
    threshold: T,
) -> (usize, usize) {
    let tp = id.scores().iter().filter(|&&s| s >= threshold).count();
    let tn = ood.scores().iter().filter(|&&s| s < threshold).count();
    (tp, tn)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(v: &[f64]) -> ScoreSet<f64> {
        ScoreSet::new(None, v.to_vec()).unwrap()
    }

    #[test]
    fn youden_examples() {
        let c =
            calibrate_threshold(&set(&[3.0, 2.0]), &set(&[1.0, 0.0]), Criterion::Youden).unwrap();
        assert_eq!(
            c,
            Calibration {
                threshold: 2.0,
                tpr: 1.0,
                fpr: 0.0
            }
        );
        let c = calibrate_threshold(&set(&[1.0]), &set(&[1.0]), Criterion::Youden).unwrap();
        assert_eq!(
            c,
            Calibration {
                threshold: 1.0,
                tpr: 1.0,
                fpr: 1.0
            }
        );
    }

    #[test]
    fn youden_ties_prefer_smaller_threshold() {
        // cuts 3 -> J = 0.5, 2 -> J = 0.5 - 0.5 = 0, 1 -> J = 1 - 0.5 = 0.5
        let c =
            calibrate_threshold(&set(&[3.0, 1.0]), &set(&[2.0, 0.0]), Criterion::Youden).unwrap();
        assert_eq!(c.threshold, 1.0);
    }

    #[test]
    fn fpr_at_tpr_example() {
        let c = calibrate_threshold(
            &set(&[2.0, 2.0, 0.0]),
            &set(&[1.0]),
            Criterion::FprAtTpr(0.95),
        )
        .unwrap();
        assert_eq!(
            c,
            Calibration {
                threshold: 0.0,
                tpr: 1.0,
                fpr: 1.0
            }
        );
        let c = calibrate_threshold(
            &set(&[2.0, 2.0, 0.0]),
            &set(&[1.0]),
            Criterion::FprAtTpr(0.6),
        )
        .unwrap();
        assert_eq!(c.threshold, 2.0);
    }

    #[test]
    fn accuracy_examples() {
        assert_eq!(
            accuracy_at_threshold(&set(&[3.0, 1.0]), &set(&[2.0, 0.0]), 2.0),
            0.5
        );
        assert_eq!(
            accuracy_at_threshold(&set(&[5.0, 6.0]), &set(&[1.0]), 3.0),
            1.0
        );
        assert_eq!(
            accuracy_at_threshold(&set(&[4.0; 3]), &set(&[4.0; 2]), 4.0),
            3.0 / 5.0
        );
    }

    #[test]
    fn criterion_parsing() {
        assert_eq!("youden".parse::<Criterion>().unwrap(), Criterion::Youden);
        assert_eq!(
            "tpr".parse::<Criterion>().unwrap(),
            Criterion::FprAtTpr(0.95)
        );
        assert_eq!(
            "tpr:0.9".parse::<Criterion>().unwrap(),
            Criterion::FprAtTpr(0.9)
        );
        assert!("tpr:1.5".parse::<Criterion>().is_err());
        assert!("median".parse::<Criterion>().is_err());
        let c = Criterion::FprAtTpr(0.8);
        assert_eq!(c.to_string().parse::<Criterion>().unwrap(), c);
    }
}
