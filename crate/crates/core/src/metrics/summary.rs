use serde::{Deserialize, Serialize};

use crate::detectors::ScoreSet;
use crate::scalar::{cmp_finite, Scalar};

/// Box-plot summary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiveNumber<T> {
    pub min: T,
    pub q1: T,
    pub median: T,
    pub q3: T,
    pub max: T,
}

impl<T: Scalar> FiveNumber<T> {
    pub fn to_f64(self) -> FiveNumber<f64> {
        FiveNumber {
            min: self.min.as_f64(),
            q1: self.q1.as_f64(),
            median: self.median.as_f64(),
            q3: self.q3.as_f64(),
            max: self.max.as_f64(),
        }
    }
}

/// Quantile of sorted data by linear interpolation at position `p (n - 1)`.
pub fn quantile_sorted<T: Scalar>(sorted: &[T], p: f64) -> T {
    assert!(!sorted.is_empty(), "quantile of an empty sample");
    let pos = p * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let frac = pos - lo as f64;
    if lo + 1 >= sorted.len() || frac == 0.0 {
        return sorted[lo.min(sorted.len() - 1)];
    }
    sorted[lo] + T::from_f64_lossy(frac) * (sorted[lo + 1] - sorted[lo])
}

/// Panics on an empty set.
pub fn five_number_summary<T: Scalar>(scores: &ScoreSet<T>) -> FiveNumber<T> {
    let mut sorted = scores.scores().to_vec();
    sorted.sort_unstable_by(cmp_finite);
    FiveNumber {
        min: sorted[0],
        q1: quantile_sorted(&sorted, 0.25),
        median: quantile_sorted(&sorted, 0.5),
        q3: quantile_sorted(&sorted, 0.75),
        max: sorted[sorted.len() - 1],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn summary(v: &[f64]) -> FiveNumber<f64> {
        five_number_summary(&ScoreSet::new(None, v.to_vec()).unwrap())
    }

    #[test]
    fn examples() {
        assert_eq!(
            summary(&[5.0, 1.0, 3.0, 2.0, 4.0]),
            FiveNumber {
                min: 1.0,
                q1: 2.0,
                median: 3.0,
                q3: 4.0,
                max: 5.0
            }
        );
        assert_eq!(
            summary(&[7.0]),
            FiveNumber {
                min: 7.0,
                q1: 7.0,
                median: 7.0,
                q3: 7.0,
                max: 7.0
            }
        );
        assert_eq!(
            summary(&[4.0, 3.0, 2.0, 1.0]),
            FiveNumber {
                min: 1.0,
                q1: 1.75,
                median: 2.5,
                q3: 3.25,
                max: 4.0
            }
        );
    }
}
