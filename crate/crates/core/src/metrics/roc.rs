use crate::detectors::ScoreSet;
use crate::error::{Error, Result};
use crate::scalar::{cmp_finite, Scalar};

/// ROC operating points, ID as the positive class.
///
/// Point `i` classifies `score >= thresholds[i]` as ID. Thresholds start
/// at `+inf` (the `(0, 0)` corner) followed by every distinct observed score
/// in descending order; the last point is `(1, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RocCurve<T> {
    thresholds: Vec<T>,
    true_positives: Vec<usize>,
    false_positives: Vec<usize>,
    n_id: usize,
    n_ood: usize,
}

impl<T: Scalar> RocCurve<T> {
    pub fn thresholds(&self) -> &[T] {
        &self.thresholds
    }

    pub fn len(&self) -> usize {
        self.thresholds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.thresholds.is_empty()
    }

    pub fn n_id(&self) -> usize {
        self.n_id
    }

    pub fn n_ood(&self) -> usize {
        self.n_ood
    }

    /// ID samples accepted at point `i`.
    pub fn true_positives(&self, i: usize) -> usize {
        self.true_positives[i]
    }

    /// OOD samples accepted at point `i`.
    pub fn false_positives(&self, i: usize) -> usize {
        self.false_positives[i]
    }

    pub fn tpr(&self, i: usize) -> f64 {
        self.true_positives[i] as f64 / self.n_id as f64
    }

    pub fn fpr(&self, i: usize) -> f64 {
        self.false_positives[i] as f64 / self.n_ood as f64
    }

    /// `(fpr, tpr)` pairs in threshold order.
    pub fn points(&self) -> Vec<(f64, f64)> {
        (0..self.len())
            .map(|i| (self.fpr(i), self.tpr(i)))
            .collect()
    }
}

fn check_pair<T: Scalar>(id: &ScoreSet<T>, ood: &ScoreSet<T>) -> Result<()> {
    if id.is_empty() || ood.is_empty() {
        return Err(Error::Config(
            "ID and OOD score sets must both be nonempty".into(),
        ));
    }
    if id.method() != ood.method() {
        return Err(Error::Config(format!(
            "score sets come from different detectors ({:?} vs {:?})",
            id.method(),
            ood.method()
        )));
    }
    Ok(())
}

/// Builds the curve from one descending sort. Tied scores form a group
/// that moves both rates in a single step.
pub fn roc_curve<T: Scalar>(id: &ScoreSet<T>, ood: &ScoreSet<T>) -> Result<RocCurve<T>> {
    check_pair(id, ood)?;
    let mut merged: Vec<(T, bool)> = id
        .scores()
        .iter()
        .map(|&s| (s, true))
        .chain(ood.scores().iter().map(|&s| (s, false)))
        .collect();
    merged.sort_unstable_by(|a, b| cmp_finite(&b.0, &a.0));

    let mut thresholds = vec![T::infinity()];
    let mut true_positives = vec![0];
    let mut false_positives = vec![0];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut i = 0;
    while i < merged.len() {
        let value = merged[i].0;
        while i < merged.len() && merged[i].0 == value {
            if merged[i].1 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        thresholds.push(value);
        true_positives.push(tp);
        false_positives.push(fp);
    }
    Ok(RocCurve {
        thresholds,
        true_positives,
        false_positives,
        n_id: id.len(),
        n_ood: ood.len(),
    })
}

/// Trapezoidal area under the curve.
///
/// The sum is carried out in integer counts and divided once, so it equals
/// the Mann-Whitney estimate `P(id > ood) + P(id = ood) / 2` exactly.
pub fn auroc<T: Scalar>(curve: &RocCurve<T>) -> f64 {
    let mut twice_area: u128 = 0;
    for i in 1..curve.len() {
        let dx = (curve.false_positives[i] - curve.false_positives[i - 1]) as u128;
        let heights = (curve.true_positives[i] + curve.true_positives[i - 1]) as u128;
        twice_area += dx * heights;
    }
    twice_area as f64 / (2 * curve.n_id as u128 * curve.n_ood as u128) as f64
}

/// Index of the first operating point (largest threshold) whose TPR reaches
/// `target`. Always exists because the last point has TPR 1.
pub(crate) fn first_reaching<T: Scalar>(curve: &RocCurve<T>, target: f64) -> usize {
    (0..curve.len())
        .find(|&i| curve.tpr(i) >= target)
        .unwrap_or(curve.len() - 1)
}

/// Smallest FPR among operating points with `TPR >= target_tpr`, without
/// interpolating between points.
pub fn fpr_at_tpr<T: Scalar>(curve: &RocCurve<T>, target_tpr: f64) -> f64 {
    assert!(
        target_tpr > 0.0 && target_tpr <= 1.0,
        "target TPR must lie in (0, 1], got {target_tpr}"
    );
    curve.fpr(first_reaching(curve, target_tpr))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(v: &[f64]) -> ScoreSet<f64> {
        ScoreSet::new(None, v.to_vec()).unwrap()
    }

    #[test]
    fn perfect_separation_points() {
        let c = roc_curve(&set(&[2.0]), &set(&[1.0])).unwrap();
        assert_eq!(c.points(), vec![(0.0, 0.0), (0.0, 1.0), (1.0, 1.0)]);
        assert_eq!(auroc(&c), 1.0);
        assert_eq!(fpr_at_tpr(&c, 0.95), 0.0);
    }

    #[test]
    fn full_tie_is_one_diagonal_step() {
        let c = roc_curve(&set(&[1.0]), &set(&[1.0])).unwrap();
        assert_eq!(c.points(), vec![(0.0, 0.0), (1.0, 1.0)]);
        assert_eq!(auroc(&c), 0.5);
    }

    #[test]
    fn staircase_example() {
        let c = roc_curve(&set(&[3.0, 1.0]), &set(&[2.0, 0.0])).unwrap();
        assert_eq!(
            c.points(),
            vec![(0.0, 0.0), (0.0, 0.5), (0.5, 0.5), (0.5, 1.0), (1.0, 1.0)]
        );
        assert_eq!(c.thresholds()[0], f64::INFINITY);
        assert_eq!(&c.thresholds()[1..], &[3.0, 2.0, 1.0, 0.0]);
        assert_eq!(auroc(&c), 0.75);
    }

    #[test]
    fn fpr95_needs_every_id_sample() {
        let c = roc_curve(&set(&[5.0, 4.0, 3.0, 2.0, 1.0]), &set(&[1.5, 0.5])).unwrap();
        assert_eq!(fpr_at_tpr(&c, 0.95), 0.5);
        assert_eq!(fpr_at_tpr(&c, 0.8), 0.0);
    }

    #[test]
    fn identical_multisets_give_fpr95_of_095() {
        let v: Vec<f64> = (1..=1000).map(f64::from).collect();
        let c = roc_curve(&set(&v), &set(&v)).unwrap();
        assert_eq!(fpr_at_tpr(&c, 0.95), 0.95);
        assert_eq!(auroc(&c), 0.5);
        // one big tie group can only be accepted whole
        let flat = roc_curve(&set(&[1.0; 1000]), &set(&[1.0; 1000])).unwrap();
        assert_eq!(fpr_at_tpr(&flat, 0.95), 1.0);
    }

    #[test]
    fn identical_score_multisets_half_credit() {
        let c = roc_curve(&set(&[1.0, 2.0, 2.0, 5.0]), &set(&[5.0, 2.0, 1.0, 2.0])).unwrap();
        assert_eq!(auroc(&c), 0.5);
    }

    #[test]
    fn errors_on_empty_or_mixed_methods() {
        assert!(roc_curve(&set(&[]), &set(&[1.0])).is_err());
        let msp = ScoreSet::new(Some(crate::detectors::Method::Msp), vec![0.5]).unwrap();
        assert!(roc_curve(&msp, &set(&[1.0])).is_err());
    }
}
