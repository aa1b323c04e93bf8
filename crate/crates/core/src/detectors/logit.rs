use rayon::prelude::*;

use super::{Method, ScoreSet};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

fn row_max<T: Scalar>(row: &[T]) -> T {
    row.iter().copied().fold(T::neg_infinity(), T::max)
}

/// Max-subtracted log-sum-exp.
pub fn logsumexp<T: Scalar>(row: &[T]) -> T {
    let m = row_max(row);
    if !m.is_finite() {
        return m;
    }
    m + row.iter().map(|&x| (x - m).exp()).sum::<T>().ln()
}

pub fn softmax<T: Scalar>(row: &[T]) -> Vec<T> {
    let m = row_max(row);
    let exps: Vec<T> = row.iter().map(|&x| (x - m).exp()).collect();
    let total: T = exps.iter().copied().sum();
    exps.into_iter().map(|e| e / total).collect()
}

fn check_logits<T: Scalar>(logits: &[T], c: usize) -> Result<()> {
    if c < 2 {
        return Err(Error::Config(format!(
            "logit scoring needs at least 2 classes, got {c}"
        )));
    }
    if !logits.len().is_multiple_of(c) {
        return Err(Error::DimensionMismatch(format!(
            "{} logits do not split into rows of {c}",
            logits.len()
        )));
    }
    Ok(())
}

/// Maximum softmax probability per row of a row-major `n x c` logit matrix.
pub fn score_msp<T: Scalar>(logits: &[T], c: usize) -> Result<ScoreSet<T>> {
    check_logits(logits, c)?;
    let scores = logits
        .par_chunks(c)
        .map(|row| {
            // the arg-max term contributes exp(0) = 1 to the denominator
            let m = row_max(row);
            T::one() / row.iter().map(|&x| (x - m).exp()).sum::<T>()
        })
        .collect();
    ScoreSet::new(Some(Method::Msp), scores)
}

/// `T * logsumexp(row / T)`, the negated free energy, per row.
pub fn score_energy<T: Scalar>(logits: &[T], c: usize, temperature: T) -> Result<ScoreSet<T>> {
    if c == 0 || !logits.len().is_multiple_of(c) {
        return Err(Error::DimensionMismatch(format!(
            "{} logits do not split into rows of {c}",
            logits.len()
        )));
    }
    if !(temperature > T::zero() && temperature.is_finite()) {
        return Err(Error::Config(format!(
            "temperature must be > 0, got {temperature}"
        )));
    }
    let scores = logits
        .par_chunks(c)
        .map(|row| {
            let m = row_max(row);
            m + temperature
                * row
                    .iter()
                    .map(|&x| ((x - m) / temperature).exp())
                    .sum::<T>()
                    .ln()
        })
        .collect();
    ScoreSet::new(Some(Method::Energy), scores)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const LN2: f64 = std::f64::consts::LN_2;

    #[test]
    fn softmax_examples() {
        assert_eq!(softmax(&[0.0f64; 4]), vec![0.25; 4]);
        assert_eq!(softmax(&[5.0f64]), vec![1.0]);
        let p = softmax(&[1.0f64, 2.0, 3.0]);
        assert!((p[2] - 0.665_240_955_774_821_9).abs() < 1e-15);
    }

    #[test]
    fn msp_examples() {
        let s = score_msp(&[0.0f64, 0.0, 100.0, 0.0, 1.0, 2.0, 3.0][..6], 2).unwrap();
        assert_eq!(s.scores()[0], 0.5);
        assert!((s.scores()[1] - 1.0).abs() < 1e-12);
        assert!((s.scores()[2] - 1.0 / (1.0 + (-1.0f64).exp())).abs() < 1e-15);
        let s = score_msp(&[1.0f64, 2.0, 3.0], 3).unwrap();
        assert!((s.scores()[0] - 0.665_240_955_774_821_9).abs() < 1e-15);
        assert_eq!(s.method(), Some(Method::Msp));
    }

    #[test]
    fn msp_needs_two_classes() {
        assert!(matches!(score_msp(&[1.0f64], 1), Err(Error::Config(_))));
    }

    #[test]
    fn energy_examples() {
        let single = score_energy(&[-4.25f64], 1, 1.0).unwrap();
        assert_eq!(single.scores()[0], -4.25);
        let s = score_energy(&[0.0f64, 0.0], 2, 1.0).unwrap();
        assert!((s.scores()[0] - LN2).abs() < 1e-15);
        let s = score_energy(&[0.0f64, 0.0], 2, 2.0).unwrap();
        assert!((s.scores()[0] - 2.0 * LN2).abs() < 1e-15);
        let s = score_energy(&[1.0f64, 2.0, 3.0], 3, 1.0).unwrap();
        assert!((s.scores()[0] - 3.407_605_964_444_38).abs() < 1e-14);
        assert!(score_energy(&[0.0f64, 0.0], 2, 0.0).is_err());
    }

    #[test]
    fn works_in_f32() {
        let s = score_energy(&[1.0f32, 2.0, 3.0], 3, 1.0).unwrap();
        assert!((s.scores()[0] - 3.407_606).abs() < 1e-5);
        let p = score_msp(&[1.0f32, 2.0, 3.0], 3).unwrap();
        assert!((p.scores()[0] - 0.665_241).abs() < 1e-6);
    }

    fn logit_row() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-30.0f64..30.0, 2..12)
    }

    proptest! {
        #[test]
        fn softmax_is_normalized(row in logit_row()) {
            let p = softmax(&row);
            prop_assert!(p.iter().all(|&v| v >= 0.0));
            prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn msp_is_shift_invariant(row in logit_row(), a in -50.0f64..50.0) {
            let c = row.len();
            let shifted: Vec<f64> = row.iter().map(|x| x + a).collect();
            let s0 = score_msp(&row, c).unwrap().scores()[0];
            let s1 = score_msp(&shifted, c).unwrap().scores()[0];
            prop_assert!((s0 - s1).abs() < 1e-12);
            prop_assert!(s0 > 1.0 / c as f64 - 1e-15 && s0 <= 1.0);
        }

        #[test]
        fn energy_shift_adds_constant(row in logit_row(), a in -50.0f64..50.0, t in 0.1f64..5.0) {
            let c = row.len();
            let shifted: Vec<f64> = row.iter().map(|x| x + a).collect();
            let s0 = score_energy(&row, c, t).unwrap().scores()[0];
            let s1 = score_energy(&shifted, c, t).unwrap().scores()[0];
            prop_assert!((s1 - (s0 + a)).abs() < 1e-12);
        }

        #[test]
        fn energy_is_monotone_in_each_logit(row in logit_row(), k in 0usize..12, bump in 0.0f64..10.0) {
            let c = row.len();
            let mut up = row.clone();
            up[k % c] += bump;
            let s0 = score_energy(&row, c, 1.0).unwrap().scores()[0];
            let s1 = score_energy(&up, c, 1.0).unwrap().scores()[0];
            prop_assert!(s1 >= s0);
        }
    }
}
