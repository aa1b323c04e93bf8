//! Slow, direct reference computations used to cross-check the fast paths.

use crate::data::FeatureTable;
use crate::detectors::{ScoreSet, ABSOLUTE_RIDGE_FLOOR};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Largest `n * m` the pairwise oracle accepts.
pub const PAIRWISE_LIMIT: usize = 10_000_000;

/// Fraction of (ID, OOD) pairs ranked correctly, ties counted half.
pub fn pairwise_auroc_oracle<T: Scalar>(id: &ScoreSet<T>, ood: &ScoreSet<T>) -> Result<f64> {
    let (n, m) = (id.len(), ood.len());
    if n == 0 || m == 0 {
        return Err(Error::Config(
            "AUROC needs non-empty ID and OOD sets".into(),
        ));
    }
    if n.saturating_mul(m) > PAIRWISE_LIMIT {
        return Err(Error::Config(format!(
            "{n} x {m} pairs exceed the oracle limit of {PAIRWISE_LIMIT}"
        )));
    }
    let mut twice: u64 = 0;
    for &a in id.scores() {
        for &b in ood.scores() {
            twice += if a > b {
                2
            } else if a == b {
                1
            } else {
                0
            };
        }
    }
    Ok(twice as f64 / (2 * n * m) as f64)
}

/// Pooled within-class covariance (divided by `N`) by direct two-pass sums
/// in f64.
pub fn direct_pooled_covariance<T: Scalar>(fit: &FeatureTable<T>) -> Result<(Vec<f64>, Vec<f64>)> {
    let (n, d, c) = (fit.n(), fit.dim(), fit.num_classes());
    let counts = fit.class_counts();
    let mut means = vec![0.0; c * d];
    for i in 0..n {
        let k = fit.labels()[i]
            .index()
            .ok_or_else(|| Error::Fit(format!("row {i} is unlabeled")))?;
        for j in 0..d {
            means[k * d + j] += fit.feature_row(i)[j].as_f64();
        }
    }
    for k in 0..c {
        if counts[k] == 0 {
            return Err(Error::Fit(format!("class {k} has no fit samples")));
        }
        for j in 0..d {
            means[k * d + j] /= counts[k] as f64;
        }
    }
    let mut cov = vec![0.0; d * d];
    for a in 0..d {
        for b in 0..d {
            let mut s = 0.0;
            for i in 0..n {
                let k = fit.labels()[i].index().expect("checked above");
                s += (fit.feature_row(i)[a].as_f64() - means[k * d + a])
                    * (fit.feature_row(i)[b].as_f64() - means[k * d + b]);
            }
            cov[a * d + b] = s / n as f64;
        }
    }
    Ok((means, cov))
}

/// Mahalanobis scores `max_c -(x - μ_c)ᵀ Σ⁻¹ (x - μ_c)` with the same
/// regularization as the detector, solved per query and class by Gaussian
/// elimination with partial pivoting.
pub fn direct_mahalanobis_oracle<T: Scalar>(
    fit: &FeatureTable<T>,
    query: &FeatureTable<T>,
    ridge: f64,
) -> Result<Vec<f64>> {
    let d = fit.dim();
    if query.dim() != d {
        return Err(Error::DimensionMismatch(format!(
            "query dimension {} but fit dimension {d}",
            query.dim()
        )));
    }
    let (means, mut cov) = direct_pooled_covariance(fit)?;
    let trace: f64 = (0..d).map(|i| cov[i * d + i]).sum();
    let shift = if trace > 0.0 {
        ridge * trace / d as f64
    } else {
        ABSOLUTE_RIDGE_FLOOR
    };
    for i in 0..d {
        cov[i * d + i] += shift;
    }
    let mut scores = Vec::with_capacity(query.n());
    for i in 0..query.n() {
        let x: Vec<f64> = query.feature_row(i).iter().map(|v| v.as_f64()).collect();
        let mut best = f64::NEG_INFINITY;
        for mu in means.chunks(d) {
            let diff: Vec<f64> = x.iter().zip(mu).map(|(a, b)| a - b).collect();
            let y = solve(&cov, &diff, d)?;
            let q: f64 = diff.iter().zip(&y).map(|(a, b)| a * b).sum();
            best = best.max(-q);
        }
        scores.push(best);
    }
    Ok(scores)
}

fn solve(a: &[f64], b: &[f64], d: usize) -> Result<Vec<f64>> {
    let mut m = a.to_vec();
    let mut x = b.to_vec();
    for col in 0..d {
        let pivot = (col..d)
            .max_by(|&p, &q| m[p * d + col].abs().total_cmp(&m[q * d + col].abs()))
            .expect("non-empty range");
        if m[pivot * d + col].abs() < 1e-300 {
            return Err(Error::Numerical(
                "singular covariance in the direct solve".into(),
            ));
        }
        if pivot != col {
            for j in 0..d {
                m.swap(pivot * d + j, col * d + j);
            }
            x.swap(pivot, col);
        }
        for row in col + 1..d {
            let f = m[row * d + col] / m[col * d + col];
            for j in col..d {
                m[row * d + j] -= f * m[col * d + j];
            }
            x[row] -= f * x[col];
        }
    }
    for col in (0..d).rev() {
        let s: f64 = (col + 1..d).map(|j| m[col * d + j] * x[j]).sum();
        x[col] = (x[col] - s) / m[col * d + col];
    }
    Ok(x)
}
