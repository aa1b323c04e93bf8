use rand::seq::SliceRandom;

use super::laws::SampleLaw;
use crate::data::FeatureTable;
use crate::error::{Error, Result};
use crate::rng::{stream, Stream};
use crate::scalar::Scalar;

/// Subsamples a labeled table so that class sizes follow `law` over its
/// `num_classes()` classes. Draws from the `Imbalance` stream of `seed`;
/// rows keep their original order.
pub fn sample_imbalanced<T: Scalar>(
    table: &FeatureTable<T>,
    law: &SampleLaw,
    seed: u64,
) -> Result<FeatureTable<T>> {
    if let Some(row) = table.labels().iter().position(|l| l.is_unlabeled()) {
        return Err(Error::Config(format!(
            "imbalanced sampling needs labels; row {row} is unlabeled"
        )));
    }
    let c = table.num_classes();
    let wanted = law.class_sizes(c, seed)?;
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); c];
    for (i, label) in table.labels().iter().enumerate() {
        by_class[label.index().expect("labeled")].push(i);
    }
    let mut rng = stream(seed, Stream::Imbalance);
    let mut keep = Vec::with_capacity(wanted.iter().sum());
    for (k, rows) in by_class.iter_mut().enumerate() {
        if rows.len() < wanted[k] {
            return Err(Error::Config(format!(
                "class {k} has {} samples but law {law} needs {}",
                rows.len(),
                wanted[k]
            )));
        }
        rows.shuffle(&mut rng);
        keep.extend_from_slice(&rows[..wanted[k]]);
    }
    keep.sort_unstable();
    table.select(&keep)
}
