use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::data::table::{FeatureTable, Label};
use crate::error::{Error, Result};
use crate::rng::{stream, Stream};
use crate::scalar::Scalar;

/// How ID data is partitioned into classifier-train (ID1), detector-fit
/// (ID2) and test (ID3) parts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitPolicy {
    /// Share of each class that goes to ID1.
    pub train_fraction: f64,
    /// Share of the remainder that goes to ID2; the rest is ID3.
    pub detector_vs_test_fraction: f64,
    pub seed: u64,
}

impl Default for SplitPolicy {
    fn default() -> Self {
        SplitPolicy {
            train_fraction: 0.7,
            detector_vs_test_fraction: 0.5,
            seed: 42,
        }
    }
}

impl SplitPolicy {
    pub fn validate(&self) -> Result<()> {
        for (name, f) in [
            ("train_fraction", self.train_fraction),
            ("detector_vs_test_fraction", self.detector_vs_test_fraction),
        ] {
            if !(f > 0.0 && f < 1.0) {
                return Err(Error::Config(format!(
                    "{name} must lie strictly inside (0, 1), got {f}"
                )));
            }
        }
        Ok(())
    }

    /// Part sizes `(id1, id2, id3)` for one stratum of `m` samples.
    ///
    /// Floor for the earlier part, remainder to the later ones. A stratum
    /// of at least 3 samples gets at least one sample in every part; smaller
    /// strata fill ID1 first, then ID3.
    pub fn part_sizes(&self, m: usize) -> (usize, usize, usize) {
        match m {
            0 => (0, 0, 0),
            1 => (1, 0, 0),
            2 => (1, 0, 1),
            _ => {
                let n1 = floor_share(m, self.train_fraction).clamp(1, m - 2);
                let rest = m - n1;
                let n2 = floor_share(rest, self.detector_vs_test_fraction).clamp(1, rest - 1);
                (n1, n2, rest - n2)
            }
        }
    }
}

// 0.7 * 10 lands a hair below 7 in binary; the slack keeps exact products exact.
fn floor_share(m: usize, fraction: f64) -> usize {
    (m as f64 * fraction * (1.0 + 1e-12)).floor() as usize
}

/// Stratified, seeded three-way split. Each output keeps the input's row order.
pub fn split_id_data<T: Scalar>(
    table: &FeatureTable<T>,
    policy: &SplitPolicy,
) -> Result<(FeatureTable<T>, FeatureTable<T>, FeatureTable<T>)> {
    policy.validate()?;
    if table.n() < 3 {
        return Err(Error::Config(format!(
            "split needs at least 3 rows, got {}",
            table.n()
        )));
    }

    let mut strata: BTreeMap<Label, Vec<usize>> = BTreeMap::new();
    for (i, label) in table.labels().iter().enumerate() {
        strata.entry(*label).or_default().push(i);
    }

    let mut rng = stream(policy.seed, Stream::Split);
    let mut parts: [Vec<usize>; 3] = Default::default();
    for (label, mut rows) in strata {
        let (n1, n2, _) = policy.part_sizes(rows.len());
        if rows.len() < 3 {
            log::warn!(
                "{label:?} has {} sample(s); it cannot appear in all three splits",
                rows.len()
            );
        }
        rows.shuffle(&mut rng);
        parts[0].extend_from_slice(&rows[..n1]);
        parts[1].extend_from_slice(&rows[n1..n1 + n2]);
        parts[2].extend_from_slice(&rows[n1 + n2..]);
    }
    let [mut a, mut b, mut c] = parts;
    for part in [&mut a, &mut b, &mut c] {
        part.sort_unstable();
        if part.is_empty() {
            return Err(Error::Config(
                "split produced an empty part; supply more samples".into(),
            ));
        }
    }
    Ok((table.select(&a)?, table.select(&b)?, table.select(&c)?))
}
