use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Class index of a sample, or the unlabeled sentinel used for OOD data.
///
/// The sentinel is the all-ones bit pattern, which is `-1` once written as
/// an `i32`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Label(u32);

impl Label {
    pub const UNLABELED: Label = Label(u32::MAX);

    pub fn class(index: usize) -> Self {
        assert!(
            index < u32::MAX as usize,
            "class index {index} collides with the sentinel"
        );
        Label(index as u32)
    }

    /// Decodes the on-disk `i32` representation.
    pub fn from_i32(raw: i32) -> Option<Self> {
        match raw {
            -1 => Some(Label::UNLABELED),
            r if r >= 0 => Some(Label(r as u32)),
            _ => None,
        }
    }

    pub fn to_i32(self) -> i32 {
        self.0 as i32
    }

    pub fn index(self) -> Option<usize> {
        if self.is_unlabeled() {
            None
        } else {
            Some(self.0 as usize)
        }
    }

    pub fn is_unlabeled(self) -> bool {
        self == Label::UNLABELED
    }
}

impl fmt::Debug for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.index() {
            Some(k) => write!(f, "Label({k})"),
            None => f.write_str("Label(unlabeled)"),
        }
    }
}

/// Per-sample prelogit features, logits and labels.
///
/// Features and logits are stored row-major. A table without logits has
/// `logit_classes() == 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable<T> {
    n: usize,
    d: usize,
    c: usize,
    features: Vec<T>,
    logits: Vec<T>,
    labels: Vec<Label>,
}

impl<T: Scalar> FeatureTable<T> {
    /// Builds and validates a table. Pass `c = 0` and an empty `logits`
    /// vector for a features-only table.
    pub fn new(
        d: usize,
        c: usize,
        features: Vec<T>,
        logits: Vec<T>,
        labels: Vec<Label>,
    ) -> Result<Self> {
        let n = labels.len();
        if n == 0 {
            return Err(Error::ingest("table must contain at least one sample"));
        }
        if d == 0 {
            return Err(Error::ingest("feature dimension must be at least 1"));
        }
        if c == 1 {
            return Err(Error::ingest("logits need at least 2 classes"));
        }
        if features.len() != n * d {
            return Err(Error::DimensionMismatch(format!(
                "expected {n}x{d} = {} feature values, got {}",
                n * d,
                features.len()
            )));
        }
        if logits.len() != n * c {
            return Err(Error::DimensionMismatch(format!(
                "expected {n}x{c} = {} logit values, got {}",
                n * c,
                logits.len()
            )));
        }
        for row in 0..n {
            if features[row * d..(row + 1) * d]
                .iter()
                .any(|v| !v.is_finite())
            {
                return Err(Error::at_row(row, "non-finite feature value"));
            }
            if c > 0 {
                if logits[row * c..(row + 1) * c]
                    .iter()
                    .any(|v| !v.is_finite())
                {
                    return Err(Error::at_row(row, "non-finite logit value"));
                }
                if let Some(k) = labels[row].index() {
                    if k >= c {
                        return Err(Error::at_row(
                            row,
                            format!("label out of range: {k} >= {c}"),
                        ));
                    }
                }
            }
        }
        Ok(FeatureTable {
            n,
            d,
            c,
            features,
            logits,
            labels,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// Number of logit columns, 0 when logits are absent.
    pub fn logit_classes(&self) -> usize {
        self.c
    }

    pub fn has_logits(&self) -> bool {
        self.c > 0
    }

    /// Class count: the logit width if present, else one past the largest label.
    pub fn num_classes(&self) -> usize {
        if self.c > 0 {
            self.c
        } else {
            self.labels
                .iter()
                .filter_map(|l| l.index())
                .max()
                .map_or(0, |k| k + 1)
        }
    }

    pub fn features(&self) -> &[T] {
        &self.features
    }

    pub fn logits(&self) -> &[T] {
        &self.logits
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn feature_row(&self, i: usize) -> &[T] {
        &self.features[i * self.d..(i + 1) * self.d]
    }

    pub fn logit_row(&self, i: usize) -> &[T] {
        &self.logits[i * self.c..(i + 1) * self.c]
    }

    pub fn is_labeled(&self) -> bool {
        self.labels.iter().all(|l| !l.is_unlabeled())
    }

    /// Sample counts per class, indexed `0..num_classes()`.
    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.num_classes()];
        for k in self.labels.iter().filter_map(|l| l.index()) {
            counts[k] += 1;
        }
        counts
    }

    /// Rows at `indices`, in the given order. Rows are copied verbatim.
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        let mut features = Vec::with_capacity(indices.len() * self.d);
        let mut logits = Vec::with_capacity(indices.len() * self.c);
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            if i >= self.n {
                return Err(Error::Config(format!(
                    "row {i} out of bounds for table of {} rows",
                    self.n
                )));
            }
            features.extend_from_slice(self.feature_row(i));
            logits.extend_from_slice(self.logit_row(i));
            labels.push(self.labels[i]);
        }
        FeatureTable::new(self.d, self.c, features, logits, labels)
    }

    /// Replaces the labels, keeping features and logits.
    pub fn with_labels(&self, labels: Vec<Label>) -> Result<Self> {
        if labels.len() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "{} labels for {} rows",
                labels.len(),
                self.n
            )));
        }
        FeatureTable::new(
            self.d,
            self.c,
            self.features.clone(),
            self.logits.clone(),
            labels,
        )
    }

    /// Replaces (or attaches) the logit matrix.
    pub fn with_logits(&self, c: usize, logits: Vec<T>) -> Result<Self> {
        FeatureTable::new(
            self.d,
            c,
            self.features.clone(),
            logits,
            self.labels.clone(),
        )
    }

    /// Converts the payload to another scalar type.
    pub fn cast<U: Scalar>(&self) -> FeatureTable<U> {
        let conv = |v: &T| U::from_f64_lossy(v.as_f64());
        FeatureTable {
            n: self.n,
            d: self.d,
            c: self.c,
            features: self.features.iter().map(conv).collect(),
            logits: self.logits.iter().map(conv).collect(),
            labels: self.labels.clone(),
        }
    }
}

/// Fraction of labeled rows whose arg-max logit equals the label.
///
/// Returns `None` when the table has no logits or no labeled rows.
pub fn classifier_accuracy<T: Scalar>(table: &FeatureTable<T>) -> Option<f64> {
    if !table.has_logits() {
        return None;
    }
    let mut labeled = 0usize;
    let mut correct = 0usize;
    for i in 0..table.n() {
        let Some(k) = table.labels()[i].index() else {
            continue;
        };
        labeled += 1;
        if argmax(table.logit_row(i)) == k {
            correct += 1;
        }
    }
    (labeled > 0).then(|| correct as f64 / labeled as f64)
}

/// Index of the largest value; the first one wins on ties.
pub(crate) fn argmax<T: Scalar>(row: &[T]) -> usize {
    let mut best = 0;
    for (k, v) in row.iter().enumerate().skip(1) {
        if *v > row[best] {
            best = k;
        }
    }
    best
}
