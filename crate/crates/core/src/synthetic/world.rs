//! Gaussian-mixture worlds with a closed-form classifier.
//!
//! Generation, in order, each step on its own RNG stream:
//!
//! 1. class means: `d` standard normals per class, scaled to length
//!    `class_separation`;
//! 2. class sizes from the sample-count law;
//! 3. ID samples `μ_k + σ z`, class by class;
//! 4. stratified ID1/ID2/ID3 split (default fractions 0.7 / 0.5);
//! 5. label noise on ID1 and ID2: a `label_noise` share of every class is
//!    relabeled, spread evenly over the other `c - 1` classes. At `1 - 1/c`
//!    every class carries each label equally often;
//! 6. the classifier: a Gaussian kernel density estimate per class over
//!    the noisy ID1 labels. Like a network that memorizes its training set,
//!    it inherits the noise point by point, so fully random labels give
//!    chance accuracy in expectation.
//!
//! OOD clouds copy the class composition of ID3 and translate every cluster
//! by `ood_distance * class_separation` along a random unit direction, so at
//! distance 0 an OOD cloud is distributed exactly like ID3.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::laws::SampleLaw;
use crate::data::{classifier_accuracy, split_id_data, FeatureTable, Label, SplitPolicy};
use crate::detectors::logsumexp;
use crate::error::{Error, Result};
use crate::rng::{stream, Stream};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub classes: usize,
    pub dim: usize,
    /// Radius of the sphere the class means sit on.
    pub class_separation: f64,
    pub within_class_sigma: f64,
    /// Fraction of fit labels moved to a wrong class, in `[0, 1 - 1/c]`.
    pub label_noise: f64,
    /// OOD shift in units of `class_separation`.
    pub ood_distance: f64,
    /// Classifier kernel bandwidth in units of `within_class_sigma`.
    pub kde_bandwidth: f64,
    pub law: SampleLaw,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            classes: 20,
            dim: 16,
            class_separation: 4.0,
            within_class_sigma: 1.0,
            label_noise: 0.0,
            ood_distance: 1.0,
            kde_bandwidth: 0.75,
            law: SampleLaw::Balanced { per_class: 700 },
            seed: 42,
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if self.classes < 2 {
            return fail(format!("need c >= 2 classes, got {}", self.classes));
        }
        if self.dim < 2 {
            return fail(format!("need d >= 2 dimensions, got {}", self.dim));
        }
        if !(self.class_separation > 0.0 && self.class_separation.is_finite()) {
            return fail(format!(
                "class separation must be > 0, got {}",
                self.class_separation
            ));
        }
        if !(self.within_class_sigma > 0.0 && self.within_class_sigma.is_finite()) {
            return fail(format!(
                "within-class sigma must be > 0, got {}",
                self.within_class_sigma
            ));
        }
        let max_noise = 1.0 - 1.0 / self.classes as f64;
        if !(self.label_noise >= 0.0 && self.label_noise <= max_noise) {
            return fail(format!(
                "label noise must lie in [0, {max_noise}], got {}",
                self.label_noise
            ));
        }
        if !(self.kde_bandwidth > 0.0 && self.kde_bandwidth.is_finite()) {
            return fail(format!(
                "kernel bandwidth must be > 0, got {}",
                self.kde_bandwidth
            ));
        }
        if !(self.ood_distance >= 0.0 && self.ood_distance.is_finite()) {
            return fail(format!(
                "OOD distance must be >= 0, got {}",
                self.ood_distance
            ));
        }
        self.law.validate(self.classes)?;
        let sizes = self.law.class_sizes(self.classes, self.seed)?;
        if sizes.iter().any(|&s| s < 3) {
            return fail(
                "every class needs at least 3 samples to populate ID1, ID2 and ID3".into(),
            );
        }
        Ok(())
    }

    pub fn split_policy(&self) -> SplitPolicy {
        SplitPolicy {
            seed: self.seed,
            ..SplitPolicy::default()
        }
    }
}

/// Gaussian kernel density classifier over the (noisy) ID1 labels.
///
/// Logit `k` is the log joint density `log (1/N) Σ_{i: y_i = k} N(x; x_i, h² I)`,
/// so softmax gives the estimated posterior and the log-sum-exp of the
/// logits is the log of the estimated marginal density.
#[derive(Debug, Clone, PartialEq)]
pub struct KdeClassifier {
    dim: usize,
    classes: usize,
    bandwidth: f64,
    /// Row-major `n x d`, grouped by class.
    points: Vec<f64>,
    /// Start offset (in rows) of each class in `points`, plus the end.
    offsets: Vec<usize>,
}

impl KdeClassifier {
    pub fn fit(train: &FeatureTable<f64>, classes: usize, bandwidth: f64) -> Result<Self> {
        let d = train.dim();
        let mut offsets = vec![0];
        let mut points = Vec::with_capacity(train.features().len());
        for k in 0..classes {
            let before = points.len();
            for i in 0..train.n() {
                if train.labels()[i].index() == Some(k) {
                    points.extend_from_slice(train.feature_row(i));
                }
            }
            if points.len() == before {
                return Err(Error::Fit(format!("class {k} received no training labels")));
            }
            offsets.push(points.len() / d);
        }
        Ok(KdeClassifier {
            dim: d,
            classes,
            bandwidth,
            points,
            offsets,
        })
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn logits(&self, x: &[f64]) -> Vec<f64> {
        let d = self.dim;
        let h2 = self.bandwidth * self.bandwidth;
        let n = *self.offsets.last().expect("non-empty") as f64;
        let norm = -n.ln() - 0.5 * d as f64 * (2.0 * std::f64::consts::PI * h2).ln();
        let mut exponents = Vec::new();
        (0..self.classes)
            .map(|k| {
                exponents.clear();
                exponents.extend(
                    self.points[self.offsets[k] * d..self.offsets[k + 1] * d]
                        .chunks(d)
                        .map(|p| {
                            let sq: f64 = x.iter().zip(p).map(|(a, b)| (a - b) * (a - b)).sum();
                            -sq / (2.0 * h2)
                        }),
                );
                logsumexp(&exponents) + norm
            })
            .collect()
    }

    fn attach_logits(&self, table: &FeatureTable<f64>) -> Result<FeatureTable<f64>> {
        let logits: Vec<f64> = (0..table.n())
            .into_par_iter()
            .flat_map_iter(|i| self.logits(table.feature_row(i)))
            .collect();
        table.with_logits(self.classes, logits)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticWorld<T> {
    pub spec: SyntheticSpec,
    /// ID1, noisy labels.
    pub id_train: FeatureTable<T>,
    /// ID2, noisy labels.
    pub id_fit: FeatureTable<T>,
    /// ID3, true labels.
    pub id_test: FeatureTable<T>,
    /// Named OOD clouds; the first sits at `spec.ood_distance`.
    pub ood: Vec<(String, FeatureTable<T>)>,
    /// Row-major `c x d`.
    pub true_means: Vec<f64>,
    pub classifier: KdeClassifier,
    /// Classifier accuracy on ID3.
    pub classifier_accuracy: f64,
}

/// Canonical name of an OOD cloud at `distance`.
pub fn ood_name(distance: f64) -> String {
    format!("ood_d{distance}")
}

fn gaussian_vec<R: Rng>(rng: &mut R, d: usize) -> Vec<f64> {
    (0..d)
        .map(|_| rng.sample::<f64, _>(StandardNormal))
        .collect()
}

fn unit_vec<R: Rng>(rng: &mut R, d: usize) -> Vec<f64> {
    loop {
        let v = gaussian_vec(rng, d);
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// Class means on the sphere of radius `class_separation`, row-major `c x d`.
pub fn class_means(spec: &SyntheticSpec) -> Vec<f64> {
    let mut rng = stream(spec.seed, Stream::Means);
    (0..spec.classes)
        .flat_map(|_| {
            unit_vec(&mut rng, spec.dim)
                .into_iter()
                .map(|v| v * spec.class_separation)
                .collect::<Vec<_>>()
        })
        .collect()
}

/// Labeled ID samples without logits, classes in order.
pub fn generate_id_samples(spec: &SyntheticSpec) -> Result<FeatureTable<f64>> {
    spec.validate()?;
    let means = class_means(spec);
    let sizes = spec.law.class_sizes(spec.classes, spec.seed)?;
    let d = spec.dim;
    let mut rng = stream(spec.seed, Stream::Samples);
    let mut features = Vec::with_capacity(sizes.iter().sum::<usize>() * d);
    let mut labels = Vec::new();
    for (k, &size) in sizes.iter().enumerate() {
        let mu = &means[k * d..(k + 1) * d];
        for _ in 0..size {
            let z = gaussian_vec(&mut rng, d);
            features.extend(
                mu.iter()
                    .zip(z)
                    .map(|(m, z)| m + spec.within_class_sigma * z),
            );
            labels.push(Label::class(k));
        }
    }
    FeatureTable::new(d, 0, features, vec![], labels)
}

/// Moves exactly `round(noise * n_k)` labels of every class `k` to other
/// classes, spread evenly over them from a random starting class.
fn corrupt_labels<R: Rng>(
    table: &FeatureTable<f64>,
    noise: f64,
    classes: usize,
    rng: &mut R,
) -> Result<FeatureTable<f64>> {
    let mut labels = table.labels().to_vec();
    for k in 0..classes {
        let mut rows: Vec<usize> = (0..labels.len())
            .filter(|&i| table.labels()[i].index() == Some(k))
            .collect();
        rows.shuffle(rng);
        let flips = (noise * rows.len() as f64).round() as usize;
        let start = rng.random_range(0..classes - 1);
        for (j, &i) in rows[..flips].iter().enumerate() {
            labels[i] = Label::class((k + 1 + (start + j) % (classes - 1)) % classes);
        }
    }
    table.with_labels(labels)
}

pub fn generate_world<T: Scalar>(spec: &SyntheticSpec) -> Result<SyntheticWorld<T>> {
    let samples = generate_id_samples(spec)?;
    let (train, fit, test) = split_id_data(&samples, &spec.split_policy())?;

    let mut noise_rng = stream(spec.seed, Stream::LabelNoise);
    let train = corrupt_labels(&train, spec.label_noise, spec.classes, &mut noise_rng)?;
    let fit = corrupt_labels(&fit, spec.label_noise, spec.classes, &mut noise_rng)?;

    let classifier = KdeClassifier::fit(
        &train,
        spec.classes,
        spec.kde_bandwidth * spec.within_class_sigma,
    )?;
    let train = classifier.attach_logits(&train)?;
    let fit = classifier.attach_logits(&fit)?;
    let test = classifier.attach_logits(&test)?;
    let accuracy = classifier_accuracy(&test).expect("ID3 has logits and labels");

    let mut world = SyntheticWorld {
        spec: spec.clone(),
        id_train: train.cast(),
        id_fit: fit.cast(),
        id_test: test.cast(),
        ood: Vec::new(),
        true_means: class_means(spec),
        classifier,
        classifier_accuracy: accuracy,
    };
    let first = world.ood_cloud(spec.ood_distance, 0)?;
    world.ood.push((ood_name(spec.ood_distance), first));
    Ok(world)
}

impl<T: Scalar> SyntheticWorld<T> {
    /// An OOD cloud at `distance`, drawn from OOD stream `index`. It has as
    /// many rows as ID3 and mirrors its class composition.
    pub fn ood_cloud(&self, distance: f64, index: u32) -> Result<FeatureTable<T>> {
        if !(distance >= 0.0 && distance.is_finite()) {
            return Err(Error::Config(format!(
                "OOD distance must be >= 0, got {distance}"
            )));
        }
        let d = self.spec.dim;
        let mut rng = stream(self.spec.seed, Stream::Ood(index));
        let direction = unit_vec(&mut rng, d);
        let shift: Vec<f64> = direction
            .iter()
            .map(|u| u * distance * self.spec.class_separation)
            .collect();
        let mut features = Vec::with_capacity(self.id_test.n() * d);
        for label in self.id_test.labels() {
            let k = label.index().expect("ID3 is labeled");
            let mu = &self.true_means[k * d..(k + 1) * d];
            let z = gaussian_vec(&mut rng, d);
            features.extend((0..d).map(|j| mu[j] + shift[j] + self.spec.within_class_sigma * z[j]));
        }
        let labels = vec![Label::UNLABELED; self.id_test.n()];
        let table = FeatureTable::new(d, 0, features, vec![], labels)?;
        Ok(self.classifier.attach_logits(&table)?.cast())
    }

    pub fn ood_table(&self, name: &str) -> Option<&FeatureTable<T>> {
        self.ood.iter().find(|(n, _)| n == name).map(|(_, t)| t)
    }
}
