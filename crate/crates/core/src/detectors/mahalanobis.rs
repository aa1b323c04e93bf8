//! Class-conditional Gaussians with a shared covariance.
//!
//! The pooled covariance divides by the total sample count `N`. Before
//! factorization it is regularized as `cov + ridge * (trace / d) * I`; a
//! zero-trace covariance gets `ABSOLUTE_RIDGE_FLOOR * I` instead.
//!
//! OODM model files, integers little-endian:
//!
//! | offset | size | field                                   |
//! |--------|------|-----------------------------------------|
//! | 0      | 4    | magic `OODM`                            |
//! | 4      | 4    | `u32` version = 1                       |
//! | 8      | 8    | `u64` c                                 |
//! | 16     | 8    | `u64` d                                 |
//! | 24     | 8    | `f64` ridge                             |
//! | 32     | 1    | dtype code, as in OODF                  |
//! | 33     | 7    | reserved, zero                          |
//! | 40     | ...  | means (c·d), covariance (d·d), counts   |
//!
//! Counts are `c` little-endian `u64`. The factor is recomputed on load.

use std::fs;
use std::path::Path;

use rayon::prelude::*;

use super::linalg::Cholesky;
use super::{Method, ScoreSet};
use crate::data::FeatureTable;
use crate::error::{Error, Result};
use crate::scalar::{Dtype, Scalar};

pub const ABSOLUTE_RIDGE_FLOOR: f64 = 1e-6;

const OODM_MAGIC: &[u8; 4] = b"OODM";
const OODM_VERSION: u32 = 1;
const OODM_HEADER_LEN: usize = 40;
const SCATTER_CHUNK: usize = 512;

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianClassModel<T> {
    c: usize,
    d: usize,
    ridge: f64,
    means: Vec<T>,
    covariance: Vec<T>,
    counts: Vec<usize>,
    factor: Cholesky<T>,
    /// `L⁻¹ μ_c` for each class, row-major `c x d`.
    whitened_means: Vec<T>,
}

impl<T: Scalar> GaussianClassModel<T> {
    /// Assembles a model from its parameters and factors the regularized
    /// covariance.
    pub fn from_parts(
        means: Vec<T>,
        covariance: Vec<T>,
        counts: Vec<usize>,
        d: usize,
        ridge: f64,
    ) -> Result<Self> {
        let c = counts.len();
        if d == 0 || c == 0 {
            return Err(Error::Config(
                "model needs at least one class and one dimension".into(),
            ));
        }
        if means.len() != c * d || covariance.len() != d * d {
            return Err(Error::DimensionMismatch(format!(
                "model parts do not match c={c}, d={d}: {} means, {} covariance entries",
                means.len(),
                covariance.len()
            )));
        }
        if !(ridge >= 0.0 && ridge.is_finite()) {
            return Err(Error::Config(format!("ridge must be >= 0, got {ridge}")));
        }
        if let Some(k) = counts.iter().position(|&n| n == 0) {
            return Err(Error::Fit(format!("class {k} has no fit samples")));
        }
        if means.iter().chain(&covariance).any(|v| !v.is_finite()) {
            return Err(Error::Numerical(
                "model contains non-finite parameters".into(),
            ));
        }

        let regularized = regularize(&covariance, d, ridge);
        let factor = Cholesky::factor(&regularized, d).map_err(|e| {
            Error::Numerical(format!(
                "covariance factorization failed after regularization with ridge {ridge:e} ({e}); \
                 use a larger ridge"
            ))
        })?;
        let mut whitened_means = means.clone();
        for mu in whitened_means.chunks_mut(d) {
            factor.solve_lower_in_place(mu);
        }
        Ok(GaussianClassModel {
            c,
            d,
            ridge,
            means,
            covariance,
            counts,
            factor,
            whitened_means,
        })
    }

    pub fn classes(&self) -> usize {
        self.c
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn ridge(&self) -> f64 {
        self.ridge
    }

    pub fn means(&self) -> &[T] {
        &self.means
    }

    pub fn mean(&self, class: usize) -> &[T] {
        &self.means[class * self.d..(class + 1) * self.d]
    }

    /// The pooled within-class covariance, before regularization.
    pub fn covariance(&self) -> &[T] {
        &self.covariance
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn precision_factor(&self) -> &Cholesky<T> {
        &self.factor
    }

    /// `max_c -(x - μ_c)ᵀ Σ⁻¹ (x - μ_c)` for one feature vector.
    pub fn score_one(&self, x: &[T]) -> T {
        let mut z = x.to_vec();
        self.factor.solve_lower_in_place(&mut z);
        self.whitened_means
            .chunks(self.d)
            .map(|w| -z.iter().zip(w).map(|(&a, &b)| (a - b) * (a - b)).sum::<T>())
            .fold(T::neg_infinity(), T::max)
    }
}

fn regularize<T: Scalar>(covariance: &[T], d: usize, ridge: f64) -> Vec<T> {
    let trace: T = (0..d).map(|i| covariance[i * d + i]).sum();
    let shift = if trace > T::zero() {
        T::from_f64_lossy(ridge) * trace / T::from_count(d)
    } else {
        T::from_f64_lossy(ABSOLUTE_RIDGE_FLOOR)
    };
    let mut out = covariance.to_vec();
    for i in 0..d {
        out[i * d + i] = out[i * d + i] + shift;
    }
    out
}

/// Fits per-class means and the pooled covariance on a labeled table.
pub fn fit_mahalanobis<T: Scalar>(
    table: &FeatureTable<T>,
    ridge: f64,
) -> Result<GaussianClassModel<T>> {
    if let Some(row) = table.labels().iter().position(|l| l.is_unlabeled()) {
        return Err(Error::Fit(format!(
            "fit table has an unlabeled sample at row {row}"
        )));
    }
    let (n, d, c) = (table.n(), table.dim(), table.num_classes());
    let counts = table.class_counts();
    if let Some(k) = counts.iter().position(|&m| m == 0) {
        return Err(Error::Fit(format!("class {k} has no fit samples")));
    }
    if n <= d {
        log::warn!(
            "fitting a {d}-dimensional covariance on only {n} samples; it will be rank-deficient"
        );
    }

    let mut means = vec![T::zero(); c * d];
    for i in 0..n {
        let k = table.labels()[i].index().expect("labeled");
        for (m, &x) in means[k * d..(k + 1) * d]
            .iter_mut()
            .zip(table.feature_row(i))
        {
            *m = *m + x;
        }
    }
    for (k, mu) in means.chunks_mut(d).enumerate() {
        let count = T::from_count(counts[k]);
        for m in mu {
            *m = *m / count;
        }
    }

    // Upper-triangular scatter, accumulated over fixed row chunks and summed
    // in chunk order so the result does not depend on the thread count.
    let partials: Vec<Vec<T>> = (0..n)
        .collect::<Vec<_>>()
        .par_chunks(SCATTER_CHUNK)
        .map(|rows| {
            let mut acc = vec![T::zero(); d * d];
            let mut r = vec![T::zero(); d];
            for &i in rows {
                let k = table.labels()[i].index().expect("labeled");
                for ((ri, &x), &m) in r
                    .iter_mut()
                    .zip(table.feature_row(i))
                    .zip(&means[k * d..(k + 1) * d])
                {
                    *ri = x - m;
                }
                for a in 0..d {
                    for b in a..d {
                        acc[a * d + b] = acc[a * d + b] + r[a] * r[b];
                    }
                }
            }
            acc
        })
        .collect();
    let mut covariance = vec![T::zero(); d * d];
    for part in partials {
        for (acc, v) in covariance.iter_mut().zip(part) {
            *acc = *acc + v;
        }
    }
    let total = T::from_count(n);
    for a in 0..d {
        for b in a..d {
            let v = covariance[a * d + b] / total;
            covariance[a * d + b] = v;
            covariance[b * d + a] = v;
        }
    }

    GaussianClassModel::from_parts(means, covariance, counts, d, ridge)
}

/// Scores a row-major `n x d` feature matrix. Every score is `<= 0`.
pub fn score_mahalanobis<T: Scalar>(
    model: &GaussianClassModel<T>,
    features: &[T],
    d: usize,
) -> Result<ScoreSet<T>> {
    if d != model.dim() || !features.len().is_multiple_of(d) {
        return Err(Error::DimensionMismatch(format!(
            "features have dimension {d} ({} values) but the model expects {}",
            features.len(),
            model.dim()
        )));
    }
    let scores = features.par_chunks(d).map(|x| model.score_one(x)).collect();
    ScoreSet::new(Some(Method::Mahalanobis), scores)
}

pub fn encode_model<T: Scalar>(model: &GaussianClassModel<T>) -> Vec<u8> {
    let dtype = T::DTYPE;
    let mut out = Vec::new();
    out.extend_from_slice(OODM_MAGIC);
    out.extend_from_slice(&OODM_VERSION.to_le_bytes());
    out.extend_from_slice(&(model.c as u64).to_le_bytes());
    out.extend_from_slice(&(model.d as u64).to_le_bytes());
    out.extend_from_slice(&model.ridge.to_le_bytes());
    out.push(dtype.code());
    out.extend_from_slice(&[0u8; 7]);
    for v in model.means.iter().chain(&model.covariance) {
        match dtype {
            Dtype::F32 => out.extend_from_slice(&(v.as_f64() as f32).to_le_bytes()),
            Dtype::F64 => out.extend_from_slice(&v.as_f64().to_le_bytes()),
        }
    }
    for &n in &model.counts {
        out.extend_from_slice(&(n as u64).to_le_bytes());
    }
    out
}

pub fn decode_model<T: Scalar>(bytes: &[u8]) -> Result<GaussianClassModel<T>> {
    let bad = |msg: &str| Error::ingest(format!("malformed model: {msg}"));
    if bytes.len() < OODM_HEADER_LEN || &bytes[0..4] != OODM_MAGIC {
        return Err(bad("missing `OODM` header"));
    }
    let u64_at = |at: usize| u64::from_le_bytes(bytes[at..at + 8].try_into().unwrap());
    if u32::from_le_bytes(bytes[4..8].try_into().unwrap()) != OODM_VERSION {
        return Err(bad("unsupported version"));
    }
    let (c, d) = (u64_at(8) as usize, u64_at(16) as usize);
    let ridge = f64::from_le_bytes(bytes[24..32].try_into().unwrap());
    let dtype = Dtype::from_code(bytes[32]).ok_or_else(|| bad("unknown dtype"))?;
    let values = c
        .checked_mul(d)
        .and_then(|cd| cd.checked_add(d.checked_mul(d)?))
        .ok_or_else(|| bad("size overflow"))?;
    let expected = values
        .checked_mul(dtype.width())
        .and_then(|v| v.checked_add(c.checked_mul(8)?))
        .and_then(|v| v.checked_add(OODM_HEADER_LEN))
        .ok_or_else(|| bad("size overflow"))?;
    if bytes.len() != expected {
        return Err(bad(&format!(
            "expected {expected} bytes for c={c}, d={d}, found {}",
            bytes.len()
        )));
    }
    let w = dtype.width();
    let payload: Vec<T> = bytes[OODM_HEADER_LEN..OODM_HEADER_LEN + values * w]
        .chunks_exact(w)
        .map(|ch| match dtype {
            Dtype::F32 => T::from_f64_lossy(f32::from_le_bytes(ch.try_into().unwrap()) as f64),
            Dtype::F64 => T::from_f64_lossy(f64::from_le_bytes(ch.try_into().unwrap())),
        })
        .collect();
    let counts = bytes[OODM_HEADER_LEN + values * w..]
        .chunks_exact(8)
        .map(|ch| u64::from_le_bytes(ch.try_into().unwrap()) as usize)
        .collect();
    let (means, covariance) = payload.split_at(c * d);
    GaussianClassModel::from_parts(means.to_vec(), covariance.to_vec(), counts, d, ridge)
}

pub fn write_model<T: Scalar>(model: &GaussianClassModel<T>, path: &Path) -> Result<()> {
    fs::write(path, encode_model(model)).map_err(|e| Error::io(path, e))
}

pub fn read_model<T: Scalar>(path: &Path) -> Result<GaussianClassModel<T>> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_model(&bytes)
}
