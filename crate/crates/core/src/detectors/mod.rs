//! Post-hoc OOD scorers.
//!
//! Every scorer emits a [`ScoreSet`] where larger means more
//! in-distribution. The energy detector therefore stores `-E(x)`.

mod linalg;
mod logit;
mod mahalanobis;
mod scores_io;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::data::FeatureTable;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub use linalg::Cholesky;
pub use logit::{logsumexp, score_energy, score_msp, softmax};
pub use mahalanobis::{
    decode_model, encode_model, fit_mahalanobis, read_model, score_mahalanobis, write_model,
    GaussianClassModel, ABSOLUTE_RIDGE_FLOOR,
};
pub use scores_io::{format_scores_csv, parse_scores_csv, read_scores_csv, write_scores_csv};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    /// Maximum softmax probability.
    #[serde(rename = "MSP")]
    Msp,
    /// Negated free energy, `T * logsumexp(logits / T)`.
    #[serde(rename = "EBM")]
    Energy,
    /// Negative squared Mahalanobis distance to the closest class.
    #[serde(rename = "MAH")]
    Mahalanobis,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Msp, Method::Energy, Method::Mahalanobis];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Msp => "MSP",
            Method::Energy => "EBM",
            Method::Mahalanobis => "MAH",
        }
    }

    pub fn needs_fit(self) -> bool {
        self == Method::Mahalanobis
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "MSP" => Ok(Method::Msp),
            "EBM" | "ENERGY" => Ok(Method::Energy),
            "MAH" | "MAHALANOBIS" => Ok(Method::Mahalanobis),
            other => Err(Error::Config(format!(
                "unknown detector `{other}` (expected msp, ebm or mah)"
            ))),
        }
    }
}

/// Orientation of every score this crate produces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Orientation {
    HigherIsId,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorConfig {
    pub method: Method,
    /// Energy temperature.
    pub temperature: f64,
    /// Relative covariance ridge for the Mahalanobis fit.
    pub ridge: f64,
}

impl DetectorConfig {
    pub const DEFAULT_TEMPERATURE: f64 = 1.0;
    pub const DEFAULT_RIDGE: f64 = 1e-6;

    pub fn new(method: Method) -> Self {
        DetectorConfig {
            method,
            temperature: Self::DEFAULT_TEMPERATURE,
            ridge: Self::DEFAULT_RIDGE,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.temperature > 0.0 && self.temperature.is_finite()) {
            return Err(Error::Config(format!(
                "temperature must be > 0, got {}",
                self.temperature
            )));
        }
        if !(self.ridge >= 0.0 && self.ridge.is_finite()) {
            return Err(Error::Config(format!(
                "ridge must be >= 0, got {}",
                self.ridge
            )));
        }
        Ok(())
    }

    /// Scores `table` with this detector. `model` is required for MAH and
    /// ignored otherwise.
    pub fn score<T: Scalar>(
        &self,
        table: &FeatureTable<T>,
        model: Option<&GaussianClassModel<T>>,
    ) -> Result<ScoreSet<T>> {
        self.validate()?;
        match self.method {
            Method::Msp | Method::Energy if !table.has_logits() => Err(Error::Config(format!(
                "{} needs logits but the table has none",
                self.method
            ))),
            Method::Msp => score_msp(table.logits(), table.logit_classes()),
            Method::Energy => score_energy(
                table.logits(),
                table.logit_classes(),
                T::from_f64_lossy(self.temperature),
            ),
            Method::Mahalanobis => {
                let model = model
                    .ok_or_else(|| Error::Config("MAH scoring needs a fitted model".into()))?;
                score_mahalanobis(model, table.features(), table.dim())
            }
        }
    }
}

/// Per-sample detector scores, larger = more in-distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreSet<T> {
    method: Option<Method>,
    scores: Vec<T>,
}

impl<T: Scalar> ScoreSet<T> {
    pub const ORIENTATION: Orientation = Orientation::HigherIsId;

    /// `method` is `None` for externally produced scores of unknown origin.
    pub fn new(method: Option<Method>, scores: Vec<T>) -> Result<Self> {
        if let Some(i) = scores.iter().position(|s| !s.is_finite()) {
            return Err(Error::at_row(i, "non-finite score"));
        }
        Ok(ScoreSet { method, scores })
    }

    pub fn method(&self) -> Option<Method> {
        self.method
    }

    pub fn scores(&self) -> &[T] {
        &self.scores
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn select(&self, indices: &[usize]) -> Self {
        ScoreSet {
            method: self.method,
            scores: indices.iter().map(|&i| self.scores[i]).collect(),
        }
    }
}
