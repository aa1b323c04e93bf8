use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::presets::DESK_TEST_SIZE;
use crate::detectors::{DetectorConfig, Method};
use crate::error::{Error, Result};
use crate::synthetic::{SampleLaw, SyntheticSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    /// Grid of label-noise levels.
    Accuracy,
    /// Grid of OOD distances, or OOD entry names for a manifest base.
    DomainDistance,
    /// Grid of sample-count law shapes for the detector-fit split.
    Imbalance,
}

impl SweepAxis {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepAxis::Accuracy => "accuracy",
            SweepAxis::DomainDistance => "domain",
            SweepAxis::Imbalance => "imbalance",
        }
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "accuracy" => Ok(SweepAxis::Accuracy),
            "domain" | "domain_distance" | "domain-distance" => Ok(SweepAxis::DomainDistance),
            "imbalance" => Ok(SweepAxis::Imbalance),
            _ => Err(Error::Config(format!(
                "unknown sweep axis `{s}` (accuracy | domain | imbalance)"
            ))),
        }
    }
}

/// A sample-count law without its total; the imbalance sweep supplies one
/// common total for every shape.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LawShape {
    Balanced,
    PowerLaw { alpha: f64 },
    Uniform,
}

impl LawShape {
    /// The law with `total` samples over `classes` classes. A balanced law
    /// needs `total` to be a multiple of `classes`.
    pub fn with_total(self, total: usize, classes: usize) -> Result<SampleLaw> {
        match self {
            LawShape::Balanced if !total.is_multiple_of(classes) => Err(Error::Config(format!(
                "balanced total {total} is not a multiple of {classes} classes"
            ))),
            LawShape::Balanced => Ok(SampleLaw::Balanced {
                per_class: total / classes,
            }),
            LawShape::PowerLaw { alpha } => Ok(SampleLaw::PowerLaw { alpha, total }),
            LawShape::Uniform => Ok(SampleLaw::Uniform { total }),
        }
    }
}

impl fmt::Display for LawShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LawShape::Balanced => f.write_str("balanced"),
            LawShape::PowerLaw { alpha } => write!(f, "powerlaw:{alpha}"),
            LawShape::Uniform => f.write_str("uniform"),
        }
    }
}

/// `balanced`, `powerlaw:<alpha>` or `uniform`.
impl FromStr for LawShape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || {
            Error::Config(format!(
                "invalid law shape `{s}` (balanced | powerlaw:ALPHA | uniform)"
            ))
        };
        match s.trim().split(':').collect::<Vec<_>>().as_slice() {
            ["balanced"] => Ok(LawShape::Balanced),
            ["uniform"] => Ok(LawShape::Uniform),
            ["powerlaw", a] => {
                let alpha: f64 = a.parse().map_err(|_| bad())?;
                if alpha >= 0.0 && alpha.is_finite() {
                    Ok(LawShape::PowerLaw { alpha })
                } else {
                    Err(bad())
                }
            }
            _ => Err(bad()),
        }
    }
}

/// One grid value: a numeric level or a name (law shape, OOD entry).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AxisValue {
    Level(f64),
    Name(String),
}

impl fmt::Display for AxisValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AxisValue::Level(v) => write!(f, "{v}"),
            AxisValue::Name(n) => f.write_str(n),
        }
    }
}

impl AxisValue {
    pub fn level(&self) -> Result<f64> {
        match self {
            AxisValue::Level(v) => Ok(*v),
            AxisValue::Name(n) => Err(Error::Config(format!(
                "expected a number on this axis, got `{n}`"
            ))),
        }
    }

    pub fn shape(&self) -> Result<LawShape> {
        match self {
            AxisValue::Name(n) => n.parse(),
            AxisValue::Level(v) => Err(Error::Config(format!(
                "expected a law shape on this axis, got {v}"
            ))),
        }
    }

    /// Parses one comma-separated grid entry for `axis`.
    pub fn parse_for(axis: SweepAxis, text: &str) -> Result<Self> {
        let text = text.trim();
        match axis {
            SweepAxis::Imbalance => {
                text.parse::<LawShape>()?;
                Ok(AxisValue::Name(text.to_string()))
            }
            _ => Ok(text
                .parse::<f64>()
                .map(AxisValue::Level)
                .unwrap_or_else(|_| AxisValue::Name(text.to_string()))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepBase {
    Synthetic(SyntheticSpec),
    /// Dataset manifest with real feature dumps.
    Manifest(PathBuf),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub base: SweepBase,
    pub grid: Vec<AxisValue>,
    pub detectors: Vec<DetectorConfig>,
    /// Largest per-side test size; ID and OOD are subsampled to a common size.
    pub test_size: usize,
    /// Detector-fit total for the imbalance sweep; `None` picks the largest
    /// total that every law in the grid can draw from ID2.
    pub fit_total: Option<usize>,
    /// Seed for subsampling and imbalanced fit draws.
    pub seed: u64,
}

impl SweepSpec {
    /// All three detectors at default settings over a synthetic base.
    pub fn synthetic(axis: SweepAxis, base: SyntheticSpec, grid: Vec<AxisValue>) -> Self {
        let seed = base.seed;
        SweepSpec {
            axis,
            base: SweepBase::Synthetic(base),
            grid,
            detectors: Method::ALL
                .iter()
                .map(|&m| DetectorConfig::new(m))
                .collect(),
            test_size: DESK_TEST_SIZE,
            fit_total: None,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.detectors.is_empty() {
            return Err(Error::Config("a sweep needs at least one detector".into()));
        }
        for d in &self.detectors {
            d.validate()?;
        }
        if self.test_size == 0 {
            return Err(Error::Config("test size must be >= 1".into()));
        }
        let manifest = matches!(self.base, SweepBase::Manifest(_));
        if self.grid.is_empty() && !(manifest && self.axis == SweepAxis::DomainDistance) {
            return Err(Error::Config("the sweep grid is empty".into()));
        }
        match (&self.base, self.axis) {
            (SweepBase::Manifest(_), SweepAxis::Accuracy) => Err(Error::Config(
                "the accuracy sweep needs a synthetic base; label noise cannot be applied to dumps"
                    .into(),
            )),
            (SweepBase::Synthetic(spec), SweepAxis::Accuracy) => {
                spec.validate()?;
                for v in &self.grid {
                    SyntheticSpec {
                        label_noise: v.level()?,
                        ..spec.clone()
                    }
                    .validate()?;
                }
                Ok(())
            }
            (SweepBase::Synthetic(spec), SweepAxis::DomainDistance) => {
                spec.validate()?;
                for v in &self.grid {
                    let d = v.level()?;
                    if !(d >= 0.0 && d.is_finite()) {
                        return Err(Error::Config(format!("OOD distance must be >= 0, got {d}")));
                    }
                }
                Ok(())
            }
            (SweepBase::Manifest(_), SweepAxis::DomainDistance) => Ok(()),
            (base, SweepAxis::Imbalance) => {
                if let SweepBase::Synthetic(spec) = base {
                    spec.validate()?;
                }
                for v in &self.grid {
                    v.shape()?;
                }
                if self.fit_total == Some(0) {
                    return Err(Error::Config("fit total must be >= 1".into()));
                }
                Ok(())
            }
        }
    }
}
