use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{stream, Stream};

/// Per-class sample-count law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum SampleLaw {
    /// Exactly `per_class` samples in every class.
    Balanced { per_class: usize },
    /// Class `k` (zero-based) weighted by `(k + 1)^-alpha`.
    PowerLaw { alpha: f64, total: usize },
    /// Independent `U(0, 1)` weight per class.
    Uniform { total: usize },
}

impl SampleLaw {
    /// Total sample count over `classes` classes.
    pub fn total(&self, classes: usize) -> usize {
        match *self {
            SampleLaw::Balanced { per_class } => per_class * classes,
            SampleLaw::PowerLaw { total, .. } | SampleLaw::Uniform { total } => total,
        }
    }

    pub fn validate(&self, classes: usize) -> Result<()> {
        match *self {
            SampleLaw::Balanced { per_class: 0 } => Err(Error::Config(
                "balanced law needs at least 1 per class".into(),
            )),
            SampleLaw::PowerLaw { alpha, .. } if !(alpha >= 0.0 && alpha.is_finite()) => Err(
                Error::Config(format!("power-law exponent must be >= 0, got {alpha}")),
            ),
            SampleLaw::PowerLaw { total, .. } | SampleLaw::Uniform { total } if total < classes => {
                Err(Error::Config(format!(
                    "total {total} cannot give every one of {classes} classes a sample"
                )))
            }
            _ => Ok(()),
        }
    }

    /// Class sizes for `classes` classes. Random laws draw from the
    /// `ClassSizes` stream of `seed`.
    ///
    /// Weighted laws reserve one sample per class and share the rest in
    /// proportion to the weights: floor, then the leftover goes one at a time
    /// to the largest fractional parts (lower class index on ties).
    pub fn class_sizes(&self, classes: usize, seed: u64) -> Result<Vec<usize>> {
        self.validate(classes)?;
        let sizes = match *self {
            SampleLaw::Balanced { per_class } => vec![per_class; classes],
            SampleLaw::PowerLaw { alpha, total } => {
                let weights: Vec<f64> = (0..classes)
                    .map(|k| ((k + 1) as f64).powf(-alpha))
                    .collect();
                apportion(total, &weights)
            }
            SampleLaw::Uniform { total } => {
                let mut rng = stream(seed, Stream::ClassSizes);
                let weights: Vec<f64> = (0..classes).map(|_| rng.random::<f64>()).collect();
                apportion(total, &weights)
            }
        };
        Ok(sizes)
    }
}

fn apportion(total: usize, weights: &[f64]) -> Vec<usize> {
    let c = weights.len();
    let rest = total - c;
    let sum: f64 = weights.iter().sum();
    let raw: Vec<f64> = if sum > 0.0 {
        weights.iter().map(|w| rest as f64 * w / sum).collect()
    } else {
        vec![rest as f64 / c as f64; c]
    };
    let mut sizes: Vec<usize> = raw.iter().map(|r| r.floor() as usize).collect();
    let assigned: usize = sizes.iter().sum();
    let mut order: Vec<usize> = (0..c).collect();
    order.sort_by(|&a, &b| {
        let fa = raw[a] - raw[a].floor();
        let fb = raw[b] - raw[b].floor();
        fb.partial_cmp(&fa).unwrap().then(a.cmp(&b))
    });
    for &k in order.iter().cycle().take(rest.saturating_sub(assigned)) {
        sizes[k] += 1;
    }
    sizes.iter_mut().for_each(|s| *s += 1);
    sizes
}

impl fmt::Display for SampleLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SampleLaw::Balanced { per_class } => write!(f, "balanced:{per_class}"),
            SampleLaw::PowerLaw { alpha, total } => write!(f, "powerlaw:{alpha}:{total}"),
            SampleLaw::Uniform { total } => write!(f, "uniform:{total}"),
        }
    }
}

/// `balanced:<per_class>`, `powerlaw:<alpha>:<total>` or `uniform:<total>`.
impl FromStr for SampleLaw {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || {
            Error::Config(format!(
                "invalid sample law `{s}` (balanced:N | powerlaw:ALPHA:TOTAL | uniform:TOTAL)"
            ))
        };
        let parts: Vec<&str> = s.trim().split(':').collect();
        let int = |v: &str| v.parse::<usize>().map_err(|_| bad());
        match parts.as_slice() {
            ["balanced", n] => Ok(SampleLaw::Balanced { per_class: int(n)? }),
            ["powerlaw", a, t] => Ok(SampleLaw::PowerLaw {
                alpha: a.parse().map_err(|_| bad())?,
                total: int(t)?,
            }),
            ["uniform", t] => Ok(SampleLaw::Uniform { total: int(t)? }),
            _ => Err(bad()),
        }
    }
}
