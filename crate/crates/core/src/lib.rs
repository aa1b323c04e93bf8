pub mod data;
pub mod detectors;
pub mod error;
pub mod experiments;
pub mod metrics;
pub mod rng;
pub mod scalar;
pub mod synthetic;

pub use error::{Error, Result};
pub use scalar::{Dtype, Scalar};

pub type FeatureTableF32 = data::FeatureTable<f32>;
pub type FeatureTableF64 = data::FeatureTable<f64>;
pub type ScoreSetF32 = detectors::ScoreSet<f32>;
pub type ScoreSetF64 = detectors::ScoreSet<f64>;
pub type GaussianClassModelF32 = detectors::GaussianClassModel<f32>;
pub type GaussianClassModelF64 = detectors::GaussianClassModel<f64>;
pub type RocCurveF32 = metrics::RocCurve<f32>;
pub type RocCurveF64 = metrics::RocCurve<f64>;
pub type SyntheticWorldF32 = synthetic::SyntheticWorld<f32>;
pub type SyntheticWorldF64 = synthetic::SyntheticWorld<f64>;
