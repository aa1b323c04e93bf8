//! Seeded synthetic ID/OOD worlds.

pub mod imbalance;
pub mod laws;
pub mod oracle;
pub mod world;

pub use imbalance::sample_imbalanced;
pub use laws::SampleLaw;
pub use oracle::{direct_mahalanobis_oracle, direct_pooled_covariance, pairwise_auroc_oracle};
pub use world::{
    class_means, generate_id_samples, generate_world, ood_name, KdeClassifier, SyntheticSpec,
    SyntheticWorld,
};
