//! Feature tables, their file formats, dataset manifests and ID splitting.

pub mod io;
pub mod manifest;
pub mod split;
pub mod table;

pub use io::{read_feature_table, write_feature_table, write_feature_table_as, TableFormat};
pub use manifest::{DatasetManifest, ManifestEntry, Role};
pub use split::{split_id_data, SplitPolicy};
pub use table::{classifier_accuracy, FeatureTable, Label};
