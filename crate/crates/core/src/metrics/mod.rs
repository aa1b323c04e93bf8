//! ROC analysis with ID as the positive class: AUROC, FPR at a TPR target,
//! threshold calibration and box-plot summaries.

mod report;
mod roc;
mod summary;
mod svg;
mod threshold;

pub use report::{evaluate, EvalReport, FPR95_TARGET};
pub use roc::{auroc, fpr_at_tpr, roc_curve, RocCurve};
pub use summary::{five_number_summary, quantile_sorted, FiveNumber};
pub(crate) use svg::escape as svg_escape;
pub use svg::roc_svg;
pub use threshold::{accuracy_at_threshold, calibrate_threshold, Calibration, Criterion};
