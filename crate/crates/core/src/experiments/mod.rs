//! Desk-scale sweeps along the accuracy, domain-distance and imbalance axes.
//!
//! Grid points run in parallel; rows always come back in grid order, then
//! detector order, so a result is a pure function of its [`SweepSpec`].

pub mod output;
pub mod presets;
pub mod run;
pub mod spec;

pub use presets::{
    describe_presets, preset, Preset, DESK_TEST_SIZE, HUMAN_FACE, IMAGENET, IMBALANCE_FIT_TOTAL,
    IMBALANCE_PRESET, NON_INSECTA, OOD_INSECT, PRESETS,
};
pub use run::{
    max_common_fit_total, run_accuracy_sweep, run_domain_shift_sweep, run_imbalance_sweep,
    run_sweep, Provenance, SweepResult, SweepRow,
};
pub use spec::{AxisValue, LawShape, SweepAxis, SweepBase, SweepSpec};
