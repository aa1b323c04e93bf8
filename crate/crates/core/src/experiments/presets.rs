//! Reference-scale dataset sizes, kept as named presets for users with real
//! feature dumps. Desk-scale sweeps default to [`DESK_TEST_SIZE`].

/// Per-side test size used when no preset is chosen.
pub const DESK_TEST_SIZE: usize = 2_000;

/// Near-OOD set excluded from the ID taxon; also the per-side size of the
/// accuracy sweep.
pub const NON_INSECTA: usize = 74_740;
/// Smallest OOD set; the per-side size of the domain sweep.
pub const HUMAN_FACE: usize = 3_059;
/// Insects outside the ID classes.
pub const OOD_INSECT: usize = 56_487;
/// Ten images per non-insect ImageNet class.
pub const IMAGENET: usize = 9_730;
/// Classes of the ID classifier.
pub const ID_CLASSES: usize = 142;
/// Images per class in the balanced detector-fit subset.
pub const BALANCED_PER_CLASS: usize = 411;
/// Images in every detector-fit subset of the imbalance study.
pub const IMBALANCE_FIT_TOTAL: usize = BALANCED_PER_CLASS * ID_CLASSES;

/// Name of the preset that sets the imbalance fit total.
pub const IMBALANCE_PRESET: &str = "balanced-fit";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Preset {
    pub name: &'static str,
    pub size: usize,
    pub about: &'static str,
}

pub const PRESETS: [Preset; 5] = [
    Preset {
        name: "non-insecta",
        size: NON_INSECTA,
        about: "near OOD, accuracy-sweep test size",
    },
    Preset {
        name: "human-face",
        size: HUMAN_FACE,
        about: "far OOD, domain-sweep test size",
    },
    Preset {
        name: "ood-insect",
        size: OOD_INSECT,
        about: "near OOD insects",
    },
    Preset {
        name: "imagenet",
        size: IMAGENET,
        about: "far OOD",
    },
    Preset {
        name: IMBALANCE_PRESET,
        size: IMBALANCE_FIT_TOTAL,
        about: "imbalance-study fit total, 411 x 142",
    },
];

pub fn preset(name: &str) -> Option<Preset> {
    PRESETS.iter().copied().find(|p| p.name == name)
}

/// One line per preset, for help text.
pub fn describe_presets() -> String {
    PRESETS
        .iter()
        .map(|p| format!("{:<13} {:>6}  {}", p.name, p.size, p.about))
        .collect::<Vec<_>>()
        .join("\n")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants() {
        assert_eq!(IMBALANCE_FIT_TOTAL, 58_362);
        assert_eq!(preset("human-face").unwrap().size, 3_059);
        assert!(preset("cifar").is_none());
        let text = describe_presets();
        for size in ["74740", "3059", "56487", "9730", "58362"] {
            assert!(text.contains(size), "{size} missing from {text}");
        }
    }
}
