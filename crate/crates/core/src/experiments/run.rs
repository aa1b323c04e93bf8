use std::path::Path;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::spec::{AxisValue, LawShape, SweepAxis, SweepBase, SweepSpec};
use crate::data::{classifier_accuracy, DatasetManifest, FeatureTable, Role};
use crate::detectors::{fit_mahalanobis, DetectorConfig, GaussianClassModel, Method};
use crate::error::{Error, Result};
use crate::metrics::{auroc, fpr_at_tpr, roc_curve, FPR95_TARGET};
use crate::rng::{stream, Stream};
use crate::scalar::Scalar;
use crate::synthetic::{
    generate_world, ood_name, sample_imbalanced, SampleLaw, SyntheticSpec, SyntheticWorld,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub axis: SweepAxis,
    pub value: AxisValue,
    pub method: Method,
    pub classifier_accuracy: Option<f64>,
    pub auroc: f64,
    pub fpr95: f64,
    pub n_id: usize,
    pub n_ood: usize,
}

/// Everything needed to rerun a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub spec: SweepSpec,
    /// Seed of the synthetic world, if any.
    pub world_seed: Option<u64>,
    /// Detector-fit total used by the imbalance sweep.
    pub fit_total: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub provenance: Provenance,
    /// Grid order, then detector order.
    pub rows: Vec<SweepRow>,
}

pub fn run_sweep<T: Scalar>(spec: &SweepSpec) -> Result<SweepResult> {
    match spec.axis {
        SweepAxis::Accuracy => run_accuracy_sweep::<T>(spec),
        SweepAxis::DomainDistance => run_domain_shift_sweep::<T>(spec),
        SweepAxis::Imbalance => run_imbalance_sweep::<T>(spec),
    }
}

fn expect_axis(spec: &SweepSpec, axis: SweepAxis) -> Result<()> {
    if spec.axis != axis {
        return Err(Error::Config(format!(
            "expected a {axis} sweep, got {}",
            spec.axis
        )));
    }
    spec.validate()
}

fn world_seed(spec: &SweepSpec) -> Option<u64> {
    match &spec.base {
        SweepBase::Synthetic(s) => Some(s.seed),
        SweepBase::Manifest(_) => None,
    }
}

fn needs_model(detectors: &[DetectorConfig]) -> Option<f64> {
    detectors
        .iter()
        .find(|d| d.method == Method::Mahalanobis)
        .map(|d| d.ridge)
}

/// Random `m`-row subset in original row order.
fn subsample<T: Scalar, R: rand::Rng>(
    table: &FeatureTable<T>,
    m: usize,
    rng: &mut R,
) -> Result<FeatureTable<T>> {
    if m >= table.n() {
        return Ok(table.clone());
    }
    let mut idx: Vec<usize> = (0..table.n()).collect();
    idx.shuffle(rng);
    idx.truncate(m);
    idx.sort_unstable();
    table.select(&idx)
}

/// Subsamples ID and every OOD table to one common size, capped at
/// `cap`.
fn match_sizes<T: Scalar>(
    id: &FeatureTable<T>,
    oods: &[&FeatureTable<T>],
    cap: usize,
    seed: u64,
) -> Result<(FeatureTable<T>, Vec<FeatureTable<T>>)> {
    let m = oods.iter().map(|t| t.n()).fold(id.n().min(cap), usize::min);
    let mut rng = stream(seed, Stream::Subsample);
    let id = subsample(id, m, &mut rng)?;
    let oods = oods
        .iter()
        .map(|t| subsample(t, m, &mut rng))
        .collect::<Result<_>>()?;
    Ok((id, oods))
}

fn score_pair<T: Scalar>(
    detector: &DetectorConfig,
    model: Option<&GaussianClassModel<T>>,
    id: &FeatureTable<T>,
    ood: &FeatureTable<T>,
) -> Result<(f64, f64)> {
    let a = detector.score(id, model)?;
    let b = detector.score(ood, model)?;
    let curve = roc_curve(&a, &b)?;
    Ok((auroc(&curve), fpr_at_tpr(&curve, FPR95_TARGET)))
}

/// One row per detector for an ID/OOD pair.
fn evaluate_all<T: Scalar>(
    spec: &SweepSpec,
    value: &AxisValue,
    accuracy: Option<f64>,
    model: Option<&GaussianClassModel<T>>,
    id: &FeatureTable<T>,
    ood: &FeatureTable<T>,
) -> Result<Vec<SweepRow>> {
    spec.detectors
        .iter()
        .map(|detector| {
            let (auroc, fpr95) = score_pair(detector, model, id, ood)?;
            Ok(SweepRow {
                axis: spec.axis,
                value: value.clone(),
                method: detector.method,
                classifier_accuracy: accuracy,
                auroc,
                fpr95,
                n_id: id.n(),
                n_ood: ood.n(),
            })
        })
        .collect()
}

fn fit_if_needed<T: Scalar>(
    spec: &SweepSpec,
    fit: &FeatureTable<T>,
) -> Result<Option<GaussianClassModel<T>>> {
    needs_model(&spec.detectors)
        .map(|ridge| fit_mahalanobis(fit, ridge))
        .transpose()
}

fn finish(spec: &SweepSpec, fit_total: Option<usize>, rows: Vec<Vec<SweepRow>>) -> SweepResult {
    SweepResult {
        provenance: Provenance {
            spec: spec.clone(),
            world_seed: world_seed(spec),
            fit_total,
        },
        rows: rows.into_iter().flatten().collect(),
    }
}

/// One world per label-noise level. MAH is fitted on that world's noisy
/// ID2; ID3 and the world's OOD cloud are size-matched.
pub fn run_accuracy_sweep<T: Scalar>(spec: &SweepSpec) -> Result<SweepResult> {
    expect_axis(spec, SweepAxis::Accuracy)?;
    let SweepBase::Synthetic(base) = &spec.base else {
        unreachable!("validated: accuracy sweeps are synthetic")
    };
    let rows = spec
        .grid
        .par_iter()
        .map(|value| {
            let world: SyntheticWorld<T> = generate_world(&SyntheticSpec {
                label_noise: value.level()?,
                ..base.clone()
            })?;
            log::info!(
                "label noise {value}: classifier accuracy {:.4}",
                world.classifier_accuracy
            );
            let model = fit_if_needed(spec, &world.id_fit)?;
            let (id, oods) = match_sizes(
                &world.id_test,
                &[&world.ood[0].1],
                spec.test_size,
                spec.seed,
            )?;
            evaluate_all(
                spec,
                value,
                Some(world.classifier_accuracy),
                model.as_ref(),
                &id,
                &oods[0],
            )
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(finish(spec, None, rows))
}

/// One world, one OOD set per grid value, all size-matched to the
/// smallest. A synthetic grid holds OOD distances; a manifest grid holds
/// OOD entry names (empty means all of them).
pub fn run_domain_shift_sweep<T: Scalar>(spec: &SweepSpec) -> Result<SweepResult> {
    expect_axis(spec, SweepAxis::DomainDistance)?;
    let (fit, test, oods, grid, accuracy) = match &spec.base {
        SweepBase::Synthetic(base) => {
            let world: SyntheticWorld<T> = generate_world(base)?;
            let oods = spec
                .grid
                .par_iter()
                .enumerate()
                .map(|(j, v)| world.ood_cloud(v.level()?, j as u32 + 1))
                .collect::<Result<Vec<_>>>()?;
            (
                world.id_fit,
                world.id_test,
                oods,
                spec.grid.clone(),
                Some(world.classifier_accuracy),
            )
        }
        SweepBase::Manifest(path) => {
            let (manifest, fit, test) = load_manifest::<T>(path, spec)?;
            let available = manifest.ood_entries();
            let names: Vec<String> = if spec.grid.is_empty() {
                available.iter().map(|(n, _)| n.to_string()).collect()
            } else {
                spec.grid.iter().map(|v| v.to_string()).collect()
            };
            if names.is_empty() {
                return Err(Error::Config(format!(
                    "manifest {} has no OOD_TEST entries",
                    path.display()
                )));
            }
            let oods = names
                .iter()
                .map(|name| {
                    let entry = available.iter().find(|(n, _)| n == name).ok_or_else(|| {
                        Error::Config(format!(
                            "manifest {} has no OOD_TEST({name}) entry",
                            path.display()
                        ))
                    })?;
                    manifest.read_table::<T>(entry.1)
                })
                .collect::<Result<Vec<_>>>()?;
            let accuracy = classifier_accuracy(&test);
            (
                fit,
                test,
                oods,
                names.into_iter().map(AxisValue::Name).collect(),
                accuracy,
            )
        }
    };
    let model = fit_if_needed(spec, &fit)?;
    let refs: Vec<&FeatureTable<T>> = oods.iter().collect();
    let (id, oods) = match_sizes(&test, &refs, spec.test_size, spec.seed)?;
    let rows = grid
        .par_iter()
        .zip(&oods)
        .map(|(value, ood)| evaluate_all(spec, value, accuracy, model.as_ref(), &id, ood))
        .collect::<Result<Vec<_>>>()?;
    Ok(finish(spec, None, rows))
}

/// Reads the manifest plus its ID2 (empty when no detector needs fitting)
/// and ID3 tables.
fn load_manifest<T: Scalar>(
    path: &Path,
    spec: &SweepSpec,
) -> Result<(DatasetManifest, FeatureTable<T>, FeatureTable<T>)> {
    let manifest = DatasetManifest::load(path)?;
    manifest.validate(false)?;
    let test = manifest.read_table::<T>(manifest.single(&Role::IdTest)?)?;
    let fit = if needs_model(&spec.detectors).is_some() || spec.axis == SweepAxis::Imbalance {
        manifest.read_table::<T>(manifest.single(&Role::IdFitDetector)?)?
    } else {
        test.clone()
    };
    Ok((manifest, fit, test))
}

/// The largest multiple of `classes` that every shape can draw from a fit
/// split with `available` samples per class.
pub fn max_common_fit_total(shapes: &[LawShape], available: &[usize], seed: u64) -> Result<usize> {
    let c = available.len();
    let feasible = |total: usize| -> Result<bool> {
        for shape in shapes {
            let sizes = shape.with_total(total, c)?.class_sizes(c, seed)?;
            if sizes.iter().zip(available).any(|(want, have)| want > have) {
                return Ok(false);
            }
        }
        Ok(true)
    };
    let mut total = available.iter().sum::<usize>() / c * c;
    while total >= c {
        if feasible(total)? {
            return Ok(total);
        }
        total -= c;
    }
    Err(Error::Config(format!(
        "no common fit total lets every law draw from the detector-fit split (class sizes {available:?})"
    )))
}

/// MAH is refitted on an imbalanced draw from ID2 for every law, all with
/// the same total. MSP and EBM depend only on the classifier, so their rows
/// repeat across laws.
pub fn run_imbalance_sweep<T: Scalar>(spec: &SweepSpec) -> Result<SweepResult> {
    expect_axis(spec, SweepAxis::Imbalance)?;
    let (fit, test, ood, accuracy) = match &spec.base {
        SweepBase::Synthetic(base) => {
            let world: SyntheticWorld<T> = generate_world(base)?;
            let ood = world
                .ood_table(&ood_name(base.ood_distance))
                .expect("first OOD cloud")
                .clone();
            (
                world.id_fit,
                world.id_test,
                ood,
                Some(world.classifier_accuracy),
            )
        }
        SweepBase::Manifest(path) => {
            let (manifest, fit, test) = load_manifest::<T>(path, spec)?;
            let oods = manifest.ood_entries();
            let (name, entry) = oods.first().ok_or_else(|| {
                Error::Config(format!(
                    "manifest {} has no OOD_TEST entries",
                    path.display()
                ))
            })?;
            if oods.len() > 1 {
                log::info!("imbalance sweep uses the first OOD set, {name}");
            }
            let ood = manifest.read_table::<T>(entry)?;
            let accuracy = classifier_accuracy(&test);
            (fit, test, ood, accuracy)
        }
    };
    let c = fit.num_classes();
    let shapes: Vec<LawShape> = spec
        .grid
        .iter()
        .map(AxisValue::shape)
        .collect::<Result<_>>()?;
    let total = match spec.fit_total {
        Some(t) => t,
        None => max_common_fit_total(&shapes, &fit.class_counts(), spec.seed)?,
    };
    log::info!("imbalance sweep: {total} detector-fit samples per law over {c} classes");
    let laws: Vec<SampleLaw> = shapes
        .iter()
        .map(|s| s.with_total(total, c))
        .collect::<Result<_>>()?;
    let (id, oods) = match_sizes(&test, &[&ood], spec.test_size, spec.seed)?;
    let ood = &oods[0];

    // classifier-only detectors are scored once
    let fixed: Vec<Option<(f64, f64)>> = spec
        .detectors
        .iter()
        .map(|d| {
            if d.method.needs_fit() {
                Ok(None)
            } else {
                score_pair::<T>(d, None, &id, ood).map(Some)
            }
        })
        .collect::<Result<_>>()?;

    let rows = spec
        .grid
        .par_iter()
        .zip(&laws)
        .map(|(value, law)| {
            let fit_sample = sample_imbalanced(&fit, law, spec.seed)?;
            spec.detectors
                .iter()
                .zip(&fixed)
                .map(|(detector, fixed)| {
                    let (auroc, fpr95) = match fixed {
                        Some(pair) => *pair,
                        None => score_pair(
                            detector,
                            Some(&fit_mahalanobis(&fit_sample, detector.ridge)?),
                            &id,
                            ood,
                        )?,
                    };
                    Ok(SweepRow {
                        axis: spec.axis,
                        value: value.clone(),
                        method: detector.method,
                        classifier_accuracy: accuracy,
                        auroc,
                        fpr95,
                        n_id: id.n(),
                        n_ood: ood.n(),
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(finish(spec, Some(total), rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SyntheticSpec {
        SyntheticSpec {
            classes: 4,
            dim: 4,
            law: SampleLaw::Balanced { per_class: 60 },
            seed: 9,
            ..SyntheticSpec::default()
        }
    }

    fn one(method: Method) -> Vec<DetectorConfig> {
        vec![DetectorConfig::new(method)]
    }

    #[test]
    fn accuracy_sweep_shape() {
        let spec = SweepSpec {
            detectors: one(Method::Energy),
            ..SweepSpec::synthetic(SweepAxis::Accuracy, small(), vec![AxisValue::Level(0.2)])
        };
        let result = run_accuracy_sweep::<f64>(&spec).unwrap();
        assert_eq!(result.rows.len(), 1);
        let r = &result.rows[0];
        assert_eq!(r.n_id, r.n_ood);
        assert!(r.classifier_accuracy.is_some());
    }

    #[test]
    fn domain_sweep_three_detectors() {
        let spec = SweepSpec::synthetic(
            SweepAxis::DomainDistance,
            small(),
            vec![AxisValue::Level(2.0)],
        );
        let result = run_domain_shift_sweep::<f64>(&spec).unwrap();
        let methods: Vec<Method> = result.rows.iter().map(|r| r.method).collect();
        assert_eq!(methods, Method::ALL.to_vec());
        for r in &result.rows {
            assert_eq!(r.n_id, r.n_ood);
            if r.auroc == 1.0 {
                assert_eq!(r.fpr95, 0.0);
            }
        }
    }

    #[test]
    fn imbalance_sweep_nine_rows() {
        let grid = ["balanced", "powerlaw:2", "uniform"]
            .iter()
            .map(|s| AxisValue::Name(s.to_string()))
            .collect();
        let spec = SweepSpec::synthetic(SweepAxis::Imbalance, small(), grid);
        let result = run_imbalance_sweep::<f64>(&spec).unwrap();
        assert_eq!(result.rows.len(), 9);
        let total = result.provenance.fit_total.unwrap();
        assert_eq!(total % 4, 0);
        for m in [Method::Msp, Method::Energy] {
            let rows: Vec<_> = result
                .rows
                .iter()
                .filter(|r| r.method == m)
                .map(|r| (r.auroc, r.fpr95))
                .collect();
            assert!(rows.windows(2).all(|w| w[0] == w[1]));
        }
    }

    #[test]
    fn sweeps_are_deterministic() {
        let spec = SweepSpec::synthetic(
            SweepAxis::Accuracy,
            small(),
            vec![AxisValue::Level(0.0), AxisValue::Level(0.5)],
        );
        let a = run_sweep::<f32>(&spec).unwrap();
        let b = run_sweep::<f32>(&spec).unwrap();
        assert_eq!(a.to_jsonl(), b.to_jsonl());
        assert_eq!(a.summary_json(None), b.summary_json(None));
        assert_eq!(a.rows.len(), 6);
        assert!(a
            .summary_json(Some("t"))
            .contains("\"generated_at\": \"t\""));
        assert!(a.chart_svg().contains("<polyline"));
    }

    #[test]
    fn common_total_respects_availability() {
        let shapes = [LawShape::Balanced, LawShape::PowerLaw { alpha: 2.0 }];
        let total = max_common_fit_total(&shapes, &[10, 10, 10], 0).unwrap();
        assert_eq!(total % 3, 0);
        let sizes = SampleLaw::PowerLaw { alpha: 2.0, total }
            .class_sizes(3, 0)
            .unwrap();
        assert!(sizes[0] <= 10);
        let next = SampleLaw::PowerLaw {
            alpha: 2.0,
            total: total + 3,
        }
        .class_sizes(3, 0)
        .unwrap();
        assert!(next[0] > 10);
    }

    #[test]
    fn wrong_axis_is_rejected() {
        let spec = SweepSpec::synthetic(SweepAxis::Accuracy, small(), vec![AxisValue::Level(0.0)]);
        assert!(run_imbalance_sweep::<f64>(&spec).is_err());
    }
}
