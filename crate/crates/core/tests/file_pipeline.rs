use oodgate_core::data::{
    read_feature_table, write_feature_table_as, DatasetManifest, Role, TableFormat,
};
use oodgate_core::detectors::{
    fit_mahalanobis, read_model, read_scores_csv, write_model, write_scores_csv, DetectorConfig,
    Method,
};
use oodgate_core::metrics::{auroc, evaluate, roc_curve, Criterion};
use oodgate_core::synthetic::{
    generate_world, pairwise_auroc_oracle, SampleLaw, SyntheticSpec, SyntheticWorld,
};
use oodgate_core::{Dtype, FeatureTableF64, ScoreSetF64};
use proptest::prelude::*;

#[test]
fn tables_models_and_scores_survive_files() {
    let dir = tempfile::tempdir().unwrap();
    let spec = SyntheticSpec {
        classes: 4,
        dim: 5,
        law: SampleLaw::Balanced { per_class: 50 },
        ..SyntheticSpec::default()
    };
    let world: SyntheticWorld<f64> = generate_world(&spec).unwrap();

    let mut manifest = DatasetManifest::new("roundtrip");
    for (role, name, table) in [
        (Role::IdFitDetector, "fit.oodf", &world.id_fit),
        (Role::IdTest, "test.oodf", &world.id_test),
        (Role::OodTest("far".into()), "far.oodf", &world.ood[0].1),
    ] {
        write_feature_table_as(table, &dir.path().join(name), Dtype::F64).unwrap();
        manifest.push(role, TableFormat::Binary, name);
    }
    let path = dir.path().join("manifest.tsv");
    manifest.write(&path).unwrap();
    let loaded = DatasetManifest::load(&path).unwrap();
    loaded.validate(true).unwrap();
    let fit: FeatureTableF64 = loaded
        .read_table(loaded.single(&Role::IdFitDetector).unwrap())
        .unwrap();
    assert_eq!(fit, world.id_fit);

    let model = fit_mahalanobis(&fit, 1e-6).unwrap();
    let model_path = dir.path().join("m.oodm");
    write_model(&model, &model_path).unwrap();
    let reloaded = read_model::<f64>(&model_path).unwrap();
    assert_eq!(reloaded.covariance(), model.covariance());

    let detector = DetectorConfig::new(Method::Mahalanobis);
    let id = detector.score(&world.id_test, Some(&reloaded)).unwrap();
    let ood = detector.score(&world.ood[0].1, Some(&model)).unwrap();
    assert_eq!(id, detector.score(&world.id_test, Some(&model)).unwrap());
    let scores_path = dir.path().join("id.csv");
    write_scores_csv(&id, &scores_path).unwrap();
    let back: ScoreSetF64 = read_scores_csv(&scores_path).unwrap();
    assert_eq!(back, id);

    let (report, _) = evaluate(&back, &ood, Criterion::Youden).unwrap();
    assert_eq!(report.method, "MAH");
    assert_eq!(report.auroc, pairwise_auroc_oracle(&back, &ood).unwrap());
}

#[test]
fn f32_tables_read_back_as_f64() {
    let dir = tempfile::tempdir().unwrap();
    let spec = SyntheticSpec {
        classes: 2,
        dim: 3,
        law: SampleLaw::Balanced { per_class: 10 },
        ..SyntheticSpec::default()
    };
    let world: SyntheticWorld<f32> = generate_world(&spec).unwrap();
    let path = dir.path().join("t.oodf");
    write_feature_table_as(&world.id_train, &path, Dtype::F32).unwrap();
    let wide: FeatureTableF64 = read_feature_table(&path, TableFormat::Binary).unwrap();
    assert_eq!(wide.cast::<f32>(), world.id_train);
}

fn scores() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(
        prop_oneof![(-5i32..5).prop_map(f64::from), -5.0f64..5.0],
        1..60,
    )
}

proptest! {
    #[test]
    fn auroc_matches_pairwise_oracle(id in scores(), ood in scores()) {
        let (a, b) = (ScoreSetF64::new(None, id).unwrap(), ScoreSetF64::new(None, ood).unwrap());
        let fast = auroc(&roc_curve(&a, &b).unwrap());
        prop_assert!((fast - pairwise_auroc_oracle(&a, &b).unwrap()).abs() <= 1e-12);
        let swapped = auroc(&roc_curve(&b, &a).unwrap());
        prop_assert!((fast + swapped - 1.0).abs() <= 1e-12);
    }
}
