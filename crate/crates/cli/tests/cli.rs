use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn oodgate(args: &[&str]) -> Output {
    oodgate_with(args, &[])
}

fn oodgate_with(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_oodgate"));
    cmd.args(args).env_remove("OODGATE_SEED");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn status(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn ok(args: &[&str]) -> Output {
    let out = oodgate(args);
    assert_eq!(status(&out), 0, "{args:?}: {}", stderr(&out));
    out
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn small_world(dir: &Path, extra: &[&str]) {
    let mut args = vec![
        "synth",
        "--classes",
        "5",
        "--dim",
        "8",
        "--law",
        "balanced:60",
        "--out",
        s(dir),
    ];
    args.extend_from_slice(extra);
    ok(&args);
}

#[test]
fn synth_writes_a_complete_manifest_and_is_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    small_world(&a, &["--seed", "7", "--ood-distance", "1,2"]);
    small_world(&b, &["--seed", "7", "--ood-distance", "1,2"]);
    let manifest = fs::read_to_string(a.join("manifest.tsv")).unwrap();
    for role in [
        "ID_TRAIN_CLASSIFIER",
        "ID_FIT_DETECTOR",
        "ID_TEST",
        "OOD_TEST(ood_d1)",
        "OOD_TEST(ood_d2)",
    ] {
        assert!(manifest.contains(role), "missing {role} in\n{manifest}");
    }
    for file in [
        "manifest.tsv",
        "world.json",
        "id_train.oodf",
        "id_fit.oodf",
        "id_test.oodf",
        "ood_d1.oodf",
        "ood_d2.oodf",
    ] {
        assert_eq!(
            fs::read(a.join(file)).unwrap(),
            fs::read(b.join(file)).unwrap(),
            "{file} differs"
        );
    }
    let world = json(&a.join("world.json"));
    let acc = world["classifier_accuracy"].as_f64().unwrap();
    assert!((0.2..=1.0).contains(&acc));
}

#[test]
fn seed_comes_from_the_environment_unless_given() {
    let tmp = tempfile::tempdir().unwrap();
    let p = |n: &str| tmp.path().join(n);
    let args = |dir: &Path| {
        vec![
            "synth",
            "--classes",
            "3",
            "--dim",
            "2",
            "--law",
            "balanced:10",
            "--out",
        ]
        .into_iter()
        .map(String::from)
        .chain([s(dir).to_string()])
        .collect::<Vec<_>>()
    };
    let run = |dir: &Path, extra: &[&str], env: &[(&str, &str)]| {
        let mut a = args(dir);
        a.extend(extra.iter().map(|x| x.to_string()));
        let refs: Vec<&str> = a.iter().map(String::as_str).collect();
        assert_eq!(status(&oodgate_with(&refs, env)), 0);
        fs::read(dir.join("id_test.oodf")).unwrap()
    };
    let env_seeded = run(&p("env"), &[], &[("OODGATE_SEED", "9")]);
    let flag_seeded = run(&p("flag"), &["--seed", "9"], &[]);
    let flag_wins = run(&p("both"), &["--seed", "9"], &[("OODGATE_SEED", "1")]);
    let default = run(&p("default"), &[], &[]);
    assert_eq!(env_seeded, flag_seeded);
    assert_eq!(flag_wins, flag_seeded);
    assert_ne!(default, flag_seeded);
    assert_eq!(json(&p("default/world.json"))["spec"]["seed"], 42);
}

#[test]
fn config_file_supplies_flags_and_the_command_line_wins() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("world.conf");
    fs::write(
        &cfg,
        "# small world\nclasses = 3\ndim = 2\nlaw = balanced:10\nseed = 5\n",
    )
    .unwrap();
    let out = tmp.path().join("w");
    ok(&[
        "synth",
        "--config",
        s(&cfg),
        "--seed",
        "6",
        "--out",
        s(&out),
    ]);
    let spec = &json(&out.join("world.json"))["spec"];
    assert_eq!(spec["classes"], 3);
    assert_eq!(spec["dim"], 2);
    assert_eq!(spec["seed"], 6);
}

#[test]
fn invalid_world_is_a_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    let out = oodgate(&["synth", "--classes", "1", "--out", s(tmp.path())]);
    assert_eq!(status(&out), 2);
    assert!(stderr(&out).contains("c >= 2"), "{}", stderr(&out));
    assert_eq!(status(&oodgate(&["sweep"])), 2);
}

#[test]
fn missing_input_is_an_io_error() {
    let tmp = tempfile::tempdir().unwrap();
    let out = oodgate(&[
        "score",
        "--method",
        "ebm",
        "--input",
        s(&tmp.path().join("absent.oodf")),
        "--out",
        s(&tmp.path().join("s.csv")),
    ]);
    assert_eq!(status(&out), 3, "{}", stderr(&out));
}

#[test]
fn singular_covariance_without_ridge_is_a_numerical_error() {
    let tmp = tempfile::tempdir().unwrap();
    let table = tmp.path().join("dup.csv");
    fs::write(&table, "label,f0,f1\n0,0,0\n0,2,2\n1,10,10\n1,12,12\n").unwrap();
    let model = tmp.path().join("m.oodm");
    let out = oodgate(&[
        "fit",
        "--method",
        "mah",
        "--input",
        s(&table),
        "--ridge",
        "0",
        "--out",
        s(&model),
    ]);
    assert_eq!(status(&out), 4, "{}", stderr(&out));
    ok(&[
        "fit",
        "--method",
        "mah",
        "--input",
        s(&table),
        "--out",
        s(&model),
    ]);
}

#[test]
fn logit_detectors_need_logits_and_mah_needs_matching_dims() {
    let tmp = tempfile::tempdir().unwrap();
    let plain = tmp.path().join("plain.csv");
    fs::write(&plain, "label,f0,f1\n0,0,1\n1,3,1\n0,1,0\n1,4,2\n").unwrap();
    let wide = tmp.path().join("wide.csv");
    fs::write(&wide, "label,f0,f1,f2\n,0,1,2\n").unwrap();
    let scores = tmp.path().join("s.csv");
    let out = oodgate(&[
        "score",
        "--method",
        "msp",
        "--input",
        s(&plain),
        "--out",
        s(&scores),
    ]);
    assert_eq!(status(&out), 2, "{}", stderr(&out));

    let model = tmp.path().join("m.oodm");
    ok(&["fit", "--input", s(&plain), "--out", s(&model)]);
    let out = oodgate(&[
        "score",
        "--method",
        "mah",
        "--input",
        s(&wide),
        "--model",
        s(&model),
        "--out",
        s(&scores),
    ]);
    assert_eq!(status(&out), 2, "{}", stderr(&out));
    let out = oodgate(&[
        "fit",
        "--method",
        "ebm",
        "--input",
        s(&plain),
        "--out",
        s(&model),
    ]);
    assert_eq!(status(&out), 2);
}

#[test]
fn eval_and_calibrate_on_hand_scores() {
    let tmp = tempfile::tempdir().unwrap();
    let (id, ood) = (tmp.path().join("id.csv"), tmp.path().join("ood.csv"));
    fs::write(&id, "index,score\n0,3\n1,2\n").unwrap();
    fs::write(&ood, "index,score\n0,1\n1,0\n").unwrap();
    let report = tmp.path().join("r.json");
    let svg = tmp.path().join("roc.svg");
    ok(&[
        "eval",
        "--id",
        s(&id),
        "--ood",
        s(&ood),
        "--criterion",
        "youden",
        "--out",
        s(&report),
        "--svg",
        s(&svg),
    ]);
    let r = json(&report);
    assert_eq!(r["auroc"], 1.0);
    assert_eq!(r["fpr95"], 0.0);
    assert!(fs::read_to_string(&svg).unwrap().starts_with("<svg"));

    let out = ok(&["calibrate", "--id", s(&id), "--ood", s(&ood)]);
    let c: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(c["threshold"], 2.0);
    assert_eq!(c["tpr"], 1.0);
    assert_eq!(c["fpr"], 0.0);
    assert_eq!(c["accuracy"], 1.0);
}

#[test]
fn mixed_methods_are_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let (id, ood) = (tmp.path().join("id.csv"), tmp.path().join("ood.csv"));
    fs::write(&id, "# method: EBM\nindex,score\n0,3\n").unwrap();
    fs::write(&ood, "# method: MSP\nindex,score\n0,1\n").unwrap();
    assert_eq!(
        status(&oodgate(&["eval", "--id", s(&id), "--ood", s(&ood)])),
        2
    );
}

#[test]
fn full_pipeline_report_has_every_field() {
    let tmp = tempfile::tempdir().unwrap();
    let p = |n: &str| tmp.path().join(n);
    small_world(&p("w"), &["--format", "csv"]);
    ok(&[
        "fit",
        "--manifest",
        s(&p("w/manifest.tsv")),
        "--out",
        s(&p("m.oodm")),
    ]);
    for method in ["msp", "ebm", "mah"] {
        for (table, side) in [("w/id_test.csv", "id"), ("w/ood_d1.csv", "ood")] {
            let out = p(&format!("{method}_{side}.csv"));
            ok(&[
                "score",
                "--method",
                method,
                "--input",
                s(&p(table)),
                "--model",
                s(&p("m.oodm")),
                "--out",
                s(&out),
            ]);
        }
        let report = p(&format!("{method}.json"));
        ok(&[
            "eval",
            "--id",
            s(&p(&format!("{method}_id.csv"))),
            "--ood",
            s(&p(&format!("{method}_ood.csv"))),
            "--out",
            s(&report),
        ]);
        let r = json(&report);
        for key in [
            "method",
            "auroc",
            "fpr95",
            "threshold",
            "n_id",
            "n_ood",
            "id_quartiles",
            "ood_quartiles",
            "tpr_at_threshold",
            "fpr_at_threshold",
            "accuracy_at_threshold",
        ] {
            assert!(r.get(key).is_some(), "{method} report lacks {key}: {r}");
        }
        assert_eq!(r["method"], method.to_uppercase());
    }
}

#[test]
fn sweep_without_timestamp_is_byte_stable() {
    let tmp = tempfile::tempdir().unwrap();
    let run = |dir: &str| {
        let out = tmp.path().join(dir);
        ok(&[
            "sweep",
            "--axis",
            "domain",
            "--grid",
            "0,2",
            "--classes",
            "4",
            "--dim",
            "4",
            "--law",
            "balanced:80",
            "--test-size",
            "50",
            "--no-timestamp",
            "--svg",
            "--out",
            s(&out),
        ]);
        out
    };
    let (a, b) = (run("a"), run("b"));
    for file in ["rows.jsonl", "summary.json", "chart.svg"] {
        assert_eq!(
            fs::read(a.join(file)).unwrap(),
            fs::read(b.join(file)).unwrap(),
            "{file} differs"
        );
    }
    let rows = fs::read_to_string(a.join("rows.jsonl")).unwrap();
    assert_eq!(rows.lines().count(), 6);
    let summary = json(&a.join("summary.json"));
    assert!(summary.get("generated_at").is_none());
    assert!(summary.get("provenance").is_some());
}
