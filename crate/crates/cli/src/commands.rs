use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use oodgate_core::data::io::write_feature_table_csv;
use oodgate_core::data::{
    read_feature_table, write_feature_table_as, DatasetManifest, FeatureTable, Role, TableFormat,
};
use oodgate_core::detectors::{
    fit_mahalanobis, read_model, read_scores_csv, write_model, write_scores_csv, DetectorConfig,
    Method,
};
use oodgate_core::experiments::{
    preset, run_sweep, AxisValue, SweepAxis, SweepBase, SweepSpec, IMBALANCE_PRESET,
};
use oodgate_core::metrics::{
    accuracy_at_threshold, calibrate_threshold, evaluate, roc_svg, Criterion,
};
use oodgate_core::synthetic::{generate_world, ood_name, SampleLaw, SyntheticSpec, SyntheticWorld};
use oodgate_core::{Dtype, Error, Result, Scalar};
use serde::Serialize;

use crate::{
    require_file, CalibrateArgs, Command, EvalArgs, FitArgs, OutputFormat, Precision, ScoreArgs,
    SweepArgs, SynthArgs, WorldArgs,
};

pub fn dispatch(command: &Command) -> Result<()> {
    match command {
        Command::Synth(a) => synth(a),
        Command::Fit(a) => match a.precision {
            Precision::F32 => fit::<f32>(a),
            Precision::F64 => fit::<f64>(a),
        },
        Command::Score(a) => match a.precision {
            Precision::F32 => score::<f32>(a),
            Precision::F64 => score::<f64>(a),
        },
        Command::Calibrate(a) => calibrate(a),
        Command::Eval(a) => eval(a),
        Command::Sweep(a) => match a.precision {
            Precision::F32 => sweep::<f32>(a),
            Precision::F64 => sweep::<f64>(a),
        },
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Writes to `path`, or to stdout when `None`.
fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => write_text(p, text),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Error::io("<stdout>", e)),
    }
}

fn pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("value serializes");
    s.push('\n');
    s
}

fn read_table<T: Scalar>(path: &Path) -> Result<FeatureTable<T>> {
    require_file(path)?;
    read_feature_table(path, TableFormat::from_path(path))
}

impl WorldArgs {
    pub fn to_spec(&self) -> Result<SyntheticSpec> {
        let spec = SyntheticSpec {
            classes: self.classes,
            dim: self.dim,
            class_separation: self.separation,
            within_class_sigma: self.sigma,
            label_noise: self.label_noise,
            ood_distance: *self
                .ood_distance
                .first()
                .ok_or_else(|| Error::Config("no OOD distance given".into()))?,
            kde_bandwidth: self.bandwidth,
            law: self.law.parse::<SampleLaw>()?,
            seed: self.seed,
        };
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Serialize)]
struct TableSummary {
    role: String,
    file: String,
    rows: usize,
}

#[derive(Serialize)]
struct WorldSummary {
    spec: SyntheticSpec,
    classifier_accuracy: f64,
    tables: Vec<TableSummary>,
}

fn synth(args: &SynthArgs) -> Result<()> {
    let spec = args.world.to_spec()?;
    let distances = &args.world.ood_distance;
    for (i, d) in distances.iter().enumerate() {
        if distances[..i].contains(d) {
            return Err(Error::Config(format!("OOD distance {d} is listed twice")));
        }
    }
    create_dir(&args.out)?;
    let mut world: SyntheticWorld<f64> = generate_world(&spec)?;
    for (j, &d) in distances.iter().enumerate().skip(1) {
        let cloud = world.ood_cloud(d, j as u32)?;
        world.ood.push((ood_name(d), cloud));
    }
    log::info!(
        "classifier accuracy on ID3: {:.4}",
        world.classifier_accuracy
    );

    let (ext, format) = match args.format {
        OutputFormat::Oodf => ("oodf", TableFormat::Binary),
        OutputFormat::Csv => ("csv", TableFormat::Csv),
    };
    let dtype = match args.dtype {
        Precision::F32 => Dtype::F32,
        Precision::F64 => Dtype::F64,
    };
    let mut tables: Vec<(Role, String, &FeatureTable<f64>)> = vec![
        (
            Role::IdTrainClassifier,
            format!("id_train.{ext}"),
            &world.id_train,
        ),
        (Role::IdFitDetector, format!("id_fit.{ext}"), &world.id_fit),
        (Role::IdTest, format!("id_test.{ext}"), &world.id_test),
    ];
    for (name, table) in &world.ood {
        tables.push((Role::OodTest(name.clone()), format!("{name}.{ext}"), table));
    }

    let mut manifest = DatasetManifest::new(format!("synthetic-seed{}", spec.seed));
    let mut summary = Vec::new();
    for (role, file, table) in &tables {
        let path = args.out.join(file);
        match format {
            TableFormat::Binary => write_feature_table_as(*table, &path, dtype)?,
            TableFormat::Csv => write_feature_table_csv(*table, &path)?,
        }
        manifest.push(role.clone(), format, PathBuf::from(file));
        summary.push(TableSummary {
            role: role.to_string(),
            file: file.clone(),
            rows: table.n(),
        });
    }
    manifest.write(&args.out.join("manifest.tsv"))?;
    let world_json = WorldSummary {
        spec,
        classifier_accuracy: world.classifier_accuracy,
        tables: summary,
    };
    write_text(&args.out.join("world.json"), &pretty(&world_json))
}

fn fit<T: Scalar>(args: &FitArgs) -> Result<()> {
    let method: Method = args.method.parse()?;
    if !method.needs_fit() {
        return Err(Error::Config(format!(
            "{method} has no fit step; score it directly"
        )));
    }
    DetectorConfig {
        ridge: args.ridge,
        ..DetectorConfig::new(method)
    }
    .validate()?;
    let table: FeatureTable<T> = match (&args.input, &args.manifest) {
        (Some(path), _) => read_table(path)?,
        (None, Some(path)) => {
            require_file(path)?;
            let manifest = DatasetManifest::load(path)?;
            let entry = manifest.single(&Role::IdFitDetector)?;
            require_file(&entry.path)?;
            manifest.read_table(entry)?
        }
        (None, None) => return Err(Error::Config("give --input or --manifest".into())),
    };
    let model = fit_mahalanobis(&table, args.ridge)?;
    log::info!(
        "fitted MAH on {} samples, {} classes, d = {}",
        table.n(),
        model.classes(),
        model.dim()
    );
    write_model(&model, &args.out)
}

fn score<T: Scalar>(args: &ScoreArgs) -> Result<()> {
    let method: Method = args.method.parse()?;
    let config = DetectorConfig {
        temperature: args.temperature,
        ..DetectorConfig::new(method)
    };
    config.validate()?;
    let model = match (method.needs_fit(), &args.model) {
        (true, Some(path)) => {
            require_file(path)?;
            Some(read_model::<T>(path)?)
        }
        (true, None) => {
            return Err(Error::Config(
                "MAH scoring needs --model from `oodgate fit`".into(),
            ))
        }
        (false, _) => None,
    };
    let table: FeatureTable<T> = read_table(&args.input)?;
    let scores = config.score(&table, model.as_ref())?;
    write_scores_csv(&scores, &args.out)
}

#[derive(Serialize)]
struct CalibrationReport {
    criterion: Criterion,
    threshold: f64,
    tpr: f64,
    fpr: f64,
    accuracy: f64,
    n_id: usize,
    n_ood: usize,
}

fn read_pair(
    id: &Path,
    ood: &Path,
) -> Result<(oodgate_core::ScoreSetF64, oodgate_core::ScoreSetF64)> {
    require_file(id)?;
    require_file(ood)?;
    let a = read_scores_csv::<f64>(id)?;
    let b = read_scores_csv::<f64>(ood)?;
    if let (Some(x), Some(y)) = (a.method(), b.method()) {
        if x != y {
            return Err(Error::Config(format!(
                "ID scores come from {x} but OOD scores from {y}"
            )));
        }
    }
    Ok((a, b))
}

fn calibrate(args: &CalibrateArgs) -> Result<()> {
    let criterion: Criterion = args.criterion.parse()?;
    let (id, ood) = read_pair(&args.id, &args.ood)?;
    let c = calibrate_threshold(&id, &ood, criterion)?;
    let report = CalibrationReport {
        criterion,
        threshold: c.threshold,
        tpr: c.tpr,
        fpr: c.fpr,
        accuracy: accuracy_at_threshold(&id, &ood, c.threshold),
        n_id: id.len(),
        n_ood: ood.len(),
    };
    emit(args.out.as_deref(), &pretty(&report))
}

fn eval(args: &EvalArgs) -> Result<()> {
    let criterion: Criterion = args.criterion.parse()?;
    let (id, ood) = read_pair(&args.id, &args.ood)?;
    let (report, curve) = evaluate(&id, &ood, criterion)?;
    if let Some(svg) = &args.svg {
        write_text(svg, &roc_svg(&curve, &report.method))?;
    }
    emit(args.out.as_deref(), &report.to_json())
}

fn default_grid(axis: SweepAxis, manifest: bool) -> Vec<String> {
    let grid: &[&str] = match (axis, manifest) {
        (SweepAxis::Accuracy, _) => &["0", "0.1", "0.2", "0.3", "0.5"],
        (SweepAxis::DomainDistance, false) => &["0", "0.5", "1", "2", "4"],
        (SweepAxis::DomainDistance, true) => &[],
        (SweepAxis::Imbalance, _) => &["balanced", "powerlaw:2", "uniform"],
    };
    grid.iter().map(|s| s.to_string()).collect()
}

fn sweep<T: Scalar>(args: &SweepArgs) -> Result<()> {
    let axis: SweepAxis = args.axis.parse()?;
    let base = match &args.manifest {
        Some(path) => {
            require_file(path)?;
            SweepBase::Manifest(path.clone())
        }
        None => SweepBase::Synthetic(args.world.to_spec()?),
    };
    let raw_grid = if args.grid.is_empty() {
        default_grid(axis, args.manifest.is_some())
    } else {
        args.grid.clone()
    };
    let grid = raw_grid
        .iter()
        .map(|v| AxisValue::parse_for(axis, v))
        .collect::<Result<Vec<_>>>()?;
    let detectors = args
        .detectors
        .iter()
        .map(|d| {
            Ok(DetectorConfig {
                method: d.parse()?,
                temperature: args.temperature,
                ridge: args.ridge,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let (mut test_size, mut fit_total) = (args.test_size, args.fit_total);
    if let Some(name) = &args.preset {
        let p = preset(name).ok_or_else(|| Error::Config(format!("unknown preset `{name}`")))?;
        if p.name == IMBALANCE_PRESET {
            fit_total = Some(p.size);
        } else {
            test_size = p.size;
        }
    }
    let spec = SweepSpec {
        axis,
        base,
        grid,
        detectors,
        test_size,
        fit_total,
        seed: args.world.seed,
    };
    spec.validate()?;
    create_dir(&args.out)?;
    let result = run_sweep::<T>(&spec)?;
    write_text(&args.out.join("rows.jsonl"), &result.to_jsonl())?;
    let stamp = (!args.no_timestamp)
        .then(|| humantime::format_rfc3339_seconds(std::time::SystemTime::now()).to_string());
    write_text(
        &args.out.join("summary.json"),
        &result.summary_json(stamp.as_deref()),
    )?;
    if args.svg {
        write_text(&args.out.join("chart.svg"), &result.chart_svg())?;
    }
    Ok(())
}
