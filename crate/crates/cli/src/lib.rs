//! The `oodgate` command line. Commands talk to each other only through
//! files: feature tables, model files, score CSVs and JSON reports.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{ArgAction, Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use oodgate_core::experiments::describe_presets;
use oodgate_core::{Error, Result};

pub mod commands;
pub mod config;

/// Exit statuses.
pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;

pub const SUBCOMMANDS: [&str; 6] = ["synth", "fit", "score", "calibrate", "eval", "sweep"];

#[derive(Debug, Parser)]
#[command(
    name = "oodgate",
    version,
    about = "Post-hoc OOD detection: MSP, energy and Mahalanobis detectors, ROC metrics and synthetic sweeps",
    after_help = after_help()
)]
pub struct Cli {
    /// More log output (-v info, -vv debug).
    #[arg(short, long, action = ArgAction::Count, global = true)]
    pub verbose: u8,

    /// Flat `key = value` file of flags for the subcommand; command-line flags win.
    #[arg(long, value_name = "FILE", global = true)]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

fn after_help() -> String {
    format!(
        "Exit status: 0 success, 2 usage or validation, 3 I/O, 4 numerical failure.\n\
         The seed defaults to 42 and can be set with OODGATE_SEED.\n\n\
         Reference-scale size presets (sweep --preset):\n{}",
        describe_presets()
    )
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic Gaussian-mixture world with ID splits, OOD clouds and a manifest.
    Synth(SynthArgs),
    /// Fit a detector that needs ID data (only MAH does).
    Fit(FitArgs),
    /// Score a feature table with a detector.
    Score(ScoreArgs),
    /// Pick an operating threshold from ID and OOD scores.
    Calibrate(CalibrateArgs),
    /// Full evaluation report (AUROC, FPR95, threshold, quartiles).
    Eval(EvalArgs),
    /// Run an accuracy, domain-distance or imbalance sweep.
    #[command(after_help = format!("Size presets:\n{}", describe_presets()))]
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Precision {
    F32,
    F64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Oodf,
    Csv,
}

#[derive(Debug, Clone, Args)]
pub struct WorldArgs {
    /// Number of ID classes.
    #[arg(long, default_value_t = 20)]
    pub classes: usize,
    /// Feature dimension.
    #[arg(long, default_value_t = 16)]
    pub dim: usize,
    /// Radius of the sphere holding the class means.
    #[arg(long, default_value_t = 4.0)]
    pub separation: f64,
    /// Within-class standard deviation.
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    /// Share of fit labels moved to wrong classes, at most 1 - 1/classes.
    #[arg(long, default_value_t = 0.0)]
    pub label_noise: f64,
    /// OOD shift in units of the separation; a list for synth, the first value elsewhere.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub ood_distance: Vec<f64>,
    /// Classifier kernel bandwidth in units of sigma.
    #[arg(long, default_value_t = 0.75)]
    pub bandwidth: f64,
    /// Per-class sample counts: balanced:N, powerlaw:ALPHA:TOTAL or uniform:TOTAL.
    #[arg(long, default_value = "balanced:700")]
    pub law: String,
    #[arg(long, env = "OODGATE_SEED", default_value_t = 42)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args)]
pub struct SynthArgs {
    #[command(flatten)]
    pub world: WorldArgs,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = OutputFormat::Oodf)]
    pub format: OutputFormat,
    /// Value type of binary tables.
    #[arg(long, value_enum, default_value_t = Precision::F32)]
    pub dtype: Precision,
}

#[derive(Debug, Clone, Args)]
pub struct FitArgs {
    #[arg(long, default_value = "mah")]
    pub method: String,
    /// Labeled ID2 feature table (.oodf or .csv).
    #[arg(
        long,
        required_unless_present = "manifest",
        conflicts_with = "manifest"
    )]
    pub input: Option<PathBuf>,
    /// Take the ID_FIT_DETECTOR entry of this manifest.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Relative covariance ridge.
    #[arg(long, default_value_t = 1e-6)]
    pub ridge: f64,
    /// Model file to write.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = Precision::F64)]
    pub precision: Precision,
}

#[derive(Debug, Clone, Args)]
pub struct ScoreArgs {
    /// msp, ebm (energy) or mah.
    #[arg(long)]
    pub method: String,
    /// Feature table to score.
    #[arg(long)]
    pub input: PathBuf,
    /// Model file from `fit`, required for mah.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Energy temperature.
    #[arg(long, default_value_t = 1.0)]
    pub temperature: f64,
    /// Score CSV to write.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = Precision::F64)]
    pub precision: Precision,
}

#[derive(Debug, Clone, Args)]
pub struct CalibrateArgs {
    /// ID score CSV.
    #[arg(long)]
    pub id: PathBuf,
    /// OOD score CSV.
    #[arg(long)]
    pub ood: PathBuf,
    /// youden or tpr:TARGET.
    #[arg(long, default_value = "youden")]
    pub criterion: String,
    /// JSON output; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct EvalArgs {
    /// ID score CSV.
    #[arg(long)]
    pub id: PathBuf,
    /// OOD score CSV.
    #[arg(long)]
    pub ood: PathBuf,
    /// youden or tpr:TARGET.
    #[arg(long, default_value = "youden")]
    pub criterion: String,
    /// Report JSON; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also draw the ROC curve as SVG.
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    /// accuracy, domain or imbalance.
    #[arg(long)]
    pub axis: String,
    /// Comma-separated grid: noise levels, OOD distances (or OOD names with
    /// --manifest) or law shapes (balanced, powerlaw:ALPHA, uniform).
    #[arg(long, value_delimiter = ',')]
    pub grid: Vec<String>,
    /// Comma-separated detectors.
    #[arg(long, value_delimiter = ',', default_value = "msp,ebm,mah")]
    pub detectors: Vec<String>,
    #[arg(long, default_value_t = 1.0)]
    pub temperature: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub ridge: f64,
    /// Use real feature dumps from this manifest instead of a synthetic world.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    #[command(flatten)]
    pub world: WorldArgs,
    /// Largest per-side test size.
    #[arg(long, default_value_t = oodgate_core::experiments::DESK_TEST_SIZE)]
    pub test_size: usize,
    /// Named size preset; sets --fit-total for balanced-fit and --test-size otherwise.
    #[arg(long)]
    pub preset: Option<String>,
    /// Detector-fit total for the imbalance axis (default: largest feasible).
    #[arg(long)]
    pub fit_total: Option<usize>,
    /// Output directory for rows.jsonl and summary.json.
    #[arg(long)]
    pub out: PathBuf,
    /// Also write chart.svg.
    #[arg(long)]
    pub svg: bool,
    /// Leave the timestamp out of summary.json.
    #[arg(long)]
    pub no_timestamp: bool,
    #[arg(long, value_enum, default_value_t = Precision::F64)]
    pub precision: Precision,
}

pub fn exit_code(error: &Error) -> i32 {
    match error {
        Error::Io { .. } => EXIT_IO,
        Error::Numerical(_) => EXIT_NUMERICAL,
        _ => EXIT_USAGE,
    }
}

fn init_logging(verbose: u8) {
    let level = match verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .try_init();
}

/// Parses `args` (program name first) and runs the command. Returns the
/// exit status.
pub fn run<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString>,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let args = match config::expand_config(args, &SUBCOMMANDS) {
        Ok(args) => args,
        Err(e) => return report(&e),
    };
    let matches = Cli::command()
        .mut_subcommands(|s| s.args_override_self(true))
        .try_get_matches_from(args);
    let cli = match matches.and_then(|m| Cli::from_arg_matches(&m)) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    init_logging(cli.verbose);
    match commands::dispatch(&cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => report(&e),
    }
}

fn report(error: &Error) -> i32 {
    let _ = writeln!(std::io::stderr(), "oodgate: {error}");
    exit_code(error)
}

/// Fails with an I/O error if `path` does not exist.
pub(crate) fn require_file(path: &Path) -> Result<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(Error::io(
            path,
            std::io::Error::new(std::io::ErrorKind::NotFound, "no such file"),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::Config("x".into())), EXIT_USAGE);
        assert_eq!(exit_code(&Error::DimensionMismatch("x".into())), EXIT_USAGE);
        assert_eq!(exit_code(&Error::Numerical("x".into())), EXIT_NUMERICAL);
        let io = Error::io(
            "f",
            std::io::Error::new(std::io::ErrorKind::NotFound, "gone"),
        );
        assert_eq!(exit_code(&io), EXIT_IO);
    }

    #[test]
    fn later_flags_override_earlier_ones() {
        let m = Cli::command()
            .mut_subcommands(|s| s.args_override_self(true))
            .try_get_matches_from([
                "oodgate", "synth", "--out", "a", "--seed", "7", "--seed", "9",
            ])
            .unwrap();
        let Command::Synth(args) = Cli::from_arg_matches(&m).unwrap().command else {
            panic!()
        };
        assert_eq!(args.world.seed, 9);
    }

    #[test]
    fn help_lists_presets() {
        let help = Cli::command().render_long_help().to_string();
        for size in ["74740", "3059", "56487", "9730", "58362"] {
            assert!(help.contains(size));
        }
    }
}
