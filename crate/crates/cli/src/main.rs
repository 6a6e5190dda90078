use std::path::PathBuf;
use std::process::ExitCode;

use aqgan::anomaly::ScoreOrientation;
use aqgan::experiment::{aggregate, replay, Experiment, ExperimentConfig, Manifest, ModeKind, Overrides, MANIFEST_FILE};
use aqgan::Error;
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "aqgan", version, about = "Quantum and classical GAN anomaly detection")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate surrogate SM, Higgs-like and Graviton-like events.
    Synth(RunArgs),
    /// Split the events and fit PCA + range normalization.
    Prep(RunArgs),
    /// Train the quantum GAN.
    TrainQgan(RunArgs),
    /// Train the classical GAN baseline.
    TrainGan(RunArgs),
    /// Score the test sets with every trained model.
    Score(RunArgs),
    /// ROC analysis and grid search over α.
    Evaluate(RunArgs),
    /// Effective dimension of parameter-matched generators.
    Effdim(RunArgs),
    /// synth (for synthetic data), prep, train-qgan, train-gan, score and evaluate.
    Run(RunArgs),
    /// Aggregate the reports of several run directories.
    Report {
        #[arg(long)]
        out: PathBuf,
        #[arg(required = true)]
        runs: Vec<PathBuf>,
    },
    /// Re-execute a recorded run into a new directory.
    Replay {
        /// A manifest file or a run directory containing one.
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Exact,
    Shots,
}

#[derive(Clone, Copy, ValueEnum)]
enum OrientationArg {
    AsWritten,
    Inverted,
}

#[derive(Args)]
struct RunArgs {
    /// TOML configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Number of PCA features (qubits).
    #[arg(long)]
    features: Option<usize>,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    #[arg(long)]
    shots: Option<u64>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long, value_enum)]
    score_orientation: Option<OrientationArg>,
    /// Run directory.
    #[arg(long)]
    out: PathBuf,
}

impl RunArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            seed: self.seed,
            features: self.features,
            mode: self.mode.map(|m| match m {
                ModeArg::Exact => ModeKind::Exact,
                ModeArg::Shots => ModeKind::Shots,
            }),
            shots: self.shots,
            epochs: self.epochs,
            orientation: self.score_orientation.map(|o| match o {
                OrientationArg::AsWritten => ScoreOrientation::AsWritten,
                OrientationArg::Inverted => ScoreOrientation::Inverted,
            }),
        }
    }

    /// No flags: reuse the directory's configuration. Otherwise flags are
    /// applied over the config file, or over the recorded configuration.
    fn open(&self) -> aqgan::Result<Experiment> {
        let overrides = self.overrides();
        if self.config.is_none() && overrides.is_empty() {
            return Experiment::open(&self.out, None);
        }
        let mut config = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None if self.out.join(MANIFEST_FILE).exists() => Manifest::load(&self.out)?.config,
            None => ExperimentConfig::default(),
        };
        config.apply(&overrides);
        config.validate()?;
        Experiment::open(&self.out, Some(config))
    }
}

fn print_report(exp: &Experiment) -> aqgan::Result<()> {
    let path = exp.dir().join("report.json");
    let file: aqgan::experiment::EvaluationFile = serde_json::from_str(&std::fs::read_to_string(path)?)?;
    for e in &file.entries {
        let r = &e.report;
        println!(
            "{:<5} {:<9} auc {:.4} (alpha {}) flipped {:.4} f1 {:.4} accuracy {:.4} precision {:.4}",
            e.model_kind.as_str(),
            e.anomaly_kind.as_str(),
            r.auc_max,
            r.alpha_max,
            r.best().auc_flipped,
            r.f1,
            r.accuracy,
            r.precision
        );
    }
    Ok(())
}

fn run(cli: Cli) -> aqgan::Result<()> {
    match cli.command {
        Command::Report { out, runs } => {
            let s = aggregate(&runs, &out)?;
            for r in &s.rows {
                println!(
                    "d={} {:<5} {:<9} auc {:.3} ± {:.3} over {} runs",
                    r.n_features,
                    r.model_kind.as_str(),
                    r.anomaly_kind.as_str(),
                    r.auc.mean,
                    r.auc.std,
                    r.n_seeds
                );
            }
            Ok(())
        }
        Command::Replay { manifest, out } => {
            let m = replay(&manifest, &out)?;
            println!("replayed {} commands into {}", m.commands.len(), out.display());
            Ok(())
        }
        Command::Synth(a) => a.open()?.synth(),
        Command::Prep(a) => a.open()?.prep(),
        Command::TrainQgan(a) => a.open()?.train_qgan(),
        Command::TrainGan(a) => a.open()?.train_gan(),
        Command::Score(a) => a.open()?.score(),
        Command::Evaluate(a) => {
            let mut exp = a.open()?;
            exp.evaluate()?;
            print_report(&exp)
        }
        Command::Effdim(a) => a.open()?.effdim(),
        Command::Run(a) => {
            let mut exp = a.open()?;
            exp.run_pipeline()?;
            print_report(&exp)
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InvalidConfig(_) | Error::TomlDe(_) | Error::TomlSer(_) | Error::KappaTooSmall(_) => 2,
        Error::InvalidProbability { .. } => 2,
        Error::MissingArtifact(_) => 3,
        Error::Divergence { .. } => 4,
        _ => 1,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            log::error!("{e}");
            if let Error::Divergence { history, .. } = &e {
                if let Some(last) = history.last() {
                    log::error!("last finite epoch {}: {:?}", last.epoch, last);
                }
            }
            ExitCode::from(exit_code(&e))
        }
    }
}
