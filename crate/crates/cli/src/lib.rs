//! `teachkit` command-line interface.
//!
//! Every command reads its inputs from and writes its outputs to well-known
//! file names under a storage root (`--root`, or `TEACHKIT_ROOT`), so the
//! stages chain without extra flags:
//!
//! ```text
//! gen-demos -> fit-extractor -> extract -> select-scenarios
//!   -> train-student -> gen-demos --policy student -> assess -> make-drills
//! ```

pub mod commands;
pub mod config;
pub mod error;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::Value;

pub use config::CliConfig;
pub use error::{CliError, Result};

#[derive(Debug, Parser)]
#[command(name = "teachkit", version, about = "Skill-based teaching pipeline and practice service")]
pub struct Cli {
    /// Storage root for every default input and output path.
    #[arg(long, env = "TEACHKIT_ROOT", default_value = "teachkit-data", global = true)]
    pub root: PathBuf,
    /// Seed for every random choice of the command.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Print a machine-readable JSON summary on stdout.
    #[arg(long, global = true)]
    pub json: bool,
    /// JSON file with defaults for the flags below.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum EnvName {
    Parking,
    Writing,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PolicyName {
    /// Scripted parking expert or exact gold-trace writer.
    Expert,
    /// Expert actions with seeded uniform noise.
    Noisy,
    /// A trained student checkpoint (parking only).
    Student,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Builtin,
    Import,
    TimeHeuristic,
}

/// Drill hyperparameters.
#[derive(Clone, Debug, Default, Args)]
pub struct DrillArgs {
    /// n-gram length.
    #[arg(long = "n")]
    pub n: Option<usize>,
    /// Repetitions of each n-gram in a drill.
    #[arg(long = "n-rep")]
    pub n_rep: Option<usize>,
    /// Number of target skills.
    #[arg(long = "n-target")]
    pub n_target: Option<usize>,
    /// Drills per target skill.
    #[arg(long = "n-drills")]
    pub n_drills: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Roll out a policy on sampled or given scenarios.
    GenDemos {
        #[arg(long, value_enum)]
        env: Option<EnvName>,
        /// Number of scenarios to sample.
        #[arg(long)]
        count: Option<usize>,
        #[arg(long, value_enum, default_value = "expert")]
        policy: PolicyName,
        /// Scenario file to roll out on instead of sampling.
        #[arg(long)]
        scenarios: Option<PathBuf>,
        /// Student checkpoint for `--policy student`.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// Noise scale for `--policy noisy`.
        #[arg(long)]
        noise: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit or import a skill extractor on expert demonstrations.
    FitExtractor {
        #[arg(long)]
        demos: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "builtin")]
        method: Method,
        #[arg(long)]
        latent_dim: Option<usize>,
        /// Segmentation labels; only with `--method import`.
        #[arg(long)]
        import_labels: Option<PathBuf>,
        /// Segments per demonstration; only with `--method time-heuristic`.
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Label demonstrations with a fitted extractor.
    Extract {
        #[arg(long)]
        demos: Option<PathBuf>,
        #[arg(long)]
        extractor: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Pick the scenario pool covering the most skills.
    SelectScenarios {
        #[arg(long)]
        demos: Option<PathBuf>,
        #[arg(long)]
        labels: Option<PathBuf>,
        #[arg(long)]
        pool_size: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Score per-skill expertise of student trajectories.
    Assess {
        #[arg(long)]
        scenarios: Option<PathBuf>,
        #[arg(long)]
        demos: Option<PathBuf>,
        #[arg(long)]
        labels: Option<PathBuf>,
        #[arg(long)]
        extractor: Option<PathBuf>,
        /// Student trajectories, one per scenario.
        #[arg(long)]
        students: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write one drill file per drill for the weakest skills.
    MakeDrills {
        #[arg(long)]
        expertise: Option<PathBuf>,
        #[arg(long)]
        demos: Option<PathBuf>,
        #[arg(long)]
        labels: Option<PathBuf>,
        #[arg(long)]
        extractor: Option<PathBuf>,
        #[command(flatten)]
        drill: DrillArgs,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Train a synthetic parking student by behavior cloning.
    TrainStudent {
        #[arg(long)]
        demos: Option<PathBuf>,
        /// `reversing` or `half-trained`.
        #[arg(long)]
        student: Option<String>,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the synthetic-student experiment over consecutive seeds.
    RunExperiment {
        #[arg(long, value_enum, default_value = "parking")]
        env: EnvName,
        #[arg(long)]
        student: Option<String>,
        /// Number of seeds, starting at `--seed`.
        #[arg(long)]
        runs: Option<usize>,
        /// Comma-separated settings to compare.
        #[arg(long, value_delimiter = ',')]
        settings: Vec<String>,
        #[command(flatten)]
        drill: DrillArgs,
        /// Segments per demonstration of the time-heuristic setting.
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Start the practice service.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        addr: String,
        /// Fixed tick in milliseconds; lockstep when omitted.
        #[arg(long)]
        tick_ms: Option<u64>,
    },
    /// Build a report from session logs or re-emit an experiment report.
    Report {
        /// Directory of session logs.
        #[arg(long, conflicts_with = "experiment")]
        sessions: Option<PathBuf>,
        /// Only this env's sessions.
        #[arg(long, value_enum, conflicts_with = "experiment")]
        env: Option<EnvName>,
        /// An experiment `report.json` to re-emit.
        #[arg(long)]
        experiment: Option<PathBuf>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::GenDemos { .. } => "gen-demos",
            Command::FitExtractor { .. } => "fit-extractor",
            Command::Extract { .. } => "extract",
            Command::SelectScenarios { .. } => "select-scenarios",
            Command::Assess { .. } => "assess",
            Command::MakeDrills { .. } => "make-drills",
            Command::TrainStudent { .. } => "train-student",
            Command::RunExperiment { .. } => "run-experiment",
            Command::Serve { .. } => "serve",
            Command::Report { .. } => "report",
        }
    }
}

/// What a command did.
#[derive(Clone, Debug, Serialize)]
pub struct Outcome {
    pub command: &'static str,
    pub message: String,
    pub files: Vec<PathBuf>,
    pub data: Value,
}

/// Resolved global options.
pub struct Ctx {
    pub root: PathBuf,
    pub seed: u64,
    pub config: CliConfig,
}

impl Ctx {
    pub fn path(&self, given: &Option<PathBuf>, default_name: &str) -> PathBuf {
        given.clone().unwrap_or_else(|| self.root.join(default_name))
    }
}

pub fn run(cli: Cli) -> Result<Outcome> {
    let config = match &cli.config {
        Some(p) => CliConfig::load(p)?,
        None => CliConfig::default(),
    };
    let ctx = Ctx {
        seed: cli.seed.or(config.seed).unwrap_or(0),
        root: cli.root,
        config,
    };
    let name = cli.command.name();
    let (message, files, data) = commands::dispatch(&ctx, cli.command)?;
    Ok(Outcome {
        command: name,
        message,
        files,
        data,
    })
}
