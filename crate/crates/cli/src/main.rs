//! `molforest` command line: featurize molecules, train and evaluate
//! classifiers, compute Gram matrices, compare runs.
//!
//! Failures print one `error[<kind>]: <message>` line to stderr and exit
//! with 2 (config), 3 (input parse), 4 (training) or 1 (other I/O).

mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{EvaluateArgs, FeaturizeArgs, GramArgs, ReportArgs, TrainArgs, TtestArgs};
use config::RunConfig;
use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "molforest", version, about = "Molecular subgraph features and classifiers")]
struct Cli {
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// JSON experiment manifest; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Count subgraph features per molecule or pair.
    Featurize(FeaturizeArgs),
    /// Train one classifier on a whole feature file.
    Train(TrainArgs),
    /// Run k-fold or shuffle-split evaluation.
    Evaluate(EvaluateArgs),
    /// Write the kernel matrix of a feature file.
    Gram(GramArgs),
    /// Welch t-test between two metrics files.
    Ttest(TtestArgs),
    /// ROC points from saved predictions or a trained model.
    Report(ReportArgs),
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    let cfg = RunConfig::load(cli.config.as_deref())?;
    match &cli.command {
        Command::Featurize(a) => commands::featurize(a, &cfg),
        Command::Train(a) => commands::train(a, &cfg),
        Command::Evaluate(a) => commands::evaluate(a, &cfg),
        Command::Gram(a) => commands::gram(a, &cfg),
        Command::Ttest(a) => commands::ttest(a),
        Command::Report(a) => commands::report(a, &cfg),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.line());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
