use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use thinfilm_cli::{run_experiment, ExperimentConfig, ExperimentKind};

#[derive(Parser)]
#[command(name = "thinfilm", version, about = "Thin-film equation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a periodic steady state and write its manifest and profile.
    Steady(Common),
    /// Evolve perturbed initial data and classify the outcome.
    Evolve(Common),
    /// Run an evolution for every exponent in `n_list`.
    Sweep(Common),
    /// Tabulate a bifurcation branch.
    Bifurcation(Common),
    /// Recompute diagnostics from an existing run directory.
    Analyze(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Overrides `output.dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the top-level `seed`.
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, common) = match cli.command {
        Command::Steady(c) => (ExperimentKind::Steady, c),
        Command::Evolve(c) => (ExperimentKind::Evolve, c),
        Command::Sweep(c) => (ExperimentKind::Sweep, c),
        Command::Bifurcation(c) => (ExperimentKind::Bifurcation, c),
        Command::Analyze(c) => (ExperimentKind::Analyze, c),
    };
    let mut cfg = match ExperimentConfig::load(&common.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if let Some(k) = cfg.kind {
        if k != kind {
            eprintln!("error: config kind `{}` does not match subcommand `{}`", k.name(), kind.name());
            return ExitCode::from(2);
        }
    }
    cfg.kind = Some(kind);
    if let Some(dir) = common.out {
        cfg.output.dir = dir.to_string_lossy().into_owned();
    }
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    match run_experiment(cfg) {
        Ok(summary) => {
            println!("{}", summary.line);
            println!("artifacts in {}", summary.out_dir.display());
            if summary.ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
