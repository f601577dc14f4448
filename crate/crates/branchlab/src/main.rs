use std::path::PathBuf;
use std::process::ExitCode;

use branchlab::config::parse_config;
use branchlab::runner::{run_command, Command};
use branchlab::sim::SimMode;
use clap::{Parser, Subcommand, ValueEnum};

/// Simulation and verification laboratory for branching Markov chains in
/// varying environments.
#[derive(Parser)]
#[command(name = "branchlab", version, about)]
struct Cli {
    #[command(subcommand)]
    command: CliCommand,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Explicit,
    Aggregated,
}

#[derive(clap::Args)]
struct CommonArgs {
    /// Experiment config file (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Master seed; overrides the config value.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory for CSV, JSON summary and manifest.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Worker threads for the replicate ensemble; never affects results.
    #[arg(long)]
    threads: Option<usize>,
    /// Simulation mode; overrides the config value.
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
}

#[derive(Subcommand)]
enum CliCommand {
    /// Ensemble simulation with trajectory export.
    Simulate(CommonArgs),
    /// Many-to-one oracle grid and size-biased sampler checks.
    Verify(CommonArgs),
    /// Forward law of large numbers in the final generation.
    LlnForward(CommonArgs),
    /// Backward (environment-reversed) law of large numbers.
    LlnBackward(CommonArgs),
    /// Law of large numbers for Cesaro averages over the whole tree.
    LlnWholeTree(CommonArgs),
    /// Central limit theorem for the occupation measure.
    Clt(CommonArgs),
    /// Coalescence-depth diagnostic against exhaustive enumeration.
    Coalescence(CommonArgs),
    /// Doeblin ratio screening of the auxiliary kernels.
    Doeblin(CommonArgs),
}

impl CliCommand {
    fn split(self) -> (Command, CommonArgs) {
        match self {
            CliCommand::Simulate(a) => (Command::Simulate, a),
            CliCommand::Verify(a) => (Command::Verify, a),
            CliCommand::LlnForward(a) => (Command::LlnForward, a),
            CliCommand::LlnBackward(a) => (Command::LlnBackward, a),
            CliCommand::LlnWholeTree(a) => (Command::LlnWholeTree, a),
            CliCommand::Clt(a) => (Command::Clt, a),
            CliCommand::Coalescence(a) => (Command::Coalescence, a),
            CliCommand::Doeblin(a) => (Command::Doeblin, a),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, args) = cli.command.split();

    let mut cfg = match parse_config(&args.config) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(threads) = args.threads {
        cfg.threads = threads;
    }
    if let Some(mode) = args.mode {
        cfg.mode = match mode {
            ModeArg::Explicit => SimMode::Explicit,
            ModeArg::Aggregated => SimMode::Aggregated,
        };
    }

    match run_command(command, &cfg, &args.out) {
        Ok(outcome) => {
            for gate in &outcome.manifest.gates {
                println!(
                    "[{:?}] {} (observed {:.6}, threshold {:.6})",
                    gate.verdict, gate.name, gate.observed, gate.threshold
                );
            }
            println!(
                "{}: artifacts in {} (exit {})",
                command.name(),
                args.out.display(),
                outcome.exit_code
            );
            ExitCode::from(outcome.exit_code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
