use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use dmwf_cli::{run, Overrides};

/// Batch and online experiments for distributed MWF estimation in simulated
/// acoustic sensor networks.
#[derive(Debug, Parser)]
#[command(name = "wasn-dmwf", version)]
struct Cli {
    /// Experiment configuration file.
    #[arg(long)]
    config: PathBuf,
    /// `batch` or `online`; overrides the configuration.
    #[arg(long)]
    mode: Option<String>,
    /// Base seed; trial `t` uses `seed + t`.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = "results")]
    out: PathBuf,
    /// Comma-separated algorithm names, e.g. `dmwf,danse_qd,rsdanse_qdk`.
    #[arg(long)]
    algos: Option<String>,
    #[arg(long)]
    trials: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let ov = Overrides {
        mode: cli.mode,
        seed: cli.seed,
        algos: cli.algos,
        trials: cli.trials,
    };
    match run(&cli.config, &cli.out, &ov) {
        Ok(s) => {
            println!(
                "{} run: {} trials, {} failed (trial, algorithm) pairs, results in {}",
                s.manifest.mode.name(),
                s.trials,
                s.failures,
                s.manifest.output_dir.display()
            );
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("wasn-dmwf: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
