use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};

use gyropic::harness::{self, Overrides, RunSummary};
use gyropic::pic::fmt_real;

#[derive(Parser)]
#[command(name = "gyropic", version, about = "Asymptotic-preserving PIC experiments for strongly magnetized plasmas")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a TOML configuration file.
    Run {
        config: PathBuf,
        /// Replace the epsilon list by a single value.
        #[arg(long)]
        epsilon: Option<f64>,
        /// Replace the time-step list by a single value.
        #[arg(long)]
        dt: Option<f64>,
        /// Scheme order (1, 2 or 3).
        #[arg(long)]
        order: Option<u8>,
        /// Output directory.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads.
        #[arg(long)]
        workers: Option<usize>,
    },
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}

fn run() -> anyhow::Result<()> {
    let Command::Run { config, epsilon, dt, order, out, seed, workers } = Cli::parse().command;
    let overrides = Overrides { epsilon, dt, order, out, seed, workers };
    let cfg = harness::parse_config_with(&config, &overrides)
        .with_context(|| format!("invalid configuration {}", config.display()))?;
    let summary = harness::run(&cfg).context("run failed")?;

    match summary {
        RunSummary::Sweep { rows, failed } => {
            println!("{} cells ({failed} failed) -> {}", rows.len(), cfg.out_dir.join("errors.csv").display());
        }
        RunSummary::VlasovPoisson(runs) => {
            for r in runs {
                println!(
                    "epsilon={} steps={} energy_drift={} invariant_drift={} max_escaped={}",
                    fmt_real(r.epsilon),
                    r.steps,
                    r.energy_drift().map(fmt_real).unwrap_or_else(|| "n/a".into()),
                    r.invariant_drift().map(fmt_real).unwrap_or_else(|| "n/a".into()),
                    r.max_escaped()
                );
            }
            println!("outputs in {}", cfg.out_dir.display());
        }
    }
    Ok(())
}
