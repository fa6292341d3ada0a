//! `lrfput`: classify lattices, compute solitary waves, sweep ε, simulate.
//!
//! Exit status: 0 when every check passed, 1 when a check failed, 2 on
//! configuration or computation errors.

// `!(x > 0.0)` deliberately rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod output;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::{Overrides, RunConfig};
use crate::output::Artifacts;

#[derive(Parser)]
#[command(name = "lrfput", version, about = "Solitary waves in long-range FPUT lattices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML run configuration.
    #[arg(long, global = true, default_value = "lrfput.toml")]
    config: PathBuf,
    /// Output directory (overrides [output] dir).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Overrides [solver] eps.
    #[arg(long, global = true)]
    eps: Option<f64>,
    /// Overrides the certified working σ.
    #[arg(long, global = true)]
    sigma: Option<f64>,
    /// Suppress the summary on stdout.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Type I certificate and the λ(k) curve.
    Classify,
    /// Solitary-wave profile at one ε.
    Solve,
    /// Decay of ‖W_ε − W₀‖_{H¹} over the ε list.
    Sweep,
    /// Lattice integration from the computed wave.
    Simulate,
    /// Field and spectrum of the computed wave.
    Plot,
}

fn run(cli: &Cli) -> anyhow::Result<commands::Report> {
    let overrides = Overrides { out: cli.out.clone(), eps: cli.eps, sigma: cli.sigma };
    let config = RunConfig::load(&cli.config, &overrides)?;
    let mut out = Artifacts::new(&config.output.dir, config.hash())?;
    let report = match cli.command {
        Command::Classify => commands::classify(&config, &mut out),
        Command::Solve => commands::solve(&config, &mut out),
        Command::Sweep => commands::sweep(&config, &mut out),
        Command::Simulate => commands::simulate(&config, &mut out),
        Command::Plot => commands::plot(&config, &mut out),
    }?;
    if !cli.quiet {
        for path in out.written() {
            println!("wrote {}", path.display());
        }
    }
    Ok(report)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(report) => {
            if !cli.quiet {
                println!("{} {}", if report.passed { "PASS" } else { "FAIL" }, report.summary);
            }
            if report.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}
