//! Command-line driver for the breather library: sampling, residual
//! verification, quantization scans, radial evolution and spectra.
//!
//! Every command reads one TOML config (all keys optional) and writes a
//! CSV or JSON artifact. Exit codes: 0 success, 1 a check did not pass,
//! 2 usage or configuration error.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod points;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

pub use config::RunConfig;
pub use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "breather", version, about = "Breather solutions of the quantum Hamilton-Jacobi equation")]
pub struct Cli {
    /// TOML config file; every key has a default.
    #[arg(short, long, global = true)]
    pub config: Option<PathBuf>,

    /// Override a config key, e.g. `--set breather.alpha_re=0.3`. Repeatable.
    #[arg(long = "set", value_name = "SECTION.KEY=VALUE", global = true)]
    pub overrides: Vec<String>,

    /// Output file (standard output when absent); overrides `output.path`.
    #[arg(short, long, global = true)]
    pub output: Option<String>,

    /// Output format; overrides `output.format`.
    #[arg(short, long, value_enum, global = true)]
    pub format: Option<FormatArg>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum Command {
    /// Sample a closed-form field on a rectangular grid of events.
    Sample,
    /// Finite-difference residual convergence study over a set of events.
    Verify,
    /// Scan momenta for quantized trains and periodic boundary mismatches.
    Quantize,
    /// Leapfrog evolution of the spherically symmetric mode.
    Evolve,
    /// Spectrum of the action perturbation at fixed points.
    Spectrum,
    /// Period average of the energy at fixed points.
    AverageEnergy,
}

/// Loads the config, runs the command and writes its artifacts.
pub fn execute(cli: &Cli) -> Result<(), CliError> {
    let mut config = RunConfig::load(cli.config.as_deref(), &cli.overrides)?;
    if let Some(path) = &cli.output {
        config.output.path = Some(path.clone());
    }
    if let Some(format) = cli.format {
        config.output.format = match format {
            FormatArg::Csv => config::Format::Csv,
            FormatArg::Json => config::Format::Json,
        };
    }
    let path = config.output.path.as_deref();
    let outcome = match cli.command {
        Command::Sample => commands::sample(&config)?,
        Command::Verify => commands::verify(&config)?,
        Command::Quantize => commands::quantize(&config)?,
        Command::Evolve => commands::evolve(&config, path)?,
        Command::Spectrum => commands::spectrum(&config)?,
        Command::AverageEnergy => commands::average_energy(&config)?,
    };
    output::write_text(path, &outcome.report.render(config.output.format))?;
    for side in &outcome.side_files {
        match &side.path {
            Some(p) => output::write_text(Some(p), &side.text)?,
            None => eprint!("{}", side.text),
        }
    }
    match outcome.failure {
        Some(reason) => Err(CliError::Failed(reason)),
        None => Ok(()),
    }
}

/// Parses `args` (including the program name) and runs; returns the exit
/// code. Errors are reported on the diagnostic stream.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
