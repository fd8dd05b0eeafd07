//! `opineq`: run verification suites, sharpness probes and tracial geometric
//! means from the command line.
//!
//! Exit status: 0 when every requested check passes (or every probe
//! completes), 1 when some inequality check does not pass, 2 on usage,
//! configuration or input errors.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::{CliError, ProbeKind, ProbeOptions};
use config::{load_config, Format, Settings, DEFAULT_SEED};

#[derive(Parser)]
#[command(name = "opineq", version, about = "Numerical checks of operator Hardy, Carleman and trace inequalities")]
#[command(arg_required_else_help = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a verification suite, or every discrete check on one input sequence
    Verify {
        /// default, quick, empty, or a single checker name
        #[arg(long)]
        suite: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Sharpness probes and the p > 2 violation search
    Probe {
        #[arg(long, value_enum, default_value = "extremal")]
        kind: ProbeKind,
        /// Sequence lengths (grid for extremal/carleman, first value otherwise)
        #[arg(long = "N", value_delimiter = ',')]
        n: Vec<usize>,
        /// Objective evaluations (optimize: total; violation: per trial)
        #[arg(long)]
        budget: Option<usize>,
        #[arg(long)]
        restarts: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Tracial geometric mean of an input sequence, by limit and by log-exp
    Tg {
        /// Largest k in the schedule p = 2^k
        #[arg(long, default_value_t = 40)]
        max_k: u32,
        #[arg(long, default_value_t = 1e-7)]
        cauchy_tol: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Continuous lemmas and theorems, on a step-function file or sampled
    Lemma {
        #[arg(long)]
        suite: Option<String>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args, Clone)]
struct Common {
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated dimensions
    #[arg(long, value_delimiter = ',')]
    dims: Vec<usize>,
    /// Comma-separated exponents
    #[arg(long = "p", value_delimiter = ',')]
    p: Vec<f64>,
    #[arg(long)]
    trials: Option<usize>,
    /// Truncation length of the Hardy sums
    #[arg(long = "M")]
    m: Option<usize>,
    /// PSD tolerance (relative to the spectral radius)
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// JSON run configuration; its fields override flags
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    input: Option<PathBuf>,
}

impl Common {
    fn settings(&self, suite: Option<String>, command: &str) -> Result<Settings, CliError> {
        let flags = Settings {
            suite,
            seed: self.seed.unwrap_or(DEFAULT_SEED),
            dims: self.dims.clone(),
            p_grid: self.p.clone(),
            trials: self.trials,
            truncation: self.m,
            tol: self.tol,
            out: self.out.clone(),
            format: Format::Json,
            input: self.input.clone(),
            checks: None,
        };
        let config = match &self.config {
            Some(path) => Some(load_config(path).map_err(CliError::usage)?),
            None => None,
        };
        Settings::merge(flags, self.format, config, command).map_err(CliError::usage)
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("OPINEQ_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::usage(format!("OPINEQ_THREADS must be a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::usage(e.to_string()))
}

fn run(cli: Cli) -> Result<bool, CliError> {
    configure_threads()?;
    match cli.command {
        Command::Verify { suite, common } => commands::verify(&common.settings(suite, "verify")?),
        Command::Lemma { suite, common } => commands::lemma(&common.settings(suite, "lemma")?),
        Command::Tg {
            max_k,
            cauchy_tol,
            common,
        } => commands::tg(&common.settings(None, "tg")?, max_k, cauchy_tol),
        Command::Probe {
            kind,
            n,
            budget,
            restarts,
            common,
        } => commands::probe(
            &common.settings(None, "probe")?,
            &ProbeOptions {
                kind,
                n_grid: n,
                budget,
                restarts,
            },
        ),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
