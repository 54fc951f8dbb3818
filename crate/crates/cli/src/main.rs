use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

mod commands;

/// Flat-model Bargmann-Fock kernel calculus.
#[derive(Debug, Parser)]
#[command(name = "bargmann", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Relative tolerance for numerical checks.
    #[arg(long, global = true, default_value_t = 1e-9, value_parser = positive)]
    pub tol: f64,

    /// Seed for randomized checks.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Gauss-Hermite nodes per real axis, replacing the automatic choice.
    #[arg(long, global = true, value_parser = clap::value_parser!(u32).range(1..))]
    pub nodes: Option<u32>,

    /// Maximum total degree accepted in input numerators.
    #[arg(long, global = true)]
    pub degree_cap: Option<u32>,

    /// Write the JSON result here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compose two kernel expressions symbolically.
    Compose {
        #[arg(long)]
        left: PathBuf,
        #[arg(long)]
        right: PathBuf,
    },
    /// Compare a symbolic composition with Gauss-Hermite quadrature.
    OracleCheck {
        #[arg(long)]
        left: PathBuf,
        #[arg(long)]
        right: PathBuf,
        /// Evaluation points; the standard set is used when omitted.
        #[arg(long)]
        points: Option<PathBuf>,
    },
    /// Check Fock states against the model Laplacian.
    Spectrum {
        #[arg(long, default_value_t = 1)]
        n: usize,
        /// Largest |alpha| and |beta|.
        #[arg(long, default_value_t = 3)]
        max_level: u32,
    },
    /// Leading Toeplitz coefficients of a symbol, checked against the oracle.
    ToeplitzLeading {
        #[arg(long, value_parser = parse_kind)]
        kind: bargmann_core::ToeplitzKind,
        #[arg(long)]
        symbol: PathBuf,
        /// Skip the quadrature comparison.
        #[arg(long)]
        no_check: bool,
    },
    /// Curvature constants from sampled geometry data.
    Constants {
        #[arg(long)]
        geom: PathBuf,
        #[arg(long, value_enum)]
        which: Which,
        /// Direction as a JSON list of level blocks of [re, im] entries.
        #[arg(long)]
        direction: Option<String>,
        /// Emit CSV instead of JSON.
        #[arg(long)]
        csv: bool,
    },
    /// Flat multiplicative and transitivity defects.
    DefectCheck {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        l: usize,
        #[arg(long)]
        m: usize,
    },
    /// Run the invariant suite and print a pass/fail table.
    Selftest {
        /// Random instances per randomized check.
        #[arg(long, default_value_t = 60)]
        instances: usize,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Which {
    C0,
    C3c4,
    Dp3,
    Tower,
}

fn positive(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(x) if x > 0.0 && x.is_finite() => Ok(x),
        Ok(_) => Err("must be a positive number".into()),
        Err(e) => Err(e.to_string()),
    }
}

fn parse_kind(s: &str) -> Result<bargmann_core::ToeplitzKind, String> {
    bargmann_core::ToeplitzKind::parse(s).map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(commands::Failure::Numeric(msg)) => {
            eprintln!("bargmann: {msg}");
            ExitCode::from(1)
        }
        Err(commands::Failure::Input(msg)) => {
            eprintln!("bargmann: {msg}");
            ExitCode::from(2)
        }
    }
}
