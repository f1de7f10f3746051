//! `orthospec`: build hyperbolic surfaces with geodesic boundary, compute
//! their ortho spectra and run the experiments on top of them.
//!
//! Exit codes: 0 success, 1 a check came out negative, 2 input error,
//! 3 insufficient data, 4 certification failure.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use orthospec::Error;

#[derive(Parser, Debug)]
#[command(
    name = "orthospec",
    version,
    about = "Ortho spectra of hyperbolic surfaces with geodesic boundary"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Length cutoff for spectra.
    #[arg(long, global = true)]
    pub cutoff: Option<f64>,
    /// Tolerance for identity checks and spectrum comparison.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Fail with exit code 4 unless every surface and spectrum is certified.
    #[arg(long, global = true)]
    pub require_certified: bool,
    /// Seed recorded in the manifest for randomized runs.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Arithmetic for group element products.
    #[arg(long, global = true, value_enum, default_value_t = Precision::Extended)]
    pub precision: Precision,
    /// Output file (default: standard output).
    #[arg(short, long, global = true)]
    pub output: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Precision {
    Double,
    Extended,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum IdentityChoice {
    Basmajian,
    Bridgeman,
    Both,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Build a surface from a JSON spec and audit it.
    Build { spec: PathBuf },
    /// Ortho spectrum of a built surface up to --cutoff.
    Spectrum {
        surface: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Check the Basmajian and/or Bridgeman identity on a spectrum.
    Verify {
        surface: PathBuf,
        spectrum: PathBuf,
        #[arg(long, value_enum, default_value_t = IdentityChoice::Both)]
        identity: IdentityChoice,
    },
    /// Degree 2^k cyclic covers of the one-holed torus with
    /// l_alpha = arccosh(3/2) / 2^k: spectra and systoles.
    Covers {
        #[arg(long)]
        k: u32,
        #[arg(long, default_value_t = 2.0)]
        gamma: f64,
        /// Largest k accepted.
        #[arg(long, default_value_t = 4)]
        max_k: u32,
    },
    /// Growth exponents of the ortho spectrum and of the boundary interval
    /// radii.
    Exponents {
        surface: PathBuf,
        /// Comma-separated increasing cutoffs.
        #[arg(long, value_delimiter = ',', required = true)]
        cutoffs: Vec<f64>,
        /// Where to write the radii table.
        #[arg(long)]
        radii_csv: Option<PathBuf>,
    },
    /// Recover (l_gamma, l_alpha, |twist|) from a one-holed torus spectrum.
    Reconstruct { spectrum: PathBuf },
    /// Compare two spectra below their common cutoff.
    Compare { a: PathBuf, b: PathBuf },
    /// Lower bound for the systole from the spectrum alone.
    Mckean {
        surface: PathBuf,
        spectrum: PathBuf,
        /// Cap on pants curve lengths (default: a coarse Bers-type bound).
        #[arg(long)]
        cap: Option<f64>,
    },
    /// Arcs winding around a pinched curve on tori (eps, 0, gamma).
    Pinching {
        #[arg(long, value_delimiter = ',', default_values_t = vec![0.4, 0.2, 0.1])]
        eps: Vec<f64>,
        #[arg(long, default_value_t = 5)]
        n: u32,
        #[arg(long, default_value_t = 2.0)]
        gamma: f64,
    },
}

/// Outcome of a command that ran to completion.
pub enum Outcome {
    Ok,
    /// A verdict came out negative.
    Negative,
}

pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InsufficientData(_)
        | Error::InsufficientCutoff(_)
        | Error::NotFound(_)
        | Error::ResourceCap(_) => 3,
        Error::Uncertified(_) => 4,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    if let Some(n) = cli.global.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
        {
            eprintln!("error: cannot start thread pool: {e}");
            return ExitCode::from(2);
        }
    }
    orthospec::geometry::set_extended_precision(cli.global.precision == Precision::Extended);
    let result = commands::run(&cli);
    eprintln!("wall time: {:.3} s", start.elapsed().as_secs_f64());
    match result {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::Negative) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
