//! `modcs`: sparse recovery with partially known support from the command line.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(
    name = "modcs",
    version,
    about = "Sparse recovery with partially known support"
)]
pub struct Cli {
    /// Master seed; overrides any seed in a config file.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Output format (each command has its own default).
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Solve one instance from CSV files.
    Solve(SolveArgs),
    /// Compute restricted isometry constants of a matrix.
    Rip(RipArgs),
    /// Evaluate the exact-recovery sufficient conditions.
    Conditions(ConditionsArgs),
    /// Largest sparsity satisfying the Gaussian-bound conditions.
    Bounds(BoundsArgs),
    /// Monte Carlo exact-recovery probability.
    McProb(ConfigArg),
    /// Monte Carlo error under measurement noise.
    Noisy(ConfigArg),
    /// RegModCS weight sweep.
    Regsweep(ConfigArg),
    /// Reconstruct a synthetic signal sequence.
    Dynamic(ConfigArg),
    /// Emit synthetic data.
    #[command(subcommand)]
    Gen(GenCommand),
}

#[derive(Args, Debug)]
pub struct ConfigArg {
    /// JSON config file.
    #[arg(long)]
    pub config: PathBuf,
}

#[derive(Args, Debug)]
pub struct SolveArgs {
    /// Measurement matrix, headerless CSV (one row per line).
    #[arg(long)]
    pub matrix: PathBuf,
    /// Measurements, one value per line or a single row.
    #[arg(long)]
    pub y: PathBuf,
    /// Known support indices (0-based). Omit for basis pursuit.
    #[arg(long)]
    pub known: Option<PathBuf>,
    /// RegModCS weight; requires `--mu`.
    #[arg(long, requires = "mu")]
    pub gamma: Option<f64>,
    /// Prior mean on the known indices, in their sorted order.
    #[arg(long)]
    pub mu: Option<PathBuf>,
    /// Solver settings as JSON.
    #[arg(long)]
    pub solver: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct RipArgs {
    #[arg(long)]
    pub matrix: PathBuf,
    /// Constants needed for the modified-CS checks at `|T| = k` ...
    #[arg(long, requires = "u")]
    pub k: Option<usize>,
    /// ... and `|Δ| = u`.
    #[arg(long, requires = "k")]
    pub u: Option<usize>,
    /// Constants needed for the CS checks at sparsity `s`.
    #[arg(long)]
    pub cs_s: Option<usize>,
    /// Extra `δ_S` sizes.
    #[arg(long, value_delimiter = ',')]
    pub delta: Vec<usize>,
    /// Fall back to this many sampled subsets when enumeration is too large.
    #[arg(long)]
    pub sample_trials: Option<usize>,
}

#[derive(Args, Debug)]
pub struct ConditionsArgs {
    /// RipTable JSON.
    #[arg(long, conflicts_with_all = ["matrix", "all_zero"])]
    pub table: Option<PathBuf>,
    /// Matrix CSV; the needed constants are computed exactly.
    #[arg(long, conflicts_with = "all_zero")]
    pub matrix: Option<PathBuf>,
    /// Use a table whose every constant is zero.
    #[arg(long)]
    pub all_zero: bool,
    #[arg(long, default_value_t = 3)]
    pub k: usize,
    #[arg(long, default_value_t = 1)]
    pub u: usize,
    /// Also check the CS conditions at this sparsity.
    #[arg(long)]
    pub cs_s: Option<usize>,
}

#[derive(Args, Debug)]
pub struct BoundsArgs {
    /// Values of m/n.
    #[arg(long, value_delimiter = ',', default_values_t = [0.1, 0.3, 0.5])]
    pub m_over_n: Vec<f64>,
    /// Emit ρ curves with this many points instead of the maxima.
    #[arg(long)]
    pub curve_points: Option<usize>,
    /// Largest s/n on the curves.
    #[arg(long, default_value_t = 1e-3)]
    pub max_frac: f64,
}

#[derive(Subcommand, Debug)]
pub enum GenCommand {
    /// Column-normalized Gaussian matrix.
    Matrix {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
    },
    /// Sparse signal with N(0, variance) nonzeros.
    Signal {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        s: usize,
        #[arg(long, default_value_t = 100.0)]
        variance: f64,
    },
    /// Signal sequence from a JSON sequence model; one frame per row.
    Sequence {
        #[arg(long)]
        config: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
