use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use prodnorm_core::SeesawOptions;

#[derive(Debug, Parser)]
#[command(
    name = "prodnorm",
    version,
    about = "Product norms, superoperator norms and two-prover game values",
    arg_required_else_help = true
)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// Emit one JSON document on stdout.
    #[arg(long, global = true, conflicts_with = "csv")]
    pub json: bool,
    /// Emit CSV on stdout.
    #[arg(long, global = true)]
    pub csv: bool,
    /// Base seed for random restarts.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true)]
    pub restarts: Option<usize>,
    /// Relative convergence tolerance per full sweep.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long = "max-iters", global = true)]
    pub max_iters: Option<usize>,
    /// Include wall-clock times in the output (breaks byte-identical reruns).
    #[arg(long, global = true)]
    pub timings: bool,
}

impl Global {
    pub fn seesaw(&self) -> SeesawOptions {
        let d = SeesawOptions::default();
        SeesawOptions {
            restarts: self.restarts.unwrap_or(d.restarts),
            max_iters: self.max_iters.unwrap_or(d.max_iters),
            tol: self.tol.unwrap_or(d.tol),
            seed: self.seed,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Norms of a single matrix.
    #[command(subcommand)]
    Norm(NormCmd),
    /// Norms of a superoperator.
    #[command(subcommand)]
    Sop(SopCmd),
    /// Verifier specs, strategies and game values.
    #[command(subcommand)]
    Game(GameCmd),
    /// Re-run the fixed table of reference cases.
    Repro {
        /// `all`, a case group such as `transpose-product`, or a single row id.
        case: String,
    },
}

#[derive(Debug, Args)]
pub struct Split {
    #[arg(long)]
    pub d1: usize,
    #[arg(long)]
    pub d2: usize,
}

#[derive(Debug, Subcommand)]
pub enum NormCmd {
    /// Sum of singular values.
    Trace {
        #[arg(long)]
        matrix: PathBuf,
    },
    /// Certified lower bound on the product norm, with the sandwich bounds.
    Product {
        #[arg(long)]
        matrix: PathBuf,
        #[command(flatten)]
        split: Split,
    },
    /// Exact product norm of `|u><v|`.
    Rank1 {
        #[arg(long)]
        u: PathBuf,
        #[arg(long)]
        v: PathBuf,
        #[command(flatten)]
        split: Split,
    },
}

#[derive(Debug, Subcommand)]
pub enum SopCmd {
    L1 {
        #[arg(long)]
        sop: PathBuf,
    },
    Diamond {
        #[arg(long)]
        sop: PathBuf,
    },
    Product {
        #[arg(long)]
        sop: PathBuf,
    },
    /// Product norms of `T (x) I_N (x) I_N` over increasing `N`.
    Stability {
        #[arg(long)]
        sop: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        ns: Vec<usize>,
    },
}

#[derive(Debug, Subcommand)]
pub enum GameCmd {
    /// Lower bound on the maximum acceptance probability.
    Value {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        dp1: usize,
        #[arg(long)]
        dp2: usize,
        /// Write the best strategy found to this file.
        #[arg(long)]
        emit_strategy: Option<PathBuf>,
    },
    /// Acceptance probability of a given strategy.
    Eval {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        strategy: PathBuf,
    },
    /// Classical value by enumerating deterministic strategies.
    Classical {
        #[arg(long)]
        game: PathBuf,
    },
    /// Built-in games: classical value, known entangled strategy and, with
    /// `--dp`, an optimized lower bound.
    Builtin {
        #[arg(value_enum)]
        name: Builtin,
        #[arg(long)]
        dp: Option<usize>,
        /// Write the compiled verifier spec.
        #[arg(long)]
        emit_spec: Option<PathBuf>,
        /// Write the classical game description.
        #[arg(long)]
        emit_game: Option<PathBuf>,
        /// Write the known entangled strategy.
        #[arg(long)]
        emit_strategy: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Builtin {
    Chsh,
    #[value(name = "magicsquare")]
    MagicSquare,
}
