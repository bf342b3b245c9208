use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "filtermin",
    version,
    about = "Exact state minimization for combinatorial filters"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Find a smallest deterministic filter that output-simulates the input.
    Minimize(MinimizeArgs),
    /// Emit the CNF for "a valid cover with at most k parts exists".
    Encode(EncodeArgs),
    /// Check that a candidate is deterministic and output-simulates a reference.
    Verify(VerifyArgs),
    /// List the zipper constraints of a filter.
    Zippers(InputArgs),
    /// Minimal size by exhaustive search (small filters only).
    Oracle(OracleArgs),
    /// Generate an instance as filter JSON.
    Gen(GenArgs),
    /// Timing sweeps over the instance families, as CSV.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Filter JSON; `-` or absent reads stdin.
    #[arg(long, short)]
    pub input: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// auto, so or mo.
    #[arg(long, default_value = "auto")]
    pub mode: String,
    /// minimal-nonface or paper-exact.
    #[arg(long, default_value = "minimal-nonface")]
    pub encoding: String,
    #[arg(long)]
    pub symmetry_breaking: bool,
    /// builtin, dpll, exec:<path>, or a path to a solver executable.
    #[arg(long, env = "FILTERMIN_SOLVER", default_value = "builtin")]
    pub solver: String,
    /// Seconds per solver call.
    #[arg(long)]
    pub timeout: Option<f64>,
}

#[derive(Debug, Args)]
pub struct MinimizeArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub solve: SolveArgs,
    /// Binary search over k instead of descending one at a time.
    #[arg(long)]
    pub binary_search: bool,
    /// Write the minimal filter JSON here.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    /// Write the minimal filter as DOT here.
    #[arg(long)]
    pub dot: Option<PathBuf>,
    /// Write the compatibility graph of the input as DOT here.
    #[arg(long)]
    pub graph_dot: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EncodeArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub solve: SolveArgs,
    #[arg(long)]
    pub k: usize,
    /// DIMACS destination; stdout if absent.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    /// Variable map destination; defaults to `<out>.map` when `--out` is set.
    #[arg(long)]
    pub map: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub reference: PathBuf,
    #[arg(long)]
    pub candidate: PathBuf,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, default_value_t = 10)]
    pub max_states: usize,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// nxm, grid, random, or builtin:<name>.
    #[arg(long)]
    pub family: String,
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    #[arg(long, default_value_t = 3)]
    pub m: usize,
    /// State count for the random family.
    #[arg(long, default_value_t = 6)]
    pub states: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub dot: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// nxm, grid, or all.
    #[arg(long, default_value = "all")]
    pub family: String,
    /// Largest n (rows for nxm, side for grid).
    #[arg(long)]
    pub n: Option<usize>,
    /// Largest m for nxm.
    #[arg(long, default_value_t = 6)]
    pub m: usize,
    #[command(flatten)]
    pub solve: SolveArgs,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}
