mod commands;
mod measure;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Parser, Debug)]
#[command(
    name = "symword",
    version,
    about = "Experiments with word maps on symmetric groups"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    run: RunOptions,
}

/// Options shared by every subcommand.
#[derive(Args, Debug, Clone, Serialize)]
pub struct RunOptions {
    /// Master seed for every random stream.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Number of sampling shards; together with the seed it fixes the output.
    #[arg(long, global = true, env = "SYMWORD_WORKERS")]
    pub workers: Option<usize>,
    /// JSON report path; stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Tabular projection of the report, where the command has one.
    #[arg(long, global = true)]
    pub csv: Option<PathBuf>,
    /// Include wall time in the JSON report (it is always printed to stderr).
    #[arg(long, global = true)]
    pub timing: bool,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Command {
    /// Reduced form, index classes and regularity of a word.
    Classify(WordArgs),
    /// Exact distribution of word values under uniform inputs.
    ExactDist(WordArgs),
    /// Empirical distribution of word values.
    SampleDist(SampleDistArgs),
    /// Exact Kantorovich-Rubinstein distance between two measures.
    Kr(KrArgs),
    /// Explicit coupling of a conjugacy class with the n-cycles.
    NcycleCoupling(CouplingArgs),
    /// Monte-Carlo audit of the short-cycle subset bound.
    BoundCheck(BoundCheckArgs),
    /// Tail probabilities of the number of points in short cycles.
    Tail(TailArgs),
    /// Simulated annealing for approximate solutions of w(x) = target.
    Anneal(AnnealArgs),
    /// Distance of a tuple pushforward to product uniform.
    Sae(SaeArgs),
    /// Fixed-point fractions of test words evaluated on a word tuple.
    Sofic(SoficArgs),
    /// Rank of the subgroup generated by constant-free words.
    Fold(FoldArgs),
}

#[derive(Args, Debug, Serialize)]
pub struct WordArgs {
    /// Word text, e.g. "x1^-1 (1 2 3) x1".
    #[arg(long)]
    pub word: String,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 1)]
    pub r: usize,
}

#[derive(Args, Debug, Serialize)]
pub struct SampleDistArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub word: WordArgs,
    #[arg(long, default_value_t = 100_000)]
    pub samples: u64,
    /// Conjugate every sample by a fresh uniform permutation.
    #[arg(long)]
    pub symmetrize: bool,
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GroundArg {
    Hamming,
    L1Product,
}

#[derive(Args, Debug, Serialize)]
pub struct KrArgs {
    /// Measure: uniform, ncycles, class:<cycles>, delta:<cycles>, word:<text> or file:<json>.
    #[arg(long)]
    pub left: String,
    #[arg(long)]
    pub right: String,
    #[arg(long)]
    pub n: usize,
    /// Rank used to parse word: measures.
    #[arg(long, default_value_t = 1)]
    pub r: usize,
    /// Ground metric; Hamming for single permutations, l1-product for tuples.
    #[arg(long, value_enum)]
    pub ground: Option<GroundArg>,
    /// Include the optimal plan.
    #[arg(long)]
    pub plan: bool,
}

#[derive(Args, Debug, Serialize)]
pub struct CouplingArgs {
    /// Class representative in cycle notation.
    #[arg(long)]
    pub class: String,
    #[arg(long)]
    pub n: usize,
    /// Sample size when n is too large for the exact coupling.
    #[arg(long, default_value_t = 100_000)]
    pub samples: u64,
    /// Also solve the transport problem exactly and compare.
    #[arg(long)]
    pub check: bool,
    #[arg(long)]
    pub plan: bool,
}

#[derive(Args, Debug, Serialize)]
pub struct BoundCheckArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub word: WordArgs,
    #[arg(long, default_value_t = 1)]
    pub h: usize,
    #[arg(long, default_value_t = 2)]
    pub d_max: usize,
    #[arg(long, default_value_t = 100_000)]
    pub samples: u64,
}

#[derive(Args, Debug, Serialize)]
pub struct TailArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub word: WordArgs,
    #[arg(long, default_value_t = 1)]
    pub h: usize,
    /// Comma-separated thresholds f.
    #[arg(long, value_delimiter = ',', required = true)]
    pub thresholds: Vec<usize>,
    #[arg(long, default_value_t = 1_000_000)]
    pub samples: u64,
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MoveArg {
    Transposition,
    Adjacent,
    Focused,
}

#[derive(Args, Debug, Serialize)]
pub struct AnnealArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub word: WordArgs,
    /// Target permutation in cycle notation, or "random".
    #[arg(long, default_value = "random")]
    pub target: String,
    #[arg(long, default_value_t = 1_000_000)]
    pub steps: u64,
    #[arg(long, default_value_t = 10)]
    pub restarts: usize,
    /// "auto" or a fixed initial temperature in raw-count units.
    #[arg(long, default_value = "auto")]
    pub temperature: String,
    #[arg(long, default_value_t = 0.9995)]
    pub cooling: f64,
    #[arg(long, value_enum, default_value_t = MoveArg::Transposition)]
    pub moves: MoveArg,
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeArg {
    Exact,
    Sampled,
}

#[derive(Args, Debug, Serialize)]
pub struct SaeArgs {
    /// Comma-separated constant-free words.
    #[arg(long)]
    pub words: String,
    #[arg(long)]
    pub r: usize,
    /// Comma-separated degrees.
    #[arg(long, value_delimiter = ',', required = true)]
    pub n: Vec<usize>,
    #[arg(long, value_enum, default_value_t = ModeArg::Exact)]
    pub mode: ModeArg,
    #[arg(long, default_value_t = 100_000)]
    pub samples: u64,
}

#[derive(Args, Debug, Serialize)]
pub struct SoficArgs {
    #[arg(long)]
    pub words: String,
    #[arg(long)]
    pub r: usize,
    #[arg(long, value_delimiter = ',', required = true)]
    pub degrees: Vec<usize>,
    #[arg(long, default_value_t = 100_000)]
    pub samples: u64,
    /// Longest reduced test word in the battery.
    #[arg(long, default_value_t = symword::sae::DEFAULT_BATTERY_LENGTH)]
    pub max_len: usize,
}

#[derive(Args, Debug, Serialize)]
pub struct FoldArgs {
    #[arg(long)]
    pub words: String,
    #[arg(long)]
    pub r: usize,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli.command, &cli.run) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
