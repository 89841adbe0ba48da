use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fpforest::Permutation;
use serde::Serialize;

/// Environment variable consulted when `--seed` is absent.
pub const SEED_ENV: &str = "FPFOREST_SEED";

#[derive(Debug, Parser)]
#[command(name = "fpforest", version, about = "Fixed point forest experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Output format; DOT is only available for graph output.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    /// Write the artifact here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Worker threads for Monte Carlo and enumeration (default: all cores).
    #[arg(long, global = true)]
    pub workers: Option<usize>,

    /// Master seed; falls back to $FPFOREST_SEED, then to a fresh random seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Dot,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build F_n, or the r-ball around one permutation.
    Forest(ForestArgs),
    /// Shortest and longest paths, bumped set and bounds for one permutation.
    Paths(PathsArgs),
    /// Monte Carlo statistics over uniform permutations.
    Mc(McArgs),
    /// Samplers on the limit tree.
    Limit(LimitArgs),
    /// r-ball shape histograms of F_n against the limit tree.
    Compare(CompareArgs),
    /// Exact TV between separation indicators and independent Poissons.
    Tv(TvArgs),
    /// Run the acceptance suite.
    Verify(VerifyArgs),
}

fn parse_perm(s: &str) -> Result<Permutation, String> {
    s.parse::<Permutation>().map_err(|e| e.to_string())
}

#[derive(Debug, Args, Serialize)]
pub struct ForestArgs {
    #[arg(long)]
    pub n: Option<usize>,
    /// Centre of a ball; switches to ball mode.
    #[arg(long, value_parser = parse_perm)]
    pub perm: Option<Permutation>,
    #[arg(long, default_value_t = 1)]
    pub r: usize,
    /// Largest number of vertices to materialise.
    #[arg(long, default_value_t = fpforest::forest::DEFAULT_NODE_BUDGET)]
    pub budget_nodes: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct PathsArgs {
    #[arg(long, value_parser = parse_perm)]
    pub perm: Permutation,
    #[arg(long, default_value_t = 1.0)]
    pub x: f64,
    #[arg(long, default_value_t = fpforest::paths::DEFAULT_STEP_BUDGET)]
    pub budget_steps: u64,
    /// Omit the vertex sequences of both paths.
    #[arg(long)]
    pub no_paths: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct McArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 10_000)]
    pub trials: u64,
    /// Thresholds for |B_x|; repeatable.
    #[arg(long, default_values_t = vec![1.0, 2.0])]
    pub x: Vec<f64>,
    /// Enumerate all of S_n instead of sampling.
    #[arg(long)]
    pub exhaustive: bool,
    #[arg(long, default_value_t = fpforest::paths::DEFAULT_STEP_BUDGET)]
    pub budget_steps: u64,
    /// Sort steps allowed per walk to the base; 0 skips the walk.
    #[arg(long, default_value_t = fpforest::stats::DEFAULT_WALK_BUDGET)]
    pub budget_walk: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LimitStatistic {
    Nearest,
    Farthest,
    Scan,
    Yule,
    Ball,
}

#[derive(Debug, Args, Serialize)]
pub struct LimitArgs {
    #[arg(long, value_enum, default_value_t = LimitStatistic::Nearest)]
    pub statistic: LimitStatistic,
    #[arg(long, visible_alias = "samples", default_value_t = 100_000)]
    pub trials: u64,
    /// Time horizon for the Yule process.
    #[arg(long, default_value_t = 1.0)]
    pub t: f64,
    /// Ball radius.
    #[arg(long, default_value_t = 1)]
    pub r: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct CompareArgs {
    #[arg(long, default_value_t = 2000)]
    pub n: usize,
    #[arg(long, default_value_t = 1)]
    pub r: usize,
    #[arg(long, default_value_t = 10_000)]
    pub trials: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct TvArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 1)]
    pub r: usize,
    /// Conditioning values π(1..=r), comma separated (default 1, 2, …, r).
    #[arg(long, value_delimiter = ',')]
    pub a: Option<Vec<u32>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ScaleArg {
    Full,
    Quick,
}

#[derive(Debug, Args, Serialize)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value_t = ScaleArg::Full)]
    pub scale: ScaleArg,
    /// Run only these criteria (comma separated).
    #[arg(long, value_delimiter = ',')]
    pub criteria: Option<Vec<u8>>,
}
