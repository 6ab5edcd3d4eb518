use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "balanced-embed", version, about = "Balanced measures on graphs and the embeddings they induce")]
pub struct Cli {
    /// Worker threads for parallel stages (default: all cores).
    #[arg(long, global = true, env = "BALANCED_EMBED_THREADS")]
    pub threads: Option<usize>,

    /// Write the result document here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Leave the timing section out of the result document.
    #[arg(long, global = true)]
    pub no_timing: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a generated graph (edge list) or point cloud (point file).
    Generate(GenerateArgs),
    /// Run the greedy procedure and refine its limit to a balanced measure.
    Greedy(GreedyArgs),
    /// Check whether a measure is balanced.
    Balance(BalanceArgs),
    /// Embed a graph through a balanced measure and audit the result.
    Embed(EmbedArgs),
    /// Enumerate balanced measures by brute force on small graphs.
    Oracle(OracleArgs),
    /// List boundary vertices and check the isoperimetric bound.
    Boundary(BoundaryArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GeneratorKind {
    Path,
    Cycle,
    Complete,
    Star,
    Grid,
    GluedPaths,
    Er,
    Gaussian,
    SwissRoll,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    pub kind: GeneratorKind,
    /// Vertex count (path, cycle, complete, er), points per cluster
    /// (gaussian) or point count (swiss-roll).
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Path count of glued paths.
    #[arg(long)]
    pub m: Option<usize>,
    /// Half-length of glued paths.
    #[arg(long)]
    pub ell: Option<usize>,
    #[arg(long)]
    pub leaves: Option<usize>,
    #[arg(long)]
    pub rows: Option<usize>,
    #[arg(long)]
    pub cols: Option<usize>,
    /// Cluster centers as `x,y,..;x,y,..`.
    #[arg(long)]
    pub centers: Option<String>,
    #[arg(long, default_value_t = 1.0)]
    pub stddev: f64,
    /// Edge-list or point file to write (default: stdout).
    #[arg(long)]
    pub file: Option<PathBuf>,
}

/// Where the graph comes from: a file, the catalog, or a generator.
#[derive(Debug, Args, Clone)]
pub struct GraphSource {
    /// Edge-list file, or point file when `--knn` is given.
    pub input: Option<PathBuf>,
    /// Bundled graph: frucht, dodecahedral, desargues, petersen.
    #[arg(long, conflicts_with_all = ["input", "gen"])]
    pub named: Option<String>,
    /// Generator spec such as `er:n=50,p=0.1,seed=7` or `glued-paths:m=5,ell=10`.
    #[arg(long = "gen", conflicts_with = "input")]
    pub gen: Option<String>,
    /// Build the k-nearest-neighbor graph of a point cloud.
    #[arg(long)]
    pub knn: Option<usize>,
    /// Vertex count for edge-list input (default: largest index + 1).
    #[arg(long)]
    pub vertices: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TieBreakArg {
    Smallest,
    Boundary,
    Seeded,
}

#[derive(Debug, Args, Clone)]
pub struct GreedyOptions {
    #[arg(long, default_value_t = 100_000)]
    pub max_steps: usize,
    #[arg(long, default_value_t = 100)]
    pub sample_every: usize,
    /// Stop once |max T_m - E_m| falls below this (default 1e-3 * diam).
    #[arg(long)]
    pub stop_gap: Option<f64>,
    /// Do not stop before this many vertices (default ceil(diam / stop_gap)).
    #[arg(long)]
    pub min_len: Option<usize>,
    /// Initial vertex list, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "0")]
    pub initial: Vec<usize>,
    #[arg(long, value_enum, default_value_t = TieBreakArg::Smallest)]
    pub tie_break: TieBreakArg,
    /// Seed for `--tie-break seeded`.
    #[arg(long, default_value_t = 0)]
    pub tie_seed: u64,
    /// Mass threshold for reading the support off the empirical measure.
    #[arg(long)]
    pub support_eps: Option<f64>,
    /// Balance tolerance for floating-point measures.
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    #[arg(long, default_value_t = 64)]
    pub repair_iter: usize,
}

#[derive(Debug, Args)]
pub struct GreedyArgs {
    #[command(flatten)]
    pub source: GraphSource,
    #[command(flatten)]
    pub greedy: GreedyOptions,
    /// Write the resulting measure as a measure file.
    #[arg(long)]
    pub measure_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BalanceArgs {
    #[command(flatten)]
    pub source: GraphSource,
    /// Measure file of `vertex weight` lines.
    #[arg(long)]
    pub measure: PathBuf,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
}

#[derive(Debug, Args)]
pub struct EmbedArgs {
    #[command(flatten)]
    pub source: GraphSource,
    /// Measure file; alternatively `--auto`.
    #[arg(long, required_unless_present = "auto", conflicts_with = "auto")]
    pub measure: Option<PathBuf>,
    /// Compute the measure with the greedy pipeline.
    #[arg(long)]
    pub auto: bool,
    #[command(flatten)]
    pub greedy: GreedyOptions,
    /// Embed even if the measure is not balanced.
    #[arg(long)]
    pub force: bool,
    /// Drop coordinates whose weight is below this.
    #[arg(long)]
    pub drop_below: Option<f64>,
    /// Keep only the heaviest coordinates.
    #[arg(long)]
    pub drop_top: Option<usize>,
    /// Project rows onto the hyperplane x_1 + ... + x_m = 0.
    #[arg(long)]
    pub center: bool,
    /// Reduce to this many principal components.
    #[arg(long)]
    pub pca_dim: Option<usize>,
    /// Add a distortion report over sampled vertex pairs.
    #[arg(long)]
    pub audit: bool,
    #[arg(long, default_value_t = 100_000)]
    pub audit_pairs: usize,
    #[arg(long, default_value_t = 0)]
    pub audit_seed: u64,
    /// Coordinates CSV to write.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OracleModeArg {
    Grid,
    Supports,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub source: GraphSource,
    #[arg(long, value_enum, default_value_t = OracleModeArg::Supports)]
    pub mode: OracleModeArg,
    #[arg(long, default_value_t = 4)]
    pub max_size: usize,
    /// Grid denominator: weights are multiples of 1/resolution.
    #[arg(long, default_value_t = 40)]
    pub resolution: u32,
}

#[derive(Debug, Args)]
pub struct BoundaryArgs {
    #[command(flatten)]
    pub source: GraphSource,
}
