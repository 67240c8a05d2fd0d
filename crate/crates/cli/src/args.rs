use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Environment variable naming the directory for outputs whose path is not
/// given on the command line.
pub const OUTPUT_DIR_ENV: &str = "ALPHAMATCH_OUTPUT_DIR";

#[derive(Debug, Parser)]
#[command(
    name = "alphamatch",
    version,
    about = "Single-parameter pattern matching for time series"
)]
pub struct Cli {
    /// Worker threads for lag and partition loops (0 = all cores). Output does
    /// not depend on this value.
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Normalized alpha of a template at every lag of a data series (CSV).
    Match(MatchArgs),
    /// Match count versus template length for prefixes of a template source.
    Curve(CurveArgs),
    /// Pick the most representative partition of a series as its template.
    Select(SelectArgs),
    /// Self and cross match curves for one series per class, with the minimal
    /// discriminative template length of each class.
    Discriminate(DiscriminateArgs),
    /// Generate a synthetic series.
    Synth(SynthArgs),
    /// Monte-Carlo check of the alpha confidence interval and detection limit.
    #[command(name = "detect-limit")]
    DetectLimit(DetectLimitArgs),
}

#[derive(Debug, Args)]
pub struct MatchArgs {
    #[arg(long)]
    pub template: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    /// Output CSV with `lag,alpha_n` rows.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args, Clone, Copy)]
pub struct GridArgs {
    #[arg(long, default_value_t = 10)]
    pub min_len: usize,
    /// Defaults to the source length (curve) or min(partition length, 200).
    #[arg(long)]
    pub max_len: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub step: usize,
    /// Minimum |alpha_n| counted as a match, in [0.5, 1].
    #[arg(long, default_value_t = 0.98)]
    pub threshold: f64,
}

#[derive(Debug, Args)]
pub struct CurveArgs {
    #[arg(long)]
    pub template: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    #[command(flatten)]
    pub grid: GridArgs,
    /// `.csv` or `.json`.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args, Clone, Copy)]
pub struct PartitionArgs {
    #[arg(long, default_value_t = 5)]
    pub partitions: usize,
    #[arg(long, default_value_t = 1000)]
    pub partition_len: usize,
}

#[derive(Debug, Args)]
pub struct SelectArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[command(flatten)]
    pub partition: PartitionArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Series file receiving the chosen partition.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// JSON report with the score of every partition.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DiscriminateArgs {
    /// One series per class; the file stem is the class label.
    #[arg(long = "data", required = true, num_args = 1..)]
    pub data: Vec<PathBuf>,
    #[command(flatten)]
    pub partition: PartitionArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Cross-class matches tolerated at and beyond the minimal length.
    #[arg(long, default_value_t = 0)]
    pub cross_tolerance: usize,
    /// JSON discrimination report.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// All self and cross curves, `.csv` or `.json`.
    #[arg(long)]
    pub curves: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SynthKind {
    Surrogate,
    Noise,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, value_enum, default_value_t = SynthKind::Surrogate)]
    pub kind: SynthKind,
    /// Surrogate class, 1 to 5.
    #[arg(long, default_value_t = 1)]
    pub class: u8,
    #[arg(long, default_value_t = 5000)]
    pub length: usize,
    #[arg(long, default_value_t = 11_250.0)]
    pub sample_rate: f64,
    /// Noise standard deviation.
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Template series added to the noise.
    #[arg(long, requires = "alpha")]
    pub inject: Option<PathBuf>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub offset: usize,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DetectLimitArgs {
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    /// Injected intensity.
    #[arg(long, default_value_t = 0.14)]
    pub alpha: f64,
    /// Target confidence half-width of the generated template.
    #[arg(long, default_value_t = 0.045)]
    pub delta_alpha: f64,
    #[arg(long, default_value_t = 64)]
    pub template_len: usize,
    /// Use this series as the template instead of a generated one.
    #[arg(long, conflicts_with_all = ["delta_alpha", "template_len"])]
    pub template: Option<PathBuf>,
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 256)]
    pub data_length: usize,
    #[arg(long, default_value_t = 100)]
    pub offset: usize,
    #[arg(long)]
    pub output: Option<PathBuf>,
}
