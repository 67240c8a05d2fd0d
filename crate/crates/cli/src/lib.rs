//! Command-line front end. Each subcommand reads its inputs, calls one or two
//! library operations and writes the results; no numerics live here.

pub mod args;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use alphamatch_core::ingest::{
    read_series, write_curves, write_json, write_profile_csv, write_series, CurveFormat, SeriesFile,
};
use alphamatch_core::selection::{choose_template, score_partitions};
use alphamatch_core::{
    alpha_profile, coverage_experiment, discriminate, energy_matched_template, gaussian_noise,
    inject, match_curve, partition, periodic_surrogate, ClassSeries, CoverageConfig,
    DiscriminationConfig, DiscriminationReport, LengthGrid, MatchCurve, Template, Threshold,
    TimeSeries,
};
use clap::Parser;
use serde::Serialize;

use crate::args::{
    Cli, Command, CurveArgs, DetectLimitArgs, DiscriminateArgs, GridArgs, MatchArgs, SelectArgs,
    SynthArgs, SynthKind, OUTPUT_DIR_ENV,
};

/// Exit status for contract and parse failures.
pub const EXIT_CONTRACT: i32 = 1;
/// Exit status for filesystem failures.
pub const EXIT_IO: i32 = 2;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] alphamatch_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_io() => EXIT_IO,
            _ => EXIT_CONTRACT,
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

/// Parses `argv`, runs the command and returns the process exit status.
/// Diagnostics go to standard error.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let informational =
                matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
            let _ = e.print();
            return if informational { 0 } else { EXIT_CONTRACT };
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("alphamatch: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cli: Cli) -> Result<()> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start thread pool: {e}")))?;
    pool.install(|| match cli.command {
        Command::Match(a) => run_match(a),
        Command::Curve(a) => run_curve(a),
        Command::Select(a) => run_select(a),
        Command::Discriminate(a) => run_discriminate(a),
        Command::Synth(a) => run_synth(a),
        Command::DetectLimit(a) => run_detect_limit(a),
    })
}

/// Explicit path, or `default_name` inside `$ALPHAMATCH_OUTPUT_DIR` (falling
/// back to the working directory).
fn output_path(explicit: Option<PathBuf>, default_name: &str) -> PathBuf {
    explicit.unwrap_or_else(|| {
        std::env::var_os(OUTPUT_DIR_ENV)
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from("."))
            .join(default_name)
    })
}

fn load(path: &Path) -> Result<TimeSeries> {
    Ok(read_series(&SeriesFile::new(path)?)?)
}

fn label_of(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn threshold(value: f64) -> Result<Threshold> {
    if !(0.5..=1.0).contains(&value) {
        return Err(CliError::Usage(format!(
            "--threshold must lie in [0.5, 1], got {value}"
        )));
    }
    Ok(Threshold::new(value)?)
}

fn grid(args: &GridArgs, default_max: usize) -> Result<LengthGrid> {
    Ok(LengthGrid::new(
        args.min_len,
        args.max_len.unwrap_or(default_max),
        args.step,
    )?)
}

fn run_match(args: MatchArgs) -> Result<()> {
    let template = load(&args.template)?;
    let data = load(&args.data)?;
    let profile = alpha_profile(template.samples(), &data)?;
    write_profile_csv(&profile, &output_path(args.output, "match.csv"))?;
    Ok(())
}

fn run_curve(args: CurveArgs) -> Result<()> {
    let source = load(&args.template)?;
    let data = load(&args.data)?;
    let grid = grid(&args.grid, source.len())?;
    let curve = match_curve(
        source.samples(),
        &data,
        grid,
        threshold(args.grid.threshold)?,
    )?
    .with_labels(label_of(&args.template), label_of(&args.data));
    let out = output_path(args.output, "curve.csv");
    write_curves(&[curve], &out, CurveFormat::from_path(&out)?)?;
    Ok(())
}

#[derive(Serialize)]
struct GridReport {
    min_len: usize,
    max_len: usize,
    step: usize,
}

impl From<LengthGrid> for GridReport {
    fn from(g: LengthGrid) -> Self {
        Self {
            min_len: g.min_len,
            max_len: g.max_len,
            step: g.step,
        }
    }
}

#[derive(Serialize)]
struct PartitionScoreReport {
    partition_index: usize,
    start_sample: usize,
    score: u64,
}

#[derive(Serialize)]
struct SelectReport {
    source: String,
    selected_partition: usize,
    score: u64,
    threshold: f64,
    grid: GridReport,
    partition_len: usize,
    scores: Vec<PartitionScoreReport>,
}

fn default_max_len(partition_len: usize) -> usize {
    partition_len.min(200)
}

fn run_select(args: SelectArgs) -> Result<()> {
    let data = load(&args.data)?;
    let label = label_of(&args.data);
    let parts = partition(
        &data,
        args.partition.partitions,
        args.partition.partition_len,
        label.clone(),
    )?;
    let grid = grid(&args.grid, default_max_len(args.partition.partition_len))?;
    let thr = threshold(args.grid.threshold)?;
    let scores = score_partitions(&data, &parts, grid, thr)?;
    let chosen = choose_template(&parts, &scores)?;

    let mut series = TimeSeries::new(chosen.samples.clone())?;
    if let Some(rate) = data.sample_rate() {
        series = series.with_sample_rate(rate)?;
    }
    let report = SelectReport {
        source: label,
        selected_partition: chosen.partition_index,
        score: chosen.score,
        threshold: thr.value(),
        grid: grid.into(),
        partition_len: args.partition.partition_len,
        scores: scores
            .iter()
            .map(|s| PartitionScoreReport {
                partition_index: s.partition_index,
                start_sample: s.partition_index * args.partition.partition_len,
                score: s.score,
            })
            .collect(),
    };
    write_series(
        &series,
        &SeriesFile::new(output_path(args.output, "template.csv"))?,
    )?;
    write_json(&report, &output_path(args.report, "select.json"))?;
    Ok(())
}

#[derive(Serialize)]
struct DiscriminateReport<'a> {
    threshold: f64,
    cross_tolerance: usize,
    partitions: usize,
    partition_len: usize,
    grid: GridReport,
    classes: &'a [DiscriminationReport],
}

fn run_discriminate(args: DiscriminateArgs) -> Result<()> {
    let classes = args
        .data
        .iter()
        .map(|p| Ok(ClassSeries::new(label_of(p), load(p)?)))
        .collect::<Result<Vec<_>>>()?;
    let config = DiscriminationConfig {
        num_partitions: args.partition.partitions,
        partition_len: args.partition.partition_len,
        grid: grid(&args.grid, default_max_len(args.partition.partition_len))?,
        threshold: threshold(args.grid.threshold)?,
        cross_tolerance: args.cross_tolerance,
    };
    let reports = discriminate(&classes, &config)?;
    let curves: Vec<MatchCurve> = reports
        .iter()
        .flat_map(|r| std::iter::once(&r.self_curve).chain(&r.cross_curves))
        .cloned()
        .collect();

    let doc = DiscriminateReport {
        threshold: config.threshold.value(),
        cross_tolerance: config.cross_tolerance,
        partitions: config.num_partitions,
        partition_len: config.partition_len,
        grid: config.grid.into(),
        classes: &reports,
    };
    let curves_path = output_path(args.curves, "discriminate_curves.csv");
    let format = CurveFormat::from_path(&curves_path)?;
    write_json(&doc, &output_path(args.output, "discriminate.json"))?;
    write_curves(&curves, &curves_path, format)?;
    Ok(())
}

fn run_synth(args: SynthArgs) -> Result<()> {
    let series = match args.kind {
        SynthKind::Surrogate => {
            if args.inject.is_some() {
                return Err(CliError::Usage(
                    "--inject applies to --kind noise only".into(),
                ));
            }
            periodic_surrogate(args.class, args.length, args.sample_rate, args.seed)?
        }
        SynthKind::Noise => {
            let noise = gaussian_noise(args.length, args.sigma, args.seed)?
                .with_sample_rate(args.sample_rate)?;
            match (&args.inject, args.alpha) {
                (Some(path), Some(alpha)) => {
                    inject(&noise, load(path)?.samples(), alpha, args.offset)?
                }
                _ => noise,
            }
        }
    };
    write_series(
        &series,
        &SeriesFile::new(output_path(args.output, "synth.csv"))?,
    )?;
    Ok(())
}

fn run_detect_limit(args: DetectLimitArgs) -> Result<()> {
    let template = match &args.template {
        Some(path) => Template::with_uniform_sigma(load(path)?.into_samples(), args.sigma)?,
        None => energy_matched_template(args.template_len, args.delta_alpha, args.sigma)?,
    };
    let config = CoverageConfig {
        alpha: args.alpha,
        trials: args.trials,
        noise_sigma: args.sigma,
        seed: args.seed,
        data_length: args.data_length,
        offset: args.offset,
    };
    let report = coverage_experiment(&template, &config)?;
    write_json(&report, &output_path(args.output, "detect_limit.json"))?;
    Ok(())
}
