//! `sphere-eq`: generate, refine and score point sets on the sphere, fit
//! kernel interpolants and reproduce the discrepancy tables.

mod commands;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use sphere_eq::Error;

/// Exit status for invalid arguments or unsupported requests.
const EXIT_ARGUMENT: u8 = 2;
/// Exit status for singular kernels and ill-conditioned systems.
const EXIT_NUMERICAL: u8 = 3;
/// Exit status for unreadable, unwritable or malformed files.
const EXIT_IO: u8 = 4;

#[derive(Parser, Debug)]
#[command(name = "sphere-eq", version, about = "Equidistributed point sets on the unit sphere")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a point set by greedy kernel minimization or random sampling.
    Generate(GenerateArgs),
    /// Refine a point set with the nearest-neighbor Riesz iteration.
    Refine(RefineArgs),
    /// Score a point set with a kernel discrepancy.
    Score(ScoreArgs),
    /// Fit a kernel interpolant to Franke-function samples at the given centers.
    Interpolate(InterpolateArgs),
    /// Leave-one-out error over a grid of shape parameters.
    Sweep(SweepArgs),
    /// Greedy nodes scored with the Cui-Freeden discrepancy.
    Table1(Table1Args),
    /// Refined random nodes scored with the Cui-Freeden kernel and its derivatives.
    Table2(Table2Args),
    /// Convert between Cartesian (x,y,z) and spherical (theta,phi) CSV.
    Convert(ConvertArgs),
}

#[derive(Args, Debug)]
struct Output {
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<std::path::PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Csv,
    Json,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum GenerateMethod {
    Greedy,
    Random,
}

#[derive(Args, Debug)]
struct GenerateArgs {
    #[arg(long)]
    n: usize,
    /// Kernel minimized by the greedy method.
    #[arg(long, default_value = "pycke")]
    kernel: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Size of the candidate grid.
    #[arg(long, default_value_t = sphere_eq::pointgen::DEFAULT_GRID_SIZE)]
    grid: usize,
    #[arg(long, value_enum, default_value_t = GenerateMethod::Greedy)]
    method: GenerateMethod,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug)]
struct RefineParamsArgs {
    /// Neighbors per point.
    #[arg(long, default_value_t = 12)]
    knn: usize,
    #[arg(long, default_value_t = 200)]
    iters: usize,
    #[arg(long = "riesz-s", default_value_t = 1.0)]
    riesz_s: f64,
    /// Step offset: iteration t moves by Δ/(t + offset).
    #[arg(long, default_value_t = 19.0)]
    offset: f64,
    /// Iterations between neighbor-list rebuilds.
    #[arg(long, default_value_t = 10)]
    refresh: usize,
}

#[derive(Args, Debug)]
struct RefineArgs {
    /// Point set to refine; a random set of `--n` points when absent.
    #[arg(long)]
    input: Option<std::path::PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    params: RefineParamsArgs,
    /// Also write the per-iteration discrepancy as CSV here.
    #[arg(long)]
    history: Option<std::path::PathBuf>,
    #[command(flatten)]
    output: Output,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum ScoreMethod {
    Rms,
    MeanPair,
    Energy,
    Series,
    MinSeries,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Diagonal {
    Include,
    Exclude,
}

#[derive(Args, Debug)]
struct ScoreArgs {
    #[arg(long)]
    input: std::path::PathBuf,
    #[arg(long, default_value = "cui-freeden")]
    kernel: String,
    #[arg(long, value_enum, default_value_t = ScoreMethod::Rms)]
    method: ScoreMethod,
    /// Derivative order for the series method; the highest order tried by min-series.
    #[arg(long, default_value_t = 0)]
    m: usize,
    /// Series truncation degree.
    #[arg(long, default_value_t = 1000)]
    nmax: usize,
    /// Diagonal policy; excluded exactly when the kernel is singular if absent.
    #[arg(long, value_enum)]
    diagonal: Option<Diagonal>,
    #[arg(long)]
    out: Option<std::path::PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args, Debug)]
struct FitArgs {
    #[arg(long, default_value = "cui-freeden")]
    kernel: String,
    #[arg(long, default_value_t = 0.0)]
    sigma: f64,
    /// Polynomial tail degree, -1 for none.
    #[arg(long, default_value_t = sphere_eq::interpolation::DEFAULT_POLY_DEGREE, allow_negative_numbers = true)]
    degree: i32,
}

#[derive(Args, Debug)]
struct InterpolateArgs {
    /// Centers as x,y,z CSV.
    #[arg(long)]
    input: std::path::PathBuf,
    #[arg(long, default_value_t = 1.0)]
    epsilon: f64,
    #[command(flatten)]
    fit: FitArgs,
    /// Model JSON output; standard output when absent.
    #[arg(long)]
    out: Option<std::path::PathBuf>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// Centers as x,y,z CSV; greedy Pycke nodes of `--n` points when absent.
    #[arg(long)]
    input: Option<std::path::PathBuf>,
    #[arg(long, default_value_t = 1000)]
    n: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Candidate grid size for generated centers.
    #[arg(long, default_value_t = sphere_eq::pointgen::DEFAULT_GRID_SIZE)]
    grid: usize,
    /// Shape parameters: `start:stop:step` or a comma list.
    #[arg(long, default_value = "0.5:6:0.01")]
    epsilon: String,
    #[command(flatten)]
    fit: FitArgs,
    #[arg(long)]
    out: Option<std::path::PathBuf>,
}

#[derive(Args, Debug)]
struct TableArgs {
    /// Point counts, comma separated.
    #[arg(long, value_delimiter = ',')]
    n: Vec<usize>,
    /// Seeds; the reported value is the median over seeds.
    #[arg(long, value_delimiter = ',')]
    seed: Vec<u64>,
    #[arg(long)]
    out: Option<std::path::PathBuf>,
}

#[derive(Args, Debug)]
struct Table1Args {
    #[command(flatten)]
    table: TableArgs,
    #[arg(long, default_value_t = sphere_eq::pointgen::DEFAULT_GRID_SIZE)]
    grid: usize,
}

#[derive(Args, Debug)]
struct Table2Args {
    #[command(flatten)]
    table: TableArgs,
    #[command(flatten)]
    params: RefineParamsArgs,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Coordinates {
    Cartesian,
    Spherical,
}

#[derive(Args, Debug)]
struct ConvertArgs {
    #[arg(long)]
    input: std::path::PathBuf,
    /// Target coordinates; the input is read in the other form.
    #[arg(long, value_enum)]
    to: Coordinates,
    #[arg(long)]
    out: Option<std::path::PathBuf>,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Domain(_) | Error::Capability(_) => EXIT_ARGUMENT,
        Error::Singular { .. }
        | Error::SingularPair { .. }
        | Error::Conditioning { .. }
        | Error::Overflow(_)
        | Error::Configuration(_) => EXIT_NUMERICAL,
        Error::Io(_) | Error::Parse { .. } | Error::Validation(_) | Error::Json(_) => EXIT_IO,
    }
}

fn configure_threads() -> Result<(), String> {
    let Ok(value) = std::env::var("SPHERE_EQ_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("SPHERE_EQ_THREADS must be a positive integer, got `{value}`"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return ExitCode::from(EXIT_ARGUMENT);
    }
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
