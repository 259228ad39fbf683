mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Pair correlation statistics of exponentially growing length spectra.
///
/// Exit codes: 0 success, 1 verification failure, 2 invalid input,
/// 3 resource guard exceeded. `PAIRCORR_BUDGET` overrides the default
/// enumeration and generation budgets.
#[derive(Debug, Parser)]
#[command(name = "paircorr", version)]
pub struct Cli {
    /// Print progress information on stderr.
    #[arg(short, long, global = true)]
    pub verbose: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a spectrum and write it as CSV.
    Generate(GenerateArgs),
    /// Histogram of the pair correlation measure.
    Paircorr(PaircorrArgs),
    /// Fit the growth constants of a spectrum.
    Fit(FitArgs),
    /// Run the verification suites.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Source {
    /// Logarithms of the positive integers.
    LogIntegers,
    /// Inverse of the model counting function `c t^α e^{δt}`.
    Synthetic,
    /// Rose graph with one vertex and `--petals` loops.
    Rose,
    /// Metric graph read from `--graph`.
    Graph,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    pub source: Source,

    #[arg(long)]
    pub lmax: f64,

    #[arg(long, default_value_t = 1.0)]
    pub c: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    pub delta: f64,
    /// Jitter amplitude in [0, 0.5) for synthetic spectra.
    #[arg(long)]
    pub jitter: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    #[arg(long)]
    pub petals: Option<usize>,
    /// Comma-separated petal lengths (defaults to all 1).
    #[arg(long, value_delimiter = ',')]
    pub lengths: Vec<f64>,
    /// Graph description in JSON.
    #[arg(long)]
    pub graph: Option<PathBuf>,

    /// Closed geodesic lengths (default).
    #[arg(long, conflicts_with = "orbits")]
    pub geodesics: bool,
    /// Orbit distances at `--base`.
    #[arg(long)]
    pub orbits: bool,
    #[arg(long, default_value_t = 0)]
    pub base: usize,

    /// Output CSV (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PaircorrArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Truncation `N`.
    #[arg(long)]
    pub ncut: f64,
    /// Truncation bound of the input (defaults to max(last length, ncut)).
    #[arg(long)]
    pub lmax: Option<f64>,
    /// `unit` or `power:<beta>`.
    #[arg(long, default_value = "unit")]
    pub psi: String,
    /// Half-width `A` of the window `[-A, A]`.
    #[arg(long, default_value_t = 5.0)]
    pub window: f64,
    #[arg(long, default_value_t = 0.1)]
    pub bin: f64,
    #[arg(long)]
    pub exclude_diagonal: bool,
    /// Growth constants for the limit overlay: `fit`, inline JSON, or a
    /// path to a JSON file. Defaults to fitted values.
    #[arg(long)]
    pub overlay_params: Option<String>,
    /// Histogram JSON (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Density table CSV `center,density,limit`.
    #[arg(long)]
    pub table: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub lmax: Option<f64>,
    /// Lower end of the sample grid (default 0.3·l_max).
    #[arg(long)]
    pub tmin: Option<f64>,
    /// Upper end of the sample grid (default l_max).
    #[arg(long)]
    pub tmax: Option<f64>,
    #[arg(long, default_value_t = paircorr::asymptotics::DEFAULT_FIT_SAMPLES)]
    pub samples: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// One of geometric-sum, slices, rates, oracle (all when omitted).
    #[arg(long)]
    pub suite: Option<String>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(commands::exit_code(&err))
        }
    }
}
