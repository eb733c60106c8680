//! Batch experiment driver for hypergraph Glauber dynamics.
//!
//! Exit codes: 0 success, 1 configuration error, 2 generation or I/O
//! failure, 3 state budget exceeded.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hyperglauber::Error;

#[derive(Parser, Debug)]
#[command(
    name = "hyperglauber",
    version,
    about = "Glauber dynamics on simple k-uniform hypergraphs"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Master seed; replica i derives its sub-seeds as derive_seed(seed, i).
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Destination: instance file (gen-random), instance directory
    /// (gen-blocked), or result payload file (other subcommands; default
    /// stdout).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Output format for result payloads.
    #[arg(long, global = true, default_value = "json")]
    pub format: Format,

    /// Worker threads for replicated runs (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// State budget for the exact-oracle subcommands (maximum q^n).
    #[arg(long, global = true, default_value_t = hyperglauber::oracle::DEFAULT_STATE_BUDGET)]
    pub budget: u64,

    /// Omit the timestamp field so repeated runs are byte-identical.
    #[arg(long, global = true)]
    pub no_timestamp: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate a random simple hypergraph with a degree cap.
    GenRandom(GenRandomArgs),
    /// Generate a blocked instance (hypergraph + frozen proper colouring).
    GenBlocked(GenBlockedArgs),
    /// Run independent chain replicas and report properness/goodness.
    Sample(SampleArgs),
    /// Run maximally coupled chain pairs and report coalescence times.
    Couple(CoupleArgs),
    /// Record a goodness-persistence trace along one trajectory.
    Trace(TraceArgs),
    /// Exact TV-to-stationarity series from the uniform start.
    MixExact(MixExactArgs),
    /// Component structure of the Glauber graph on proper colourings.
    Components(ComponentsArgs),
    /// Evaluate the regime conditions and derived run lengths.
    CheckConditions(CheckConditionsArgs),
    /// One-shot goodness report for an instance and colouring.
    Diagnose(DiagnoseArgs),
}

#[derive(Args, Debug)]
pub struct GenRandomArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub k: usize,
    /// Exact number of edges.
    #[arg(long)]
    pub edges: usize,
    #[arg(long = "max-deg")]
    pub max_deg: usize,
    /// Attempt budget factor (proposals per requested edge).
    #[arg(long, default_value_t = hyperglauber::generate::DEFAULT_ATTEMPT_FACTOR)]
    pub attempts: u64,
}

#[derive(Args, Debug)]
pub struct GenBlockedArgs {
    /// Block size.
    #[arg(long)]
    pub m: usize,
    #[arg(long)]
    pub q: u32,
    #[arg(long)]
    pub k: usize,
    /// Augmentation density scale (rho = scale * eps_k / (qm)^{k-2}).
    #[arg(long)]
    pub augment: Option<f64>,
}

#[derive(Args, Debug)]
pub struct SampleArgs {
    #[arg(long)]
    pub instance: PathBuf,
    /// Start colouring file; omitted means uniform-random starts.
    #[arg(long)]
    pub colouring: Option<PathBuf>,
    /// Number of colours (required without --colouring).
    #[arg(long)]
    pub q: Option<u32>,
    #[arg(long)]
    pub steps: u64,
    #[arg(long, default_value_t = 1)]
    pub replicas: u64,
    /// Record (t, proper?) every this many steps.
    #[arg(long, default_value_t = 0)]
    pub checkpoint_every: u64,
    /// Write replica 0's trajectory as CSV here.
    #[arg(long)]
    pub log: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CoupleArgs {
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long)]
    pub q: u32,
    /// Maximum coupled steps per pair.
    #[arg(long)]
    pub steps: u64,
    #[arg(long, default_value_t = 1)]
    pub replicas: u64,
    /// Accuracy parameter for the reported t_delta = 2n ln(2n/delta).
    #[arg(long, default_value_t = 0.05)]
    pub delta: f64,
    /// Write replica 0's coupled trajectory as CSV here.
    #[arg(long)]
    pub log: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct TraceArgs {
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long)]
    pub colouring: Option<PathBuf>,
    #[arg(long)]
    pub q: Option<u32>,
    #[arg(long)]
    pub steps: u64,
    #[arg(long, default_value_t = 100)]
    pub checkpoints: u64,
}

#[derive(Args, Debug)]
pub struct MixExactArgs {
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long)]
    pub q: u32,
    #[arg(long)]
    pub steps: u64,
}

#[derive(Args, Debug)]
pub struct ComponentsArgs {
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long)]
    pub q: u32,
}

#[derive(Args, Debug)]
pub struct CheckConditionsArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub k: usize,
    #[arg(long)]
    pub q: u32,
    #[arg(long = "max-deg")]
    pub max_deg: usize,
    /// The constant K in q^k >= K n max_deg.
    #[arg(long = "K")]
    pub big_k: u64,
    #[arg(long)]
    pub delta: f64,
}

#[derive(Args, Debug)]
pub struct DiagnoseArgs {
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long)]
    pub colouring: PathBuf,
    /// Goodness scale: 1 (eps) or 2 (2 eps).
    #[arg(long, default_value_t = 1)]
    pub scale: u32,
}

/// A fatal error paired with its exit code.
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn config(message: impl Into<String>) -> Self {
        Self {
            code: 1,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::BudgetExceeded { .. } => 3,
            _ => 2,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version are not errors.
            use clap::error::ErrorKind;
            let kind = e.kind();
            let _ = e.print();
            return if matches!(kind, ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            };
        }
    };

    if let Some(threads) = cli.threads {
        if rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .is_err()
        {
            eprintln!("error: could not configure the thread pool");
            return ExitCode::from(1);
        }
    }

    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
