//! Command-line front end: scenario simulation, metrics, classifier training and
//! classification, session replay, and the live protocol server.

pub mod commands;
pub mod error;
pub mod report;
pub mod scenario;
pub mod serve;

use std::ffi::OsString;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

pub use error::{CliError, CliResult};
pub use report::Format;

#[derive(Debug, Parser)]
#[command(name = "skyhand", version, about = "Gesture-steered drone swarm simulator")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Cmd,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// Configuration file (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Seed for every stochastic stage.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Primary output file.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    /// Report format on stdout.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Debug, Subcommand)]
pub enum Cmd {
    /// Run a scenario; writes the trace to --output and prints its metric report.
    Simulate(SimulateArgs),
    /// Tracing errors of a drawn path against a ground-truth path.
    Metrics(MetricsArgs),
    /// Train the gesture classifier; writes the model to --output.
    Train(TrainArgs),
    /// Classify every frame of a landmark stream.
    Classify(ClassifyArgs),
    /// Serve the live control protocol over WebSocket.
    Serve(ServeArgs),
    /// Replay a recorded session; writes snapshots to --output.
    Replay(ReplayArgs),
    /// Generate a synthetic gesture dataset.
    GenDataset(GenDatasetArgs),
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    /// Smoothing gain for drawn (pixel) paths.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Resample spacing, meters.
    #[arg(long)]
    pub spacing: Option<f64>,
    /// Flight speed along routes, m/s.
    #[arg(long)]
    pub speed: Option<f64>,
    /// Also write the machine-readable report here.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct MetricsArgs {
    #[arg(long)]
    pub drawn: PathBuf,
    #[arg(long)]
    pub truth: PathBuf,
    /// Reported duration, seconds; defaults to the drawn path's time span.
    #[arg(long)]
    pub duration: Option<f64>,
    /// Measure both directions instead of drawn to truth only.
    #[arg(long)]
    pub symmetric: bool,
}

#[derive(Debug, Clone, Args)]
pub struct TrainArgs {
    /// Dataset file; a synthetic set is generated when absent.
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    #[arg(long)]
    pub per_class: Option<usize>,
    #[arg(long)]
    pub noise: Option<f64>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub hidden: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct ClassifyArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Landmark stream (JSON lines).
    pub frames: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct ServeArgs {
    #[arg(long, default_value = "127.0.0.1:8080")]
    pub listen: SocketAddr,
    /// Directory of a UI bundle to host at `/`.
    #[arg(long)]
    pub static_dir: Option<PathBuf>,
    /// Classifier for landmark-frame input.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Simulated seconds per wall-clock second.
    #[arg(long, default_value_t = 1.0)]
    pub rate: f64,
}

#[derive(Debug, Clone, Args)]
pub struct ReplayArgs {
    pub log: PathBuf,
    #[arg(long)]
    pub model: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct GenDatasetArgs {
    #[arg(long, default_value_t = 1000)]
    pub per_class: usize,
    /// Keypoint noise relative to palm size.
    #[arg(long, default_value_t = 0.05)]
    pub noise: f64,
    /// Write a landmark stream instead of the labeled dataset format.
    #[arg(long)]
    pub landmarks: bool,
    /// Only this gesture.
    #[arg(long)]
    pub gesture: Option<String>,
}

/// Parses `args` and runs the selected subcommand; returns the process exit code.
pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    let mut stdout = std::io::stdout().lock();
    match commands::dispatch(&cli, &mut stdout) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
