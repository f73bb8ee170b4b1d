//! `quatham`: rigid-body simulation, verification suites and rotation
//! conversions from the command line.

mod config;
mod convert;
mod simulate;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use quatham::verify::{run, Suite, VerifyOptions};

#[derive(Debug)]
pub enum CliError {
    /// Bad command-line input.
    Usage(String),
    /// Unreadable or invalid configuration.
    Config(String),
    /// Integration produced a non-finite value at this step.
    Numerical(usize),
    /// Input that is not a valid rotation.
    Geometry(String),
    /// A verification check failed.
    Failed,
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Failed => 1,
            CliError::Usage(_) | CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Geometry(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Numerical(step) => write!(f, "numerical abort: non-finite state at step {step}"),
            CliError::Geometry(m) => write!(f, "invalid geometry: {m}"),
            CliError::Failed => write!(f, "verification failed"),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "quatham", version, about = "Quaternion rigid-body mechanics toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate the body described by a JSON config and write CSV/JSON output.
    Simulate {
        config: PathBuf,
    },
    /// Run a randomized verification suite.
    Verify {
        /// algebra, rotation, brackets, jacobi, poisson_map, maurer_cartan,
        /// symplectic, dynamics_oracle or all
        #[arg(value_parser = parse_suite)]
        suite: Suite,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        points: usize,
        /// Flip one bracket sign in the Jacobi suite's tensors.
        #[arg(long, hide = true)]
        corrupt_tensor: bool,
    },
    /// Convert between a unit quaternion and a rotation matrix.
    Convert {
        #[arg(value_enum)]
        direction: convert::Direction,
        /// 4 (quat2mat) or 9 row-major (mat2quat) reals; read from stdin when absent.
        #[arg(allow_hyphen_values = true, trailing_var_arg = true)]
        values: Vec<String>,
    },
}

fn parse_suite(s: &str) -> Result<Suite, String> {
    s.parse::<Suite>().map_err(|e| e.to_string())
}

fn init_logging() {
    let level = match std::env::var("QH_LOG").ok().as_deref() {
        Some("quiet") => log::LevelFilter::Off,
        Some("info") => log::LevelFilter::Info,
        Some("debug") => log::LevelFilter::Debug,
        _ => log::LevelFilter::Warn,
    };
    env_logger::Builder::new()
        .filter_level(level)
        .format_timestamp(None)
        .target(env_logger::Target::Stderr)
        .init();
    if let Ok(v) = std::env::var("QH_LOG") {
        if !matches!(v.as_str(), "quiet" | "info" | "debug") {
            log::warn!("ignoring QH_LOG={v} (expected quiet, info or debug)");
        }
    }
}

fn cmd_verify(suite: Suite, opts: VerifyOptions) -> Result<(), CliError> {
    let report = run(suite, &opts).map_err(|e| CliError::Usage(e.to_string()))?;
    println!("suite {suite} (seed {}, points {})", opts.seed, opts.points);
    for c in &report.checks {
        println!("{c}");
    }
    let verdict = if report.passed() { "PASS" } else { "FAIL" };
    println!("{verdict} {suite}");
    if report.passed() {
        Ok(())
    } else {
        Err(CliError::Failed)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    init_logging();
    let result = match cli.command {
        Command::Simulate { config } => simulate::cmd_simulate(&config),
        Command::Verify {
            suite,
            seed,
            points,
            corrupt_tensor,
        } => cmd_verify(
            suite,
            VerifyOptions {
                seed,
                points,
                corrupt_tensor,
            },
        ),
        Command::Convert { direction, values } => convert::cmd_convert(direction, &values),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if !matches!(e, CliError::Failed) {
                eprintln!("quatham: {e}");
            }
            ExitCode::from(e.exit_code())
        }
    }
}
