//! Command-line front end: argument parsing, exit codes and report output.
//!
//! Every command builds its complete output before anything is written, so
//! error paths leave standard output empty.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use detflow::Error;

mod commands;

/// Exit codes of the `detflow` binary.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const USAGE: i32 = 1;
    pub const PARSE: i32 = 2;
    pub const SEMANTIC: i32 = 3;
    pub const LIMIT: i32 = 4;
    pub const VERIFY: i32 = 5;
}

#[derive(Debug, Parser)]
#[command(
    name = "detflow",
    version,
    about = "Capacities, random relay coding and unfolding for deterministic relay networks"
)]
pub struct Cli {
    /// Write a single canonical JSON report instead of text.
    #[arg(long, global = true)]
    pub json: bool,
    /// Worker threads for internal parallelism; results do not depend on it.
    #[arg(long, global = true, value_parser = clap::value_parser!(u16).range(1..))]
    pub threads: Option<u16>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Min-cut capacity of a linear network.
    Capacity {
        file: PathBuf,
        /// Restrict to one destination (node name).
        #[arg(long)]
        destination: Option<String>,
        /// Print every cut and its value.
        #[arg(long)]
        list_cuts: bool,
    },
    /// Achievable rate under an optimized product distribution.
    Rate {
        file: PathBuf,
        /// `uniform`, `grid:RESOLUTION` or `ascent:RESTARTS`.
        #[arg(long, default_value = "uniform")]
        dist: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Monte-Carlo error rate of the random relay scheme.
    Simulate(SimulateArgs),
    /// Time-expanded network with K channel uses.
    Unfold {
        file: PathBuf,
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        stages: u32,
        /// Write the unfolded document to this path.
        #[arg(long)]
        emit: Option<PathBuf>,
    },
    /// Normalized unfolded min-cut for K = 1..=max-stages.
    Converge {
        file: PathBuf,
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        max_stages: u32,
        /// `rank` (linear only) or `uniform` entropy; defaults by model.
        #[arg(long)]
        engine: Option<String>,
    },
    /// Randomized check of a structural identity or inequality.
    Verify {
        file: PathBuf,
        #[arg(long)]
        suite: detflow::suites::Suite,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Inequality checks fail when their slack is below this value.
        #[arg(long, default_value_t = detflow::submodularity::SLACK_TOLERANCE, allow_negative_numbers = true)]
        min_slack: f64,
    },
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    pub file: PathBuf,
    /// Bits per network use.
    #[arg(long)]
    pub rate: f64,
    #[arg(long)]
    pub block_length: usize,
    #[arg(long)]
    pub trials: u64,
    #[arg(long)]
    pub seed: u64,
    /// Restrict general-model codewords to robust-typical blocks.
    #[arg(long)]
    pub delta: Option<f64>,
}

/// Result of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Failure of a command, already mapped to an exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Syntax { .. } | Error::Schema { .. } => exit::PARSE,
            Error::Limit { .. } => exit::LIMIT,
            Error::Field(_)
            | Error::UnknownNode(_)
            | Error::Invalid(_)
            | Error::NotLayered(_)
            | Error::Model { .. }
            | Error::Precondition(_) => exit::SEMANTIC,
        };
        let message = match &e {
            Error::Invalid(report) => {
                format!("invalid network:\n  {}", report.violations.join("\n  "))
            }
            _ => e.to_string(),
        };
        Failure { code, message }
    }
}

pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                Outcome {
                    code: exit::USAGE,
                    stdout: String::new(),
                    stderr: text,
                }
            } else {
                Outcome {
                    code: exit::SUCCESS,
                    stdout: text,
                    stderr: String::new(),
                }
            };
        }
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        builder = builder.num_threads(n as usize);
    }
    let pool = match builder.build() {
        Ok(p) => p,
        Err(e) => {
            return Outcome {
                code: exit::USAGE,
                stdout: String::new(),
                stderr: format!("error: cannot start worker threads: {e}\n"),
            }
        }
    };
    match pool.install(|| commands::execute(&cli)) {
        Ok((code, stdout)) => Outcome {
            code,
            stdout,
            stderr: String::new(),
        },
        Err(f) => Outcome {
            code: f.code,
            stdout: String::new(),
            stderr: format!("error: {}\n", f.message),
        },
    }
}
