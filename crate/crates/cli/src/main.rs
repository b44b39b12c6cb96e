//! `fixset` — invariant-set statistics of random permutations from the
//! command line: exact finite-n probabilities, the Poisson-model limit,
//! reproducible Monte Carlo estimators, asymptotic scans with slope fits,
//! and the exact verification suites.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage error, 3 I/O
//! failure.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::Format;

#[derive(Debug)]
pub enum CliError {
    /// Invalid arguments or violated preconditions (exit 2).
    Usage(String),
    /// File system trouble (exit 3).
    Io(String),
    /// A verification suite reported failures (exit 1).
    VerifyFailed,
}

impl From<fixset::Error> for CliError {
    fn from(e: fixset::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

#[derive(Parser)]
#[command(
    name = "fixset",
    version,
    about = "Probabilities that a random permutation fixes a set of a given size",
    after_help = "Conventions: k = 0 and k = n are trivially fixed (probability 1) and are \
                  not computed; all commands require 1 <= k <= n/2, reachable for any k via \
                  the symmetry i(n, n-k) = i(n, k)."
)]
struct Cli {
    /// JSON config file ({"seed", "workers", "format", "limit_dp_extended"})
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Base seed for stochastic commands (default 0)
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads; estimates never depend on this
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// Output format
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Carry limit-DP state probabilities in extended precision
    #[arg(long, global = true)]
    extended_dp: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact probability that a uniform permutation of n points fixes a k-set
    Exact {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        k: u64,
    },
    /// Limiting probability as n grows, by exact DP or Monte Carlo
    Limit {
        #[arg(long)]
        k: u64,
        #[arg(long, value_enum, default_value = "dp")]
        method: commands::LimitMethod,
        #[arg(long, default_value_t = 1_000_000)]
        samples: u64,
    },
    /// Monte Carlo scan over a geometric k grid with n = ratio * k
    Scan {
        #[arg(long)]
        k_min: u64,
        #[arg(long)]
        k_max: u64,
        /// Grid multiplier
        #[arg(long, default_value_t = 2)]
        geometric: u64,
        /// n = ratio * k (ratio >= 2)
        #[arg(long, default_value_t = 2)]
        n_ratio: u64,
        #[arg(long, default_value_t = 200_000)]
        samples: u64,
    },
    /// Least-squares decay exponent of a scan CSV
    Fit {
        #[arg(long, value_name = "PATH")]
        input: PathBuf,
    },
    /// Expected subset-sum-set size of the Poisson cycle counts
    El {
        #[arg(long)]
        k: u64,
        #[arg(long, default_value_t = 1_000_000)]
        samples: u64,
        /// Exact two-sided brackets instead of Monte Carlo (k <= 8)
        #[arg(long)]
        exact: bool,
        /// Weight budget for the exact enumeration (default: auto)
        #[arg(long)]
        cap: Option<usize>,
    },
    /// Monte Carlo estimate of the finite-n fixed-set probability
    Estimate {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        k: u64,
        #[arg(long, default_value_t = 1_000_000)]
        samples: u64,
    },
    /// Run a verification suite; exit 1 if any check fails
    Verify {
        #[arg(long, value_enum)]
        suite: commands::Suite,
        /// Largest n for the no-short-cycle bounds
        #[arg(long, default_value_t = 40)]
        n_max: u64,
        /// Largest n for the exact cycle-count law
        #[arg(long, default_value_t = 12)]
        law_n_max: u64,
        /// Largest n for the cycle-type partition sums
        #[arg(long, default_value_t = 10)]
        cauchy_n_max: u64,
        /// Largest n for the oracle sweep
        #[arg(long, default_value_t = 8)]
        oracle_n_max: u64,
        /// Samples per Monte Carlo check
        #[arg(long, default_value_t = 1_000_000)]
        samples: u64,
        /// Random instances for the rotation-average identity
        #[arg(long, default_value_t = 1000)]
        instances: u64,
        /// Largest dyadic occupancy level to enumerate
        #[arg(long, default_value_t = 4)]
        level_max: usize,
    },
    /// Even-n demonstration: fixing a half-set forces a preserved partition
    Transitive {
        #[arg(long)]
        n: u64,
        #[arg(long, default_value_t = 1_000_000)]
        samples: u64,
    },
    /// Ordered-simplex integral of the prefix-minimum integrand
    Integrand {
        #[arg(long)]
        r: u32,
        #[arg(long)]
        k: u64,
        #[arg(long, default_value_t = 200_000)]
        samples: u64,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(), // usage errors exit 2; --help/--version exit 0
    };
    let config = match config::RunConfig::resolve(
        cli.config.as_deref(),
        cli.seed,
        cli.workers,
        cli.format,
        cli.extended_dp,
    ) {
        Ok(c) => c,
        Err(e) => return fail(e),
    };
    let result = match cli.command {
        Command::Exact { n, k } => commands::exact(&config, n, k),
        Command::Limit { k, method, samples } => commands::limit(&config, k, method, samples),
        Command::Scan {
            k_min,
            k_max,
            geometric,
            n_ratio,
            samples,
        } => commands::scan(&config, k_min, k_max, geometric, n_ratio, samples),
        Command::Fit { input } => commands::fit(&config, &input),
        Command::El {
            k,
            samples,
            exact,
            cap,
        } => commands::el(&config, k, samples, exact, cap),
        Command::Estimate { n, k, samples } => commands::estimate(&config, n, k, samples),
        Command::Verify {
            suite,
            n_max,
            law_n_max,
            cauchy_n_max,
            oracle_n_max,
            samples,
            instances,
            level_max,
        } => commands::verify(
            &config,
            suite,
            commands::VerifyBudgets {
                n_max,
                law_n_max,
                cauchy_n_max,
                oracle_n_max,
                samples,
                instances,
                level_max,
            },
        ),
        Command::Transitive { n, samples } => commands::transitive(&config, n, samples),
        Command::Integrand { r, k, samples } => commands::integrand(&config, r, k, samples),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(e),
    }
}

fn fail(e: CliError) -> ExitCode {
    match e {
        CliError::VerifyFailed => ExitCode::from(1),
        CliError::Usage(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        CliError::Io(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
