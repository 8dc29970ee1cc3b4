//! `hhllab`: worked example, general solves, noise sweeps and complexity tables.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "hhllab", version, about = "HHL linear-systems laboratory")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Measurement shots for sampled runs.
    #[arg(long, global = true, default_value_t = 4096, value_parser = clap::value_parser!(u64).range(1..))]
    pub shots: u64,
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Backend::Statevector)]
    pub backend: Backend,
    /// Problem JSON: {"A": matrix, "b": vector, "n_clock"?, "t"?, "C"?}.
    #[arg(long, global = true)]
    pub problem: Option<PathBuf>,
    /// Noise-model JSON, or one of `ideal`, `zero`, `reference`.
    #[arg(long, global = true)]
    pub noise: Option<String>,
    /// Output directory; HHLLAB_OUT takes precedence.
    #[arg(long, global = true, default_value = "hhllab-out")]
    pub out: PathBuf,
    #[arg(long, short, global = true)]
    pub quiet: bool,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backend {
    Statevector,
    Density,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Reproduce the 2×2 worked example stage by stage.
    Example,
    /// Solve the system in --problem and verify it classically.
    Solve {
        /// Minimum cosine similarity with the classical solution.
        #[arg(long, default_value_t = 0.99)]
        min_cosine: f64,
    },
    /// Sweep the two-qubit depolarizing rate in both noise modes.
    Sweep {
        /// Grid `start:stop:step` for p_2q.
        #[arg(long, default_value = "0:0.15:0.025")]
        grid: String,
        /// Sample --shots per grid point instead of exact probabilities.
        #[arg(long)]
        sampled: bool,
    },
    /// Unit-constant cost estimates for HHL and classical solvers.
    Complexity {
        #[arg(long, default_value_t = 2)]
        s: u64,
        #[arg(long, default_value_t = 2.0)]
        k: f64,
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
        /// Comma-separated N values; defaults to 2^4 … 2^20.
        #[arg(long, value_delimiter = ',')]
        n: Vec<u64>,
    },
}

impl Common {
    pub fn out_dir(&self) -> PathBuf {
        std::env::var_os("HHLLAB_OUT")
            .filter(|v| !v.is_empty())
            .map_or_else(|| self.out.clone(), PathBuf::from)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
