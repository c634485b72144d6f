//! frisk: safety and recovery probabilities for jump-diffusion systems with
//! heavy-tailed noise and fractional memory, by Monte Carlo simulation and
//! by fractional PDE solves, with cross-validation and dataset generation.
//!
//! Exit codes: 0 success, 1 tolerance-gate failure, 2 config/usage error.

mod cmds;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use frisk::solver::RiskKind;

#[derive(Parser)]
#[command(name = "frisk", version, about, long_about = None)]
struct Cli {
    /// Cap the worker-thread count. Reductions are deterministic, so this
    /// never changes any result, only wall-clock time.
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Draw from the 1D standard stable law S(alpha, skew) and report moments.
    SampleStable {
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        skew: f64,
        #[arg(long)]
        n: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write draws to this CSV file instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo risk table for the configured system.
    McRisk {
        #[arg(long)]
        config: PathBuf,
    },
    /// Solve the risk PDE and export the field as CSV.
    SolvePde {
        #[arg(long)]
        config: PathBuf,
        /// Override the config's top-level kind.
        #[arg(long, value_enum)]
        kind: Option<KindArg>,
    },
    /// Solve the PDE, run the MC oracle, and gate on their agreement.
    Compare {
        #[arg(long)]
        config: PathBuf,
    },
    /// Generate an FRSK1 ground-truth dataset.
    GenDataset {
        #[arg(long)]
        config: PathBuf,
    },
    /// Solve the out-of-distribution system on a dataset's geometry and
    /// spot-check it against Monte Carlo.
    OodEval {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long, default_value_t = 50_000)]
        n_paths: u64,
        #[arg(long, default_value_t = 5e-4)]
        ds: f64,
        #[arg(long, default_value_t = 10)]
        points: usize,
        /// Cells per unit length of the enlarged OOD solve domain.
        #[arg(long, default_value_t = 99)]
        resolution: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.03)]
        tol_abs: f64,
        #[arg(long, default_value_t = 3.0)]
        ci_mult: f64,
        #[arg(long, default_value = "ood_report.csv")]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum KindArg {
    Safety,
    Recovery,
}

impl From<KindArg> for RiskKind {
    fn from(k: KindArg) -> RiskKind {
        match k {
            KindArg::Safety => RiskKind::Safety,
            KindArg::Recovery => RiskKind::Recovery,
        }
    }
}

fn run(cmd: Cmd) -> anyhow::Result<bool> {
    match cmd {
        Cmd::SampleStable {
            alpha,
            skew,
            n,
            seed,
            out,
        } => cmds::sample_stable(alpha, skew, n, seed, out),
        Cmd::McRisk { config } => cmds::mc_risk(&config),
        Cmd::SolvePde { config, kind } => cmds::solve_pde(&config, kind.map(RiskKind::from)),
        Cmd::Compare { config } => cmds::compare(&config),
        Cmd::GenDataset { config } => cmds::gen_dataset(&config),
        Cmd::OodEval {
            dataset,
            n_paths,
            ds,
            points,
            resolution,
            seed,
            tol_abs,
            ci_mult,
            out,
        } => cmds::ood_eval(&cmds::OodEvalOptions {
            dataset,
            n_paths,
            ds,
            points,
            resolution,
            seed,
            tol_abs,
            ci_mult,
            out,
        }),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(workers) = cli.workers {
        if rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global()
            .is_err()
        {
            eprintln!("error: could not configure the worker pool");
            return ExitCode::from(2);
        }
    }
    match run(cli.cmd) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
