//! `nlab`: batch front end over the two-resonator Gaussian laboratory.
//!
//! Exit codes: 0 success, 2 unstable model (no steady state), 3 integrator
//! failure, 4 unknown figure index, 1 configuration or I/O errors.

mod config;
mod figures;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{read_json, EvolveConfig, SteadyConfig, SweepConfig};
use run::{run_evolve, run_steady, run_sweep, write_file, CmdError};

#[derive(Parser)]
#[command(
    name = "nlab",
    about = "Steady states, trajectories, parameter sweeps, and figure datasets \
             for two mechanical resonators coupled through a feedback cavity"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(clap::Args)]
struct CommonArgs {
    /// JSON configuration document.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (created if missing).
    #[arg(long)]
    out: PathBuf,
    /// Optimizer seed; a seed inside the config takes precedence.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads for sweeps and per-sample Bell optimization.
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve one steady state and report its measures as CSV.
    Steady(CommonArgs),
    /// Integrate a covariance trajectory and report measures per sample.
    Evolve(CommonArgs),
    /// Grid sweep over one or two parameters.
    Sweep(CommonArgs),
    /// Regenerate a built-in figure dataset (1..=5).
    Figure {
        /// Figure index.
        index: u32,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        workers: Option<usize>,
        /// Override the per-axis grid count of sweep figures.
        #[arg(long)]
        grid: Option<usize>,
        /// Override the sample count of trajectory figures.
        #[arg(long)]
        samples: Option<usize>,
    },
}

fn init_workers(workers: Option<usize>) {
    if let Some(n) = workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .expect("worker pool initializes once");
    }
}

fn dispatch(cli: Cli) -> Result<(), CmdError> {
    match cli.cmd {
        Cmd::Steady(args) => {
            init_workers(args.workers);
            let cfg: SteadyConfig =
                read_json(&args.config).map_err(|e| CmdError::Other(e.to_string()))?;
            let out = run_steady(&cfg, args.seed)?;
            write_file(&args.out, "steady.csv", &out.csv)?;
            for (name, doc) in &out.bell_json {
                write_file(&args.out, name, doc)?;
            }
            eprintln!("wrote steady.csv");
            Ok(())
        }
        Cmd::Evolve(args) => {
            init_workers(args.workers);
            let cfg: EvolveConfig =
                read_json(&args.config).map_err(|e| CmdError::Other(e.to_string()))?;
            let out = run_evolve(&cfg, args.seed)?;
            write_file(&args.out, "trajectory.csv", &out.trajectory_csv)?;
            write_file(&args.out, "measures.csv", &out.measures_csv)?;
            eprintln!("wrote trajectory.csv and measures.csv");
            Ok(())
        }
        Cmd::Sweep(args) => {
            init_workers(args.workers);
            let cfg: SweepConfig =
                read_json(&args.config).map_err(|e| CmdError::Other(e.to_string()))?;
            let out = run_sweep(&cfg, args.seed)?;
            write_file(&args.out, "sweep.csv", &out.csv)?;
            eprintln!("wrote sweep.csv ({} points, {} stable)", out.n_points, out.n_stable);
            Ok(())
        }
        Cmd::Figure {
            index,
            out,
            seed,
            workers,
            grid,
            samples,
        } => {
            init_workers(workers);
            figures::run_figure(index, seed, grid, samples, &out)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            // clap renders help/version itself; usage errors exit 1.
            let is_help = matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            );
            let _ = e.print();
            return if is_help {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            };
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
