//! `qcl`: convergence rates, Pareto scans, optimization, simulation and
//! induced-graph spectra for permutation-based quantum consensus networks.

mod commands;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qcl_core::quantum::{Frame, DEFAULT_DT};
use qcl_core::Objective;

use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "qcl", version, about = "Quantum consensus network analysis")]
struct Cli {
    /// Worker threads for parallel scans and optimizer starts.
    #[arg(long, env = "QCL_THREADS", global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Preset name (g1-3, g2-3, g3-3, g1-4) or path to a topology file.
    topology: String,

    /// Qudit dimension; overrides the topology file.
    #[arg(long)]
    d: Option<usize>,

    /// Seed for every random choice.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Args)]
struct WeightArgs {
    /// Values of the free weights, comma separated, in generator order.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    weights: Vec<f64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Per-partition lambda2, consensus and synchronization rates.
    Rates {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        weights: WeightArgs,
    },
    /// Grid scan of the budget simplex, written as CSV.
    Pareto {
        #[command(flatten)]
        common: Common,
        /// Grid points per unit of free budget; default depends on the free weight count.
        #[arg(long)]
        resolution: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Maximize one rate under the budget constraint.
    Optimize {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "consensus")]
        objective: Objective,
        /// Random multistarts.
        #[arg(long, default_value_t = 20)]
        starts: usize,
    },
    /// Integrate the master equation and fit decay rates.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        weights: WeightArgs,
        /// generic, maximally-mixed, basis:<digits> or a path to a matrix file.
        #[arg(long, default_value = "generic")]
        rho0: String,
        /// zero or zsum.
        #[arg(long, default_value = "zero")]
        h0: String,
        #[arg(long, default_value = "lab")]
        frame: Frame,
        /// Final time.
        #[arg(long, default_value_t = 60.0)]
        t: f64,
        #[arg(long, default_value_t = DEFAULT_DT)]
        dt: f64,
        /// Time between recorded samples.
        #[arg(long, default_value_t = 0.1)]
        sample: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Induced Laplacian and spectrum for one partition, or all of them.
    Spectrum {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        weights: WeightArgs,
        /// Partition of N, e.g. 2,1.
        #[arg(long, required_unless_present = "all", conflicts_with = "all")]
        partition: Option<String>,
        /// Every partition plus the spectrum inclusion report.
        #[arg(long)]
        all: bool,
    },
}

fn run(cli: Cli) -> Result<String, CliError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Input(format!("QCL_THREADS: {e}")))?;
    }
    match cli.command {
        Command::Rates { common, weights } => commands::rates(&common.into(), &weights.weights),
        Command::Pareto { common, resolution, out } => commands::pareto(&common.into(), resolution, &out),
        Command::Optimize {
            common,
            objective,
            starts,
        } => commands::optimize(&common.into(), objective, starts),
        Command::Simulate {
            common,
            weights,
            rho0,
            h0,
            frame,
            t,
            dt,
            sample,
            out,
        } => commands::simulate(
            &common.into(),
            &weights.weights,
            &commands::SimulateOptions {
                rho0,
                h0,
                frame,
                t_final: t,
                dt,
                sample,
                out,
            },
        ),
        Command::Spectrum {
            common,
            weights,
            partition,
            all,
        } => commands::spectrum(&common.into(), &weights.weights, partition.as_deref(), all),
    }
}

impl From<Common> for commands::Context {
    fn from(c: Common) -> Self {
        Self {
            topology: c.topology,
            d: c.d,
            seed: c.seed,
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(report) => {
            print!("{report}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            if let CliError::Numerical { report, .. } = &e {
                print!("{report}");
            }
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
