use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use madd::commands::{self, MaddArgs, PipelineArgs};
use madd::densities::{DEFAULT_BINS, DEFAULT_KDE_BANDWIDTH};
use madd::model::{TrainParams, DEFAULT_RATIOS};
use madd::objective::{DEFAULT_GRID_SIZE, DEFAULT_THETA, DEFAULT_THRESHOLD};
use madd::pipeline::PipelineConfig;
use madd::{MaddError, SimulationSpec};

#[derive(Parser)]
#[command(name = "madd", version, about = "MADD fairness metric and post-processing")]
struct Cli {
    /// Directory for outputs whose path is not given explicitly.
    #[arg(long, global = true, env = "MADD_OUT_DIR", default_value = ".")]
    out_dir: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ObjectiveFlags {
    /// Weight of the fairness loss in the objective.
    #[arg(long, default_value_t = DEFAULT_THETA)]
    theta: f64,
    /// Classification threshold.
    #[arg(long = "t", default_value_t = DEFAULT_THRESHOLD)]
    threshold: f64,
    #[arg(long, default_value_t = DEFAULT_BINS)]
    m: usize,
    /// Number of evenly spaced lambda values over [0, 1].
    #[arg(long, default_value_t = DEFAULT_GRID_SIZE)]
    grid: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Draw predicted probabilities and labels from the two reference densities.
    Simulate {
        #[arg(long, default_value_t = 10_000)]
        n_g0: usize,
        #[arg(long, default_value_t = 10_000)]
        n_g1: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// MADD between the groups of a records file.
    Madd {
        input: PathBuf,
        #[arg(long, default_value_t = DEFAULT_BINS)]
        m: usize,
        /// Write the JSON report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write smoothed plot curves (CSV).
        #[arg(long)]
        kde_out: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_KDE_BANDWIDTH)]
        bandwidth: f64,
    },
    /// Remap probabilities toward the pooled distribution.
    Fip {
        input: PathBuf,
        #[arg(long)]
        lambda: f64,
        #[arg(long, default_value_t = DEFAULT_BINS)]
        m: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate the objective over a lambda grid and report lambda*.
    Sweep {
        input: PathBuf,
        #[command(flatten)]
        objective: ObjectiveFlags,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train, select lambda* on validation, evaluate on test.
    Pipeline {
        input: PathBuf,
        #[arg(long, default_value = "gender")]
        sensitive: String,
        #[arg(long, default_value = "label")]
        label: String,
        #[command(flatten)]
        objective: ObjectiveFlags,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn run(cli: Cli) -> Result<(), MaddError> {
    let dir = cli.out_dir;
    match cli.command {
        Command::Simulate { n_g0, n_g1, seed, out } => {
            let spec = SimulationSpec { n_g0, n_g1, seed, ..Default::default() };
            let out = out.unwrap_or_else(|| dir.join("simulated.csv"));
            let counts = commands::cmd_simulate(&spec, &out)?;
            eprintln!("wrote {} ({} + {} rows)", out.display(), counts.g0, counts.g1);
        }
        Command::Madd { input, m, out, kde_out, bandwidth } => {
            let report = commands::cmd_madd(&MaddArgs {
                input: &input,
                m,
                out: out.as_deref(),
                kde_out: kde_out.as_deref(),
                bandwidth,
            })?;
            if out.is_none() {
                println!("{}", serde_json::to_string_pretty(&report)?);
            }
        }
        Command::Fip { input, lambda, m, out } => {
            let out = out.unwrap_or_else(|| dir.join("fip.csv"));
            commands::cmd_fip(&input, lambda, m, &out)?;
            eprintln!("wrote {}", out.display());
        }
        Command::Sweep { input, objective: o, out } => {
            let config = commands::objective_config(o.theta, o.threshold, o.m, o.grid)?;
            let out = out.unwrap_or_else(|| dir.join("sweep.csv"));
            let report = commands::cmd_sweep(&input, &config, &out)?;
            println!("lambda_star={} min_total_loss={}", report.lambda_star, report.min_total_loss);
        }
        Command::Pipeline { input, sensitive, label, objective: o, seed } => {
            let config = PipelineConfig {
                objective: commands::objective_config(o.theta, o.threshold, o.m, o.grid)?,
                ratios: DEFAULT_RATIOS,
                seed,
                train: TrainParams::default(),
            };
            let report = commands::cmd_pipeline(&PipelineArgs {
                input: &input,
                sensitive: &sensitive,
                label: &label,
                config,
                out_dir: &dir,
            })?;
            println!("{}", serde_json::to_string_pretty(&report)?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("{}", commands::diagnostic(&err));
            ExitCode::from(err.code() as u8)
        }
    }
}
