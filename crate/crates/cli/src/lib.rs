//! Command-line front end for `sqzhd`.
//!
//! Global flags may also be given through the environment:
//! `SQZHD_CONFIG`, `SQZHD_SEED`, `SQZHD_OUT` and `SQZHD_THREADS`. Flags on
//! the command line win over the environment, which wins over the config
//! file.
//!
//! Exit codes: 0 success, 2 usage or validation error, 3 numeric failure,
//! 4 I/O error.

pub mod commands;
pub mod config;
pub mod error;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::commands::Context;
use crate::config::ExperimentConfig;
use crate::error::{CliError, EXIT_OK};

pub const ENV_PREFIX: &str = "SQZHD_";

#[derive(Debug, Parser)]
#[command(name = "sqzhd", version, about = "Amplified broadband homodyne simulation and analysis")]
pub struct Cli {
    /// TOML experiment configuration.
    #[arg(long, global = true, env = "SQZHD_CONFIG", value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Master seed; overrides the config file.
    #[arg(long, global = true, env = "SQZHD_SEED", value_name = "N")]
    pub seed: Option<u64>,
    /// Output directory; overrides the config file.
    #[arg(long, global = true, env = "SQZHD_OUT", value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Worker threads for frame synthesis and FFTs.
    #[arg(long, global = true, env = "SQZHD_THREADS", value_name = "N")]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Synthesize signal and shot-noise traces.
    Simulate {
        /// Overrides `acquisition.frames`.
        #[arg(long)]
        frames: Option<usize>,
    },
    /// Spectra, levels and histograms of a signal trace against a shot trace.
    Analyze {
        #[arg(long, value_name = "PATH")]
        signal: PathBuf,
        #[arg(long, value_name = "PATH")]
        shot: PathBuf,
    },
    /// Fit the pump-power curve to measured levels.
    Fit {
        /// CSV with columns pump_mw, level_db, branch[, sigma_db].
        #[arg(long, value_name = "PATH")]
        input: PathBuf,
    },
    /// Squeezing against loss added after the amplifier.
    SweepLoss {
        /// Also estimate each point from synthesized traces.
        #[arg(long)]
        monte_carlo: bool,
    },
    /// Sideband-pair frequency plan.
    PlanWdm,
}

fn execute(cli: Cli) -> Result<String, CliError> {
    let mut config = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Command::Simulate { frames: Some(n) } = cli.command {
        config.acquisition.frames = n;
    }
    let ctx = Context::new(config, cli.seed, cli.out.clone());
    let threads = cli.threads.unwrap_or(0);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Validation(format!("thread pool: {e}")))?;
    pool.install(|| run_command(&ctx, &cli.command))
}

fn run_command(ctx: &Context, command: &Command) -> Result<String, CliError> {
    let dir = ctx.out_dir.display();
    Ok(match command {
        Command::Simulate { .. } => {
            let s = commands::cmd_simulate(ctx)?;
            format!(
                "simulated {} frames x {} samples into {dir}; level {:.3} dB (analytic {:.3} dB)",
                s.frames, s.samples_per_frame, s.empirical_level_db, s.analytic_level_db
            )
        }
        Command::Analyze { signal, shot } => {
            let r = commands::cmd_analyze(ctx, signal, shot)?;
            format!(
                "level {:.3} +/- {:.3} dB; plateau {:.3} dB ({:.3} to {:.3}); report in {dir}",
                r.level.level_db,
                r.level.err_db,
                r.plateau.mean_db,
                r.plateau.min_block_db,
                r.plateau.max_block_db
            )
        }
        Command::Fit { input } => {
            let r = commands::cmd_fit(ctx, input)?;
            format!("L = {:.4}, a = {:.4} /W; report in {dir}", r.big_l(), r.a_coeff())
        }
        Command::SweepLoss { monte_carlo } => {
            let rows = commands::cmd_sweep_loss(ctx, *monte_carlo)?;
            format!("{} sweep rows written to {dir}", rows.len())
        }
        Command::PlanWdm => {
            let plan = commands::cmd_plan_wdm(ctx)?;
            match &plan.diagnostic {
                Some(d) => format!("empty plan: {d}"),
                None => format!("{} band pairs written to {dir}", plan.len()),
            }
        }
    })
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(cli) {
        Ok(msg) => {
            println!("{msg}");
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
