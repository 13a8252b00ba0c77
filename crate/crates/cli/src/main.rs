// SPDX-License-Identifier: Apache-2.0

//! `qbattery`: runs charging experiments on disordered spin batteries and
//! writes CSV/JSON results.
//!
//! Exit codes: 0 success, 2 bad configuration, 3 periodic stepper did not
//! converge, 4 an invariant check failed, 1 anything else (I/O).

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "qbattery",
    version,
    about = "Disordered spin quantum-battery simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Ensemble-averaged charging curves for one configuration.
    Run(Common),
    /// `run` repeated over a list of disorder strengths.
    DisorderSweep {
        #[command(flatten)]
        common: Common,
        /// Comma-separated disorder strengths.
        #[arg(long, default_value = "1,2,5")]
        deltas: String,
    },
    /// Hilbert-Schmidt switching costs over a list of disorder strengths.
    CostSweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "1,2,3,4,5,6")]
        deltas: String,
    },
    /// `run` with the periodic field `Ω cos(ω t)`, step-halving certified.
    Periodic(Common),
    /// Cross-checks against closed forms and independent oracles.
    Validate {
        #[arg(long, default_value_t = qbattery::config::DEFAULT_SEED)]
        seed: u64,
        /// Also write `validation.json` here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Configuration sources shared by the experiment subcommands. Every key of
/// the configuration file is also a flag of the same name.
#[derive(Debug, Args)]
struct Common {
    /// `key = value` configuration file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "qbattery-out")]
    out: PathBuf,

    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    preset: Option<String>,
    #[arg(long = "n_sites")]
    n_sites: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    delta: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    j2: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    h: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    omega: Option<String>,
    #[arg(long)]
    drive: Option<String>,
    #[arg(long = "omega_p", allow_hyphen_values = true)]
    omega_p: Option<String>,
    #[arg(long = "n_realizations")]
    n_realizations: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long = "grid.min", allow_hyphen_values = true)]
    grid_min: Option<String>,
    #[arg(long = "grid.max", allow_hyphen_values = true)]
    grid_max: Option<String>,
    #[arg(long = "grid.points")]
    grid_points: Option<String>,
    /// Worker threads (default: all cores).
    #[arg(long, env = "QBATTERY_THREADS")]
    threads: Option<String>,
    /// Midpoint substep for the periodic drive, in units of 1/J0.
    #[arg(long, allow_hyphen_values = true)]
    step: Option<String>,
}

impl Common {
    fn flags(&self) -> Vec<(&'static str, &str)> {
        [
            ("model", &self.model),
            ("preset", &self.preset),
            ("n_sites", &self.n_sites),
            ("delta", &self.delta),
            ("j2", &self.j2),
            ("h", &self.h),
            ("omega", &self.omega),
            ("drive", &self.drive),
            ("omega_p", &self.omega_p),
            ("n_realizations", &self.n_realizations),
            ("seed", &self.seed),
            ("grid.min", &self.grid_min),
            ("grid.max", &self.grid_max),
            ("grid.points", &self.grid_points),
            ("threads", &self.threads),
            ("step", &self.step),
        ]
        .into_iter()
        .filter_map(|(k, v)| v.as_deref().map(|v| (k, v)))
        .collect()
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    use qbattery::Error;
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<Error>() {
            return match e {
                Error::Config { .. } => 2,
                Error::NotConverged { .. } => 3,
                Error::Invariant(_) | Error::VanishingCapability { .. } => 4,
                _ => 1,
            };
        }
        if cause.downcast_ref::<commands::ValidationFailed>().is_some() {
            return 4;
        }
    }
    1
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_target(false)
        .init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(c) => commands::run(c.config.as_deref(), &c.flags(), &c.out),
        Command::DisorderSweep { common: c, deltas } => {
            commands::disorder_sweep(c.config.as_deref(), &c.flags(), &c.out, deltas)
        }
        Command::CostSweep { common: c, deltas } => {
            commands::cost_sweep(c.config.as_deref(), &c.flags(), &c.out, deltas)
        }
        Command::Periodic(c) => commands::periodic(c.config.as_deref(), &c.flags(), &c.out),
        Command::Validate { seed, out } => commands::validate(*seed, out.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
