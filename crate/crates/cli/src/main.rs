use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gup_cli::commands::{self, CliError, OracleArgs};
use gup_cli::config::{FlagOverrides, RunConfig};
use gup_cli::profiles::Profile;
use gup_core::spectra::SeriesForm;

#[derive(Parser)]
#[command(
    name = "gupsim",
    version,
    about = "Langevin ringdown simulator and sideband estimator for a GUP deformation of an oscillator"
)]
struct Cli {
    /// Worker threads (default: all cores)
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct Common {
    /// TOML run configuration
    #[arg(long)]
    config: Option<PathBuf>,
    /// Scenario preset: com, eom1, eom2, omm
    #[arg(long)]
    preset: Option<String>,
    #[arg(long, value_enum)]
    profile: Option<Profile>,
    /// Dimensionless deformation β_NL
    #[arg(long = "beta-nl", allow_negative_numbers = true)]
    beta_nl: Option<f64>,
    /// Deformation β₀, converted with the preset mass and frequency
    #[arg(long, allow_negative_numbers = true)]
    beta0: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Trajectories (simulate, estimate) or repetitions per cell (sweep)
    #[arg(long)]
    trajectories: Option<usize>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
    /// Integration step, in s or with a unit (e.g. "20 ns", "0.01 periods")
    #[arg(long)]
    dt: Option<String>,
    /// Number of analysis windows
    #[arg(long)]
    windows: Option<usize>,
    /// Sideband orders, comma separated
    #[arg(long, value_delimiter = ',')]
    orders: Option<Vec<u32>>,
}

impl Common {
    fn load(&self) -> Result<RunConfig, CliError> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        cfg.apply_flags(&FlagOverrides {
            profile: self.profile,
            preset: self.preset.clone(),
            beta_nl: self.beta_nl,
            beta0: self.beta0,
            seed: self.seed,
            trajectories: self.trajectories,
            out: self.out.clone(),
            dt: self.dt.clone(),
            windows: self.windows,
            orders: self.orders.clone(),
        });
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Integrate trajectories and write them to disk
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Also write trajectory.csv
        #[arg(long)]
        csv: bool,
    },
    /// Calibrate, extract sidebands and fit β
    Estimate {
        #[command(flatten)]
        common: Common,
        /// Directory written by `simulate`; the run is simulated afresh when omitted
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Repeated runs over a grid of presets and β values
    Sweep {
        #[command(flatten)]
        common: Common,
    },
    /// Print the scenario presets and the selected profile
    Presets {
        #[command(flatten)]
        common: Common,
    },
    /// Print analytic spectra and the effective pump force
    Oracle {
        #[command(flatten)]
        common: Common,
        /// Oscillator energy |A|² (default: the desk target)
        #[arg(long = "a-sq")]
        a_sq: Option<f64>,
        /// Highest sideband order
        #[arg(long = "u-max", default_value_t = 9)]
        u_max: u32,
        /// Use the series exactly as printed instead of the sign-corrected one
        #[arg(long = "as-written")]
        as_written: bool,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Validation(format!("--workers: {e}")))?;
    }
    match cli.command {
        Command::Simulate { common, csv } => commands::simulate(&common.load()?, csv).map(|_| ()),
        Command::Estimate { common, input } => {
            commands::estimate(&common.load()?, input.as_deref()).map(|_| ())
        }
        Command::Sweep { common } => commands::sweep(&common.load()?).map(|_| ()),
        Command::Presets { common } => commands::presets(&common.load()?),
        Command::Oracle {
            common,
            a_sq,
            u_max,
            as_written,
        } => commands::oracle(
            &common.load()?,
            OracleArgs {
                a_sq,
                u_max,
                form: if as_written {
                    SeriesForm::AsWritten
                } else {
                    SeriesForm::Corrected
                },
            },
        ),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
