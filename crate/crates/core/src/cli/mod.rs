//! Command-line front end.
//!
//! Exit codes: 0 success or definite verdict, 1 configuration or runtime
//! failure, 2 indeterminate verdict, 3 period map not converged.

pub mod commands;
pub mod config;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use commands::{EXIT_FAILURE, EXIT_INDETERMINATE, EXIT_NO_CONVERGENCE, EXIT_OK};
pub use config::{parse_config, ConfigError, RawConfig, ScenarioConfig};

#[derive(Debug, Parser)]
#[command(name = "chemolab", version, about = "Two-species chemotaxis competition laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate every hypothesis and derived bound for a scenario.
    Check { config: PathBuf },
    /// Run the scenario and write sampled extrema and masses as CSV.
    Simulate {
        config: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Simulate and classify the long-time behaviour.
    Classify { config: PathBuf },
    /// Compute a periodic state by iterating the period map.
    Poincare {
        config: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Classify the scenario once per value of one setting.
    Sweep {
        config: PathBuf,
        #[arg(long)]
        key: String,
        /// Comma-separated; may be empty.
        #[arg(long, value_delimiter = ',', num_args = 1, allow_hyphen_values = true)]
        values: Vec<String>,
        #[arg(short, long)]
        output: PathBuf,
    },
}

fn load_raw(path: &PathBuf) -> Result<RawConfig, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    RawConfig::parse(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn load(path: &PathBuf) -> Result<ScenarioConfig, String> {
    load_raw(path)?
        .to_config()
        .map_err(|e| format!("{}: {e}", path.display()))
}

/// Parses `args` (program name first) and runs the chosen subcommand.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(err, "{e}");
            return if e.use_stderr() { EXIT_FAILURE } else { EXIT_OK };
        }
    };
    let config_error = |err: &mut dyn Write, e: String| {
        let _ = writeln!(err, "config error: {e}");
        EXIT_FAILURE
    };
    match cli.command {
        Command::Check { config } => match load(&config) {
            Ok(cfg) => commands::cmd_check(&cfg, out, err),
            Err(e) => config_error(err, e),
        },
        Command::Simulate { config, output } => match load(&config) {
            Ok(cfg) => commands::cmd_simulate(&cfg, &output, err),
            Err(e) => config_error(err, e),
        },
        Command::Classify { config } => match load(&config) {
            Ok(cfg) => commands::cmd_classify(&cfg, out, err),
            Err(e) => config_error(err, e),
        },
        Command::Poincare { config, output } => match load(&config) {
            Ok(cfg) => commands::cmd_poincare(&cfg, &output, out, err),
            Err(e) => config_error(err, e),
        },
        Command::Sweep {
            config,
            key,
            values,
            output,
        } => match load(&config).and_then(|_| load_raw(&config)) {
            Ok(raw) => {
                let values: Vec<String> = values
                    .into_iter()
                    .map(|v| v.trim().to_string())
                    .filter(|v| !v.is_empty())
                    .collect();
                commands::cmd_sweep(&raw, &key, &values, &output, err)
            }
            Err(e) => config_error(err, e),
        },
    }
}
