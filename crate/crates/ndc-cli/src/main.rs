use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use ndc_cli::{parse_scenario, run_figures, run_scenario, Mode, RunError};

/// Coincidence-timing densities for entangled photons and classical pulses
/// in dispersive media.
#[derive(Parser)]
#[command(name = "ndc", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Suppress progress messages.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run the scenario described by a config file.
    Run {
        /// Path to the scenario config.
        config: PathBuf,
        /// Output directory for CSV and report files.
        #[arg(long)]
        out: PathBuf,
        /// Override the scenario normalization (peak, integral or none).
        #[arg(long)]
        normalize: Option<String>,
        /// Additionally run the matching numeric oracle and emit diffs.
        #[arg(long)]
        oracle: bool,
    },
    /// Run the config's parameters in quantum-versus-classical compare mode.
    Compare {
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        normalize: Option<String>,
        #[arg(long)]
        oracle: bool,
    },
    /// Emit the pre-baked figure parameter sets (3, 4 or 5).
    Figures {
        #[arg(long = "paper-set")]
        paper_set: u8,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                AppError::Validation(_) => ExitCode::from(1),
                AppError::Computation(_) => ExitCode::from(2),
            }
        }
    }
}

enum AppError {
    Validation(String),
    Computation(String),
}

impl std::fmt::Display for AppError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AppError::Validation(m) | AppError::Computation(m) => f.write_str(m),
        }
    }
}

impl From<RunError> for AppError {
    fn from(e: RunError) -> Self {
        match e {
            RunError::Validation(_) => AppError::Validation(e.to_string()),
            RunError::Computation(_) | RunError::Io(_) => AppError::Computation(e.to_string()),
        }
    }
}

fn execute(cli: Cli) -> Result<(), AppError> {
    match cli.command {
        Command::Run {
            config,
            out,
            normalize,
            oracle,
        } => {
            let scenario = load_scenario(&config, normalize.as_deref(), oracle, None)?;
            run_scenario(&scenario, &out, cli.quiet)?;
            Ok(())
        }
        Command::Compare {
            config,
            out,
            normalize,
            oracle,
        } => {
            let scenario = load_scenario(&config, normalize.as_deref(), oracle, Some(Mode::Compare))?;
            run_scenario(&scenario, &out, cli.quiet)?;
            Ok(())
        }
        Command::Figures { paper_set, out } => {
            run_figures(paper_set, &out, cli.quiet)?;
            Ok(())
        }
    }
}

fn load_scenario(
    config: &PathBuf,
    normalize: Option<&str>,
    oracle: bool,
    mode_override: Option<Mode>,
) -> Result<ndc_cli::Scenario, AppError> {
    let text = fs::read_to_string(config).map_err(|e| {
        AppError::Validation(format!("cannot read config {}: {e}", config.display()))
    })?;
    let mut scenario =
        parse_scenario(&text).map_err(|e| AppError::Validation(e.to_string()))?;
    if let Some(mode) = mode_override {
        if scenario.source.n_photons() != 3 {
            return Err(AppError::Validation(format!(
                "compare requires n_photons = 3, got {}",
                scenario.source.n_photons()
            )));
        }
        scenario.mode = mode;
    }
    if let Some(norm) = normalize {
        scenario.normalization = norm
            .parse()
            .map_err(|e: ndc_core::Error| AppError::Validation(e.to_string()))?;
    }
    if oracle {
        if scenario.mode == Mode::Nphoton && scenario.source.n_photons() != 3 {
            return Err(AppError::Validation(
                "oracle_check is only available for nphoton with n_photons = 3".to_string(),
            ));
        }
        scenario.oracle_check = true;
    }
    Ok(scenario)
}
