//! `singlet-pump`: Green's-function tables, pumped-singlet runs, figure
//! sweeps, oracle comparisons and the acceptance suite.

mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use pump_core::{DistributionMode, EvanescentBranch, SignPairing};

use crate::config::RunConfig;
use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "singlet-pump", version, about = "Adiabatic pumping of singlet electron pairs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML run configuration; every key is optional.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file (default: the config's output path, else stdout).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Add the finite-lattice comparison column to `green`.
    #[arg(long, global = true)]
    with_oracle: bool,
    #[arg(long, global = true)]
    mode: Option<ModeArg>,
    #[arg(long, global = true)]
    sign_pairing: Option<PairingArg>,
    #[arg(long, global = true)]
    evanescent_branch: Option<BranchArg>,
    #[arg(long, global = true)]
    eta: Option<f64>,
    #[arg(long, global = true)]
    beta: Option<f64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Tabulate the free two-particle Green's functions (CSV).
    Green,
    /// Pumped singlets per cycle for the configured cycle (JSON).
    Pump,
    /// Footprint sweep over square cycles (CSV).
    Fig2b,
    /// Pumped singlets against the maximum pair energy (CSV).
    Fig3,
    /// Quadrature versus brute-force comparison table (CSV).
    Oracle,
    /// Run the acceptance suite; exit 1 if any criterion fails.
    Validate {
        /// Comma-separated criterion numbers (default: all).
        #[arg(long, value_delimiter = ',')]
        only: Vec<u8>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    #[value(name = "finite_T")]
    FiniteT,
    #[value(name = "zero_T")]
    ZeroT,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PairingArg {
    Printed,
    Alternate,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum BranchArg {
    Keep,
    Drop,
}

fn load(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            RunConfig::parse(&text)?
        }
        None => RunConfig::default(),
    };
    if let Some(mode) = cli.mode {
        cfg.distribution.mode = match mode {
            ModeArg::FiniteT => DistributionMode::FiniteT,
            ModeArg::ZeroT => DistributionMode::ZeroT,
        };
    }
    if let Some(p) = cli.sign_pairing {
        cfg.sensitivity.sign_pairing = match p {
            PairingArg::Printed => SignPairing::Printed,
            PairingArg::Alternate => SignPairing::Alternate,
        };
    }
    if let Some(b) = cli.evanescent_branch {
        cfg.sensitivity.evanescent_branch = match b {
            BranchArg::Keep => EvanescentBranch::Keep,
            BranchArg::Drop => EvanescentBranch::Drop,
        };
    }
    if let Some(eta) = cli.eta {
        cfg.model.eta = eta;
    }
    if let Some(beta) = cli.beta {
        cfg.distribution.beta = beta;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let cfg = load(cli)?;
    let o = &cfg.output;
    let configured = match &cli.command {
        Command::Green => &o.green,
        Command::Pump => &o.pump,
        Command::Fig2b => &o.fig2b,
        Command::Fig3 => &o.fig3,
        Command::Oracle => &o.oracle,
        Command::Validate { .. } => &o.validate,
    };
    let path = cli.out.clone().or_else(|| configured.as_ref().map(PathBuf::from));
    match &cli.command {
        Command::Validate { only } => {
            let json = path.as_deref().map(|p| commands::sink(Some(p))).transpose()?;
            commands::validate(&cfg, only, json)
        }
        command => {
            let out = commands::sink(path.as_deref())?;
            match command {
                Command::Green => commands::green(&cfg, cli.with_oracle, out),
                Command::Pump => commands::pump(&cfg, out),
                Command::Fig2b => commands::fig2b(&cfg, out),
                Command::Fig3 => commands::fig3(&cfg, out),
                _ => commands::oracle(&cfg, out),
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("singlet-pump: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
