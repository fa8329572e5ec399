//! `qdot`: runs quantum-dot network experiments from a JSON config.
//!
//! Exit codes: 0 success, 1 invalid input, 2 numerical failure.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use chrono::{SecondsFormat, Utc};
use clap::{Parser, Subcommand};

use crate::commands::SweepParam;
use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::output::{OutputDir, RunManifest, RunRecord};

#[derive(Debug, Parser)]
#[command(name = "qdot", version, about = "Quantum-dot spin network simulations")]
struct Cli {
    /// JSON experiment config; defaults are used for anything missing.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override a config entry by dotted key, e.g. `dot.b_field_t=0.5`.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory (overrides `output_dir`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Monte Carlo size for the command: link trials, readout shots or
    /// repeater trials.
    #[arg(long, global = true)]
    trials: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Conditional-phase gate: phases, trion exposure, emission error.
    Gate,
    /// Phonon spectral density and the excitation error of the off-resonant dot.
    Phonon,
    /// Photon efficiency, link timing and Bell-measurement figures.
    Link,
    /// Cycling-transition readout Monte Carlo.
    Readout,
    /// Repeater chain Monte Carlo.
    Repeater,
    /// Tuning precision, dipole energy and node addressing plan.
    Tune,
    /// One-parameter sweep written as CSV.
    Sweep {
        #[arg(long, value_enum)]
        param: SweepParam,
        #[arg(long, value_delimiter = ',', num_args = 1.., allow_negative_numbers = true)]
        values: Vec<f64>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Gate => "gate",
            Command::Phonon => "phonon",
            Command::Link => "link",
            Command::Readout => "readout",
            Command::Repeater => "repeater",
            Command::Tune => "tune",
            Command::Sweep { .. } => "sweep",
        }
    }
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig, CliError> {
    let mut overrides = cli.overrides.clone();
    if let Some(seed) = cli.seed {
        overrides.push(format!("seed={seed}"));
    }
    if let Some(n) = cli.trials {
        let key = match cli.command {
            Command::Link => "trials.link",
            Command::Readout => "readout.n_shots",
            Command::Repeater => "trials.repeater",
            Command::Sweep {
                param: SweepParam::Threshold,
                ..
            } => "readout.n_shots",
            Command::Sweep {
                param: SweepParam::NLinks,
                ..
            } => "trials.repeater",
            _ => {
                return Err(CliError::Validation(format!(
                    "--trials has no effect on `{}`",
                    cli.command.name()
                )))
            }
        };
        overrides.push(format!("{key}={n}"));
    }
    let mut cfg = ExperimentConfig::load(cli.config.as_deref(), &overrides)?;
    if let Some(out) = &cli.out {
        cfg.output_dir = out.clone();
    }
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<String, CliError> {
    let cfg = load_config(cli)?;
    let started = Utc::now();
    let mut out = OutputDir::create(&cfg.output_dir)?;
    out.json("config.json", &cfg)?;
    let summary = match &cli.command {
        Command::Gate => commands::gate(&cfg, &mut out)?,
        Command::Phonon => commands::phonon(&cfg, &mut out)?,
        Command::Link => commands::link(&cfg, &mut out)?,
        Command::Readout => commands::readout(&cfg, &mut out)?,
        Command::Repeater => commands::repeater(&cfg, &mut out)?,
        Command::Tune => commands::tune(&cfg, &mut out)?,
        Command::Sweep { param, values } => commands::sweep(&cfg, &mut out, *param, values)?,
    };
    let stamp = |t: chrono::DateTime<Utc>| t.to_rfc3339_opts(SecondsFormat::Millis, true);
    let mut manifest = RunManifest::load(out.path());
    manifest.record(
        cli.command.name(),
        RunRecord {
            config_hash: cfg.hash(),
            seed: cfg.seed,
            started_utc: stamp(started),
            finished_utc: stamp(Utc::now()),
            files: out.written().to_vec(),
        },
    );
    manifest.save(out.path())?;
    Ok(format!("{summary}\nresults in {}", out.path().display()))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
