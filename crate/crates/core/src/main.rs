use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};

use hallmhd::harness::{
    gate_fields, replay, run_experiment, run_sweep, ConfigError, ExperimentConfig, HarnessError, EXIT_CHECK,
    EXIT_CONFIG, EXIT_OK,
};
use hallmhd::lp_besov::run_suite;
use hallmhd::spectral::read_checkpoint;

/// Hall-MHD pseudo-spectral experiments and norm diagnostics.
#[derive(Parser)]
#[command(name = "hmhd", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment from a TOML config.
    Run { config: PathBuf },
    /// Run every point of the config's sweep axes.
    Sweep {
        config: PathBuf,
        /// Worker threads; defaults to the available parallelism.
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Calibrate and re-check the toolbox inequalities on random fields.
    CheckInequalities {
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 20251017)]
        seed: u64,
        /// Independent seeds drawn after the calibration seed.
        #[arg(long, default_value_t = 2)]
        extra_seeds: u64,
    },
    /// Evaluate a smallness gate on a checkpoint.
    Gate {
        checkpoint: PathBuf,
        /// 3 for the Ḣ^{3/2} gate, 4 for the Besov gate.
        #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(["3", "4"]))]
        theorem: String,
        #[arg(long)]
        threshold: f64,
    },
    /// Re-run a stored experiment and compare its ledger.
    Replay { ledger_dir: PathBuf },
}

fn print_json<T: serde::Serialize>(value: &T) -> anyhow::Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn load(path: &PathBuf) -> anyhow::Result<ExperimentConfig> {
    Ok(ExperimentConfig::load(path)?)
}

fn dispatch(cmd: Command) -> anyhow::Result<i32> {
    match cmd {
        Command::Run { config } => {
            let cfg = load(&config)?;
            let summary = run_experiment(&cfg)?;
            print_json(&summary)?;
            Ok(summary.exit_code())
        }
        Command::Sweep { config, workers } => {
            let cfg = load(&config)?;
            let workers = workers
                .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
            let index = run_sweep(&cfg, workers)?;
            print_json(&index)?;
            Ok(index.exit_code())
        }
        Command::CheckInequalities { samples, seed, extra_seeds } => {
            let report = run_suite(samples, seed, extra_seeds)?;
            for v in &report.verdicts {
                println!(
                    "{:<20} C_emp={:<22e} spread={:.4} rerun/C={:.4} independent/C={:.4} {}",
                    v.check.name(),
                    v.calibrated,
                    v.spread,
                    if v.calibrated > 0.0 { v.rerun / v.calibrated } else { 0.0 },
                    v.independent_ratio,
                    if v.passed() { "pass" } else { "FAIL" }
                );
            }
            Ok(if report.passed() { EXIT_OK } else { EXIT_CHECK })
        }
        Command::Gate { checkpoint, theorem, threshold } => {
            let f = File::open(&checkpoint).with_context(|| format!("opening {}", checkpoint.display()))?;
            let ck = read_checkpoint(BufReader::new(f))?;
            let report = gate_fields(&ck.u, &ck.b, theorem == "3", threshold);
            print_json(&report)?;
            Ok(if report.passed() { EXIT_OK } else { EXIT_CHECK })
        }
        Command::Replay { ledger_dir } => {
            let report = replay(&ledger_dir)?;
            print_json(&report)?;
            Ok(if report.identical { EXIT_OK } else { EXIT_CHECK })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            let config = e.downcast_ref::<ConfigError>().is_some()
                || e.downcast_ref::<HarnessError>().is_some_and(HarnessError::is_config);
            if config {
                EXIT_CONFIG
            } else {
                1
            }
        }
    };
    ExitCode::from(code as u8)
}
