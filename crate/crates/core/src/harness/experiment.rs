use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::config::{ConfigError, ExperimentConfig, GridSpec, InitialSpec, SweepPoint};
use super::initial::InitialDataError;
use super::scaling::{scaling_pair, ScalingReport};
use crate::hall_mhd::{run, HallError, Regime, RunOutcome, SolverState};
use crate::lp_besov::NormReport;
use crate::monitor::{
    apriori_besov_check, energy_ledger_check, smallness_gate_besov, smallness_gate_sobolev, AprioriReport,
    BesovGateResult, CheckStatus, DiagnosticsLedger, EnergyLedgerReport, GateResult, MonitorError,
};
use crate::spectral::{write_checkpoint, SpectralError, SpectralField};

pub const LEDGER_FILE: &str = "ledger.jsonl";
pub const SUMMARY_FILE: &str = "summary.json";
pub const CONFIG_FILE: &str = "config.toml";
pub const INDEX_FILE: &str = "index.json";
pub const FINAL_CHECKPOINT: &str = "checkpoint_final.bin";

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Initial(#[from] InitialDataError),
    #[error(transparent)]
    Hall(#[from] HallError),
    #[error(transparent)]
    Monitor(#[from] MonitorError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl HarnessError {
    /// Config and initial-data failures are configuration errors.
    pub fn is_config(&self) -> bool {
        matches!(self, HarnessError::Config(_) | HarnessError::Initial(_))
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io { path: path.to_path_buf(), source }
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_BLOWUP: i32 = 3;
pub const EXIT_RESOLUTION: i32 = 4;
pub const EXIT_CHECK: i32 = 5;

/// Exact-decay oracle for Beltrami data: `B(t) = e^{−λ²k₀²t} B₀`, `u = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BeltramiOracle {
    pub decay_rate: f64,
    pub max_relative_error: f64,
    pub max_velocity_l2: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub outcome: RunOutcome,
    pub steps: usize,
    pub samples: usize,
    pub grid: GridSpec,
    pub regime: Regime,
    pub hall_coefficient: f64,
    pub initial_u: NormReport,
    pub initial_b: NormReport,
    pub sobolev_gate: Option<GateResult>,
    pub besov_gate: Option<BesovGateResult>,
    pub apriori: Option<AprioriReport>,
    /// Reported only: its bound assumes `O(1)` decay rates.
    pub energy: Option<EnergyLedgerReport>,
    pub max_div_u: f64,
    pub max_div_b: f64,
    /// Largest `|mean(t) − mean(0)|` over components of `u` and `B`.
    pub max_mean_drift: f64,
    /// Largest `|⟨∇×(j×B), B⟩| / (‖j‖‖j×B‖)` over samples.
    pub max_hall_relative: f64,
    pub final_sample: Option<crate::monitor::LedgerSample>,
    pub beltrami: Option<BeltramiOracle>,
    pub scaling: Option<ScalingReport>,
    pub checks_passed: bool,
}

impl ExperimentSummary {
    pub fn exit_code(&self) -> i32 {
        match self.outcome {
            RunOutcome::NumericalBlowup { .. } => EXIT_BLOWUP,
            RunOutcome::ResolutionLost { .. } => EXIT_RESOLUTION,
            RunOutcome::Completed { .. } if !self.checks_passed => EXIT_CHECK,
            RunOutcome::Completed { .. } => EXIT_OK,
        }
    }
}

/// Result of [`execute`]: the ledger and summary, before any file output.
#[derive(Clone, Debug)]
pub struct Experiment {
    pub ledger: DiagnosticsLedger,
    pub summary: ExperimentSummary,
    pub final_state: SolverState,
}

/// Runs `cfg`. When `checkpoint_dir` is set, checkpoints are written there
/// at sampled steps divisible by `output.checkpoint_every`.
pub fn execute(cfg: &ExperimentConfig, checkpoint_dir: Option<&Path>) -> Result<Experiment, HarnessError> {
    cfg.validate()?;
    let grid = cfg.make_grid()?;
    let data = cfg.initial.generate(&grid)?;
    let criterion = cfg.criterion();
    let ctl = cfg.control();
    let h = cfg.physics.hall_coefficient;
    let state = SolverState::new(data.u0.clone(), data.b0.clone(), cfg.physics.regime, h)?;
    let (initial_u, initial_b) = crate::monitor::sample_reports(&state, &criterion)?;

    let beltrami_rate = match cfg.initial {
        InitialSpec::Beltrami { lambda, .. } => Some((lambda as f64 * grid.fundamental()).powi(2)),
        _ => None,
    };
    let mut beltrami = beltrami_rate.map(|decay_rate| BeltramiOracle {
        decay_rate,
        max_relative_error: 0.0,
        max_velocity_l2: 0.0,
    });

    let mut ledger = DiagnosticsLedger::new(criterion.clone())?;
    let mut failure: Option<HarnessError> = None;
    let every = cfg.output.checkpoint_every;
    let report = run(state, &ctl, criterion.sample_cadence, |k, s| {
        if failure.is_some() {
            return;
        }
        if let Err(e) = ledger.sample(k, s) {
            failure = Some(e.into());
            return;
        }
        if let Some(o) = beltrami.as_mut() {
            let exact = data.b0.scaled((-o.decay_rate * s.time).exp());
            let norm = exact.l2_norm();
            let err = s.b.sub(&exact).map(|d| d.l2_norm()).unwrap_or(f64::NAN);
            let rel = if norm > 0.0 { err / norm } else { err };
            o.max_relative_error = o.max_relative_error.max(rel);
            o.max_velocity_l2 = o.max_velocity_l2.max(s.u.l2_norm());
        }
        if let (Some(dir), true) = (checkpoint_dir, every > 0 && k % every.max(1) == 0) {
            let path = dir.join(format!("checkpoint_{k:08}.bin"));
            let res = File::create(&path)
                .map_err(io_err(&path))
                .and_then(|f| write_checkpoint(BufWriter::new(f), &s.to_checkpoint()).map_err(Into::into));
            if let Err(e) = res {
                failure = Some(e);
            }
        }
    })?;
    if let Some(e) = failure {
        return Err(e);
    }

    let gates = cfg.gates.as_ref();
    let sobolev_gate = gates
        .and_then(|g| g.sobolev_threshold)
        .map(|k| smallness_gate_sobolev(&data.u0, &data.b0, k));
    let besov_gate = gates
        .and_then(|g| g.besov_threshold)
        .map(|eps| smallness_gate_besov(&data.u0, &data.b0, eps));
    let apriori = besov_gate.map(|g| apriori_besov_check(&ledger, gates.map_or(1.0, |g| g.c1), g.gate.passed));
    // the trapezoid error of the ledger scales with the sample spacing
    let spacing = ledger
        .samples()
        .windows(2)
        .map(|w| w[1].time - w[0].time)
        .fold(0.0, f64::max);
    let energy = energy_ledger_check(&ledger, spacing.max(ctl.dt.min(ctl.t_end))).ok();

    let samples = ledger.samples();
    let first = samples.first();
    let drift = |s: &crate::monitor::LedgerSample| {
        let f = first.expect("sampled");
        (0..3)
            .map(|i| (s.mean_u[i] - f.mean_u[i]).abs().max((s.mean_b[i] - f.mean_b[i]).abs()))
            .fold(0.0, f64::max)
    };
    let max_hall_relative = samples
        .iter()
        .map(|s| if s.hall_scale > 0.0 { s.hall_pairing.abs() / s.hall_scale } else { 0.0 })
        .fold(0.0, f64::max);

    let scaling = match &cfg.scaling {
        Some(sc) if report.outcome.is_completed() => Some(scaling_pair(&grid, &data.b0, h, &ctl, sc.factor)?),
        _ => None,
    };

    let checks_passed = apriori.map_or(true, |a| a.status != CheckStatus::Failed)
        && beltrami.map_or(true, |b| b.max_relative_error.is_finite());
    let summary = ExperimentSummary {
        outcome: report.outcome,
        steps: report.steps,
        samples: samples.len(),
        grid: cfg.grid.clone(),
        regime: cfg.physics.regime,
        hall_coefficient: h,
        initial_u,
        initial_b,
        sobolev_gate,
        besov_gate,
        apriori,
        energy,
        max_div_u: samples.iter().map(|s| s.div_u).fold(0.0, f64::max),
        max_div_b: samples.iter().map(|s| s.div_b).fold(0.0, f64::max),
        max_mean_drift: samples.iter().map(drift).fold(0.0, f64::max),
        max_hall_relative,
        final_sample: samples.last().cloned(),
        beltrami,
        scaling,
        checks_passed,
    };
    Ok(Experiment { ledger, summary, final_state: report.final_state })
}

fn write_final_checkpoint(dir: &Path, state: &SolverState) -> Result<(), HarnessError> {
    let path = dir.join(FINAL_CHECKPOINT);
    let f = File::create(&path).map_err(io_err(&path))?;
    write_checkpoint(BufWriter::new(f), &state.to_checkpoint())?;
    Ok(())
}

/// Runs `cfg` and writes `config.toml`, `ledger.jsonl`, `summary.json`
/// and checkpoints into `cfg.output_dir`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentSummary, HarnessError> {
    cfg.validate()?;
    let dir = &cfg.output_dir;
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let cfg_path = dir.join(CONFIG_FILE);
    fs::write(&cfg_path, cfg.to_toml_string()).map_err(io_err(&cfg_path))?;
    let exp = execute(cfg, Some(dir))?;
    write_final_checkpoint(dir, &exp.final_state)?;
    let ledger_path = dir.join(LEDGER_FILE);
    let mut w = BufWriter::new(File::create(&ledger_path).map_err(io_err(&ledger_path))?);
    exp.ledger.write_jsonl(&mut w)?;
    w.flush().map_err(io_err(&ledger_path))?;
    write_json(&dir.join(SUMMARY_FILE), &exp.summary)?;
    Ok(exp.summary)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), HarnessError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(io_err(path))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepEntry {
    pub index: usize,
    pub point: SweepPoint,
    pub dir: PathBuf,
    pub exit_code: i32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub outcome: Option<RunOutcome>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepIndex {
    pub points: Vec<SweepEntry>,
}

impl SweepIndex {
    /// Largest exit code over the points.
    pub fn exit_code(&self) -> i32 {
        self.points.iter().map(|p| p.exit_code).max().unwrap_or(EXIT_OK)
    }
}

/// Runs every sweep point in `point_NNNN/` subdirectories on a pool of
/// `workers` threads, then writes `index.json`.
pub fn run_sweep(cfg: &ExperimentConfig, workers: usize) -> Result<SweepIndex, HarnessError> {
    cfg.validate()?;
    let points = cfg.sweep_points();
    fs::create_dir_all(&cfg.output_dir).map_err(io_err(&cfg.output_dir))?;
    let next = AtomicUsize::new(0);
    let results = Mutex::new(vec![None; points.len()]);
    let workers = workers.clamp(1, points.len().max(1));
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(point) = points.get(i) else { break };
                let dir = cfg.output_dir.join(format!("point_{i:04}"));
                let sub = cfg.at_point(point, dir.clone());
                let entry = match run_experiment(&sub) {
                    Ok(s) => SweepEntry {
                        index: i,
                        point: point.clone(),
                        dir,
                        exit_code: s.exit_code(),
                        outcome: Some(s.outcome),
                        error: None,
                    },
                    Err(e) => SweepEntry {
                        index: i,
                        point: point.clone(),
                        dir,
                        exit_code: if e.is_config() { EXIT_CONFIG } else { EXIT_CHECK },
                        outcome: None,
                        error: Some(e.to_string()),
                    },
                };
                results.lock().expect("sweep results")[i] = Some(entry);
            });
        }
    });
    let points = results
        .into_inner()
        .expect("sweep results")
        .into_iter()
        .map(|e| e.expect("every point ran"))
        .collect();
    let index = SweepIndex { points };
    write_json(&cfg.output_dir.join(INDEX_FILE), &index)?;
    Ok(index)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReplayReport {
    pub stored_samples: usize,
    pub replayed_samples: usize,
    /// Index of the first differing JSONL line, if any.
    pub first_mismatch: Option<usize>,
    pub identical: bool,
}

/// Re-runs the `config.toml` stored in `dir` in memory and compares the
/// ledger line by line with the stored `ledger.jsonl`.
pub fn replay(dir: &Path) -> Result<ReplayReport, HarnessError> {
    let cfg_path = dir.join(CONFIG_FILE);
    let src = fs::read_to_string(&cfg_path).map_err(io_err(&cfg_path))?;
    let cfg = ExperimentConfig::from_toml_str(&src)?;
    let ledger_path = dir.join(LEDGER_FILE);
    let stored = fs::read_to_string(&ledger_path).map_err(io_err(&ledger_path))?;
    // the stored file must parse as a ledger
    crate::monitor::read_jsonl(BufReader::new(stored.as_bytes()))?;
    let fresh = execute(&cfg, None)?.ledger.to_jsonl()?;
    let a: Vec<&str> = stored.lines().collect();
    let b: Vec<&str> = fresh.lines().collect();
    let first_mismatch = (0..a.len().max(b.len())).find(|&i| a.get(i) != b.get(i));
    Ok(ReplayReport {
        stored_samples: a.len(),
        replayed_samples: b.len(),
        first_mismatch,
        identical: first_mismatch.is_none(),
    })
}

/// Gate evaluated on a stored state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "gate", rename_all = "snake_case")]
pub enum GateReport {
    Sobolev(GateResult),
    Besov(BesovGateResult),
}

impl GateReport {
    pub fn passed(&self) -> bool {
        match self {
            GateReport::Sobolev(g) => g.passed,
            GateReport::Besov(g) => g.gate.passed,
        }
    }
}

/// `Ḣ^{3/2}` gate (`sobolev = true`) or Besov gate on `(u, B)`.
pub fn gate_fields(u: &SpectralField, b: &SpectralField, sobolev: bool, threshold: f64) -> GateReport {
    if sobolev {
        GateReport::Sobolev(smallness_gate_sobolev(u, b, threshold))
    } else {
        GateReport::Besov(smallness_gate_besov(u, b, threshold))
    }
}
