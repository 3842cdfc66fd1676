//! TOML experiment configuration.
//!
//! ```toml
//! output_dir = "out/beltrami"
//!
//! [grid]
//! n = 32
//! box_length = 6.283185307179586   # optional, default 2π
//! dims = 3
//!
//! [physics]
//! regime = "hall_only"             # full3d | hall_only | two_and_half_d
//! hall_coefficient = 1.0
//!
//! [initial]
//! generator = "beltrami"           # zero | beltrami | random_bandlimited
//! amplitude = 1.0                  # | orszag_tang_2p5d | orszag_tang_3d
//! lambda = 1
//!
//! [step]
//! dt = 1e-3
//! t_end = 0.5
//! # cfl_safety, max_hm_norm, max_hm_growth, spectral_tail_fraction,
//! # hm_order optional
//!
//! [monitor]
//! sample_cadence = 10              # all CriterionConfig fields optional
//!
//! [output]
//! checkpoint_every = 0             # steps; 0 writes the final state only
//!
//! [sweep]                          # optional cartesian product
//! amplitude = [1e-3, 1e-2]
//! n = [16, 32]
//! ```
//!
//! `random_bandlimited` takes `norm`, `target`, `k_min`, `k_max`, `seed`
//! and `populate`; a swept `amplitude` replaces `target`. `[scaling]` with
//! `factor = 2` adds the paired dilated run. `HMHD_OUTPUT_DIR` overrides
//! `output_dir` and nothing else.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::initial::{
    gen_beltrami, gen_orszag_tang_2p5d, gen_orszag_tang_3d, gen_random_bandlimited, InitialData,
    InitialDataError, Populate, TargetNorm,
};
use crate::hall_mhd::{Regime, StepControl};
use crate::monitor::CriterionConfig;
use crate::spectral::{make_grid, Grid};

pub const OUTPUT_DIR_ENV: &str = "HMHD_OUTPUT_DIR";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{0}")]
    Parse(String),
    /// Semantic failure; `line` is 1-based when the key appears in the source.
    #[error("{}{field}: {message}", line.map(|l| format!("line {l}: ")).unwrap_or_default())]
    Invalid { field: String, line: Option<usize>, message: String },
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub n: usize,
    #[serde(default = "two_pi")]
    pub box_length: f64,
    pub dims: usize,
}

fn two_pi() -> f64 {
    2.0 * std::f64::consts::PI
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicsSpec {
    pub regime: Regime,
    pub hall_coefficient: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "generator", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialSpec {
    Zero,
    Beltrami {
        amplitude: f64,
        lambda: u32,
    },
    RandomBandlimited {
        norm: TargetNorm,
        target: f64,
        k_min: f64,
        k_max: f64,
        seed: u64,
        #[serde(default)]
        populate: Populate,
    },
    #[serde(rename = "orszag_tang_2p5d")]
    OrszagTang2p5d {
        amplitude: f64,
    },
    #[serde(rename = "orszag_tang_3d")]
    OrszagTang3d {
        amplitude: f64,
    },
}

impl InitialSpec {
    pub fn generate(&self, grid: &Arc<Grid>) -> Result<InitialData, InitialDataError> {
        match *self {
            InitialSpec::Zero => Ok(InitialData::zero(grid)),
            InitialSpec::Beltrami { amplitude, lambda } => gen_beltrami(grid, amplitude, lambda),
            InitialSpec::RandomBandlimited { norm, target, k_min, k_max, seed, populate } => {
                gen_random_bandlimited(grid, norm, target, k_min, k_max, seed, populate)
            }
            InitialSpec::OrszagTang2p5d { amplitude } => gen_orszag_tang_2p5d(grid, amplitude),
            InitialSpec::OrszagTang3d { amplitude } => gen_orszag_tang_3d(grid, amplitude),
        }
    }

    fn set_amplitude(&mut self, a: f64) -> bool {
        match self {
            InitialSpec::Zero => false,
            InitialSpec::Beltrami { amplitude, .. }
            | InitialSpec::OrszagTang2p5d { amplitude }
            | InitialSpec::OrszagTang3d { amplitude } => {
                *amplitude = a;
                true
            }
            InitialSpec::RandomBandlimited { target, .. } => {
                *target = a;
                true
            }
        }
    }

    fn set_lambda(&mut self, l: u32) -> bool {
        match self {
            InitialSpec::Beltrami { lambda, .. } => {
                *lambda = l;
                true
            }
            _ => false,
        }
    }
}

/// Mirror of [`StepControl`] with optional tuning fields.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepSpec {
    pub dt: f64,
    pub t_end: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cfl_safety: Option<f64>,
    /// Absent means no `H^m` ceiling.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_hm_norm: Option<f64>,
    /// Default 1e6 times the initial `H^m` norm.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_hm_growth: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectral_tail_fraction: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hm_order: Option<u32>,
}

impl StepSpec {
    pub fn control(&self) -> StepControl {
        let mut c = StepControl::new(self.dt, self.t_end);
        if let Some(v) = self.cfl_safety {
            c.cfl_safety = v;
        }
        if let Some(v) = self.max_hm_norm {
            c.max_hm_norm = v;
        }
        if let Some(v) = self.max_hm_growth {
            c.max_hm_growth = v;
        }
        if let Some(v) = self.spectral_tail_fraction {
            c.spectral_tail_fraction = v;
        }
        if let Some(v) = self.hm_order {
            c.hm_order = v;
        }
        c
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    /// Steps between checkpoints; 0 writes only the final state.
    #[serde(default)]
    pub checkpoint_every: usize,
}

/// Paired run with `B₀(λx)` on the same grid up to `t_end/λ²`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalingSpec {
    pub factor: u32,
}

/// Smallness-gate thresholds evaluated on the initial data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sobolev_threshold: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub besov_threshold: Option<f64>,
    /// Empirical constant used in the absorbed a priori quantity.
    #[serde(default = "one")]
    pub c1: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub amplitude: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub n: Vec<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub dt: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub lambda: Vec<u32>,
}

impl SweepSpec {
    pub fn is_empty(&self) -> bool {
        self.amplitude.is_empty() && self.n.is_empty() && self.dt.is_empty() && self.lambda.is_empty()
    }
}

/// One coordinate of a sweep grid; `None` keeps the base value.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<u32>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub output_dir: PathBuf,
    pub grid: GridSpec,
    pub physics: PhysicsSpec,
    pub initial: InitialSpec,
    pub step: StepSpec,
    #[serde(default)]
    pub monitor: MonitorSpec,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gates: Option<GateSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scaling: Option<ScalingSpec>,
    #[serde(default, skip_serializing_if = "SweepSpec::is_empty")]
    pub sweep: SweepSpec,
}

/// [`CriterionConfig`] with every field optional.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonitorSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub serrin_pairs: Option<Vec<(f64, f64)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta_gamma_pairs: Option<Vec<(f64, f64)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_cadence: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hm_order: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lp_exponents: Option<Vec<f64>>,
}

impl MonitorSpec {
    pub fn criterion(&self) -> CriterionConfig {
        let d = CriterionConfig::default();
        CriterionConfig {
            serrin_pairs: self.serrin_pairs.clone().unwrap_or(d.serrin_pairs),
            beta_gamma_pairs: self.beta_gamma_pairs.clone().unwrap_or(d.beta_gamma_pairs),
            sample_cadence: self.sample_cadence.unwrap_or(d.sample_cadence),
            hm_order: self.hm_order.unwrap_or(d.hm_order),
            lp_exponents: self.lp_exponents.clone().unwrap_or(d.lp_exponents),
        }
    }
}

/// 1-based line of the first `key =` assignment in `src`.
fn line_of(src: &str, key: &str) -> Option<usize> {
    src.lines().position(|l| {
        let t = l.trim_start();
        t.strip_prefix(key).is_some_and(|rest| rest.trim_start().starts_with('='))
    })
    .map(|i| i + 1)
}

impl ExperimentConfig {
    /// Parses and validates. Errors carry the line of the offending key.
    pub fn from_toml_str(src: &str) -> Result<Self, ConfigError> {
        let cfg: Self = toml::from_str(src).map_err(|e| ConfigError::Parse(e.to_string()))?;
        cfg.validate().map_err(|e| match e {
            ConfigError::Invalid { field, message, .. } => {
                let key = field.rsplit('.').next().unwrap_or(&field).to_string();
                ConfigError::Invalid { line: line_of(src, &key), field, message }
            }
            other => other,
        })?;
        Ok(cfg)
    }

    /// Reads `path`; `HMHD_OUTPUT_DIR` replaces `output_dir` when set.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let src = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
        let mut cfg = Self::from_toml_str(&src)?;
        if let Some(dir) = std::env::var_os(OUTPUT_DIR_ENV) {
            cfg.output_dir = PathBuf::from(dir);
        }
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    pub fn criterion(&self) -> CriterionConfig {
        self.monitor.criterion()
    }

    pub fn control(&self) -> StepControl {
        self.step.control()
    }

    pub fn make_grid(&self) -> Result<Arc<Grid>, ConfigError> {
        if !matches!(self.grid.dims, 2 | 3) {
            return Err(invalid("grid.dims", format!("must be 2 or 3, got {}", self.grid.dims)));
        }
        make_grid(self.grid.n, self.grid.box_length, self.grid.dims).map_err(|e| invalid("grid.n", e))
    }

    /// Checks every precondition a run will meet, including generating the
    /// initial data once.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let grid = self.make_grid()?;
        if let Some(d) = self.physics.regime.grid_dims() {
            if d != self.grid.dims {
                return Err(invalid(
                    "grid.dims",
                    format!("regime {:?} needs dims = {d}", self.physics.regime),
                ));
            }
        }
        let h = self.physics.hall_coefficient;
        if !(h.is_finite() && h >= 0.0) {
            return Err(invalid("physics.hall_coefficient", format!("must be finite and >= 0, got {h}")));
        }
        self.control().validate().map_err(|e| invalid("step.dt", e))?;
        self.criterion().validate().map_err(|e| invalid("monitor.sample_cadence", e))?;
        if let Some(s) = &self.scaling {
            if s.factor < 2 {
                return Err(invalid("scaling.factor", "must be an integer >= 2"));
            }
            if self.physics.regime != Regime::HallOnly {
                return Err(invalid("scaling.factor", "paired scaling runs need regime = hall_only"));
            }
        }
        for (i, n) in self.sweep.n.iter().enumerate() {
            make_grid(*n, self.grid.box_length, self.grid.dims)
                .map_err(|e| invalid("sweep.n", format!("entry {i}: {e}")))?;
        }
        if let Some(dt) = self.sweep.dt.iter().find(|dt| !(**dt > 0.0 && dt.is_finite())) {
            return Err(invalid("sweep.dt", format!("dt must be positive, got {dt}")));
        }
        let mut probe = self.initial.clone();
        if !self.sweep.amplitude.is_empty() && !probe.set_amplitude(0.0) {
            return Err(invalid("sweep.amplitude", "generator has no amplitude"));
        }
        if !self.sweep.lambda.is_empty() && !probe.set_lambda(1) {
            return Err(invalid("sweep.lambda", "generator has no lambda"));
        }
        let data = self.initial.generate(&grid).map_err(|e| invalid("initial.generator", e))?;
        if matches!(self.physics.regime, Regime::HallOnly) && !data.u0.is_zero() {
            return Err(invalid("physics.regime", "hall_only needs zero velocity data"));
        }
        Ok(())
    }

    /// Cartesian product of the sweep axes, amplitude varying slowest.
    pub fn sweep_points(&self) -> Vec<SweepPoint> {
        fn axis<T: Copy>(v: &[T]) -> Vec<Option<T>> {
            if v.is_empty() {
                vec![None]
            } else {
                v.iter().copied().map(Some).collect()
            }
        }
        let mut out = Vec::new();
        for &amplitude in &axis(&self.sweep.amplitude) {
            for &n in &axis(&self.sweep.n) {
                for &dt in &axis(&self.sweep.dt) {
                    for &lambda in &axis(&self.sweep.lambda) {
                        out.push(SweepPoint { amplitude, n, dt, lambda });
                    }
                }
            }
        }
        out
    }

    /// Single-run config at `point`, writing into `output_dir`.
    pub fn at_point(&self, point: &SweepPoint, output_dir: PathBuf) -> Self {
        let mut c = self.clone();
        c.sweep = SweepSpec::default();
        c.output_dir = output_dir;
        if let Some(a) = point.amplitude {
            c.initial.set_amplitude(a);
        }
        if let Some(n) = point.n {
            c.grid.n = n;
        }
        if let Some(dt) = point.dt {
            c.step.dt = dt;
        }
        if let Some(l) = point.lambda {
            c.initial.set_lambda(l);
        }
        c
    }
}

fn invalid(field: &str, message: impl ToString) -> ConfigError {
    ConfigError::Invalid { field: field.to_string(), line: None, message: message.to_string() }
}
