//! Time integration of incompressible resistive Hall-MHD,
//!
//! ```text
//! ∂ₜu + (u·∇)u − (B·∇)B + ∇π = Δu,           ∇·u = 0,
//! ∂ₜB + (u·∇)B − (B·∇)u + h ∇×((∇×B)×B) = ΔB,  ∇·B = 0,
//! ```
//!
//! on a periodic box, together with the pure Hall equation (`u ≡ 0`) and
//! the 2½D system (three components depending on `(x₁, x₂)` only). Viscosity
//! and resistivity are fixed to 1. The pressure is removed by the Leray
//! projection and never stored.

mod integrator;
mod rhs;

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use integrator::{cfl_limit, hm_norm, run, spectral_tail_fraction, step, RunOutcome, RunReport};
pub use rhs::{
    hall_neutrality, hall_term, hall_term_explicit, rhs_2p5d, rhs_full, rhs_hall_only, total_pressure,
    HallNeutrality,
};

use crate::spectral::{Checkpoint, Grid, SpectralError, SpectralField};

#[derive(Debug, Error)]
pub enum HallError {
    #[error("regime mismatch: {0}")]
    RegimeMismatch(String),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("invalid step control: {0}")]
    InvalidControl(String),
    #[error("time step {dt} exceeds the CFL bound; required dt <= {required}")]
    CflViolation { dt: f64, required: f64 },
    #[error("non-finite coefficient at t = {time}")]
    NonFinite { time: f64 },
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// Full 3D Hall-MHD.
    #[serde(rename = "full3d")]
    Full3D,
    /// Pure Hall equation, `u ≡ 0`.
    HallOnly,
    /// Three-component fields on a 2D grid.
    TwoAndHalfD,
}

impl Regime {
    /// Tag stored in checkpoint headers.
    pub fn tag(self) -> u8 {
        match self {
            Regime::Full3D => 0,
            Regime::HallOnly => 1,
            Regime::TwoAndHalfD => 2,
        }
    }

    pub fn from_tag(tag: u8) -> Option<Regime> {
        match tag {
            0 => Some(Regime::Full3D),
            1 => Some(Regime::HallOnly),
            2 => Some(Regime::TwoAndHalfD),
            _ => None,
        }
    }

    /// Spatial dimension of the grid the regime runs on, if fixed.
    pub fn grid_dims(self) -> Option<usize> {
        match self {
            Regime::Full3D => Some(3),
            Regime::TwoAndHalfD => Some(2),
            Regime::HallOnly => None,
        }
    }
}

/// Divergence tolerance for accepted states, relative to `1 + max|f|`.
pub const DIVERGENCE_TOLERANCE: f64 = 1e-11;

#[derive(Clone, Debug, PartialEq)]
pub struct SolverState {
    pub time: f64,
    pub u: SpectralField,
    pub b: SpectralField,
    pub regime: Regime,
    /// Coefficient of the Hall term; 1 is Hall-MHD, 0 is usual MHD.
    pub hall_coefficient: f64,
}

impl SolverState {
    /// Validated state at `time = 0`.
    pub fn new(
        u: SpectralField,
        b: SpectralField,
        regime: Regime,
        hall_coefficient: f64,
    ) -> Result<Self, HallError> {
        let s = Self { time: 0.0, u, b, regime, hall_coefficient };
        s.validate()?;
        Ok(s)
    }

    /// Zero fields on `grid`.
    pub fn zero(grid: &Arc<Grid>, regime: Regime, hall_coefficient: f64) -> Result<Self, HallError> {
        Self::new(SpectralField::zeros(grid, 3), SpectralField::zeros(grid, 3), regime, hall_coefficient)
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.u.grid()
    }

    pub fn validate(&self) -> Result<(), HallError> {
        if self.u.ncomp() != 3 || self.b.ncomp() != 3 {
            return Err(HallError::InvalidState("u and B must have 3 components".into()));
        }
        self.u.check_grid(&self.b)?;
        if !(self.hall_coefficient.is_finite() && self.hall_coefficient >= 0.0) {
            return Err(HallError::InvalidState(format!(
                "hall_coefficient must be finite and >= 0, got {}",
                self.hall_coefficient
            )));
        }
        if !(self.time.is_finite() && self.time >= 0.0) {
            return Err(HallError::InvalidState(format!("time must be >= 0, got {}", self.time)));
        }
        check_regime_grid(self.regime, self.grid())?;
        if self.regime == Regime::HallOnly && !self.u.is_zero() {
            return Err(HallError::RegimeMismatch("HallOnly requires u = 0".into()));
        }
        if self.u.has_non_finite() || self.b.has_non_finite() {
            return Err(HallError::NonFinite { time: self.time });
        }
        for (name, f) in [("u", &self.u), ("B", &self.b)] {
            let res = divergence_residual(f);
            let tol = DIVERGENCE_TOLERANCE * (1.0 + f.max_magnitude());
            if res > tol {
                return Err(HallError::InvalidState(format!(
                    "div {name} = {res:e} exceeds {tol:e}"
                )));
            }
        }
        Ok(())
    }

    /// Kinetic plus magnetic energy `½(‖u‖² + ‖B‖²)`.
    pub fn energy(&self) -> f64 {
        0.5 * (self.u.l2_norm().powi(2) + self.b.l2_norm().powi(2))
    }

    pub fn to_checkpoint(&self) -> Checkpoint {
        Checkpoint {
            time: self.time,
            regime_tag: self.regime.tag(),
            u: self.u.clone(),
            b: self.b.clone(),
        }
    }

    /// Restores a state; the Hall coefficient is not part of the checkpoint.
    pub fn from_checkpoint(ck: Checkpoint, hall_coefficient: f64) -> Result<Self, HallError> {
        let regime = Regime::from_tag(ck.regime_tag).ok_or_else(|| {
            HallError::InvalidState(format!("unknown regime tag {}", ck.regime_tag))
        })?;
        let s = Self { time: ck.time, u: ck.u, b: ck.b, regime, hall_coefficient };
        s.validate()?;
        Ok(s)
    }
}

fn check_regime_grid(regime: Regime, grid: &Grid) -> Result<(), HallError> {
    match regime.grid_dims() {
        Some(d) if d != grid.dims() => Err(HallError::RegimeMismatch(format!(
            "{regime:?} runs on a {d}D grid, got {}D",
            grid.dims()
        ))),
        _ => Ok(()),
    }
}

/// `max_x |∇·f(x)|` on the grid.
pub fn divergence_residual(f: &SpectralField) -> f64 {
    match f.divergence() {
        Ok(d) => d.max_magnitude(),
        Err(_) => f64::NAN,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepControl {
    pub dt: f64,
    pub t_end: f64,
    pub cfl_safety: f64,
    /// Numerical blow-up threshold on `(‖u‖²_{H^m} + ‖B‖²_{H^m})^{1/2}`.
    pub max_hm_norm: f64,
    /// Blow-up is also declared once the `H^m` norm exceeds this multiple
    /// of its initial value.
    pub max_hm_growth: f64,
    /// Resolution is lost once this fraction of the energy sits in the
    /// upper third of the retained wavenumbers.
    pub spectral_tail_fraction: f64,
    /// Order `m` of the blow-up monitor norm.
    pub hm_order: u32,
}

impl StepControl {
    pub fn new(dt: f64, t_end: f64) -> Self {
        Self {
            dt,
            t_end,
            cfl_safety: 0.9,
            max_hm_norm: f64::INFINITY,
            max_hm_growth: 1e6,
            spectral_tail_fraction: 0.01,
            hm_order: 3,
        }
    }

    pub fn validate(&self) -> Result<(), HallError> {
        let bad = |m: String| Err(HallError::InvalidControl(m));
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.t_end.is_finite() && self.t_end > 0.0) {
            return bad(format!("t_end must be positive, got {}", self.t_end));
        }
        if !(self.cfl_safety > 0.0 && self.cfl_safety <= 1.0) {
            return bad(format!("cfl_safety must be in (0, 1], got {}", self.cfl_safety));
        }
        if !(self.max_hm_norm > 0.0) {
            return bad(format!("max_hm_norm must be positive, got {}", self.max_hm_norm));
        }
        if !(self.max_hm_growth > 1.0) {
            return bad(format!("max_hm_growth must exceed 1, got {}", self.max_hm_growth));
        }
        if !(self.spectral_tail_fraction > 0.0 && self.spectral_tail_fraction <= 1.0) {
            return bad(format!(
                "spectral_tail_fraction must be in (0, 1], got {}",
                self.spectral_tail_fraction
            ));
        }
        Ok(())
    }
}
