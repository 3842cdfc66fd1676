//! Divergence-free initial data.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lp_besov::{besov_21, sobolev_norm_hom, NormReport};
use crate::random::{random_band_field, seeded_rng};
use crate::spectral::{Grid, SpectralError, SpectralField};

#[derive(Debug, Error)]
pub enum InitialDataError {
    #[error("{0}")]
    Unsupported(String),
    #[error("target {target} is unreachable: the generated field has zero {norm:?} norm")]
    Unachievable { norm: TargetNorm, target: f64 },
    #[error("initial data not divergence-free: {0:e}")]
    Divergence(f64),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

/// Divergence-free `u₀`, `B₀`.
#[derive(Clone, Debug, PartialEq)]
pub struct InitialData {
    pub u0: SpectralField,
    pub b0: SpectralField,
}

/// Divergence tolerance for generated data, relative to `1 + max|f|`.
pub const INITIAL_DIVERGENCE_TOLERANCE: f64 = 1e-12;

impl InitialData {
    pub fn new(u0: SpectralField, b0: SpectralField) -> Result<Self, InitialDataError> {
        for f in [&u0, &b0] {
            let res = f.divergence()?.max_magnitude();
            if res > INITIAL_DIVERGENCE_TOLERANCE * (1.0 + f.max_magnitude()) {
                return Err(InitialDataError::Divergence(res));
            }
        }
        u0.check_grid(&b0)?;
        Ok(Self { u0, b0 })
    }

    pub fn zero(grid: &Arc<Grid>) -> Self {
        Self { u0: SpectralField::zeros(grid, 3), b0: SpectralField::zeros(grid, 3) }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.u0.grid()
    }

    /// `(u₀, B₀)` norm reports.
    pub fn reports(&self, hm_order: u32, lp: &[f64]) -> Result<(NormReport, NormReport), SpectralError> {
        Ok((NormReport::compute(&self.u0, hm_order, lp)?, NormReport::compute(&self.b0, hm_order, lp)?))
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self { u0: self.u0.scaled(a), b0: self.b0.scaled(a) }
    }
}

/// ABC field with `∇×B = λk₀B` (`k₀ = 2π/L`), `u₀ = 0`:
///
/// ```text
/// B = a (sin λz + cos λy, sin λx + cos λz, sin λy + cos λx)
/// ```
///
/// On a 2D grid the planar Beltrami field `a(0, sin λx, cos λx)` is used.
pub fn gen_beltrami(grid: &Arc<Grid>, amplitude: f64, lambda: u32) -> Result<InitialData, InitialDataError> {
    if lambda == 0 {
        return Err(InitialDataError::Unsupported("lambda must be a positive integer".into()));
    }
    let k = lambda as f64 * grid.fundamental();
    if k > grid.dealias_cutoff() {
        return Err(InitialDataError::Unsupported(format!(
            "lambda = {lambda} exceeds the dealiased band of an n = {} grid",
            grid.n()
        )));
    }
    let a = amplitude;
    let b0 = if grid.dims() == 3 {
        SpectralField::from_fn(grid, 3, |x, o| {
            o[0] = a * ((k * x[2]).sin() + (k * x[1]).cos());
            o[1] = a * ((k * x[0]).sin() + (k * x[2]).cos());
            o[2] = a * ((k * x[1]).sin() + (k * x[0]).cos());
        })
    } else {
        SpectralField::from_fn(grid, 3, |x, o| {
            o[0] = 0.0;
            o[1] = a * (k * x[0]).sin();
            o[2] = a * (k * x[0]).cos();
        })
    };
    InitialData::new(SpectralField::zeros(grid, 3), clean(b0))
}

/// Drops transform roundoff below `1e-15` of the peak coefficient so that
/// trigonometric data is exactly band-limited.
fn clean(mut f: SpectralField) -> SpectralField {
    let cut = 1e-15 * f.max_coeff();
    for v in f.coeffs_mut() {
        if v.norm() <= cut {
            *v = Default::default();
        }
    }
    f
}

/// Norm used to rescale random data. Each is 1-homogeneous in `(u₀, B₀)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetNorm {
    /// `‖u₀‖_{Ḃ^{1/2}_{2,1}} + ‖B₀‖_{Ḃ^{3/2}_{2,1}}`.
    BesovGate,
    /// `‖u₀‖_{Ḣ^{3/2}} + ‖B₀‖_{Ḣ^{3/2}}`.
    SobolevGate,
    /// `‖u₀‖_{Ḃ^{1/2}_{2,1}} + ‖B₀‖_{Ḃ^{1/2}_{2,1}} + ‖B₀‖_{Ḃ^{3/2}_{2,1}}`.
    BesovSum,
    /// `(‖u₀‖²_{L²} + ‖B₀‖²_{L²})^{1/2}`.
    L2,
}

impl TargetNorm {
    pub fn evaluate(self, u: &SpectralField, b: &SpectralField) -> f64 {
        match self {
            TargetNorm::BesovGate => besov_21(u, 0.5) + besov_21(b, 1.5),
            TargetNorm::SobolevGate => sobolev_norm_hom(u, 1.5) + sobolev_norm_hom(b, 1.5),
            TargetNorm::BesovSum => besov_21(u, 0.5) + besov_21(b, 0.5) + besov_21(b, 1.5),
            TargetNorm::L2 => u.l2_norm().hypot(b.l2_norm()),
        }
    }
}

/// Which fields a random generator populates.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Populate {
    #[default]
    Both,
    VelocityOnly,
    MagneticOnly,
}

/// Random projected fields on `k_min <= |k| <= k_max` (in units of the
/// fundamental wavenumber), rescaled so that `norm(u₀, B₀) = target`.
///
/// `u₀` is drawn before `B₀` from one ChaCha20 stream seeded with `seed`;
/// coefficient magnitudes follow `|k|^{-1}`.
pub fn gen_random_bandlimited(
    grid: &Arc<Grid>,
    norm: TargetNorm,
    target: f64,
    k_min: f64,
    k_max: f64,
    seed: u64,
    populate: Populate,
) -> Result<InitialData, InitialDataError> {
    if !(target.is_finite() && target >= 0.0) {
        return Err(InitialDataError::Unsupported(format!("target must be >= 0, got {target}")));
    }
    if !(k_min >= 0.0 && k_max >= k_min) {
        return Err(InitialDataError::Unsupported(format!("empty band [{k_min}, {k_max}]")));
    }
    let k0 = grid.fundamental();
    let (lo, hi) = (k_min.max(1.0) * k0, (k_max * k0).min(grid.dealias_cutoff()));
    let mut rng = seeded_rng(seed);
    let mut u = random_band_field(grid, 3, lo, hi, 1.0, &mut rng);
    let mut b = random_band_field(grid, 3, lo, hi, 1.0, &mut rng);
    u.leray_project_in_place();
    b.leray_project_in_place();
    match populate {
        Populate::Both => {}
        Populate::VelocityOnly => b = SpectralField::zeros(grid, 3),
        Populate::MagneticOnly => u = SpectralField::zeros(grid, 3),
    }
    if target == 0.0 {
        return Ok(InitialData::zero(grid));
    }
    let current = norm.evaluate(&u, &b);
    if !(current > 0.0) {
        return Err(InitialDataError::Unachievable { norm, target });
    }
    let a = target / current;
    InitialData::new(u.scaled(a), b.scaled(a))
}

fn require_dims(grid: &Grid, dims: usize, name: &str) -> Result<(), InitialDataError> {
    if grid.dims() != dims {
        return Err(InitialDataError::Unsupported(format!(
            "{name} needs a {dims}D grid, got {}D",
            grid.dims()
        )));
    }
    Ok(())
}

/// Orszag–Tang vortex with zero third components on a 2D grid:
/// `u = a(−sin y, sin x, 0)`, `B = a(−sin y, sin 2x, 0)`.
pub fn gen_orszag_tang_2p5d(grid: &Arc<Grid>, amplitude: f64) -> Result<InitialData, InitialDataError> {
    require_dims(grid, 2, "orszag_tang_2p5d")?;
    let (a, k) = (amplitude, grid.fundamental());
    let u = SpectralField::from_fn(grid, 3, |x, o| {
        o[0] = -a * (k * x[1]).sin();
        o[1] = a * (k * x[0]).sin();
        o[2] = 0.0;
    });
    let b = SpectralField::from_fn(grid, 3, |x, o| {
        o[0] = -a * (k * x[1]).sin();
        o[1] = a * (2.0 * k * x[0]).sin();
        o[2] = 0.0;
    });
    InitialData::new(clean(u), clean(b))
}

/// Three-dimensional Orszag–Tang-like data:
/// `u = a(−2 sin y, 2 sin x, 0)`,
/// `B = a(−2 sin 2y + sin z, 2 sin x + sin z, sin x + sin y)`.
pub fn gen_orszag_tang_3d(grid: &Arc<Grid>, amplitude: f64) -> Result<InitialData, InitialDataError> {
    require_dims(grid, 3, "orszag_tang_3d")?;
    let (a, k) = (amplitude, grid.fundamental());
    let u = SpectralField::from_fn(grid, 3, |x, o| {
        o[0] = -2.0 * a * (k * x[1]).sin();
        o[1] = 2.0 * a * (k * x[0]).sin();
        o[2] = 0.0;
    });
    let b = SpectralField::from_fn(grid, 3, |x, o| {
        o[0] = a * (-2.0 * (2.0 * k * x[1]).sin() + (k * x[2]).sin());
        o[1] = a * (2.0 * (k * x[0]).sin() + (k * x[2]).sin());
        o[2] = a * ((k * x[0]).sin() + (k * x[1]).sin());
    });
    InitialData::new(clean(u), clean(b))
}
