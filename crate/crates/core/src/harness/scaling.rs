use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::hall_mhd::{run, HallError, Regime, RunOutcome, SolverState, StepControl};
use crate::spectral::{Grid, SpectralField};

/// `f(λx)` on the same grid: the coefficient at frequency `m` moves to `λm`.
/// Modes whose image leaves the lattice or the dealias mask are dropped.
pub fn dilate(f: &SpectralField, lambda: u32) -> SpectralField {
    let grid = f.grid();
    let l = lambda as i64;
    let half = (grid.n() / 2) as i64;
    let mut out = SpectralField::zeros(grid, f.ncomp());
    for idx in 0..grid.len() {
        let m = f.grid().frequency(idx);
        let image = [m[0] * l, m[1] * l, m[2] * l];
        if image.iter().any(|&x| x < -half || x >= half) {
            continue;
        }
        let target = grid.index_of_frequency(image);
        if !grid.is_retained(target) {
            continue;
        }
        for c in 0..f.ncomp() {
            out.component_mut(c)[target] = f.component(c)[idx];
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub factor: u32,
    pub base: RunOutcome,
    pub dilated: RunOutcome,
    pub base_steps: usize,
    pub dilated_steps: usize,
    /// `‖B_λ(T/λ²) − B(λ·, T)‖ / ‖B(λ·, T)‖`.
    pub relative_error: f64,
}

/// Runs the Hall equation from `b0` to `ctl.t_end` and from `b0(λx)` to
/// `t_end/λ²` with `dt/λ²`, then compares the dilated base solution with
/// the second run. Both runs use the same grid.
pub fn scaling_pair(
    grid: &Arc<Grid>,
    b0: &SpectralField,
    hall_coefficient: f64,
    ctl: &StepControl,
    factor: u32,
) -> Result<ScalingReport, HallError> {
    let l2 = (factor * factor) as f64;
    let zero = SpectralField::zeros(grid, 3);
    let a = SolverState::new(zero.clone(), b0.clone(), Regime::HallOnly, hall_coefficient)?;
    let base = run(a, ctl, usize::MAX, |_, _| {})?;
    let b = SolverState::new(zero, dilate(b0, factor), Regime::HallOnly, hall_coefficient)?;
    let mut ctl_b = ctl.clone();
    ctl_b.dt /= l2;
    ctl_b.t_end /= l2;
    let dilated = run(b, &ctl_b, usize::MAX, |_, _| {})?;
    let reference = dilate(&base.final_state.b, factor);
    let diff = dilated.final_state.b.sub(&reference)?;
    let norm = reference.l2_norm();
    Ok(ScalingReport {
        factor,
        base: base.outcome,
        dilated: dilated.outcome,
        base_steps: base.steps,
        dilated_steps: dilated.steps,
        relative_error: if norm > 0.0 { diff.l2_norm() / norm } else { diff.l2_norm() },
    })
}
