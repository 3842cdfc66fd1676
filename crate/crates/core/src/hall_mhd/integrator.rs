use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::rhs::{nonlinear, Nonlinear};
use super::{HallError, SolverState, StepControl};
use crate::lp_besov::sobolev_norm_inhom;
use crate::spectral::{Grid, SpectralField};

/// CFL bound without the safety factor:
/// `min(dx/max|u|, dx/max|B|, dx²/(π² h max|B|))`, infinite terms dropped.
/// Diffusion is integrated exactly and does not restrict `dt`.
pub fn cfl_limit(grid: &Grid, max_u: f64, max_b: f64, hall_coefficient: f64) -> f64 {
    let dx = grid.dx();
    let bound = |num: f64, den: f64| if den > 0.0 { num / den } else { f64::INFINITY };
    bound(dx, max_u)
        .min(bound(dx, max_b))
        .min(bound(dx * dx, PI * PI * hall_coefficient * max_b))
}

/// `(‖u‖²_{H^m} + ‖B‖²_{H^m})^{1/2}`.
pub fn hm_norm(state: &SolverState, m: u32) -> f64 {
    sobolev_norm_inhom(&state.u, m).hypot(sobolev_norm_inhom(&state.b, m))
}

/// Fraction of the non-mean energy of `u` and `B` carried by retained modes
/// in the upper third of the dealiased band, `|k| > (2/3) k_c`.
pub fn spectral_tail_fraction(state: &SolverState) -> f64 {
    let grid = state.grid();
    let edge = (2.0 / 3.0 * grid.dealias_cutoff()).powi(2);
    let len = grid.len();
    let (mut tail, mut total) = (0.0, 0.0);
    for f in [&state.u, &state.b] {
        for chunk in f.coeffs().chunks(len) {
            for (idx, v) in chunk.iter().enumerate() {
                let k2 = grid.k_sq(idx);
                if k2 == 0.0 {
                    continue;
                }
                let e = v.norm_sqr();
                total += e;
                if k2 > edge {
                    tail += e;
                }
            }
        }
    }
    if total == 0.0 {
        0.0
    } else {
        tail / total
    }
}

/// `e^{-|k|² τ}` per lattice point.
fn decay_factors(grid: &Grid, tau: f64) -> Vec<f64> {
    grid.k_sq_all().iter().map(|k2| (-k2 * tau).exp()).collect()
}

/// `ef ⊙ f + a · en ⊙ n`, projected and dealiased.
fn combine(f: &SpectralField, n: &SpectralField, a: f64, ef: &[f64], en: &[f64]) -> SpectralField {
    let len = ef.len();
    let mut out = f.clone();
    for (oc, nc) in out.coeffs_mut().chunks_mut(len).zip(n.coeffs().chunks(len)) {
        for idx in 0..len {
            oc[idx] = oc[idx] * ef[idx] + nc[idx] * (a * en[idx]);
        }
    }
    out.leray_project_in_place();
    out.dealias();
    out
}

/// One integrating-factor RK2 (midpoint) step from precomputed nonlinear
/// terms at `state`:
///
/// ```text
/// f½   = E(dt/2) (f + dt/2 · N(f))
/// f⁽¹⁾ = E(dt) f + dt · E(dt/2) N(f½),      E(τ) = e^{-|k|² τ}
/// ```
fn advance(state: &SolverState, n0: &Nonlinear, dt: f64) -> Result<SolverState, HallError> {
    let grid = state.grid();
    let half = decay_factors(grid, 0.5 * dt);
    let full = decay_factors(grid, dt);

    let u_half = combine(&state.u, &n0.nu, 0.5 * dt, &half, &half);
    let b_half = combine(&state.b, &n0.nb, 0.5 * dt, &half, &half);
    let n1 = nonlinear(&u_half, &b_half, state.regime, state.hall_coefficient)?;

    let u = combine(&state.u, &n1.nu, dt, &full, &half);
    let b = combine(&state.b, &n1.nb, dt, &full, &half);
    let time = state.time + dt;
    if u.has_non_finite() || b.has_non_finite() {
        return Err(HallError::NonFinite { time });
    }
    Ok(SolverState { time, u, b, regime: state.regime, hall_coefficient: state.hall_coefficient })
}

/// Advances `state` by exactly `ctl.dt`. Refuses when `ctl.dt` exceeds the
/// CFL bound at `state`.
pub fn step(state: &SolverState, ctl: &StepControl) -> Result<SolverState, HallError> {
    ctl.validate()?;
    let n0 = nonlinear(&state.u, &state.b, state.regime, state.hall_coefficient)?;
    let required = ctl.cfl_safety * cfl_limit(state.grid(), n0.max_u, n0.max_b, state.hall_coefficient);
    if ctl.dt > required {
        return Err(HallError::CflViolation { dt: ctl.dt, required });
    }
    advance(state, &n0, ctl.dt)
}

/// Why a run stopped.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "cause", rename_all = "snake_case")]
pub enum RunOutcome {
    Completed { time: f64 },
    /// The `H^m` monitor exceeded its threshold or a coefficient became
    /// non-finite. A numerical signal only.
    NumericalBlowup { time: f64 },
    /// The spectral tail exceeded its threshold.
    ResolutionLost { time: f64 },
}

impl RunOutcome {
    pub fn time(&self) -> f64 {
        match *self {
            RunOutcome::Completed { time }
            | RunOutcome::NumericalBlowup { time }
            | RunOutcome::ResolutionLost { time } => time,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            RunOutcome::Completed { .. } => "completed",
            RunOutcome::NumericalBlowup { .. } => "numerical_blowup",
            RunOutcome::ResolutionLost { .. } => "resolution_lost",
        }
    }

    pub fn is_completed(&self) -> bool {
        matches!(self, RunOutcome::Completed { .. })
    }
}

#[derive(Clone, Debug)]
pub struct RunReport {
    pub outcome: RunOutcome,
    pub final_state: SolverState,
    pub steps: usize,
}

pub(super) fn termination(state: &SolverState, ctl: &StepControl, hm0: f64) -> Option<RunOutcome> {
    let time = state.time;
    let hm = hm_norm(state, ctl.hm_order);
    let grown = hm0 > 0.0 && hm > ctl.max_hm_growth * hm0;
    if !hm.is_finite() || hm > ctl.max_hm_norm || grown {
        return Some(RunOutcome::NumericalBlowup { time });
    }
    if spectral_tail_fraction(state) > ctl.spectral_tail_fraction {
        return Some(RunOutcome::ResolutionLost { time });
    }
    None
}

/// Steps `initial` to `ctl.t_end`, shortening steps to the CFL bound and to
/// land exactly on `t_end`. `observe` sees step 0, every `cadence`-th step
/// and the final state.
pub fn run<F>(
    initial: SolverState,
    ctl: &StepControl,
    cadence: usize,
    mut observe: F,
) -> Result<RunReport, HallError>
where
    F: FnMut(usize, &SolverState),
{
    ctl.validate()?;
    initial.validate()?;
    let cadence = cadence.max(1);
    let mut state = initial;
    let mut steps = 0;
    let mut observed = 0;
    let hm0 = hm_norm(&state, ctl.hm_order);
    observe(0, &state);

    let outcome = loop {
        if let Some(o) = termination(&state, ctl, hm0) {
            break o;
        }
        let remaining = ctl.t_end - state.time;
        if remaining <= 1e-12 * ctl.t_end {
            break RunOutcome::Completed { time: state.time };
        }
        let n0 = nonlinear(&state.u, &state.b, state.regime, state.hall_coefficient)?;
        let limit = ctl.cfl_safety * cfl_limit(state.grid(), n0.max_u, n0.max_b, state.hall_coefficient);
        if !(limit > 0.0) {
            break RunOutcome::NumericalBlowup { time: state.time };
        }
        // absorb roundoff in the accumulated time into the final step
        let last = ctl.dt.min(limit) >= remaining * (1.0 - 1e-9);
        let dt = if last { remaining } else { ctl.dt.min(limit) };
        match advance(&state, &n0, dt) {
            Ok(mut next) => {
                if last {
                    next.time = ctl.t_end;
                }
                state = next;
            }
            Err(HallError::NonFinite { time }) => break RunOutcome::NumericalBlowup { time },
            Err(e) => return Err(e),
        }
        steps += 1;
        if steps % cadence == 0 {
            observe(steps, &state);
            observed = steps;
        }
    };
    if observed != steps {
        observe(steps, &state);
    }
    Ok(RunReport { outcome, final_state: state, steps })
}
