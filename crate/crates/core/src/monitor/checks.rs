use serde::{Deserialize, Serialize};

use super::ledger::DiagnosticsLedger;
use super::MonitorError;
use crate::lp_besov::{besov_21, sobolev_norm_hom};
use crate::spectral::SpectralField;

/// Outcome of a smallness gate `value < threshold`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateResult {
    pub value: f64,
    pub threshold: f64,
    /// `threshold − value`; positive when the gate passes.
    pub margin: f64,
    pub passed: bool,
}

impl GateResult {
    fn new(value: f64, threshold: f64) -> Self {
        Self { value, threshold, margin: threshold - value, passed: value < threshold }
    }
}

/// `‖u₀‖_{Ḣ^{3/2}} + ‖B₀‖_{Ḣ^{3/2}} < K`.
pub fn smallness_gate_sobolev(u0: &SpectralField, b0: &SpectralField, k: f64) -> GateResult {
    GateResult::new(sobolev_norm_hom(u0, 1.5) + sobolev_norm_hom(b0, 1.5), k)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BesovGateResult {
    /// `‖u₀‖_{Ḃ^{1/2}_{2,1}} + ‖B₀‖_{Ḃ^{3/2}_{2,1}} < ε`.
    pub gate: GateResult,
    /// `‖B₀‖_{Ḃ^{1/2}_{2,1}}`.
    pub b_half: f64,
    /// `‖B₀‖^{1/3}_{Ḃ^{3/2}_{2,1}} ‖B₀‖^{2/3}_{L²}`.
    pub interpolation_bound: f64,
    /// `b_half / interpolation_bound`, 0 for `B₀ = 0`.
    pub interpolation_ratio: f64,
}

pub fn smallness_gate_besov(u0: &SpectralField, b0: &SpectralField, eps: f64) -> BesovGateResult {
    let b_three_half = besov_21(b0, 1.5);
    let b_half = besov_21(b0, 0.5);
    let bound = b_three_half.powf(1.0 / 3.0) * b0.without_mean().l2_norm().powf(2.0 / 3.0);
    BesovGateResult {
        gate: GateResult::new(besov_21(u0, 0.5) + b_three_half, eps),
        b_half,
        interpolation_bound: bound,
        interpolation_ratio: if bound > 0.0 { b_half / bound } else { 0.0 },
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Passed,
    Failed,
    /// Preconditions did not hold, e.g. the smallness gate failed.
    Skipped,
}

/// Factor standing in for the absorbed constant of the a priori bound.
pub const APRIORI_FACTOR: f64 = 2.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AprioriReport {
    pub status: CheckStatus,
    pub initial: f64,
    pub sup: f64,
    /// `sup / initial`, 0 for a zero run.
    pub growth: f64,
    pub dissipation_integral: f64,
    /// `sup + (C₁/2) ∫ dissipation`.
    pub absorbed: f64,
}

/// Checks `sup_t besov ≤ 2·besov(0)` and finiteness of the dissipation-side
/// integral. Skipped when `gate_passed` is false.
pub fn apriori_besov_check(ledger: &DiagnosticsLedger, c1_emp: f64, gate_passed: bool) -> AprioriReport {
    let samples = ledger.samples();
    let initial = samples.first().map_or(0.0, |s| s.besov);
    let sup = samples.iter().map(|s| s.besov).fold(initial, f64::max);
    let dissipation_integral = samples.last().map_or(0.0, |s| s.besov_dissipation_integral);
    let status = if !gate_passed {
        CheckStatus::Skipped
    } else if sup.is_finite() && dissipation_integral.is_finite() && sup <= APRIORI_FACTOR * initial {
        CheckStatus::Passed
    } else {
        CheckStatus::Failed
    };
    AprioriReport {
        status,
        initial,
        sup,
        growth: if initial > 0.0 { sup / initial } else { 0.0 },
        dissipation_integral,
        absorbed: sup + 0.5 * c1_emp * dissipation_integral,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyLedgerReport {
    /// `max_t [E(t) + ∫₀ᵗ(‖∇u‖² + ‖∇B‖²) − E(0)]`, signed.
    pub residual: f64,
    /// `max_t |E(t) + ∫₀ᵗ(...) − E(0)|`.
    pub max_abs_defect: f64,
    /// `10·dt²·t_end·E(0) + 1e-12`.
    pub bound: f64,
    pub t_end: f64,
    pub passed: bool,
}

/// Residual of the discrete energy inequality against its `O(dt²)` bound.
pub fn energy_ledger_check(ledger: &DiagnosticsLedger, dt: f64) -> Result<EnergyLedgerReport, MonitorError> {
    let samples = ledger.samples();
    if samples.len() < 2 {
        return Err(MonitorError::TooFewSamples(samples.len()));
    }
    let e0 = samples[0].energy;
    let t0 = samples[0].time;
    let defects = samples.iter().map(|s| s.energy + s.dissipation_integral - e0);
    let residual = defects.clone().fold(f64::NEG_INFINITY, f64::max);
    let max_abs_defect = defects.map(f64::abs).fold(0.0, f64::max);
    let t_end = samples[samples.len() - 1].time - t0;
    let bound = 10.0 * dt * dt * t_end * e0 + 1e-12;
    Ok(EnergyLedgerReport { residual, max_abs_defect, bound, t_end, passed: residual <= bound })
}
