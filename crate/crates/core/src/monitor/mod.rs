//! Criterion monitoring along a run: Serrin-type and BMO integrals,
//! smallness gates on initial data, the a priori Besov bound and the
//! discrete energy inequality.

mod checks;
mod config;
mod ledger;
#[cfg(test)]
mod tests;

use thiserror::Error;

pub use checks::{
    apriori_besov_check, energy_ledger_check, smallness_gate_besov, smallness_gate_sobolev, AprioriReport,
    BesovGateResult, CheckStatus, EnergyLedgerReport, GateResult, APRIORI_FACTOR,
};
pub use config::{check_pair, pair_key, CriterionConfig};
pub use ledger::{besov_sum, read_jsonl, sample_reports, DiagnosticsLedger, LedgerSample};

use crate::hall_mhd::HallError;
use crate::spectral::SpectralError;

#[derive(Debug, Error)]
pub enum MonitorError {
    #[error("exponents (p, q) = ({p}, {q}) rejected: {reason}")]
    InadmissibleExponents { p: f64, q: f64, reason: &'static str },
    #[error("invalid criterion config: {0}")]
    InvalidConfig(String),
    #[error("sample at t = {time} precedes the previous sample at t = {previous}")]
    NonMonotoneTime { previous: f64, time: f64 },
    #[error("energy ledger needs at least 2 samples, got {0}")]
    TooFewSamples(usize),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Hall(#[from] HallError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
