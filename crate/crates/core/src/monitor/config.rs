use serde::{Deserialize, Serialize};

use super::MonitorError;

/// Slack on `3/p + 2/q <= 1` for exponents that are not exact binary
/// fractions.
const REGION_TOLERANCE: f64 = 1e-12;

/// Exponent pairs and cadence of the criterion monitor.
///
/// `serrin_pairs` holds `(p, q)` for `∫‖u‖^q_{L^p} dt`, `beta_gamma_pairs`
/// holds `(β, γ)` for `∫‖∇B‖^γ_{L^β} dt`. Both must satisfy
/// `3/p + 2/q <= 1` with `p ∈ (3, ∞]`; `q = ∞` turns the integral into a
/// running supremum.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CriterionConfig {
    pub serrin_pairs: Vec<(f64, f64)>,
    pub beta_gamma_pairs: Vec<(f64, f64)>,
    /// Steps between samples.
    pub sample_cadence: usize,
    /// Integer `m > 5/2` of the `H^m` series.
    pub hm_order: u32,
    /// Extra `L^p` norms reported for `u` and `B`.
    pub lp_exponents: Vec<f64>,
}

impl Default for CriterionConfig {
    fn default() -> Self {
        Self {
            serrin_pairs: vec![(f64::INFINITY, 2.0), (4.0, 8.0)],
            beta_gamma_pairs: vec![(f64::INFINITY, 2.0), (4.0, 8.0)],
            sample_cadence: 10,
            hm_order: 3,
            lp_exponents: vec![2.0, 4.0, f64::INFINITY],
        }
    }
}

/// Checks one exponent pair against the closed region
/// `{p ∈ (3, ∞], 3/p + 2/q <= 1}`.
pub fn check_pair(p: f64, q: f64) -> Result<(), MonitorError> {
    if p.is_nan() || q.is_nan() || !(p > 3.0) {
        return Err(MonitorError::InadmissibleExponents { p, q, reason: "p must lie in (3, ∞]" });
    }
    if !(q > 0.0) {
        return Err(MonitorError::InadmissibleExponents { p, q, reason: "q must be positive" });
    }
    if 3.0 / p + 2.0 / q > 1.0 + REGION_TOLERANCE {
        return Err(MonitorError::InadmissibleExponents { p, q, reason: "3/p + 2/q exceeds 1" });
    }
    Ok(())
}

impl CriterionConfig {
    pub fn new(
        serrin_pairs: Vec<(f64, f64)>,
        beta_gamma_pairs: Vec<(f64, f64)>,
        sample_cadence: usize,
        hm_order: u32,
    ) -> Result<Self, MonitorError> {
        let cfg = Self { serrin_pairs, beta_gamma_pairs, sample_cadence, hm_order, ..Self::default() };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), MonitorError> {
        for &(p, q) in self.serrin_pairs.iter().chain(&self.beta_gamma_pairs) {
            check_pair(p, q)?;
        }
        if self.sample_cadence == 0 {
            return Err(MonitorError::InvalidConfig("sample_cadence must be >= 1".into()));
        }
        if self.hm_order < 3 {
            return Err(MonitorError::InvalidConfig(format!(
                "hm_order must be an integer > 5/2, got {}",
                self.hm_order
            )));
        }
        if let Some(p) = self.lp_exponents.iter().find(|p| !(**p >= 1.0)) {
            return Err(MonitorError::InvalidConfig(format!("L^p exponent {p} below 1")));
        }
        Ok(())
    }

    /// Exponents reported for `u`: `lp_exponents` and every Serrin `p`.
    pub(crate) fn u_exponents(&self) -> Vec<f64> {
        merge(&self.lp_exponents, self.serrin_pairs.iter().map(|pq| pq.0))
    }

    /// Exponents needed for `∇B`.
    pub(crate) fn grad_b_exponents(&self) -> Vec<f64> {
        merge(&[], self.beta_gamma_pairs.iter().map(|pq| pq.0))
    }
}

fn merge(base: &[f64], extra: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut out = base.to_vec();
    for p in extra {
        if !out.contains(&p) {
            out.push(p);
        }
    }
    out.sort_by(f64::total_cmp);
    out
}

/// Key of a criterion accumulator, e.g. `p4_q8` or `pinf_q2`.
pub fn pair_key(p: f64, q: f64) -> String {
    let fmt = |x: f64| {
        if x.is_infinite() {
            "inf".to_string()
        } else if x.fract() == 0.0 {
            format!("{}", x as i64)
        } else {
            format!("{x}")
        }
    };
    format!("p{}_q{}", fmt(p), fmt(q))
}
