use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::config::{pair_key, CriterionConfig};
use super::MonitorError;
use crate::hall_mhd::{divergence_residual, hall_neutrality, Regime, SolverState};
use crate::lp_besov::{besov_21, bmo_proxy, lp_table, sobolev_norm_hom, NormReport};

/// One diagnostic sample: instantaneous norms plus every running
/// accumulator up to `time`. Serialised as one JSONL line.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LedgerSample {
    pub step: usize,
    pub time: f64,
    /// `½(‖u‖² + ‖B‖²)`.
    pub energy: f64,
    /// `‖∇u‖² + ‖∇B‖²`.
    pub dissipation_rate: f64,
    pub dissipation_integral: f64,
    pub u: NormReport,
    pub b: NormReport,
    /// `‖∇B‖_{L^β}` keyed like [`NormReport`] (`lp_4`, `lp_inf`).
    pub grad_b_lp: BTreeMap<String, f64>,
    /// `‖u‖^q_{L^p}` (or `‖u‖_{L^p}` for `q = ∞`) keyed by [`pair_key`].
    pub serrin_integrand: BTreeMap<String, f64>,
    /// `∫‖u‖^q_{L^p} dt`, or the running sup for `q = ∞`.
    pub serrin: BTreeMap<String, f64>,
    pub beta_gamma_integrand: BTreeMap<String, f64>,
    pub beta_gamma: BTreeMap<String, f64>,
    pub bmo_u: f64,
    /// Square-function proxy of the 9 components of `∇B`, combined in
    /// Euclidean norm.
    pub bmo_grad_b: f64,
    /// `∫(bmo(u)² + bmo(∇B)²) dt`.
    pub bmo_integral: f64,
    /// `bmo(j)`, 2½D runs only.
    pub j_bmo: Option<f64>,
    /// `∫ bmo(j)² dt`, 2½D runs only.
    pub j_bmo_integral: Option<f64>,
    /// `‖u‖²_{H^m} + ‖B‖²_{H^m}`.
    pub hm: f64,
    /// `‖u‖_{Ḃ^{1/2}_{2,1}} + ‖B‖_{Ḃ^{1/2}_{2,1}} + ‖B‖_{Ḃ^{3/2}_{2,1}}`.
    pub besov: f64,
    /// `‖u‖_{Ḃ^{5/2}_{2,1}} + ‖B‖_{Ḃ^{5/2}_{2,1}} + ‖B‖_{Ḃ^{7/2}_{2,1}}`.
    pub besov_dissipation: f64,
    pub besov_dissipation_integral: f64,
    /// `⟨∇×(j×B), B⟩` and its scale `‖j‖·‖j×B‖`.
    pub hall_pairing: f64,
    pub hall_scale: f64,
    /// `max|∇·u|`, `max|∇·B|`.
    pub div_u: f64,
    pub div_b: f64,
    pub mean_u: [f64; 3],
    pub mean_b: [f64; 3],
}

/// Time series of monitored quantities along one run.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagnosticsLedger {
    config: CriterionConfig,
    samples: Vec<LedgerSample>,
}

/// Trapezoid increment `½ Δt (a + b)`.
fn trapezoid(dt: f64, a: f64, b: f64) -> f64 {
    0.5 * dt * (a + b)
}

fn integrand(norm: f64, q: f64) -> f64 {
    if q.is_infinite() {
        norm
    } else {
        norm.powf(q)
    }
}

/// Advances a map of accumulators from `prev` with integrands `old -> new`.
fn accumulate(
    pairs: &[(f64, f64)],
    dt: f64,
    prev: Option<(&BTreeMap<String, f64>, &BTreeMap<String, f64>)>,
    new: &BTreeMap<String, f64>,
) -> BTreeMap<String, f64> {
    pairs
        .iter()
        .map(|&(p, q)| {
            let key = pair_key(p, q);
            let now = new[&key];
            let value = match prev {
                None if q.is_infinite() => now,
                None => 0.0,
                Some((acc, _)) if q.is_infinite() => acc[&key].max(now),
                Some((acc, old)) => acc[&key] + trapezoid(dt, old[&key], now),
            };
            (key, value)
        })
        .collect()
}

impl DiagnosticsLedger {
    pub fn new(config: CriterionConfig) -> Result<Self, MonitorError> {
        config.validate()?;
        Ok(Self { config, samples: Vec::new() })
    }

    pub fn config(&self) -> &CriterionConfig {
        &self.config
    }

    pub fn samples(&self) -> &[LedgerSample] {
        &self.samples
    }

    pub fn last(&self) -> Option<&LedgerSample> {
        self.samples.last()
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Evaluates every monitored quantity at `state` and appends the sample,
    /// advancing the time integrals by the trapezoid rule.
    pub fn sample(&mut self, step: usize, state: &SolverState) -> Result<&LedgerSample, MonitorError> {
        let cfg = &self.config;
        if let Some(prev) = self.samples.last() {
            if !(state.time >= prev.time) {
                return Err(MonitorError::NonMonotoneTime { previous: prev.time, time: state.time });
            }
        }
        let (u, b) = (&state.u, &state.b);
        let u_report = NormReport::compute(u, cfg.hm_order, &cfg.u_exponents())?;
        let b_report = NormReport::compute(b, cfg.hm_order, &cfg.lp_exponents)?;
        let grad_b = b.gradient();

        let grad_b_norms = lp_table(&grad_b, &cfg.grad_b_exponents());
        let grad_b_lp: BTreeMap<String, f64> =
            grad_b_norms.iter().map(|&(p, v)| (crate::lp_besov::lp_key(p), v)).collect();
        let lp_of = |table: &[(f64, f64)], p: f64| {
            table.iter().find(|(x, _)| *x == p).map(|(_, v)| *v).expect("exponent requested")
        };
        let serrin_integrand: BTreeMap<String, f64> = cfg
            .serrin_pairs
            .iter()
            .map(|&(p, q)| (pair_key(p, q), integrand(lp_of(&u_report.lp, p), q)))
            .collect();
        let beta_gamma_integrand: BTreeMap<String, f64> = cfg
            .beta_gamma_pairs
            .iter()
            .map(|&(p, q)| (pair_key(p, q), integrand(lp_of(&grad_b_norms, p), q)))
            .collect();

        let energy = state.energy();
        let dissipation_rate = sobolev_norm_hom(u, 1.0).powi(2) + sobolev_norm_hom(b, 1.0).powi(2);
        let bmo_u = u_report.bmo_proxy;
        let bmo_grad_b = bmo_proxy(&grad_b);
        let j_bmo = match state.regime {
            Regime::TwoAndHalfD => Some(bmo_proxy(&b.curl()?)),
            _ => None,
        };
        let hm = u_report.sobolev_inhom_m.powi(2) + b_report.sobolev_inhom_m.powi(2);
        let besov = u_report.besov_s_2_1[0] + b_report.besov_s_2_1[0] + b_report.besov_s_2_1[1];
        let besov_dissipation = u_report.besov_s_2_1[2] + b_report.besov_s_2_1[2] + b_report.besov_s_2_1[3];
        let hall = hall_neutrality(b)?;
        let mean = |f: &crate::spectral::SpectralField| {
            let m = f.mean();
            [m[0].re, m[1].re, m[2].re]
        };

        let prev = self.samples.last();
        let dt = prev.map_or(0.0, |p| state.time - p.time);
        let step_integral = |acc: fn(&LedgerSample) -> f64, rate: fn(&LedgerSample) -> f64, now: f64| {
            prev.map_or(0.0, |p| acc(p) + trapezoid(dt, rate(p), now))
        };
        let bmo_rate = bmo_u * bmo_u + bmo_grad_b * bmo_grad_b;
        let sample = LedgerSample {
            step,
            time: state.time,
            energy,
            dissipation_rate,
            dissipation_integral: step_integral(|p| p.dissipation_integral, |p| p.dissipation_rate, dissipation_rate),
            grad_b_lp,
            serrin: accumulate(
                &cfg.serrin_pairs,
                dt,
                prev.map(|p| (&p.serrin, &p.serrin_integrand)),
                &serrin_integrand,
            ),
            serrin_integrand,
            beta_gamma: accumulate(
                &cfg.beta_gamma_pairs,
                dt,
                prev.map(|p| (&p.beta_gamma, &p.beta_gamma_integrand)),
                &beta_gamma_integrand,
            ),
            beta_gamma_integrand,
            bmo_u,
            bmo_grad_b,
            bmo_integral: step_integral(
                |p| p.bmo_integral,
                |p| p.bmo_u * p.bmo_u + p.bmo_grad_b * p.bmo_grad_b,
                bmo_rate,
            ),
            j_bmo,
            j_bmo_integral: j_bmo.map(|j| match prev {
                Some(p) => {
                    let old = p.j_bmo.unwrap_or(0.0);
                    p.j_bmo_integral.unwrap_or(0.0) + trapezoid(dt, old * old, j * j)
                }
                None => 0.0,
            }),
            hm,
            besov,
            besov_dissipation,
            besov_dissipation_integral: step_integral(
                |p| p.besov_dissipation_integral,
                |p| p.besov_dissipation,
                besov_dissipation,
            ),
            hall_pairing: hall.pairing,
            hall_scale: hall.scale,
            div_u: divergence_residual(u),
            div_b: divergence_residual(b),
            mean_u: mean(u),
            mean_b: mean(b),
            u: u_report,
            b: b_report,
        };
        self.samples.push(sample);
        Ok(self.samples.last().expect("just pushed"))
    }

    /// Rebuilds a ledger from stored `(step, state)` pairs.
    pub fn replay<'a, I>(config: CriterionConfig, states: I) -> Result<Self, MonitorError>
    where
        I: IntoIterator<Item = (usize, &'a SolverState)>,
    {
        let mut ledger = Self::new(config)?;
        for (step, state) in states {
            ledger.sample(step, state)?;
        }
        Ok(ledger)
    }

    /// One JSON object per line.
    pub fn write_jsonl<W: Write>(&self, mut w: W) -> Result<(), MonitorError> {
        for s in &self.samples {
            serde_json::to_writer(&mut w, s)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn to_jsonl(&self) -> Result<String, MonitorError> {
        let mut buf = Vec::new();
        self.write_jsonl(&mut buf)?;
        Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
    }
}

pub fn read_jsonl<R: BufRead>(r: R) -> Result<Vec<LedgerSample>, MonitorError> {
    let mut out = Vec::new();
    for line in r.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line)?);
    }
    Ok(out)
}

/// Instantaneous norm reports of `(u, B)` under `cfg`, without touching any
/// ledger.
pub fn sample_reports(state: &SolverState, cfg: &CriterionConfig) -> Result<(NormReport, NormReport), MonitorError> {
    Ok((
        NormReport::compute(&state.u, cfg.hm_order, &cfg.u_exponents())?,
        NormReport::compute(&state.b, cfg.hm_order, &cfg.lp_exponents)?,
    ))
}

/// `‖u‖_{Ḃ^{1/2}} + ‖B‖_{Ḃ^{1/2}} + ‖B‖_{Ḃ^{3/2}}` directly from fields.
pub fn besov_sum(state: &SolverState) -> f64 {
    besov_21(&state.u, 0.5) + besov_21(&state.b, 0.5) + besov_21(&state.b, 1.5)
}
