use std::f64::consts::PI;
use std::sync::Arc;

use super::*;
use crate::hall_mhd::{run, Regime, SolverState, StepControl};
use crate::harness::{gen_beltrami, gen_orszag_tang_2p5d, gen_random_bandlimited, Populate, TargetNorm};
use crate::lp_besov::{bmo_proxy, NormReport};
use crate::spectral::{make_grid, Grid, SpectralField};

fn grid3(n: usize) -> Arc<Grid> {
    make_grid(n, 2.0 * PI, 3).unwrap()
}

fn single_mode(g: &Arc<Grid>, a: f64, k: f64) -> SpectralField {
    SpectralField::from_fn(g, 3, |x, o| {
        o[0] = 0.0;
        o[1] = 0.0;
        o[2] = a * (k * x[0]).sin();
    })
}

#[test]
fn exponent_region() {
    assert!(check_pair(3.0, 2.0).is_err());
    assert!(check_pair(f64::INFINITY, 2.0).is_ok());
    assert!(check_pair(4.0, 8.0).is_ok());
    assert!(check_pair(6.0, 4.0).is_ok());
    assert!(check_pair(6.0, 3.9).is_err());
    assert!(check_pair(2.5, f64::INFINITY).is_err());
    assert!(check_pair(f64::INFINITY, f64::INFINITY).is_ok());
    assert!(check_pair(5.0, 0.0).is_err());
    assert!(check_pair(f64::NAN, 2.0).is_err());
    assert!(CriterionConfig::new(vec![(4.0, 8.0)], vec![(3.0, 2.0)], 1, 3).is_err());
    assert!(CriterionConfig::new(vec![(4.0, 8.0)], vec![], 1, 2).is_err());
    assert!(CriterionConfig::new(vec![(4.0, 8.0)], vec![], 0, 3).is_err());
    assert!(CriterionConfig::default().validate().is_ok());
    assert_eq!(pair_key(f64::INFINITY, 2.0), "pinf_q2");
    assert_eq!(pair_key(4.5, 8.0), "p4.5_q8");
}

#[test]
fn zero_state_samples_to_zero() {
    let g = grid3(8);
    let s = SolverState::zero(&g, Regime::Full3D, 1.0).unwrap();
    let cfg = CriterionConfig::default();
    let mut ledger = DiagnosticsLedger::new(cfg.clone()).unwrap();
    let smp = ledger.sample(0, &s).unwrap().clone();
    assert_eq!(smp.u, NormReport::zero(cfg.hm_order, &cfg.u_exponents()));
    assert_eq!(smp.b, NormReport::zero(cfg.hm_order, &cfg.lp_exponents));
    assert_eq!(smp.energy, 0.0);
    assert!(smp.serrin.values().chain(smp.beta_gamma.values()).all(|v| *v == 0.0));
    assert_eq!(smp.j_bmo, None);
}

#[test]
fn first_sample_equals_direct_norms() {
    let g = grid3(16);
    let d = gen_random_bandlimited(&g, TargetNorm::L2, 2.0, 1.0, 4.0, 1, Populate::Both).unwrap();
    let s = SolverState::new(d.u0.clone(), d.b0.clone(), Regime::Full3D, 1.0).unwrap();
    let cfg = CriterionConfig::default();
    let mut ledger = DiagnosticsLedger::new(cfg.clone()).unwrap();
    let smp = ledger.sample(0, &s).unwrap();
    assert_eq!(smp.u, NormReport::compute(&d.u0, 3, &[2.0, 4.0, f64::INFINITY]).unwrap());
    let linf = d.u0.lp_norm(f64::INFINITY).unwrap();
    assert!((smp.serrin_integrand["pinf_q2"] - linf * linf).abs() <= 1e-14 * linf * linf);
    assert_eq!(smp.serrin["pinf_q2"], 0.0);
    assert_eq!(smp.dissipation_integral, 0.0);
    let gb = d.b0.gradient();
    assert!((smp.grad_b_lp["lp_4"] - gb.lp_norm(4.0).unwrap()).abs() <= 1e-12 * smp.grad_b_lp["lp_4"]);
    assert!((smp.bmo_grad_b - bmo_proxy(&gb)).abs() == 0.0);
    // quadrature and Parseval agree for p = 2
    assert!((smp.u.lp(2.0).unwrap() - d.u0.l2_norm()).abs() <= 1e-12 * d.u0.l2_norm());
    let (ru, rb) = sample_reports(&s, &cfg).unwrap();
    assert_eq!((&ru, &rb), (&smp.u, &smp.b));
}

fn beltrami_ledger(dt: f64, t_end: f64, cadence: usize) -> (DiagnosticsLedger, SpectralField) {
    let g = grid3(16);
    let b0 = gen_beltrami(&g, 1.0, 1).unwrap().b0;
    let s = SolverState::new(SpectralField::zeros(&g, 3), b0.clone(), Regime::HallOnly, 1.0).unwrap();
    let cfg = CriterionConfig { sample_cadence: cadence, ..CriterionConfig::default() };
    let mut ledger = DiagnosticsLedger::new(cfg).unwrap();
    let r = run(s, &StepControl::new(dt, t_end), cadence, |k, st| {
        ledger.sample(k, st).unwrap();
    })
    .unwrap();
    assert!(r.outcome.is_completed());
    (ledger, b0)
}

#[test]
fn beltrami_dissipation_matches_closed_form() {
    let (ledger, b0) = beltrami_ledger(1e-3, 0.1, 1);
    let g0 = b0.gradient().l2_norm().powi(2);
    for smp in ledger.samples() {
        let exact = g0 * (1.0 - (-2.0 * smp.time).exp()) / 2.0;
        assert!((smp.dissipation_integral - exact).abs() <= 1e-6 * g0.max(exact), "t = {}", smp.time);
    }
}

#[test]
fn energy_ledger_residual_is_second_order() {
    let (l1, _) = beltrami_ledger(2e-3, 0.1, 1);
    let (l2, _) = beltrami_ledger(1e-3, 0.1, 1);
    let r1 = energy_ledger_check(&l1, 2e-3).unwrap();
    let r2 = energy_ledger_check(&l2, 1e-3).unwrap();
    assert!(r1.passed && r2.passed, "{r1:?} {r2:?}");
    let ratio = r1.residual / r2.residual;
    assert!((3.2..=4.8).contains(&ratio), "{ratio}");
}

#[test]
fn energy_ledger_edge_cases() {
    let g = grid3(8);
    let zero = SolverState::zero(&g, Regime::Full3D, 1.0).unwrap();
    let mut ledger = DiagnosticsLedger::new(CriterionConfig::default()).unwrap();
    assert!(energy_ledger_check(&ledger, 0.1).is_err());
    run(zero, &StepControl::new(0.1, 0.5), 1, |k, s| {
        ledger.sample(k, s).unwrap();
    })
    .unwrap();
    let r = energy_ledger_check(&ledger, 0.1).unwrap();
    assert_eq!(r.residual, 0.0);
    assert!(r.passed);
    let a = apriori_besov_check(&ledger, 1.0, true);
    assert_eq!(a.status, CheckStatus::Passed);

    // linear heat decay of a shear mode
    let u = SpectralField::from_fn(&g, 3, |x, o| {
        o[0] = 1e-3 * x[1].sin();
        o[1] = 0.0;
        o[2] = 0.0;
    });
    let s = SolverState::new(u, SpectralField::zeros(&g, 3), Regime::Full3D, 1.0).unwrap();
    let mut ledger = DiagnosticsLedger::new(CriterionConfig::default()).unwrap();
    run(s, &StepControl::new(1e-2, 0.5), 1, |k, st| {
        ledger.sample(k, st).unwrap();
    })
    .unwrap();
    let r = energy_ledger_check(&ledger, 1e-2).unwrap();
    let e0 = ledger.samples()[0].energy;
    assert!(r.passed && r.max_abs_defect <= 1e-4 * e0, "{r:?}");
}

#[test]
fn gates_on_simple_data() {
    let g = grid3(16);
    let z = SpectralField::zeros(&g, 3);
    let r = smallness_gate_sobolev(&z, &z, 0.7);
    assert!(r.passed && r.margin == 0.7);
    let b = smallness_gate_besov(&z, &z, 0.7);
    assert!(b.gate.passed && b.interpolation_ratio == 0.0);

    let m = single_mode(&g, 0.3, 1.0);
    let r = smallness_gate_sobolev(&m, &m, 100.0);
    assert!((r.value - 2.0 * m.l2_norm()).abs() <= 1e-12 * r.value);
    let r10 = smallness_gate_sobolev(&m.scaled(10.0), &m.scaled(10.0), 100.0);
    assert!((r10.value - 10.0 * r.value).abs() <= 1e-12 * r10.value);

    let m2 = single_mode(&g, 0.3, 2.0);
    let b = smallness_gate_besov(&z, &m2, 1.0);
    assert!((b.gate.value - 2f64.powf(1.5) * m2.l2_norm()).abs() <= 1e-12 * b.gate.value);
    assert!((b.interpolation_ratio - 1.0).abs() <= 1e-12);
    let b = smallness_gate_besov(&m2, &z, 1e-3);
    assert!((b.gate.value - crate::lp_besov::besov_21(&m2, 0.5)).abs() == 0.0);
    assert!(!b.gate.passed && b.gate.margin < 0.0);
}

#[test]
fn apriori_skipped_when_gate_fails() {
    let (ledger, _) = beltrami_ledger(1e-3, 0.01, 5);
    let a = apriori_besov_check(&ledger, 1.0, false);
    assert_eq!(a.status, CheckStatus::Skipped);
    let a = apriori_besov_check(&ledger, 1.0, true);
    assert_eq!(a.status, CheckStatus::Passed);
    assert!(a.sup == a.initial && a.growth == 1.0);
}

#[test]
fn accumulators_never_decrease() {
    let g = grid3(16);
    let d = gen_random_bandlimited(&g, TargetNorm::L2, 6.0, 1.0, 3.0, 8, Populate::Both).unwrap();
    let s = SolverState::new(d.u0, d.b0, Regime::Full3D, 1.0).unwrap();
    let mut ledger = DiagnosticsLedger::new(CriterionConfig::default()).unwrap();
    let mut ctl = StepControl::new(2e-3, 0.05);
    ctl.spectral_tail_fraction = 0.5;
    run(s, &ctl, 2, |k, st| {
        ledger.sample(k, st).unwrap();
    })
    .unwrap();
    for w in ledger.samples().windows(2) {
        let (a, b) = (&w[0], &w[1]);
        assert!(b.dissipation_integral >= a.dissipation_integral);
        assert!(b.bmo_integral >= a.bmo_integral);
        assert!(b.besov_dissipation_integral >= a.besov_dissipation_integral);
        for k in a.serrin.keys() {
            assert!(b.serrin[k] >= a.serrin[k]);
        }
        for k in a.beta_gamma.keys() {
            assert!(b.beta_gamma[k] >= a.beta_gamma[k]);
        }
    }
}

#[test]
fn planar_j_bmo_matches_vorticity_channel() {
    let g = make_grid(32, 2.0 * PI, 2).unwrap();
    let d = gen_orszag_tang_2p5d(&g, 1.0).unwrap();
    let s = SolverState::new(d.u0, d.b0, Regime::TwoAndHalfD, 0.0).unwrap();
    let mut ledger = DiagnosticsLedger::new(CriterionConfig::default()).unwrap();
    let mut states = Vec::new();
    run(s, &StepControl::new(5e-3, 0.1), 5, |k, st| {
        ledger.sample(k, st).unwrap();
        states.push(st.clone());
    })
    .unwrap();
    let mut acc = 0.0;
    let mut prev: Option<(f64, f64)> = None;
    for st in &states {
        // scalar ω = ∂₁B₂ − ∂₂B₁ from the planar channels only
        let b1 = st.b.component_field(0);
        let b2 = st.b.component_field(1);
        let omega = b2.derivative(0).unwrap().sub(&b1.derivative(1).unwrap()).unwrap();
        let w = bmo_proxy(&omega);
        if let Some((t0, w0)) = prev {
            acc += 0.5 * (st.time - t0) * (w0 * w0 + w * w);
        }
        prev = Some((st.time, w));
    }
    let last = ledger.last().unwrap().j_bmo_integral.unwrap();
    assert!((last - acc).abs() <= 1e-12 * acc, "{last} vs {acc}");
}

#[test]
fn replay_is_bit_identical() {
    let g = grid3(16);
    let d = gen_random_bandlimited(&g, TargetNorm::BesovGate, 0.5, 1.0, 4.0, 2, Populate::Both).unwrap();
    let s = SolverState::new(d.u0, d.b0, Regime::Full3D, 1.0).unwrap();
    let cfg = CriterionConfig::default();
    let mut ledger = DiagnosticsLedger::new(cfg.clone()).unwrap();
    let mut stored = Vec::new();
    run(s, &StepControl::new(5e-3, 0.05), 3, |k, st| {
        ledger.sample(k, st).unwrap();
        stored.push((k, st.clone()));
    })
    .unwrap();
    let again = DiagnosticsLedger::replay(cfg, stored.iter().map(|(k, s)| (*k, s))).unwrap();
    let text = ledger.to_jsonl().unwrap();
    assert_eq!(again.to_jsonl().unwrap(), text);
    let parsed = read_jsonl(text.as_bytes()).unwrap();
    assert_eq!(parsed, ledger.samples());
    assert!(text.lines().next().unwrap().starts_with("{\"step\":0,\"time\":0.0,"));
}

#[test]
fn samples_must_move_forward_in_time() {
    let g = grid3(8);
    let mut s = SolverState::zero(&g, Regime::Full3D, 1.0).unwrap();
    let mut ledger = DiagnosticsLedger::new(CriterionConfig::default()).unwrap();
    s.time = 1.0;
    ledger.sample(0, &s).unwrap();
    s.time = 0.5;
    assert!(matches!(ledger.sample(1, &s), Err(MonitorError::NonMonotoneTime { .. })));
}
