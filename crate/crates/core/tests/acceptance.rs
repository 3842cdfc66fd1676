//! Acceptance suite. Prints one line per criterion and exits nonzero when
//! any criterion fails. Run with `cargo test --test acceptance`.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use hallmhd::hall_mhd::{divergence_residual, run, Regime, SolverState, StepControl};
use hallmhd::harness::{
    execute, gen_orszag_tang_2p5d, gen_random_bandlimited, scaling_pair, ExperimentConfig, ExperimentSummary,
    Populate, TargetNorm,
};
use hallmhd::lp_besov::{run_suite, DyadicLadder, InequalityCheck};
use hallmhd::monitor::{check_pair, energy_ledger_check, CheckStatus, CriterionConfig, DiagnosticsLedger};
use hallmhd::random::{random_band_field, seeded_rng};
use hallmhd::spectral::{make_grid, Grid, SpectralField};

// AC1
const BELTRAMI_TOL: f64 = 1e-8;
const BELTRAMI_SECONDS: f64 = 30.0;
// AC2
const HALL_NEUTRALITY_TOL: f64 = 1e-11;
// AC3
const RICHARDSON_LO: f64 = 3.2;
const RICHARDSON_HI: f64 = 4.8;
// AC4
const DIVERGENCE_TOL: f64 = 1e-11;
const MEAN_DRIFT_TOL: f64 = 1e-13;
// AC5
const SCALING_RATIO_MIN: f64 = 3.0;
// AC6
const CALIBRATION_SEED: u64 = 20251017;
const CALIBRATION_SAMPLES: usize = 1000;
const RERUN_FACTOR: f64 = 1.05;
const SEED_SPREAD: f64 = 0.10;
/// Empirical constants from the first 1000-sample calibration on seed
/// 20251017, in `InequalityCheck::ALL` order.
const FROZEN_C_EMP: [(InequalityCheck, f64); 9] = [
    (InequalityCheck::BernsteinUpper, 8.347557610509307e-1),
    (InequalityCheck::BernsteinLower, 1.3083496111012833e0),
    (InequalityCheck::BernsteinEmbedding, 4.049495309778241e-2),
    (InequalityCheck::NormEquivalence, 7.739718857910763e-1),
    (InequalityCheck::ProductLaw, 2.1745479242055606e-2),
    (InequalityCheck::Commutator, 1.994076386138387e-2),
    (InequalityCheck::Interpolation, 1.3950179550164132e0),
    (InequalityCheck::BmoBound, 1.427492988277103e-1),
    (InequalityCheck::BmoLinfty, 1.077012290167726e0),
];
// AC7
const LP_FIELDS: usize = 1000;
const RECONSTRUCTION_TOL: f64 = 1e-13;
const PARSEVAL_TOL: f64 = 1e-12;
// AC8
const APRIORI_GROWTH_MAX: f64 = 2.0;
// AC9
const DECOUPLING_TOL: f64 = 1e-12;
/// Coupling witness threshold, frozen after the first run.
const COUPLING_MIN: f64 = 1e-6;

struct Outcome {
    failures: usize,
    max_div: f64,
    max_drift: f64,
}

impl Outcome {
    fn line(&mut self, id: &str, name: &str, pass: bool, detail: String) {
        println!("{id:<5} {name:<34} {}  {detail}", if pass { "PASS" } else { "FAIL" });
        if !pass {
            self.failures += 1;
        }
    }

    fn invariants(&mut self, s: &ExperimentSummary) {
        self.max_div = self.max_div.max(s.max_div_u).max(s.max_div_b);
        self.max_drift = self.max_drift.max(s.max_mean_drift);
    }

    fn state(&mut self, s: &SolverState, u0: &SpectralField, b0: &SpectralField) {
        self.max_div = self.max_div.max(divergence_residual(&s.u)).max(divergence_residual(&s.b));
        self.max_drift = self.max_drift.max(mean_drift(&s.u, u0)).max(mean_drift(&s.b, b0));
    }
}

fn mean_drift(f: &SpectralField, f0: &SpectralField) -> f64 {
    f.mean().iter().zip(f0.mean()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
}

fn config(src: &str) -> ExperimentConfig {
    ExperimentConfig::from_toml_str(src).expect("acceptance config parses")
}

fn beltrami_config(n: usize, dt: f64, cadence: usize) -> ExperimentConfig {
    config(&format!(
        r#"
output_dir = "unused"
[grid]
n = {n}
dims = 3
[physics]
regime = "hall_only"
hall_coefficient = 1.0
[initial]
generator = "beltrami"
amplitude = 1.0
lambda = 1
[step]
dt = {dt:e}
t_end = 0.5
[monitor]
sample_cadence = {cadence}
"#
    ))
}

fn ac1(out: &mut Outcome) {
    let start = Instant::now();
    let exp = execute(&beltrami_config(32, 1e-3, 10), None).expect("beltrami run");
    let seconds = start.elapsed().as_secs_f64();
    let o = exp.summary.beltrami.expect("oracle");
    out.invariants(&exp.summary);
    out.line(
        "AC1",
        "beltrami exact decay",
        exp.summary.outcome.is_completed() && o.max_relative_error <= BELTRAMI_TOL && seconds <= BELTRAMI_SECONDS,
        format!(
            "steps={} max_rel_err={:.3e} (<= {BELTRAMI_TOL:e}) runtime={seconds:.1}s (<= {BELTRAMI_SECONDS}s)",
            exp.summary.steps, o.max_relative_error
        ),
    );
}

/// Both step sizes sit below the Hall CFL bound on 16³, so the pair
/// differs only in `dt`.
fn ac3(out: &mut Outcome) {
    let fine = execute(&beltrami_config(16, 1e-3, 2), None).expect("beltrami run");
    let coarse = execute(&beltrami_config(16, 2e-3, 2), None).expect("beltrami run");
    out.invariants(&fine.summary);
    out.invariants(&coarse.summary);
    let steps_ok = fine.summary.steps == 500 && coarse.summary.steps == 250;
    let rf = energy_ledger_check(&fine.ledger, 1e-3).expect("energy check");
    let rc = energy_ledger_check(&coarse.ledger, 2e-3).expect("energy check");
    let ratio = rc.residual / rf.residual;
    out.line(
        "AC3",
        "energy inequality ledger",
        steps_ok && rf.passed && rc.passed && (RICHARDSON_LO..=RICHARDSON_HI).contains(&ratio),
        format!(
            "residual(dt=2e-3)={:.3e} <= {:.3e}, residual(dt=1e-3)={:.3e} <= {:.3e}, ratio={ratio:.3} in [{RICHARDSON_LO}, {RICHARDSON_HI}]",
            rc.residual, rc.bound, rf.residual, rf.bound
        ),
    );
}

fn ac2(out: &mut Outcome) {
    let cfg = config(
        r#"
output_dir = "unused"
[grid]
n = 32
dims = 3
[physics]
regime = "full3d"
hall_coefficient = 1.0
[initial]
generator = "orszag_tang_3d"
amplitude = 0.5
[step]
dt = 2e-3
t_end = 1.0
[monitor]
sample_cadence = 25
"#,
    );
    let exp = execute(&cfg, None).expect("orszag-tang run");
    let s = &exp.summary;
    out.invariants(s);
    out.line(
        "AC2",
        "hall term energy neutrality",
        s.outcome.is_completed() && s.samples > 1 && s.max_hall_relative <= HALL_NEUTRALITY_TOL,
        format!(
            "outcome={} samples={} max |<curl(jxB),B>|/(|j||jxB|)={:.3e} (<= {HALL_NEUTRALITY_TOL:e})",
            s.outcome.name(),
            s.samples,
            s.max_hall_relative
        ),
    );
}

fn ac5(out: &mut Outcome) {
    let mut errors = Vec::new();
    let mut completed = true;
    for n in [32, 64] {
        let g = make_grid(n, 2.0 * PI, 3).unwrap();
        let data = gen_random_bandlimited(&g, TargetNorm::L2, 10.0, 1.0, 3.0, 5, Populate::MagneticOnly).unwrap();
        let mut ctl = StepControl::new(5e-4, 0.025);
        ctl.spectral_tail_fraction = 1.0;
        let r = scaling_pair(&g, &data.b0, 1.0, &ctl, 2).expect("scaling pair");
        completed &= r.base.is_completed() && r.dilated.is_completed() && r.base_steps == r.dilated_steps;
        errors.push(r.relative_error);
    }
    let ratio = errors[0] / errors[1];
    out.line(
        "AC5",
        "scaling covariance (lambda=2)",
        completed && ratio >= SCALING_RATIO_MIN,
        format!("err(n=32)={:.3e} err(n=64)={:.3e} ratio={ratio:.3e} (>= {SCALING_RATIO_MIN})", errors[0], errors[1]),
    );
}

fn ac6(out: &mut Outcome) {
    let report = run_suite(CALIBRATION_SAMPLES, CALIBRATION_SEED, 2).expect("suite");
    let mut pass = true;
    let mut worst_rerun: f64 = 0.0;
    let mut worst_spread: f64 = 0.0;
    for (v, &(check, frozen)) in report.verdicts.iter().zip(&FROZEN_C_EMP) {
        assert_eq!(v.check, check);
        let rerun = v.rerun.max(v.calibrated) / frozen;
        worst_rerun = worst_rerun.max(rerun);
        worst_spread = worst_spread.max(v.spread);
        let ok = v.finite && rerun <= RERUN_FACTOR && v.spread <= SEED_SPREAD;
        pass &= ok;
        println!(
            "      {:<20} C_emp={:.6e} rerun/C={:.4} spread={:.4} independent/C={:.4}{}",
            check.name(),
            v.calibrated,
            rerun,
            v.spread,
            v.independent_ratio,
            if ok { "" } else { "  <- fails" }
        );
    }
    out.line(
        "AC6",
        "inequality oracle suite",
        pass,
        format!("worst rerun/C={worst_rerun:.4} (<= {RERUN_FACTOR}) worst spread={worst_spread:.4} (<= {SEED_SPREAD})"),
    );
}

fn ac7(out: &mut Outcome) {
    let g: Arc<Grid> = make_grid(16, 2.0 * PI, 3).unwrap();
    let ladder = DyadicLadder::for_grid(&g);
    let mut rng = seeded_rng(CALIBRATION_SEED);
    let (mut recon, mut parseval): (f64, f64) = (0.0, 0.0);
    for _ in 0..LP_FIELDS {
        let f = random_band_field(&g, 3, 0.0, 8.0, 0.0, &mut rng);
        let mut sum = SpectralField::zeros(&g, 3);
        for q in ladder.shells() {
            sum.add_scaled(1.0, &ladder.block(&f, q)).unwrap();
        }
        let mean = f.sub(&f.without_mean()).unwrap();
        sum.add_scaled(1.0, &mean).unwrap();
        recon = recon.max(sum.max_coeff_diff(&f).unwrap() / f.max_coeff());

        let shells: f64 = ladder.block_l2_norms(&f).iter().map(|(_, v)| v * v).sum();
        let total = f.without_mean().l2_norm().powi(2);
        parseval = parseval.max((shells - total).abs() / total);
    }
    out.line(
        "AC7",
        "littlewood-paley completeness",
        recon <= RECONSTRUCTION_TOL && parseval <= PARSEVAL_TOL,
        format!(
            "{LP_FIELDS} fields: reconstruction={recon:.3e} (<= {RECONSTRUCTION_TOL:e}) parseval={parseval:.3e} (<= {PARSEVAL_TOL:e})"
        ),
    );
}

fn ac8(out: &mut Outcome) {
    let cfg = config(
        r#"
output_dir = "unused"
[grid]
n = 32
dims = 3
[physics]
regime = "full3d"
hall_coefficient = 1.0
[initial]
generator = "random_bandlimited"
norm = "besov_gate"
target = 1e-3
k_min = 1
k_max = 4
seed = 20251017
[step]
dt = 1e-2
t_end = 10.0
[monitor]
sample_cadence = 10
[gates]
besov_threshold = 1e-2
"#,
    );
    let exp = execute(&cfg, None).expect("small data run");
    let s = &exp.summary;
    out.invariants(s);
    let a = s.apriori.expect("apriori report");
    let last = s.final_sample.as_ref().expect("samples");
    let accumulators = last.serrin.values().chain(last.beta_gamma.values()).chain([&last.bmo_integral]);
    let finite = accumulators.clone().all(|v| v.is_finite()) && a.dissipation_integral.is_finite();
    out.line(
        "AC8",
        "small-data besov boundedness",
        s.outcome.is_completed() && a.status == CheckStatus::Passed && a.growth <= APRIORI_GROWTH_MAX && finite,
        format!(
            "outcome={} initial={:.3e} sup={:.3e} growth={:.4} (<= {APRIORI_GROWTH_MAX}) accumulators finite={finite}",
            s.outcome.name(),
            a.initial,
            a.sup,
            a.growth
        ),
    );
}

/// Largest third component of `u` and `B` on the grid.
fn third_components(s: &SolverState) -> f64 {
    [&s.u, &s.b].iter().map(|f| f.component_field(2).max_magnitude()).fold(0.0, f64::max)
}

fn ac9(out: &mut Outcome) {
    let g = make_grid(64, 2.0 * PI, 2).unwrap();
    let data = gen_orszag_tang_2p5d(&g, 1.0).unwrap();
    let mut third = [0.0f64; 2];
    let mut reached = [0.0f64; 2];
    for (i, h) in [0.0, 1.0].into_iter().enumerate() {
        let s = SolverState::new(data.u0.clone(), data.b0.clone(), Regime::TwoAndHalfD, h).unwrap();
        let mut ctl = StepControl::new(1e-3, 5.0);
        ctl.spectral_tail_fraction = 1.0;
        let mut worst = 0.0f64;
        let r = run(s, &ctl, 50, |_, st| worst = worst.max(third_components(st))).expect("2.5d run");
        out.state(&r.final_state, &data.u0, &data.b0);
        third[i] = worst;
        reached[i] = r.outcome.time();
    }
    out.line(
        "AC9",
        "2.5d decoupling",
        reached[0] == 5.0 && third[0] <= DECOUPLING_TOL && third[1] > COUPLING_MIN,
        format!(
            "h=0: max third={:.3e} (<= {DECOUPLING_TOL:e}) to t={}; h=1: coupling={:.3e} (> {COUPLING_MIN:e}) to t={}",
            third[0], reached[0], third[1], reached[1]
        ),
    );
}

fn ac10(out: &mut Outcome) {
    let rejects = check_pair(3.0, 2.0).is_err()
        && CriterionConfig::new(vec![(3.0, 2.0)], vec![], 1, 3).is_err()
        && DiagnosticsLedger::new(CriterionConfig { serrin_pairs: vec![(3.0, 2.0)], ..Default::default() }).is_err();
    let accepts = check_pair(f64::INFINITY, 2.0).is_ok()
        && check_pair(4.0, 8.0).is_ok()
        && CriterionConfig::new(vec![(f64::INFINITY, 2.0), (4.0, 8.0)], vec![(4.0, 8.0)], 1, 3).is_ok();
    out.line(
        "AC10",
        "monitor admissibility",
        rejects && accepts,
        format!("(3,2) rejected={rejects}; (inf,2),(4,8) accepted={accepts}"),
    );
}

fn main() -> ExitCode {
    // libtest flags such as --nocapture are accepted and ignored
    let mut out = Outcome { failures: 0, max_div: 0.0, max_drift: 0.0 };
    ac1(&mut out);
    ac3(&mut out);
    ac2(&mut out);
    ac5(&mut out);
    ac8(&mut out);
    ac9(&mut out);
    out.line(
        "AC4",
        "divergence and mean preservation",
        out.max_div <= DIVERGENCE_TOL && out.max_drift <= MEAN_DRIFT_TOL,
        format!(
            "max div={:.3e} (<= {DIVERGENCE_TOL:e}) max mean drift={:.3e} (<= {MEAN_DRIFT_TOL:e})",
            out.max_div, out.max_drift
        ),
    );
    ac6(&mut out);
    ac7(&mut out);
    ac10(&mut out);
    if out.failures == 0 {
        println!("acceptance: all criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {} criteria fail", out.failures);
        ExitCode::FAILURE
    }
}
