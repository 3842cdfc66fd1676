//! Empirical constants for the toolbox inequalities.
//!
//! Protocol: each check is evaluated on a seeded population of random
//! fields and the largest ratio is recorded as its empirical constant
//! `C_emp`. The first seed calibrates; that seed is then re-run and
//! further independent seeds are drawn. A check passes when every
//! population maximum is finite, the re-run stays below
//! `RERUN_FACTOR · C_emp`, and the per-seed maxima agree within
//! `SEED_SPREAD` relative.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::inequalities::{
    check_bernstein, check_bmo_bound, check_commutator, check_interpolation, check_norm_equivalence,
    check_product_law, InequalityError,
};
use super::{bmo_proxy, DyadicLadder};
use crate::random::{random_band_field, seeded_rng, FieldRng};
use crate::spectral::{make_grid, Grid};

/// Re-runs may not exceed this multiple of the calibrated constant.
pub const RERUN_FACTOR: f64 = 1.05;
/// Allowed relative spread of population maxima across seeds.
pub const SEED_SPREAD: f64 = 0.10;

/// Grid used for calibration: 24³ keeps products of fields band-limited to
/// `|k| <= 4` exact under the 2/3 mask (radius 8).
pub const CALIBRATION_N: usize = 24;
const PRODUCT_BAND: f64 = 4.0;
const FULL_BAND: f64 = 8.0;
const BERNSTEIN_SHELL: i32 = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InequalityCheck {
    /// Bernstein, `‖∇f‖_{L²} <= C 2^q ‖f‖_{L²}` on shell-supported `f`.
    BernsteinUpper,
    /// Bernstein, `2^q ‖f‖_{L²} <= C ‖∇f‖_{L²}`.
    BernsteinLower,
    /// Bernstein embedding `‖f‖_{L^∞} <= C 2^{3q/2} ‖f‖_{L²}`.
    BernsteinEmbedding,
    /// `‖∇f‖_{Ḃ^{1/2}_{2,1}}` against `‖f‖_{Ḃ^{3/2}_{2,1}}`.
    NormEquivalence,
    /// `‖fg‖_{Ḃ^{3/2}_{2,1}} <= C ‖f‖_{Ḃ^{3/2}_{2,1}} ‖g‖_{Ḃ^{3/2}_{2,1}}`.
    ProductLaw,
    /// `Σ_q 2^{3q/2} ‖[u,Δ_q]w‖_{L²} <= C ‖u‖_{Ḃ^{5/2}_{2,1}} ‖w‖_{Ḃ^{1/2}_{2,1}}`.
    Commutator,
    /// `‖f‖_{Ḃ^{1/2}_{2,1}} <= C ‖f‖^{1/3}_{Ḃ^{3/2}_{2,1}} ‖f‖^{2/3}_{L²}`.
    Interpolation,
    /// `bmo(f) <= C (bmo(∇f) + ‖f‖_{L²})`.
    BmoBound,
    /// `bmo(f) <= C ‖f‖_{L^∞}`.
    BmoLinfty,
}

impl InequalityCheck {
    pub const ALL: [InequalityCheck; 9] = [
        Self::BernsteinUpper,
        Self::BernsteinLower,
        Self::BernsteinEmbedding,
        Self::NormEquivalence,
        Self::ProductLaw,
        Self::Commutator,
        Self::Interpolation,
        Self::BmoBound,
        Self::BmoLinfty,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::BernsteinUpper => "bernstein_upper",
            Self::BernsteinLower => "bernstein_lower",
            Self::BernsteinEmbedding => "bernstein_embedding",
            Self::NormEquivalence => "norm_equivalence",
            Self::ProductLaw => "product_law",
            Self::Commutator => "commutator",
            Self::Interpolation => "interpolation",
            Self::BmoBound => "bmo_bound",
            Self::BmoLinfty => "bmo_linfty",
        }
    }
}

/// Ratios of one sample for every check that shares the sample's fields.
fn sample_ratios(grid: &Arc<Grid>, rng: &mut FieldRng) -> Result<[f64; 9], InequalityError> {
    // shell-2 field for Bernstein
    let (lo, hi) = (2f64.powi(BERNSTEIN_SHELL - 1), 2f64.powi(BERNSTEIN_SHELL));
    let mut shell = random_band_field(grid, 1, lo, hi, 0.0, rng);
    // the band edges are inclusive; drop |k| = 2 which belongs to shell 1
    let ladder = DyadicLadder::for_grid(grid);
    for idx in 0..grid.len() {
        if ladder.shell_of(idx) != Some(BERNSTEIN_SHELL) {
            shell.component_mut(0)[idx] = Default::default();
        }
    }
    let bern = check_bernstein(&shell, BERNSTEIN_SHELL, 1, 2.0, f64::INFINITY)?;

    let wide = random_band_field(grid, 1, 1.0, FULL_BAND, 1.0, rng);
    let f = random_band_field(grid, 1, 1.0, PRODUCT_BAND, 1.0, rng);
    let g = random_band_field(grid, 1, 1.0, PRODUCT_BAND, 1.0, rng);

    let equivalence = check_norm_equivalence(&wide, 0.5);
    let product = check_product_law(&f, &g, 1.5, 1.5)?.ratio;
    let comm = check_commutator(&f, &g, 0.5)?;
    let interp = check_interpolation(&wide, 0.5, 1.5, 1.0 / 3.0)?;
    let bmo = check_bmo_bound(&wide);
    let linf = wide.lp_norm(f64::INFINITY)?;
    let bmo_linf = if linf == 0.0 { 0.0 } else { bmo_proxy(&wide) / linf };

    Ok([
        bern.derivative_upper,
        bern.derivative_lower,
        bern.embedding,
        equivalence,
        product,
        comm,
        interp,
        bmo,
        bmo_linf,
    ])
}

/// Population statistics of every check for one seed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Population {
    pub seed: u64,
    pub samples: usize,
    pub max: Vec<f64>,
    pub min: Vec<f64>,
}

pub fn run_population(samples: usize, seed: u64) -> Result<Population, InequalityError> {
    let grid = make_grid(CALIBRATION_N, 2.0 * std::f64::consts::PI, 3)?;
    let mut rng = seeded_rng(seed);
    let mut max = vec![f64::NEG_INFINITY; 9];
    let mut min = vec![f64::INFINITY; 9];
    for _ in 0..samples {
        let r = sample_ratios(&grid, &mut rng)?;
        for i in 0..9 {
            // NaN propagates so that a broken sample cannot look finite
            max[i] = if r[i].is_nan() || max[i].is_nan() { f64::NAN } else { max[i].max(r[i]) };
            min[i] = min[i].min(r[i]);
        }
    }
    Ok(Population { seed, samples, max, min })
}

/// Verdict for one check across seeds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckVerdict {
    pub check: InequalityCheck,
    pub calibrated: f64,
    pub per_seed: Vec<f64>,
    pub rerun: f64,
    pub spread: f64,
    pub finite: bool,
    pub within_rerun_factor: bool,
    /// Largest independent-seed maximum over the calibrated constant.
    /// Reported only; the seed-to-seed criterion is `stable`.
    pub independent_ratio: f64,
    pub stable: bool,
}

impl CheckVerdict {
    pub fn passed(&self) -> bool {
        self.finite && self.within_rerun_factor && self.stable
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub samples: usize,
    pub seeds: Vec<u64>,
    pub verdicts: Vec<CheckVerdict>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(CheckVerdict::passed)
    }
}

/// Calibrates on `seed`, re-runs it, and compares the population maxima of
/// seeds `seed ..= seed+extra_seeds`.
pub fn run_suite(samples: usize, seed: u64, extra_seeds: u64) -> Result<SuiteReport, InequalityError> {
    // populations are independent; the re-run of the calibration seed goes last
    let mut seeds: Vec<u64> = (0..=extra_seeds).map(|s| seed.wrapping_add(s)).collect();
    seeds.push(seed);
    let mut pops = std::thread::scope(|scope| {
        let handles: Vec<_> = seeds
            .iter()
            .map(|&s| scope.spawn(move || run_population(samples, s)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("calibration worker panicked"))
            .collect::<Result<Vec<_>, _>>()
    })?;
    let rerun = pops.pop().expect("re-run population");
    let calib = pops[0].clone();
    let verdicts = InequalityCheck::ALL
        .iter()
        .enumerate()
        .map(|(i, &check)| {
            let c = calib.max[i];
            let per_seed: Vec<f64> = pops.iter().map(|p| p.max[i]).collect();
            let hi = per_seed.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let lo = per_seed.iter().copied().fold(f64::INFINITY, f64::min);
            let finite = per_seed.iter().all(|v| v.is_finite()) && rerun.max[i].is_finite();
            let spread = if hi > 0.0 { (hi - lo) / hi } else { 0.0 };
            let within = rerun.max[i] <= RERUN_FACTOR * c;
            let independent_max = per_seed[1..].iter().copied().fold(f64::NEG_INFINITY, f64::max);
            CheckVerdict {
                check,
                calibrated: c,
                per_seed,
                rerun: rerun.max[i],
                spread,
                finite,
                within_rerun_factor: within,
                independent_ratio: if c > 0.0 { independent_max / c } else { 0.0 },
                stable: spread <= SEED_SPREAD,
            }
        })
        .collect();
    Ok(SuiteReport {
        samples,
        seeds: pops.iter().map(|p| p.seed).collect(),
        verdicts,
    })
}
