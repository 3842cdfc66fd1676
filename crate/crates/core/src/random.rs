//! Seeded random fields.
//!
//! All randomness goes through [`seeded_rng`]: ChaCha20 (`rand_chacha`)
//! seeded with `seed_from_u64`, which expands the `u64` with PCG32 as
//! documented by `rand_core`. Coefficients are drawn with
//! `Rng::gen_range(-1.0..1.0)` so streams are portable across platforms.

use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::spectral::{Grid, SpectralField};

pub type FieldRng = ChaCha20Rng;

pub fn seeded_rng(seed: u64) -> FieldRng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// Random real field whose coefficients are supported on
/// `k_min <= |k| <= k_max`, with magnitudes shaped by `|k|^{-slope}`.
///
/// Every lattice point in the band gets an independent uniform draw; the
/// result is then symmetrised, `f̂(k) ← (f̂(k) + conj f̂(-k)) / 2`, so the
/// field is real. Lattice points whose negative wraps onto themselves
/// (Nyquist planes) are left at zero.
pub fn random_band_field(
    grid: &Arc<Grid>,
    ncomp: usize,
    k_min: f64,
    k_max: f64,
    slope: f64,
    rng: &mut FieldRng,
) -> SpectralField {
    let len = grid.len();
    let mut coeffs = vec![Complex64::new(0.0, 0.0); ncomp * len];
    let lo = k_min * k_min * (1.0 - 1e-12);
    let hi = k_max * k_max * (1.0 + 1e-12);
    for c in 0..ncomp {
        for idx in 0..len {
            let ksq = grid.k_sq(idx);
            if ksq < lo || ksq > hi {
                continue;
            }
            let amp = if ksq > 0.0 { ksq.powf(-0.5 * slope) } else { 1.0 };
            let re: f64 = rng.gen_range(-1.0..1.0);
            let im: f64 = rng.gen_range(-1.0..1.0);
            coeffs[c * len + idx] = Complex64::new(re, im) * amp;
        }
    }
    let mut sym = coeffs.clone();
    for c in 0..ncomp {
        for idx in 0..len {
            let m = grid.frequency(idx);
            let neg = grid.index_of_frequency([-m[0], -m[1], -m[2]]);
            let v = if neg == idx && idx != 0 {
                Complex64::new(0.0, 0.0)
            } else {
                (coeffs[c * len + idx] + coeffs[c * len + neg].conj()) * 0.5
            };
            sym[c * len + idx] = v;
        }
    }
    SpectralField::from_coeffs(grid, ncomp, sym).expect("sizes agree by construction")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::make_grid;

    #[test]
    fn random_fields_are_real_and_band_limited() {
        let g = make_grid(8, 2.0 * std::f64::consts::PI, 3).unwrap();
        let mut rng = seeded_rng(7);
        let f = random_band_field(&g, 3, 1.0, 2.5, 1.0, &mut rng);
        let phys = f.to_physical_complex();
        let peak = phys.iter().map(|c| c.norm()).fold(0.0, f64::max);
        assert!(peak > 0.0);
        assert!(phys.iter().all(|c| c.im.abs() <= 1e-14 * peak));
        for idx in 0..g.len() {
            if g.k_sq(idx).sqrt() > 2.5 + 1e-9 || g.k_sq(idx) < 1.0 - 1e-9 {
                assert!((0..3).all(|c| f.component(c)[idx].norm() == 0.0));
            }
        }
    }

    #[test]
    fn same_seed_same_field() {
        let g = make_grid(8, 2.0 * std::f64::consts::PI, 3).unwrap();
        let a = random_band_field(&g, 1, 0.0, 3.0, 0.0, &mut seeded_rng(11));
        let b = random_band_field(&g, 1, 0.0, 3.0, 0.0, &mut seeded_rng(11));
        let c = random_band_field(&g, 1, 0.0, 3.0, 0.0, &mut seeded_rng(12));
        assert_eq!(a, b);
        assert_ne!(a, c);
    }
}
