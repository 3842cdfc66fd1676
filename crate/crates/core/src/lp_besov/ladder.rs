use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use num_complex::Complex64;

use crate::spectral::{Grid, SpectralField};

/// Sharp dyadic partition of the wavenumber lattice.
///
/// Shell `q` holds the nonzero wavevectors with `2^{q-1} < |k| <= 2^q`,
/// so `|k| = 1` sits in shell 0 and `|k| = 3` in shell 2. Every nonzero
/// lattice point, retained by the dealiasing mask or not, belongs to
/// exactly one shell; the zero mode belongs to none.
#[derive(Debug)]
pub struct DyadicLadder {
    grid: Arc<Grid>,
    q_min: i32,
    q_max: i32,
    shell_of: Vec<Option<i32>>,
    members: Vec<Vec<usize>>,
}

type LadderKey = (usize, u64, usize);

fn cache() -> &'static RwLock<HashMap<LadderKey, Arc<DyadicLadder>>> {
    static CACHE: OnceLock<RwLock<HashMap<LadderKey, Arc<DyadicLadder>>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

/// Shell index of a wavenumber magnitude given as `|k|²`.
pub fn shell_index(k_sq: f64) -> i32 {
    debug_assert!(k_sq > 0.0);
    let tol = 1e-12;
    let mut q = (0.5 * k_sq.log2()).ceil() as i32;
    // fix up rounding at exact powers of two
    while k_sq <= 4f64.powi(q - 1) * (1.0 + tol) {
        q -= 1;
    }
    while k_sq > 4f64.powi(q) * (1.0 + tol) {
        q += 1;
    }
    q
}

impl DyadicLadder {
    /// Ladder for `grid`, built once per lattice and shared afterwards.
    pub fn for_grid(grid: &Arc<Grid>) -> Arc<DyadicLadder> {
        let key = (grid.n(), grid.box_length().to_bits(), grid.dims());
        if let Some(l) = cache().read().expect("ladder cache poisoned").get(&key) {
            return Arc::clone(l);
        }
        let built = Arc::new(Self::build(grid));
        let mut w = cache().write().expect("ladder cache poisoned");
        Arc::clone(w.entry(key).or_insert(built))
    }

    fn build(grid: &Arc<Grid>) -> Self {
        let shell_of: Vec<Option<i32>> = (0..grid.len())
            .map(|idx| {
                let ksq = grid.k_sq(idx);
                (ksq > 0.0).then(|| shell_index(ksq))
            })
            .collect();
        let q_min = shell_of.iter().flatten().copied().min().unwrap_or(0);
        let q_max = shell_of.iter().flatten().copied().max().unwrap_or(0);
        let mut members = vec![Vec::new(); (q_max - q_min + 1) as usize];
        for (idx, q) in shell_of.iter().enumerate() {
            if let Some(q) = q {
                members[(q - q_min) as usize].push(idx);
            }
        }
        Self { grid: Arc::clone(grid), q_min, q_max, shell_of, members }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn q_min(&self) -> i32 {
        self.q_min
    }

    pub fn q_max(&self) -> i32 {
        self.q_max
    }

    pub fn shells(&self) -> std::ops::RangeInclusive<i32> {
        self.q_min..=self.q_max
    }

    pub fn shell_of(&self, idx: usize) -> Option<i32> {
        self.shell_of[idx]
    }

    /// Lattice indices in shell `q` (empty outside `[q_min, q_max]`).
    pub fn members(&self, q: i32) -> &[usize] {
        if q < self.q_min || q > self.q_max {
            return &[];
        }
        &self.members[(q - self.q_min) as usize]
    }

    /// `Δ_q f`: coefficients of `f` restricted to shell `q`.
    pub fn block(&self, f: &SpectralField, q: i32) -> SpectralField {
        let len = self.grid.len();
        let mut out = SpectralField::zeros(f.grid(), f.ncomp());
        for c in 0..f.ncomp() {
            let src = f.component(c);
            let dst = out.component_mut(c);
            for &idx in self.members(q) {
                dst[idx] = src[idx];
            }
            debug_assert_eq!(dst.len(), len);
        }
        out
    }

    /// `‖Δ_q f‖_{L²}` for every shell, by Parseval.
    pub fn block_l2_norms(&self, f: &SpectralField) -> Vec<(i32, f64)> {
        let vol = self.grid.volume();
        self.shells()
            .map(|q| {
                let s: f64 = (0..f.ncomp())
                    .map(|c| {
                        let comp = f.component(c);
                        self.members(q).iter().map(|&i| comp[i].norm_sqr()).sum::<f64>()
                    })
                    .sum();
                (q, (vol * s).sqrt())
            })
            .collect()
    }

    /// Largest coefficient magnitude of `f` outside shell `q`.
    pub fn max_outside_shell(&self, f: &SpectralField, q: i32) -> f64 {
        let mut m: f64 = 0.0;
        for c in 0..f.ncomp() {
            for (idx, v) in f.component(c).iter().enumerate() {
                if self.shell_of[idx] != Some(q) {
                    m = m.max(v.norm());
                }
            }
        }
        m
    }

    /// Square function `(Σ_q Σ_c |Δ_q f_c(x)|²)^{1/2}` at every lattice point.
    pub fn square_function(&self, f: &SpectralField) -> Vec<f64> {
        let len = self.grid.len();
        let mut acc = vec![0.0; len];
        let zero = Complex64::new(0.0, 0.0);
        for c in 0..f.ncomp() {
            let src = f.component(c);
            for q in self.shells() {
                let idxs = self.members(q);
                if idxs.iter().all(|&i| src[i] == zero) {
                    continue;
                }
                let mut block = SpectralField::zeros(f.grid(), 1);
                let dst = block.component_mut(0);
                for &i in idxs {
                    dst[i] = src[i];
                }
                for (a, v) in acc.iter_mut().zip(block.to_physical()) {
                    *a += v * v;
                }
            }
        }
        acc.iter_mut().for_each(|a| *a = a.sqrt());
        acc
    }
}

/// `Δ_q f` using the cached ladder of `f`'s grid.
pub fn dyadic_block(f: &SpectralField, q: i32) -> SpectralField {
    DyadicLadder::for_grid(f.grid()).block(f, q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::make_grid;
    use std::f64::consts::PI;

    #[test]
    fn shell_boundaries() {
        assert_eq!(shell_index(1.0), 0);
        assert_eq!(shell_index(2.0), 1);
        assert_eq!(shell_index(3.0), 1);
        assert_eq!(shell_index(4.0), 1);
        assert_eq!(shell_index(5.0), 2);
        assert_eq!(shell_index(9.0), 2);
        assert_eq!(shell_index(16.0), 2);
        assert_eq!(shell_index(17.0), 3);
        assert_eq!(shell_index(0.25), -1);
        assert_eq!(shell_index(0.5), 0);
    }

    #[test]
    fn every_nonzero_mode_in_exactly_one_shell() {
        let g = make_grid(16, 2.0 * PI, 3).unwrap();
        let l = DyadicLadder::for_grid(&g);
        let total: usize = l.shells().map(|q| l.members(q).len()).sum();
        assert_eq!(total, g.len() - 1);
        assert_eq!(l.q_min(), 0);
        // largest |k| is sqrt(3)*8 ≈ 13.9, shell 4
        assert_eq!(l.q_max(), 4);
        assert!(l.members(-3).is_empty() && l.members(9).is_empty());
        for idx in 1..g.len() {
            let q = l.shell_of(idx).unwrap();
            let k = g.k_sq(idx).sqrt();
            assert!(2f64.powi(q - 1) < k && k <= 2f64.powi(q) + 1e-12);
        }
    }

    #[test]
    fn ladder_is_cached_per_grid() {
        let g1 = make_grid(8, 2.0 * PI, 3).unwrap();
        let g2 = make_grid(8, 2.0 * PI, 3).unwrap();
        assert!(Arc::ptr_eq(&DyadicLadder::for_grid(&g1), &DyadicLadder::for_grid(&g2)));
        let g3 = make_grid(16, 4.0 * PI, 2).unwrap();
        assert_eq!(DyadicLadder::for_grid(&g3).q_min(), -1);
    }

    #[test]
    fn single_modes_land_in_expected_shell() {
        let g = make_grid(16, 2.0 * PI, 3).unwrap();
        let f1 = SpectralField::from_fn(&g, 1, |x, o| o[0] = x[1].cos());
        assert!(dyadic_block(&f1, 0).max_coeff_diff(&f1).unwrap() < 1e-15);
        for q in [-1, 1, 2, 3] {
            assert!(dyadic_block(&f1, q).max_coeff() < 1e-15);
        }
        let f3 = SpectralField::from_fn(&g, 1, |x, o| o[0] = (3.0 * x[2]).sin());
        assert!(dyadic_block(&f3, 2).max_coeff_diff(&f3).unwrap() < 1e-15);
        assert!(dyadic_block(&f3, 1).max_coeff() < 1e-15);
    }
}
