use std::fmt;
use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use super::SpectralError;

/// Fraction of the Nyquist wavenumber kept by the radial dealiasing mask.
pub const DEALIAS_FRACTION: f64 = 2.0 / 3.0;

/// Periodic lattice `[0, L)^d` with its wavenumber tables, dealiasing mask
/// and cached FFT plans.
///
/// Lattice points are stored row-major: axis 0 (x₁) varies slowest. The
/// integer frequency at index `i` along an axis is `i` for `i < n/2` and
/// `i - n` otherwise, so each axis covers `[-n/2, n/2)`.
pub struct Grid {
    n: usize,
    box_length: f64,
    dims: usize,
    /// Physical wavenumber per axis index, Nyquist included as `-n/2`.
    axis_k: Vec<f64>,
    k_deriv: Vec<[f64; 3]>,
    k_sq: Vec<f64>,
    mask: Vec<bool>,
    /// Flat index of `-k` for each `k`.
    neg: Vec<usize>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("n", &self.n)
            .field("box_length", &self.box_length)
            .field("dims", &self.dims)
            .finish()
    }
}

/// Builds a shared grid; see [`Grid::new`].
pub fn make_grid(n: usize, box_length: f64, dims: usize) -> Result<Arc<Grid>, SpectralError> {
    Grid::new(n, box_length, dims).map(Arc::new)
}

impl Grid {
    pub fn new(n: usize, box_length: f64, dims: usize) -> Result<Self, SpectralError> {
        if n < 4 || n % 2 != 0 {
            return Err(SpectralError::InvalidGrid(format!(
                "n_per_axis must be an even integer >= 4, got {n}"
            )));
        }
        if !(box_length.is_finite() && box_length > 0.0) {
            return Err(SpectralError::InvalidGrid(format!(
                "box_length must be positive and finite, got {box_length}"
            )));
        }
        if dims != 2 && dims != 3 {
            return Err(SpectralError::InvalidGrid(format!("dims must be 2 or 3, got {dims}")));
        }

        let k0 = 2.0 * std::f64::consts::PI / box_length;
        let half = n / 2;
        let axis_k: Vec<f64> = (0..n)
            .map(|i| {
                let m = if i < half { i as f64 } else { i as f64 - n as f64 };
                m * k0
            })
            .collect();
        let axis_k_deriv: Vec<f64> = axis_k
            .iter()
            .enumerate()
            .map(|(i, &k)| if i == half { 0.0 } else { k })
            .collect();

        let len = n.pow(dims as u32);
        let cutoff = DEALIAS_FRACTION * std::f64::consts::PI * n as f64 / box_length;
        let cutoff_sq = cutoff * cutoff * (1.0 + 1e-12);
        let mut k_deriv = Vec::with_capacity(len);
        let mut k_sq = Vec::with_capacity(len);
        let mut mask = Vec::with_capacity(len);
        let mut neg = Vec::with_capacity(len);
        for idx in 0..len {
            let ix = lattice_indices(idx, n, dims);
            let flip = ix.map(|i| (n - i) % n);
            neg.push(match dims {
                2 => flip[0] * n + flip[1],
                _ => (flip[0] * n + flip[1]) * n + flip[2],
            });
            let mut kd = [0.0; 3];
            let mut ksq = 0.0;
            for a in 0..dims {
                kd[a] = axis_k_deriv[ix[a]];
                ksq += axis_k[ix[a]] * axis_k[ix[a]];
            }
            k_deriv.push(kd);
            k_sq.push(ksq);
            mask.push(ksq <= cutoff_sq);
        }

        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);

        Ok(Self { n, box_length, dims, axis_k, k_deriv, k_sq, mask, neg, fwd, inv })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn box_length(&self) -> f64 {
        self.box_length
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    /// Number of lattice points, `n^d`.
    pub fn len(&self) -> usize {
        self.k_sq.len()
    }

    pub fn is_empty(&self) -> bool {
        self.k_sq.is_empty()
    }

    /// Volume of the periodic box, `L^d`.
    pub fn volume(&self) -> f64 {
        self.box_length.powi(self.dims as i32)
    }

    /// Grid spacing `L / n`.
    pub fn dx(&self) -> f64 {
        self.box_length / self.n as f64
    }

    /// Fundamental wavenumber `2π / L`.
    pub fn fundamental(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.box_length
    }

    /// Radial cutoff of the dealiasing mask.
    pub fn dealias_cutoff(&self) -> f64 {
        DEALIAS_FRACTION * std::f64::consts::PI * self.n as f64 / self.box_length
    }

    /// Wavenumbers along one axis, Nyquist included.
    pub fn axis_wavenumbers(&self) -> &[f64] {
        &self.axis_k
    }

    /// Derivative wavevector at a lattice point (third entry 0 in 2D). The
    /// Nyquist entry is zeroed so odd derivatives of real fields stay real.
    pub fn k_deriv(&self, idx: usize) -> [f64; 3] {
        self.k_deriv[idx]
    }

    /// `|k|²` at a lattice point, Nyquist frequencies included.
    pub fn k_sq(&self, idx: usize) -> f64 {
        self.k_sq[idx]
    }

    pub fn k_sq_all(&self) -> &[f64] {
        &self.k_sq
    }

    pub fn dealias_mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn is_retained(&self, idx: usize) -> bool {
        self.mask[idx]
    }

    /// Integer lattice indices of a flat index (unused axes are 0).
    pub fn indices(&self, idx: usize) -> [usize; 3] {
        lattice_indices(idx, self.n, self.dims)
    }

    /// Flat index from per-axis lattice indices.
    pub fn flat_index(&self, ix: [usize; 3]) -> usize {
        match self.dims {
            2 => ix[0] * self.n + ix[1],
            _ => (ix[0] * self.n + ix[1]) * self.n + ix[2],
        }
    }

    /// Flat index of the integer frequency vector `m` (components taken
    /// modulo `n`).
    pub fn index_of_frequency(&self, m: [i64; 3]) -> usize {
        let n = self.n as i64;
        let wrap = |v: i64| v.rem_euclid(n) as usize;
        self.flat_index([wrap(m[0]), wrap(m[1]), wrap(m[2])])
    }

    /// Signed integer frequency vector of a flat index.
    pub fn frequency(&self, idx: usize) -> [i64; 3] {
        let ix = self.indices(idx);
        let n = self.n as i64;
        let half = n / 2;
        let mut m = [0i64; 3];
        for a in 0..self.dims {
            let i = ix[a] as i64;
            m[a] = if i < half { i } else { i - n };
        }
        m
    }

    /// Physical coordinates of a lattice point.
    pub fn coordinates(&self, idx: usize) -> [f64; 3] {
        let ix = self.indices(idx);
        let dx = self.dx();
        let mut x = [0.0; 3];
        for a in 0..self.dims {
            x[a] = ix[a] as f64 * dx;
        }
        x
    }

    /// True when both grids describe the same lattice.
    pub fn same_as(&self, other: &Grid) -> bool {
        self.n == other.n && self.dims == other.dims && self.box_length == other.box_length
    }

    /// Flat index of the negated frequency.
    pub(crate) fn neg_index(&self) -> &[usize] {
        &self.neg
    }

    pub(crate) fn plans(&self) -> (&Arc<dyn Fft<f64>>, &Arc<dyn Fft<f64>>) {
        (&self.fwd, &self.inv)
    }
}

fn lattice_indices(idx: usize, n: usize, dims: usize) -> [usize; 3] {
    match dims {
        2 => [idx / n, idx % n, 0],
        _ => [idx / (n * n), (idx / n) % n, idx % n],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn small_grid_lattice_and_mask() {
        let g = Grid::new(8, 2.0 * PI, 3).unwrap();
        let freqs: Vec<f64> = g.axis_wavenumbers().to_vec();
        assert_eq!(freqs, vec![0.0, 1.0, 2.0, 3.0, -4.0, -3.0, -2.0, -1.0]);
        // radial cutoff 8/3: (2,0,0) and (1,1,1) kept, (3,0,0) and (2,2,0) dropped
        assert!(g.is_retained(g.index_of_frequency([2, 0, 0])));
        assert!(g.is_retained(g.index_of_frequency([-2, 0, 0])));
        assert!(g.is_retained(g.index_of_frequency([1, 1, 1])));
        assert!(!g.is_retained(g.index_of_frequency([3, 0, 0])));
        assert!(!g.is_retained(g.index_of_frequency([2, 2, 0])));
        assert!(g.is_retained(0));
        for idx in 0..g.len() {
            if g.is_retained(idx) {
                assert!(g.k_sq(idx).sqrt() <= g.dealias_cutoff() + 1e-12);
            }
        }
    }

    #[test]
    fn smallest_grid() {
        let g = Grid::new(4, 2.0 * PI, 3).unwrap();
        assert_eq!(g.len(), 64);
    }

    #[test]
    fn fundamental_scales_with_box() {
        let g = Grid::new(16, 4.0 * PI, 2).unwrap();
        assert!((g.fundamental() - 0.5).abs() < 1e-15);
        assert_eq!(g.axis_wavenumbers()[1], 0.5);
        assert_eq!(g.len(), 256);
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(Grid::new(7, 2.0 * PI, 3).is_err());
        assert!(Grid::new(2, 2.0 * PI, 3).is_err());
        assert!(Grid::new(8, -1.0, 3).is_err());
        assert!(Grid::new(8, 2.0 * PI, 1).is_err());
    }

    #[test]
    fn index_roundtrip() {
        let g = Grid::new(6, 2.0 * PI, 3).unwrap();
        for idx in 0..g.len() {
            assert_eq!(g.index_of_frequency(g.frequency(idx)), idx);
            assert_eq!(g.flat_index(g.indices(idx)), idx);
        }
    }
}
