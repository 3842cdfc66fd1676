use std::sync::Arc;

use num_complex::Complex64;

use super::fft::{transform, Direction};
use super::{Grid, SpectralError};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Fourier coefficients of a real scalar or vector field on a periodic grid.
///
/// Coefficients are stored component-major, each component in the grid's
/// row-major lattice order. The field is real in physical space, so the
/// coefficients are Hermitian: `f̂(-k) = conj(f̂(k))`.
#[derive(Clone, Debug)]
pub struct SpectralField {
    grid: Arc<Grid>,
    ncomp: usize,
    coeffs: Vec<Complex64>,
}

impl PartialEq for SpectralField {
    fn eq(&self, other: &Self) -> bool {
        self.grid.same_as(&other.grid) && self.ncomp == other.ncomp && self.coeffs == other.coeffs
    }
}

impl SpectralField {
    pub fn zeros(grid: &Arc<Grid>, ncomp: usize) -> Self {
        Self { grid: Arc::clone(grid), ncomp, coeffs: vec![ZERO; ncomp * grid.len()] }
    }

    /// Wraps raw coefficients. The caller is responsible for Hermitian symmetry.
    pub fn from_coeffs(
        grid: &Arc<Grid>,
        ncomp: usize,
        coeffs: Vec<Complex64>,
    ) -> Result<Self, SpectralError> {
        let expected = ncomp * grid.len();
        if coeffs.len() != expected {
            return Err(SpectralError::ShapeMismatch { expected, got: coeffs.len() });
        }
        Ok(Self { grid: Arc::clone(grid), ncomp, coeffs })
    }

    /// Forward transform of component-major physical samples.
    pub fn from_physical(
        grid: &Arc<Grid>,
        ncomp: usize,
        samples: &[f64],
    ) -> Result<Self, SpectralError> {
        let len = grid.len();
        if ncomp == 0 || samples.len() != ncomp * len {
            return Err(SpectralError::ShapeMismatch { expected: ncomp * len, got: samples.len() });
        }
        let mut coeffs = vec![ZERO; ncomp * len];
        let neg = grid.neg_index();
        let mut buf = vec![ZERO; len];
        // two real components per complex transform: z = a + ib, then
        // â(k) = (ẑ(k) + conj ẑ(-k))/2, b̂(k) = (ẑ(k) - conj ẑ(-k))/2i
        for c in (0..ncomp).step_by(2) {
            let a = &samples[c * len..(c + 1) * len];
            if c + 1 == ncomp {
                for (z, &x) in buf.iter_mut().zip(a) {
                    *z = Complex64::new(x, 0.0);
                }
                transform(grid, &mut buf, Direction::Forward);
                coeffs[c * len..].copy_from_slice(&buf);
                break;
            }
            let b = &samples[(c + 1) * len..(c + 2) * len];
            for ((z, &x), &y) in buf.iter_mut().zip(a).zip(b) {
                *z = Complex64::new(x, y);
            }
            transform(grid, &mut buf, Direction::Forward);
            let (ca, cb) = coeffs[c * len..(c + 2) * len].split_at_mut(len);
            for idx in 0..len {
                let z = buf[idx];
                let w = buf[neg[idx]].conj();
                ca[idx] = (z + w) * 0.5;
                let d = (z - w) * 0.5;
                cb[idx] = Complex64::new(d.im, -d.re);
            }
        }
        Ok(Self { grid: Arc::clone(grid), ncomp, coeffs })
    }

    /// Samples `f(x)` at every lattice point. `f` writes `ncomp` values.
    pub fn from_fn<F>(grid: &Arc<Grid>, ncomp: usize, f: F) -> Self
    where
        F: Fn([f64; 3], &mut [f64]),
    {
        let len = grid.len();
        let mut samples = vec![0.0; ncomp * len];
        let mut buf = vec![0.0; ncomp];
        for idx in 0..len {
            f(grid.coordinates(idx), &mut buf);
            for c in 0..ncomp {
                samples[c * len + idx] = buf[c];
            }
        }
        Self::from_physical(grid, ncomp, &samples).expect("sizes agree by construction")
    }

    /// Inverse transform to component-major physical samples. Components
    /// are transformed in pairs as `f̂_a + i f̂_b`, which relies on Hermitian
    /// symmetry of the coefficients.
    pub fn to_physical(&self) -> Vec<f64> {
        let len = self.grid.len();
        let mut out = vec![0.0; self.coeffs.len()];
        let mut buf = vec![ZERO; len];
        for c in (0..self.ncomp).step_by(2) {
            let a = self.component(c);
            if c + 1 == self.ncomp {
                buf.copy_from_slice(a);
                transform(&self.grid, &mut buf, Direction::Inverse);
                for (o, z) in out[c * len..].iter_mut().zip(&buf) {
                    *o = z.re;
                }
                break;
            }
            let b = self.component(c + 1);
            for ((z, x), y) in buf.iter_mut().zip(a).zip(b) {
                *z = Complex64::new(x.re - y.im, x.im + y.re);
            }
            transform(&self.grid, &mut buf, Direction::Inverse);
            let (oa, ob) = out[c * len..(c + 2) * len].split_at_mut(len);
            for ((x, y), z) in oa.iter_mut().zip(ob.iter_mut()).zip(&buf) {
                *x = z.re;
                *y = z.im;
            }
        }
        out
    }

    /// Inverse transform keeping the imaginary parts, for symmetry checks.
    pub fn to_physical_complex(&self) -> Vec<Complex64> {
        let len = self.grid.len();
        let mut out = self.coeffs.clone();
        for chunk in out.chunks_mut(len) {
            transform(&self.grid, chunk, Direction::Inverse);
        }
        out
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn ncomp(&self) -> usize {
        self.ncomp
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    pub fn component(&self, c: usize) -> &[Complex64] {
        let len = self.grid.len();
        &self.coeffs[c * len..(c + 1) * len]
    }

    pub fn component_mut(&mut self, c: usize) -> &mut [Complex64] {
        let len = self.grid.len();
        &mut self.coeffs[c * len..(c + 1) * len]
    }

    /// Single component as a scalar field.
    pub fn component_field(&self, c: usize) -> SpectralField {
        Self { grid: Arc::clone(&self.grid), ncomp: 1, coeffs: self.component(c).to_vec() }
    }

    /// Concatenates fields on the same grid into one multi-component field.
    pub fn stack(parts: &[&SpectralField]) -> Result<SpectralField, SpectralError> {
        let first = parts.first().ok_or(SpectralError::ComponentMismatch {
            op: "stack",
            expected: 1,
            got: 0,
        })?;
        let mut coeffs = Vec::new();
        let mut ncomp = 0;
        for p in parts {
            first.check_grid(p)?;
            coeffs.extend_from_slice(&p.coeffs);
            ncomp += p.ncomp;
        }
        Ok(Self { grid: Arc::clone(&first.grid), ncomp, coeffs })
    }

    /// Coefficient of component `c` at integer frequency `m`.
    pub fn coefficient(&self, c: usize, m: [i64; 3]) -> Complex64 {
        self.component(c)[self.grid.index_of_frequency(m)]
    }

    pub fn set_coefficient(&mut self, c: usize, m: [i64; 3], v: Complex64) {
        let idx = self.grid.index_of_frequency(m);
        self.component_mut(c)[idx] = v;
    }

    /// Zero-mode coefficient (spatial mean) per component.
    pub fn mean(&self) -> Vec<Complex64> {
        (0..self.ncomp).map(|c| self.component(c)[0]).collect()
    }

    /// Copy with the zero mode removed.
    pub fn without_mean(&self) -> SpectralField {
        let mut out = self.clone();
        for c in 0..self.ncomp {
            out.component_mut(c)[0] = ZERO;
        }
        out
    }

    pub(crate) fn check_grid(&self, other: &SpectralField) -> Result<(), SpectralError> {
        if Arc::ptr_eq(&self.grid, &other.grid) || self.grid.same_as(&other.grid) {
            Ok(())
        } else {
            Err(SpectralError::GridMismatch)
        }
    }

    fn check_same_shape(&self, other: &SpectralField, op: &'static str) -> Result<(), SpectralError> {
        self.check_grid(other)?;
        if self.ncomp != other.ncomp {
            return Err(SpectralError::ComponentMismatch { op, expected: self.ncomp, got: other.ncomp });
        }
        Ok(())
    }

    fn require_components(&self, op: &'static str, expected: usize) -> Result<(), SpectralError> {
        if self.ncomp != expected {
            return Err(SpectralError::ComponentMismatch { op, expected, got: self.ncomp });
        }
        Ok(())
    }

    // ---------------------------------------------------------------- algebra

    pub fn scale(&mut self, a: f64) {
        for v in &mut self.coeffs {
            *v *= a;
        }
    }

    pub fn scaled(&self, a: f64) -> SpectralField {
        let mut out = self.clone();
        out.scale(a);
        out
    }

    /// `self += a * other`.
    pub fn add_scaled(&mut self, a: f64, other: &SpectralField) -> Result<(), SpectralError> {
        self.check_same_shape(other, "add_scaled")?;
        for (x, y) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *x += y * a;
        }
        Ok(())
    }

    pub fn sub(&self, other: &SpectralField) -> Result<SpectralField, SpectralError> {
        let mut out = self.clone();
        out.add_scaled(-1.0, other)?;
        Ok(out)
    }

    pub fn add(&self, other: &SpectralField) -> Result<SpectralField, SpectralError> {
        let mut out = self.clone();
        out.add_scaled(1.0, other)?;
        Ok(out)
    }

    /// Largest coefficient magnitude of `self - other`.
    pub fn max_coeff_diff(&self, other: &SpectralField) -> Result<f64, SpectralError> {
        self.check_same_shape(other, "max_coeff_diff")?;
        Ok(self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
    }

    pub fn max_coeff(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.re == 0.0 && c.im == 0.0)
    }

    pub fn has_non_finite(&self) -> bool {
        self.coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite())
    }

    /// Applies a real per-mode multiplier to every component.
    pub fn apply_multiplier<F: Fn(usize) -> f64>(&mut self, m: F) {
        let len = self.grid.len();
        for chunk in self.coeffs.chunks_mut(len) {
            for (idx, v) in chunk.iter_mut().enumerate() {
                *v *= m(idx);
            }
        }
    }

    /// Zeroes every mode outside the 2/3 dealiasing mask.
    pub fn dealias(&mut self) {
        let grid = Arc::clone(&self.grid);
        let mask = grid.dealias_mask();
        let len = grid.len();
        for chunk in self.coeffs.chunks_mut(len) {
            for (v, &keep) in chunk.iter_mut().zip(mask) {
                if !keep {
                    *v = ZERO;
                }
            }
        }
    }

    pub fn dealiased(&self) -> SpectralField {
        let mut out = self.clone();
        out.dealias();
        out
    }

    /// Largest coefficient magnitude outside the dealiasing mask.
    pub fn max_outside_mask(&self) -> f64 {
        let mask = self.grid.dealias_mask();
        let len = self.grid.len();
        self.coeffs
            .chunks(len)
            .flat_map(|chunk| chunk.iter().zip(mask).filter(|(_, &keep)| !keep).map(|(v, _)| v.norm()))
            .fold(0.0, f64::max)
    }

    // -------------------------------------------------------------- operators

    /// `∂_axis` applied to every component.
    pub fn derivative(&self, axis: usize) -> Result<SpectralField, SpectralError> {
        let dims = self.grid.dims();
        if axis >= 3 {
            return Err(SpectralError::InvalidAxis { axis, dims });
        }
        let mut out = self.clone();
        if axis >= dims {
            // fields on a 2D grid do not depend on x₃
            out.coeffs.iter_mut().for_each(|v| *v = ZERO);
            return Ok(out);
        }
        let grid = Arc::clone(&self.grid);
        let len = grid.len();
        for chunk in out.coeffs.chunks_mut(len) {
            for (idx, v) in chunk.iter_mut().enumerate() {
                let k = grid.k_deriv(idx)[axis];
                *v = Complex64::new(-k * v.im, k * v.re);
            }
        }
        Ok(out)
    }

    /// Gradient. A scalar gives 3 components; an `m`-component field gives
    /// `3m` components ordered `(component, axis)`, i.e. entry `c*3 + a`
    /// holds `∂_a f_c`.
    pub fn gradient(&self) -> SpectralField {
        let len = self.grid.len();
        let mut coeffs = Vec::with_capacity(3 * self.coeffs.len());
        for c in 0..self.ncomp {
            let comp = self.component(c);
            for a in 0..3 {
                coeffs.extend(comp.iter().enumerate().map(|(idx, v)| {
                    let k = if a < self.grid.dims() { self.grid.k_deriv(idx)[a] } else { 0.0 };
                    Complex64::new(-k * v.im, k * v.re)
                }));
            }
        }
        debug_assert_eq!(coeffs.len(), 3 * self.ncomp * len);
        Self { grid: Arc::clone(&self.grid), ncomp: 3 * self.ncomp, coeffs }
    }

    pub fn divergence(&self) -> Result<SpectralField, SpectralError> {
        self.require_components("divergence", 3)?;
        let grid = &self.grid;
        let len = grid.len();
        let mut out = vec![ZERO; len];
        for a in 0..3 {
            let comp = self.component(a);
            for (idx, o) in out.iter_mut().enumerate() {
                let k = grid.k_deriv(idx)[a];
                let v = comp[idx];
                *o += Complex64::new(-k * v.im, k * v.re);
            }
        }
        Ok(Self { grid: Arc::clone(grid), ncomp: 1, coeffs: out })
    }

    pub fn curl(&self) -> Result<SpectralField, SpectralError> {
        self.require_components("curl", 3)?;
        let grid = &self.grid;
        let len = grid.len();
        let mut out = vec![ZERO; 3 * len];
        let (fx, fy, fz) = (self.component(0), self.component(1), self.component(2));
        for idx in 0..len {
            let k = grid.k_deriv(idx);
            let i = Complex64::i();
            out[idx] = i * (fz[idx] * k[1] - fy[idx] * k[2]);
            out[len + idx] = i * (fx[idx] * k[2] - fz[idx] * k[0]);
            out[2 * len + idx] = i * (fy[idx] * k[0] - fx[idx] * k[1]);
        }
        Ok(Self { grid: Arc::clone(grid), ncomp: 3, coeffs: out })
    }

    pub fn laplacian(&self) -> SpectralField {
        let grid = Arc::clone(&self.grid);
        let mut out = self.clone();
        out.apply_multiplier(|idx| -grid.k_sq(idx));
        out
    }

    /// Leray projection `I - k kᵀ/|k|²` per mode; the zero mode is untouched.
    pub fn leray_project(&self) -> Result<SpectralField, SpectralError> {
        self.require_components("leray_project", 3)?;
        let mut out = self.clone();
        out.leray_project_in_place();
        Ok(out)
    }

    pub(crate) fn leray_project_in_place(&mut self) {
        debug_assert_eq!(self.ncomp, 3);
        let grid = Arc::clone(&self.grid);
        let len = grid.len();
        let (cx, rest) = self.coeffs.split_at_mut(len);
        let (cy, cz) = rest.split_at_mut(len);
        for idx in 0..len {
            let k = grid.k_deriv(idx);
            let kk = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
            if kk == 0.0 {
                continue;
            }
            let dot = (cx[idx] * k[0] + cy[idx] * k[1] + cz[idx] * k[2]) / kk;
            cx[idx] -= dot * k[0];
            cy[idx] -= dot * k[1];
            cz[idx] -= dot * k[2];
        }
    }

    // ------------------------------------------------------------------ norms

    /// `L²` norm over the box via Parseval: `(L^d Σ_k |f̂_k|²)^{1/2}`.
    pub fn l2_norm(&self) -> f64 {
        (self.grid.volume() * self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>()).sqrt()
    }

    /// `L^p` norm by uniform quadrature of the pointwise Euclidean magnitude,
    /// scaled by the box volume. `p = ∞` gives the grid maximum.
    pub fn lp_norm(&self, p: f64) -> Result<f64, SpectralError> {
        if !(p >= 1.0) {
            return Err(SpectralError::InvalidExponent(p));
        }
        let mag = pointwise_magnitude(&self.to_physical(), self.ncomp, self.grid.len());
        Ok(lp_of_magnitude(&mag, p, self.grid.volume()))
    }

    /// `L²` inner product, the real part of `L^d Σ_k f̂_k conj(ĝ_k)`.
    pub fn inner_product(&self, other: &SpectralField) -> Result<f64, SpectralError> {
        self.check_same_shape(other, "inner_product")?;
        let s: f64 =
            self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a.re * b.re + a.im * b.im).sum();
        Ok(self.grid.volume() * s)
    }

    /// Largest pointwise magnitude on the grid.
    pub fn max_magnitude(&self) -> f64 {
        pointwise_magnitude(&self.to_physical(), self.ncomp, self.grid.len())
            .into_iter()
            .fold(0.0, f64::max)
    }

    /// `Σ_k w(|k|²) |f̂_k|²` summed over components, times the box volume.
    pub fn weighted_energy<F: Fn(f64) -> f64>(&self, weight: F) -> f64 {
        let len = self.grid.len();
        let ksq = self.grid.k_sq_all();
        let s: f64 = self
            .coeffs
            .chunks(len)
            .map(|chunk| chunk.iter().zip(ksq).map(|(v, &k2)| weight(k2) * v.norm_sqr()).sum::<f64>())
            .sum();
        self.grid.volume() * s
    }
}

/// Euclidean magnitude per lattice point of component-major samples.
pub(crate) fn pointwise_magnitude(samples: &[f64], ncomp: usize, len: usize) -> Vec<f64> {
    let mut mag = vec![0.0; len];
    for c in 0..ncomp {
        for (m, v) in mag.iter_mut().zip(&samples[c * len..(c + 1) * len]) {
            *m += v * v;
        }
    }
    mag.iter_mut().for_each(|m| *m = m.sqrt());
    mag
}

pub(crate) fn lp_of_magnitude(mag: &[f64], p: f64, volume: f64) -> f64 {
    if p.is_infinite() {
        return mag.iter().copied().fold(0.0, f64::max);
    }
    let peak = mag.iter().copied().fold(0.0, f64::max);
    if peak == 0.0 {
        return 0.0;
    }
    // scale by the peak so large p does not overflow
    let mean: f64 = mag.iter().map(|m| (m / peak).powf(p)).sum::<f64>() / mag.len() as f64;
    peak * (mean * volume).powf(1.0 / p)
}
