//! Multi-dimensional complex FFT built from 1D `rustfft` passes, one axis
//! at a time. Each 1D line is transformed independently, so results do not
//! depend on evaluation order.

use num_complex::Complex64;

use super::Grid;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Direction {
    Forward,
    Inverse,
}

/// In-place transform of one component (`grid.len()` values). The forward
/// direction is normalised by `1/N^d`; the inverse is unnormalised, so
/// synthesis reads `f(x) = Σ_k f̂_k e^{ik·x}`.
pub(crate) fn transform(grid: &Grid, data: &mut [Complex64], dir: Direction) {
    debug_assert_eq!(data.len(), grid.len());
    let (fwd, inv) = grid.plans();
    let plan = match dir {
        Direction::Forward => fwd,
        Direction::Inverse => inv,
    };
    let n = grid.n();
    let dims = grid.dims();
    let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
    let mut lines = vec![Complex64::new(0.0, 0.0); TILE * n];

    for axis in 0..dims {
        let stride = n.pow((dims - 1 - axis) as u32);
        if stride == 1 {
            plan.process_with_scratch(data, &mut scratch);
            continue;
        }
        for chunk in data.chunks_mut(n * stride) {
            let mut inner = 0;
            while inner < stride {
                let w = TILE.min(stride - inner);
                let buf = &mut lines[..w * n];
                gather(chunk, buf, n, stride, inner, w);
                plan.process_with_scratch(buf, &mut scratch);
                scatter(buf, chunk, n, stride, inner, w);
                inner += w;
            }
        }
    }

    if dir == Direction::Forward {
        let norm = 1.0 / data.len() as f64;
        for v in data.iter_mut() {
            *v *= norm;
        }
    }
}

/// Lines copied per pass along a strided axis.
const TILE: usize = 16;

// Columns `inner .. inner + w` of an `n × stride` block become `w`
// contiguous lines of length `n`.
fn gather(chunk: &[Complex64], lines: &mut [Complex64], n: usize, stride: usize, inner: usize, w: usize) {
    for i in 0..n {
        let row = &chunk[i * stride + inner..i * stride + inner + w];
        for (c, v) in row.iter().enumerate() {
            lines[c * n + i] = *v;
        }
    }
}

fn scatter(lines: &[Complex64], chunk: &mut [Complex64], n: usize, stride: usize, inner: usize, w: usize) {
    for i in 0..n {
        let row = &mut chunk[i * stride + inner..i * stride + inner + w];
        for (c, v) in row.iter_mut().enumerate() {
            *v = lines[c * n + i];
        }
    }
}
