use serde::{Deserialize, Serialize};

use super::{SpectralError, SpectralField};

/// How two fields are combined in physical space.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pairing {
    /// Componentwise product of equal-width fields, or a scalar times a field.
    Pointwise,
    /// `f × g` for two 3-vectors.
    Cross,
    /// `f · g`, any equal component count.
    Dot,
    /// `(f · ∇) g` with `f` a 3-vector and `g` of any width.
    Advective,
}

/// Transforms both operands to physical space, forms the pairing pointwise,
/// transforms back and applies the 2/3 dealiasing mask.
pub fn multiply_physical(
    f: &SpectralField,
    g: &SpectralField,
    pairing: Pairing,
) -> Result<SpectralField, SpectralError> {
    f.check_grid(g)?;
    let grid = f.grid();
    let len = grid.len();
    let (nf, ng) = (f.ncomp(), g.ncomp());

    let out = match pairing {
        Pairing::Pointwise => {
            let (fp, gp) = (f.to_physical(), g.to_physical());
            if nf == ng {
                fp.iter().zip(&gp).map(|(a, b)| a * b).collect::<Vec<_>>()
            } else if nf == 1 {
                broadcast_scalar(&fp, &gp, ng, len)
            } else if ng == 1 {
                broadcast_scalar(&gp, &fp, nf, len)
            } else {
                return Err(SpectralError::ComponentMismatch { op: "pointwise", expected: nf, got: ng });
            }
        }
        Pairing::Cross => {
            if nf != 3 || ng != 3 {
                let got = if nf != 3 { nf } else { ng };
                return Err(SpectralError::ComponentMismatch { op: "cross", expected: 3, got });
            }
            cross_physical(&f.to_physical(), &g.to_physical(), len)
        }
        Pairing::Dot => {
            if nf != ng {
                return Err(SpectralError::ComponentMismatch { op: "dot", expected: nf, got: ng });
            }
            dot_physical(&f.to_physical(), &g.to_physical(), nf, len)
        }
        Pairing::Advective => {
            if nf != 3 {
                return Err(SpectralError::ComponentMismatch { op: "advective", expected: 3, got: nf });
            }
            let fp = f.to_physical();
            let grad = g.gradient().to_physical();
            advect_physical(&fp, &grad, ng, len)
        }
    };

    let ncomp = out.len() / len;
    let mut res = SpectralField::from_physical(grid, ncomp, &out)?;
    res.dealias();
    Ok(res)
}

fn broadcast_scalar(s: &[f64], v: &[f64], ncomp: usize, len: usize) -> Vec<f64> {
    let mut out = v.to_vec();
    for c in 0..ncomp {
        for (o, a) in out[c * len..(c + 1) * len].iter_mut().zip(s) {
            *o *= a;
        }
    }
    out
}

pub(crate) fn cross_physical(a: &[f64], b: &[f64], len: usize) -> Vec<f64> {
    let mut out = vec![0.0; 3 * len];
    for i in 0..len {
        let (ax, ay, az) = (a[i], a[len + i], a[2 * len + i]);
        let (bx, by, bz) = (b[i], b[len + i], b[2 * len + i]);
        out[i] = ay * bz - az * by;
        out[len + i] = az * bx - ax * bz;
        out[2 * len + i] = ax * by - ay * bx;
    }
    out
}

pub(crate) fn dot_physical(a: &[f64], b: &[f64], ncomp: usize, len: usize) -> Vec<f64> {
    let mut out = vec![0.0; len];
    for c in 0..ncomp {
        for (o, (x, y)) in out.iter_mut().zip(a[c * len..].iter().zip(&b[c * len..(c + 1) * len])) {
            *o += x * y;
        }
    }
    out
}

/// `(a · ∇) g` from physical velocity `a` (3 components) and the physical
/// gradient of `g` laid out as in [`SpectralField::gradient`].
pub(crate) fn advect_physical(a: &[f64], grad: &[f64], ncomp: usize, len: usize) -> Vec<f64> {
    let mut out = vec![0.0; ncomp * len];
    for c in 0..ncomp {
        let o = &mut out[c * len..(c + 1) * len];
        for axis in 0..3 {
            let d = &grad[(c * 3 + axis) * len..(c * 3 + axis + 1) * len];
            let v = &a[axis * len..(axis + 1) * len];
            for i in 0..len {
                o[i] += v[i] * d[i];
            }
        }
    }
    out
}
