//! Binary checkpoint of a `(u, B)` pair.
//!
//! Layout, all little-endian:
//!
//! | bytes | content |
//! |-------|---------|
//! | 4     | magic `HMHD` |
//! | 4     | version `u32` |
//! | 1     | dims `u8` |
//! | 4     | n_per_axis `u32` |
//! | 8     | box_length `f64` |
//! | 8     | time `f64` |
//! | 1     | regime tag `u8` |
//! | ...   | coefficients as `(re, im)` `f64` pairs: the 3 components of `u`, then the 3 of `B`, each in row-major lattice order |

use std::io::{Read, Write};
use std::sync::Arc;

use num_complex::Complex64;

use super::{make_grid, Grid, SpectralError, SpectralField};

pub const CHECKPOINT_MAGIC: &[u8; 4] = b"HMHD";
pub const CHECKPOINT_VERSION: u32 = 1;
const HEADER_LEN: usize = 4 + 4 + 1 + 4 + 8 + 8 + 1;

#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub time: f64,
    pub regime_tag: u8,
    pub u: SpectralField,
    pub b: SpectralField,
}

impl Checkpoint {
    pub fn grid(&self) -> &Arc<Grid> {
        self.u.grid()
    }
}

pub fn write_checkpoint<W: Write>(mut w: W, ck: &Checkpoint) -> Result<(), SpectralError> {
    let grid = ck.u.grid();
    if ck.u.ncomp() != 3 || ck.b.ncomp() != 3 {
        return Err(SpectralError::Checkpoint("u and B must have 3 components".into()));
    }
    if !grid.same_as(ck.b.grid()) {
        return Err(SpectralError::GridMismatch);
    }
    let mut buf = Vec::with_capacity(HEADER_LEN + 16 * 6 * grid.len());
    buf.extend_from_slice(CHECKPOINT_MAGIC);
    buf.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
    buf.push(grid.dims() as u8);
    buf.extend_from_slice(&(grid.n() as u32).to_le_bytes());
    buf.extend_from_slice(&grid.box_length().to_le_bytes());
    buf.extend_from_slice(&ck.time.to_le_bytes());
    buf.push(ck.regime_tag);
    for c in ck.u.coeffs().iter().chain(ck.b.coeffs()) {
        buf.extend_from_slice(&c.re.to_le_bytes());
        buf.extend_from_slice(&c.im.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn read_checkpoint<R: Read>(mut r: R) -> Result<Checkpoint, SpectralError> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() < HEADER_LEN {
        return Err(SpectralError::Checkpoint(format!("truncated header ({} bytes)", bytes.len())));
    }
    if &bytes[0..4] != CHECKPOINT_MAGIC {
        return Err(SpectralError::Checkpoint("bad magic".into()));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != CHECKPOINT_VERSION {
        return Err(SpectralError::Checkpoint(format!("unsupported version {version}")));
    }
    let dims = bytes[8] as usize;
    let n = u32::from_le_bytes(bytes[9..13].try_into().unwrap()) as usize;
    let box_length = f64::from_le_bytes(bytes[13..21].try_into().unwrap());
    let time = f64::from_le_bytes(bytes[21..29].try_into().unwrap());
    let regime_tag = bytes[29];
    let grid = make_grid(n, box_length, dims)?;

    let payload = &bytes[HEADER_LEN..];
    let expected = 16 * 6 * grid.len();
    if payload.len() != expected {
        return Err(SpectralError::Checkpoint(format!(
            "payload is {} bytes, expected {expected}",
            payload.len()
        )));
    }
    let coeffs: Vec<Complex64> = payload
        .chunks_exact(16)
        .map(|c| {
            Complex64::new(
                f64::from_le_bytes(c[0..8].try_into().unwrap()),
                f64::from_le_bytes(c[8..16].try_into().unwrap()),
            )
        })
        .collect();
    let half = 3 * grid.len();
    let u = SpectralField::from_coeffs(&grid, 3, coeffs[..half].to_vec())?;
    let b = SpectralField::from_coeffs(&grid, 3, coeffs[half..].to_vec())?;
    Ok(Checkpoint { time, regime_tag, u, b })
}
