//! Periodic-grid fields in Fourier space: transforms, differential
//! operators, dealiased products, the Leray projection and the binary
//! checkpoint format.

mod checkpoint;
mod fft;
pub(crate) mod field;
mod grid;
pub(crate) mod ops;

pub use checkpoint::{read_checkpoint, write_checkpoint, Checkpoint, CHECKPOINT_MAGIC, CHECKPOINT_VERSION};
pub use field::SpectralField;
pub use grid::{make_grid, Grid, DEALIAS_FRACTION};
pub use ops::{multiply_physical, Pairing};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("shape mismatch: expected {expected} values, got {got}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("{op}: expected {expected} components, got {got}")]
    ComponentMismatch { op: &'static str, expected: usize, got: usize },
    #[error("axis {axis} out of range for a {dims}-dimensional grid")]
    InvalidAxis { axis: usize, dims: usize },
    #[error("L^p exponent must satisfy p >= 1, got {0}")]
    InvalidExponent(f64),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
