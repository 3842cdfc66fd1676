//! Pseudo-spectral solver for incompressible resistive Hall-MHD on a
//! periodic box, with Littlewood–Paley/Besov diagnostics for monitoring
//! blow-up-criterion and smallness quantities along a run.

pub mod hall_mhd;
pub mod harness;
pub mod lp_besov;
pub mod monitor;
pub mod random;
pub mod spectral;
