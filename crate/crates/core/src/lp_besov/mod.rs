//! Littlewood–Paley analysis on the periodic lattice: sharp dyadic blocks,
//! homogeneous Besov and Sobolev norms, the BMO square-function proxy, and
//! ratio checks for the standard toolbox inequalities.

pub mod calibration;
pub mod inequalities;
mod ladder;
mod norms;

pub use calibration::{run_population, run_suite, CheckVerdict, InequalityCheck, Population, SuiteReport};
pub use inequalities::{
    check_bernstein, check_bmo_bound, check_commutator, check_interpolation, check_norm_equivalence,
    check_product_law, BernsteinRatios, InequalityError, ProductLawMargin,
};
pub use ladder::{dyadic_block, shell_index, DyadicLadder};
pub use norms::{
    besov_21, besov_norm, bmo_proxy, commutator, ladder_sobolev, lp_key, sobolev_norm_hom,
    sobolev_norm_inhom, NormReport, Summability, BESOV_INDICES, SOBOLEV_INDICES,
};
pub(crate) use norms::lp_table;
