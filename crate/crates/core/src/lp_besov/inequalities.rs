//! Ratio evaluators for the Littlewood–Paley toolbox inequalities. Each
//! returns `LHS / RHS` with the unknown constant set to 1; calibration
//! over random populations lives in [`super::calibration`].

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{besov_21, bmo_proxy, DyadicLadder};
use crate::spectral::{multiply_physical, Pairing, SpectralError, SpectralField};

#[derive(Debug, Error)]
pub enum InequalityError {
    #[error("field is not supported in shell {q} (largest outside coefficient {leak:e})")]
    NotShellSupported { q: i32, leak: f64 },
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("degenerate operand: {0}")]
    Degenerate(&'static str),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

/// Ratios produced by [`check_bernstein`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BernsteinRatios {
    /// `‖D^k f‖_{L^p} / (2^{qk} ‖f‖_{L^p})` at `p = p_low`.
    pub derivative_upper: f64,
    /// Reciprocal of `derivative_upper`.
    pub derivative_lower: f64,
    /// `‖f‖_{L^{p_high}} / (2^{qd(1/p_low − 1/p_high)} ‖f‖_{L^{p_low}})`.
    pub embedding: f64,
}

/// All `k`-th order partial derivatives, as one multi-component field.
fn derivative_tensor(f: &SpectralField, order: u32) -> SpectralField {
    (0..order).fold(f.clone(), |acc, _| acc.gradient())
}

fn inv(p: f64) -> f64 {
    if p.is_infinite() {
        0.0
    } else {
        1.0 / p
    }
}

/// Bernstein ratios for a field supported in shell `q`.
pub fn check_bernstein(
    f: &SpectralField,
    q: i32,
    order: u32,
    p_low: f64,
    p_high: f64,
) -> Result<BernsteinRatios, InequalityError> {
    if !(p_low >= 1.0 && p_high >= p_low) {
        return Err(InequalityError::InvalidParameters(format!(
            "need 1 <= p_low <= p_high, got {p_low}, {p_high}"
        )));
    }
    let ladder = DyadicLadder::for_grid(f.grid());
    let scale = f.max_coeff();
    let leak = ladder.max_outside_shell(f, q);
    if leak > 1e-14 * scale {
        return Err(InequalityError::NotShellSupported { q, leak });
    }
    if scale == 0.0 {
        return Ok(BernsteinRatios { derivative_upper: 0.0, derivative_lower: 0.0, embedding: 0.0 });
    }
    let d = f.grid().dims() as f64;
    let two_q = 2f64.powi(q);
    let f_low = f.lp_norm(p_low)?;
    let df_low = derivative_tensor(f, order).lp_norm(p_low)?;
    let upper = df_low / (two_q.powi(order as i32) * f_low);
    let f_high = f.lp_norm(p_high)?;
    let embedding = f_high / (two_q.powf(d * (inv(p_low) - inv(p_high))) * f_low);
    Ok(BernsteinRatios { derivative_upper: upper, derivative_lower: 1.0 / upper, embedding })
}

/// `‖∇f‖_{Ḃ^s_{2,1}} / ‖f‖_{Ḃ^{s+1}_{2,1}}`; 0 for fields with no
/// nonzero modes.
pub fn check_norm_equivalence(f: &SpectralField, s: f64) -> f64 {
    let rhs = besov_21(f, s + 1.0);
    if rhs == 0.0 {
        return 0.0;
    }
    besov_21(&f.gradient(), s) / rhs
}

/// `‖f‖_{Ḃ^s_{2,1}} / (‖f‖^θ_{Ḃ^{s1}_{2,1}} ‖f‖^{1−θ}_{L²})` with `s = θ s1`.
pub fn check_interpolation(f: &SpectralField, s: f64, s1: f64, theta: f64) -> Result<f64, InequalityError> {
    if !(s > 0.0 && s1 > 0.0 && theta > 0.0 && theta < 1.0) || (s - theta * s1).abs() > 1e-12 {
        return Err(InequalityError::InvalidParameters(format!(
            "need s, s1 > 0, theta in (0,1), s = theta*s1; got s={s}, s1={s1}, theta={theta}"
        )));
    }
    let lhs = besov_21(f, s);
    if lhs == 0.0 {
        return Ok(0.0);
    }
    let rhs = besov_21(f, s1).powf(theta) * f.l2_norm().powf(1.0 - theta);
    Ok(lhs / rhs)
}

/// Outcome of [`check_product_law`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProductLawMargin {
    pub ratio: f64,
    /// True when `s1` or `s2` sits on the admissible endpoint `n/2`.
    pub endpoint: bool,
}

/// `‖fg‖_{Ḃ^{s1+s2−n/2}_{2,1}} / (‖f‖_{Ḃ^{s1}_{2,1}} ‖g‖_{Ḃ^{s2}_{2,1}})`.
///
/// The product is formed on the grid and dealiased, so it is exact when
/// both factors are band-limited to half the dealiasing radius.
pub fn check_product_law(
    f: &SpectralField,
    g: &SpectralField,
    s1: f64,
    s2: f64,
) -> Result<ProductLawMargin, InequalityError> {
    let n = f.grid().dims() as f64;
    let tol = 1e-12;
    if s1 > n / 2.0 + tol || s2 > n / 2.0 + tol || s1 + s2 <= 0.0 {
        return Err(InequalityError::InvalidParameters(format!(
            "need s1, s2 <= {} and s1 + s2 > 0; got {s1}, {s2}",
            n / 2.0
        )));
    }
    let endpoint = (s1 - n / 2.0).abs() <= tol || (s2 - n / 2.0).abs() <= tol;
    let nf = besov_21(f, s1);
    let ng = besov_21(g, s2);
    if nf == 0.0 {
        return Err(InequalityError::Degenerate("f has zero homogeneous norm"));
    }
    if ng == 0.0 {
        return Err(InequalityError::Degenerate("g has zero homogeneous norm"));
    }
    let fg = multiply_physical(f, g, Pairing::Pointwise)?;
    Ok(ProductLawMargin { ratio: besov_21(&fg, s1 + s2 - n / 2.0) / (nf * ng), endpoint })
}

/// `Σ_q 2^{q(s+1)} ‖[u, Δ_q] w‖_{L²} / (‖u‖_{Ḃ^{n/2+1}_{2,1}} ‖w‖_{Ḃ^s_{2,1}})`.
///
/// The shell sum stands for the summable sequence `c_q`; a finite ratio
/// bounds every individual shell as well.
pub fn check_commutator(u: &SpectralField, w: &SpectralField, s: f64) -> Result<f64, InequalityError> {
    let n = u.grid().dims() as f64;
    if !(s > -n / 2.0 - 1.0 && s <= n / 2.0 + 1e-12) {
        return Err(InequalityError::InvalidParameters(format!(
            "need s in (-{0}-1, {0}], got {s}",
            n / 2.0
        )));
    }
    let nu = besov_21(u, n / 2.0 + 1.0);
    let nw = besov_21(w, s);
    if nu == 0.0 || nw == 0.0 {
        return Ok(0.0);
    }
    let ladder = DyadicLadder::for_grid(u.grid());
    let uw = multiply_physical(u, w, Pairing::Pointwise)?;
    let mut sum = 0.0;
    for q in ladder.shells() {
        let wq = ladder.block(w, q);
        let right = ladder.block(&uw, q);
        if wq.is_zero() && right.is_zero() {
            continue;
        }
        let left = multiply_physical(u, &wq, Pairing::Pointwise)?;
        let norm = left.sub(&right)?.l2_norm();
        if norm > 0.0 {
            sum += 2f64.powf(q as f64 * (s + 1.0)) * norm;
        }
    }
    Ok(sum / (nu * nw))
}

/// `bmo(f) / (bmo(∇f) + ‖f‖_{L²})`, 0 for the zero field.
pub fn check_bmo_bound(f: &SpectralField) -> f64 {
    let lhs = bmo_proxy(f);
    if lhs == 0.0 {
        return 0.0;
    }
    lhs / (bmo_proxy(&f.gradient()) + f.l2_norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp_besov::commutator;
    use crate::spectral::make_grid;
    use std::f64::consts::PI;

    #[test]
    fn bernstein_single_mode_is_sharp() {
        let g = make_grid(16, 2.0 * PI, 3).unwrap();
        // |k| = 4 = 2^2 sits on the outer edge of shell 2
        let f = SpectralField::from_fn(&g, 1, |x, o| o[0] = (4.0 * x[1]).cos());
        let r = check_bernstein(&f, 2, 1, 2.0, f64::INFINITY).unwrap();
        assert!((r.derivative_upper - 1.0).abs() < 1e-13);
        assert!((r.derivative_lower - 1.0).abs() < 1e-13);
        assert!(matches!(
            check_bernstein(&f, 1, 1, 2.0, 4.0),
            Err(InequalityError::NotShellSupported { .. })
        ));
        let z = SpectralField::zeros(&g, 1);
        let r0 = check_bernstein(&z, 2, 1, 2.0, 4.0).unwrap();
        assert_eq!((r0.derivative_upper, r0.derivative_lower, r0.embedding), (0.0, 0.0, 0.0));
    }

    #[test]
    fn interpolation_single_shell_is_one() {
        let g = make_grid(16, 2.0 * PI, 3).unwrap();
        let f = SpectralField::from_fn(&g, 1, |x, o| o[0] = (3.0 * x[0]).sin() + (2.0 * x[1] + 2.0 * x[2]).cos());
        let r = check_interpolation(&f, 0.5, 1.5, 1.0 / 3.0).unwrap();
        assert!((r - 1.0).abs() < 1e-13);
        assert_eq!(check_interpolation(&SpectralField::zeros(&g, 1), 0.5, 1.5, 1.0 / 3.0).unwrap(), 0.0);
        assert!(check_interpolation(&f, 0.5, 1.5, 0.5).is_err());
        assert!(check_interpolation(&f, 1.5, 1.5, 1.0).is_err());
    }

    #[test]
    fn interpolation_two_shells_closed_form() {
        let g = make_grid(16, 2.0 * PI, 3).unwrap();
        // equal-amplitude modes in shells 0 (|k|=1) and 2 (|k|=4)
        let f = SpectralField::from_fn(&g, 1, |x, o| o[0] = x[0].cos() + (4.0 * x[2]).cos());
        let (s, s1, th) = (0.5, 1.5, 1.0 / 3.0);
        let lhs: f64 = 1.0 + 2f64.powf(2.0 * s);
        let b1: f64 = 1.0 + 2f64.powf(2.0 * s1);
        let expect = lhs / (b1.powf(th) * 2f64.sqrt().powf(1.0 - th));
        let got = check_interpolation(&f, s, s1, th).unwrap();
        assert!((got - expect).abs() < 1e-13, "{got} vs {expect}");
    }

    #[test]
    fn product_law_preconditions() {
        let g = make_grid(16, 2.0 * PI, 3).unwrap();
        let f = SpectralField::from_fn(&g, 1, |x, o| o[0] = x[0].sin());
        let c = SpectralField::from_fn(&g, 1, |_, o| o[0] = 2.0);
        assert!(matches!(check_product_law(&f, &c, 1.5, 1.5), Err(InequalityError::Degenerate(_))));
        assert!(check_product_law(&f, &f, 2.0, 1.0).is_err());
        assert!(check_product_law(&f, &f, -1.0, 0.5).is_err());
        assert!(check_product_law(&f, &f, 1.5, 1.5).unwrap().endpoint);
        assert!(!check_product_law(&f, &f, 1.0, 1.0).unwrap().endpoint);
    }

    #[test]
    fn product_law_single_mode_closed_form() {
        // sin² x = 1/2 − cos(2x)/2: homogeneous part is −cos(2x)/2 in shell 1
        let g = make_grid(16, 2.0 * PI, 3).unwrap();
        let f = SpectralField::from_fn(&g, 1, |x, o| o[0] = x[0].sin());
        let vol = (2.0 * PI).powi(3);
        let l2_sin = (vol / 2.0).sqrt();
        let l2_cos2 = 0.5 * (vol / 2.0).sqrt();
        let (s1, s2) = (1.5, 1.0);
        let s = s1 + s2 - 1.5;
        let expect = 2f64.powf(s) * l2_cos2 / (l2_sin * l2_sin);
        let got = check_product_law(&f, &f, s1, s2).unwrap().ratio;
        assert!((got - expect).abs() < 1e-13 * expect);
    }

    #[test]
    fn commutator_constant_u_vanishes() {
        let g = make_grid(16, 2.0 * PI, 3).unwrap();
        let u = SpectralField::from_fn(&g, 1, |_, o| o[0] = 3.0);
        let w = SpectralField::from_fn(&g, 1, |x, o| o[0] = (x[0] + x[1]).sin() + (3.0 * x[2]).cos());
        for q in 0..4 {
            assert!(commutator(&u, &w, q).unwrap().max_coeff() < 1e-14);
        }
    }

    #[test]
    fn commutator_frequency_bookkeeping() {
        // u = cos x (|k|=1), w = cos 8y (|k|=8, shell 3). uw has modes at
        // |k| = sqrt(65) (shell 4); for q = 0 neither u Δ_0 w nor Δ_0(uw) is
        // supported.
        let g = make_grid(32, 2.0 * PI, 3).unwrap();
        let u = SpectralField::from_fn(&g, 1, |x, o| o[0] = x[0].cos());
        let w = SpectralField::from_fn(&g, 1, |x, o| o[0] = (8.0 * x[1]).cos());
        assert!(commutator(&u, &w, 0).unwrap().max_coeff() < 1e-15);
        assert!(commutator(&u, &w, 1).unwrap().max_coeff() < 1e-15);
        // q = 3 holds w, q = 4 holds uw: both commutators are nonzero
        assert!(commutator(&u, &w, 3).unwrap().max_coeff() > 0.1);
        assert!(commutator(&u, &w, 4).unwrap().max_coeff() > 0.1);
    }

    #[test]
    fn bmo_bound_single_mode() {
        let g = make_grid(16, 2.0 * PI, 3).unwrap();
        let a = 0.7;
        let f = SpectralField::from_fn(&g, 1, |x, o| o[0] = a * x[2].cos());
        let vol_const = ((2.0 * PI).powi(3) / 2.0).sqrt();
        let expect = a / (a + a * vol_const);
        assert!((check_bmo_bound(&f) - expect).abs() < 1e-13);
        assert_eq!(check_bmo_bound(&SpectralField::zeros(&g, 1)), 0.0);
    }

    #[test]
    fn norm_equivalence_within_shell_spread() {
        let g = make_grid(16, 2.0 * PI, 3).unwrap();
        let f = SpectralField::from_fn(&g, 1, |x, o| {
            o[0] = (3.0 * x[0]).sin() + (x[1] + x[2]).cos() + (5.0 * x[2]).cos()
        });
        let r = check_norm_equivalence(&f, 0.5);
        assert!((0.5..=1.0 + 1e-12).contains(&r));
    }
}
