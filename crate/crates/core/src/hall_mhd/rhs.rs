use std::sync::Arc;

use num_complex::Complex64;

use super::{check_regime_grid, HallError, Regime, SolverState};
use crate::spectral::ops::{advect_physical, cross_physical};
use crate::spectral::{multiply_physical, Grid, Pairing, SpectralField};

/// Nonlinear terms of one state together with the sup norms that enter the
/// CFL bound.
pub(crate) struct Nonlinear {
    pub nu: SpectralField,
    pub nb: SpectralField,
    pub max_u: f64,
    pub max_b: f64,
}

fn max_of(samples: &[f64], len: usize) -> f64 {
    (0..len)
        .map(|i| (samples[i].powi(2) + samples[len + i].powi(2) + samples[2 * len + i].powi(2)).sqrt())
        .fold(0.0, f64::max)
}

/// `x ± y` elementwise into `x`.
fn accumulate(x: &mut [f64], y: &[f64], sign: f64) {
    for (a, b) in x.iter_mut().zip(y) {
        *a += sign * b;
    }
}

/// Nonlinear part of the right-hand side, projected and dealiased.
///
/// Full3D: `Nu = P[−(u·∇)u + (B·∇)B]`, `Nb = −(u·∇)B + (B·∇)u − h∇×(j×B)`,
/// evaluated in flux form. TwoAndHalfD uses the advective form with the
/// explicit Hall term `(B̃·∇̃)j − (j̃·∇̃)B`.
/// HallOnly keeps only `−h∇×(j×B)`.
pub(crate) fn nonlinear(
    u: &SpectralField,
    b: &SpectralField,
    regime: Regime,
    h: f64,
) -> Result<Nonlinear, HallError> {
    let grid = Arc::clone(b.grid());
    let len = grid.len();
    let bp = b.to_physical();
    let max_b = max_of(&bp, len);

    if regime == Regime::HallOnly {
        let mut nb = SpectralField::zeros(&grid, 3);
        if h != 0.0 {
            nb = hall_from_physical(b, &bp)?;
            nb.scale(-h);
        }
        nb.leray_project_in_place();
        return Ok(Nonlinear { nu: SpectralField::zeros(&grid, 3), nb, max_u: 0.0, max_b });
    }

    let up = u.to_physical();
    let max_u = max_of(&up, len);
    if regime == Regime::Full3D {
        let (nu, nb) = conservative_full(&grid, &up, &bp, b, h)?;
        return Ok(Nonlinear { nu, nb, max_u, max_b });
    }

    let gu = u.gradient().to_physical();
    let gb = b.gradient().to_physical();

    let mut nu_p = advect_physical(&bp, &gb, 3, len);
    accumulate(&mut nu_p, &advect_physical(&up, &gu, 3, len), -1.0);
    let mut nb_p = advect_physical(&bp, &gu, 3, len);
    accumulate(&mut nb_p, &advect_physical(&up, &gb, 3, len), -1.0);

    if h != 0.0 {
        let j = b.curl()?;
        let jp = j.to_physical();
        let gj = j.gradient().to_physical();
        // −h[(B·∇)j − (j·∇)B]
        accumulate(&mut nb_p, &advect_physical(&bp, &gj, 3, len), -h);
        accumulate(&mut nb_p, &advect_physical(&jp, &gb, 3, len), h);
    }

    let mut nu = SpectralField::from_physical(&grid, 3, &nu_p)?;
    let mut nb = SpectralField::from_physical(&grid, 3, &nb_p)?;
    nu.dealias();
    nb.dealias();
    nu.leray_project_in_place();
    nb.leray_project_in_place();
    Ok(Nonlinear { nu, nb, max_u, max_b })
}

/// Full3D terms from the flux form: `Nu = −P∇·(u⊗u − B⊗B)` and
/// `Nb = ∇×(u×B − h j×B)`. For divergence-free fields these equal the
/// advective forms.
fn conservative_full(
    grid: &Arc<Grid>,
    up: &[f64],
    bp: &[f64],
    b: &SpectralField,
    h: f64,
) -> Result<(SpectralField, SpectralField), HallError> {
    let len = grid.len();
    const PAIRS: [(usize, usize); 6] = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)];
    // 6 stress entries followed by the 3 electric field components
    let mut prod = vec![0.0; 9 * len];
    for (slot, &(a, c)) in PAIRS.iter().enumerate() {
        let (ua, uc) = (&up[a * len..(a + 1) * len], &up[c * len..(c + 1) * len]);
        let (ba, bc) = (&bp[a * len..(a + 1) * len], &bp[c * len..(c + 1) * len]);
        let out = &mut prod[slot * len..(slot + 1) * len];
        for i in 0..len {
            out[i] = ua[i] * uc[i] - ba[i] * bc[i];
        }
    }
    let e = cross_physical(up, bp, len);
    prod[6 * len..].copy_from_slice(&e);
    if h != 0.0 {
        let jp = b.curl()?.to_physical();
        let hall = cross_physical(&jp, bp, len);
        for (o, x) in prod[6 * len..].iter_mut().zip(&hall) {
            *o -= h * x;
        }
    }
    let mut flux = SpectralField::from_physical(grid, 9, &prod)?;
    flux.dealias();
    let t = flux.coeffs();
    let slot = |a: usize, c: usize| PAIRS.iter().position(|&p| p == (a.min(c), a.max(c))).unwrap();
    let mut nu = vec![Complex64::new(0.0, 0.0); 3 * len];
    for a in 0..3 {
        let rows = [slot(a, 0), slot(a, 1), slot(a, 2)];
        for idx in 0..len {
            let k = grid.k_deriv(idx);
            let d = t[rows[0] * len + idx] * k[0] + t[rows[1] * len + idx] * k[1] + t[rows[2] * len + idx] * k[2];
            // −i k·T
            nu[a * len + idx] = Complex64::new(d.im, -d.re);
        }
    }
    let mut nu = SpectralField::from_coeffs(grid, 3, nu)?;
    nu.leray_project_in_place();
    let e = SpectralField::from_coeffs(grid, 3, t[6 * len..].to_vec())?;
    let mut nb = e.curl()?;
    nb.leray_project_in_place();
    Ok((nu, nb))
}

/// `∇×(j×B)` with the product dealiased, reusing physical samples of `B`.
fn hall_from_physical(b: &SpectralField, bp: &[f64]) -> Result<SpectralField, HallError> {
    let grid = b.grid();
    let jp = b.curl()?.to_physical();
    let mut jxb = SpectralField::from_physical(grid, 3, &cross_physical(&jp, bp, grid.len()))?;
    jxb.dealias();
    Ok(jxb.curl()?)
}

/// Hall term in curl form, `∇×((∇×B)×B)`, product dealiased.
pub fn hall_term(b: &SpectralField) -> Result<SpectralField, HallError> {
    hall_from_physical(b, &b.to_physical())
}

/// Hall term in the explicit form `(B·∇)j − (j·∇)B`, equal to the curl form
/// for divergence-free `B`.
pub fn hall_term_explicit(b: &SpectralField) -> Result<SpectralField, HallError> {
    let j = b.curl()?;
    let mut out = multiply_physical(b, &j, Pairing::Advective)?;
    out.add_scaled(-1.0, &multiply_physical(&j, b, Pairing::Advective)?)?;
    Ok(out)
}

fn with_laplacian(mut n: SpectralField, f: &SpectralField) -> Result<SpectralField, HallError> {
    n.add_scaled(1.0, &f.laplacian())?;
    Ok(n)
}

fn require_regime(state: &SolverState, regime: Regime) -> Result<(), HallError> {
    if state.regime != regime {
        return Err(HallError::RegimeMismatch(format!(
            "expected {regime:?}, state is {:?}",
            state.regime
        )));
    }
    check_regime_grid(regime, state.grid())
}

/// `(du, db)` of the full system, diffusion included.
pub fn rhs_full(state: &SolverState) -> Result<(SpectralField, SpectralField), HallError> {
    require_regime(state, Regime::Full3D)?;
    let n = nonlinear(&state.u, &state.b, state.regime, state.hall_coefficient)?;
    Ok((with_laplacian(n.nu, &state.u)?, with_laplacian(n.nb, &state.b)?))
}

/// `db = −h∇×((∇×B)×B) + ΔB` of the pure Hall equation.
pub fn rhs_hall_only(state: &SolverState) -> Result<SpectralField, HallError> {
    require_regime(state, Regime::HallOnly)?;
    if !state.u.is_zero() {
        return Err(HallError::RegimeMismatch("HallOnly requires u = 0".into()));
    }
    let n = nonlinear(&state.u, &state.b, state.regime, state.hall_coefficient)?;
    with_laplacian(n.nb, &state.b)
}

/// `(du, db)` of the 2½D system on a 2D grid.
pub fn rhs_2p5d(state: &SolverState) -> Result<(SpectralField, SpectralField), HallError> {
    require_regime(state, Regime::TwoAndHalfD)?;
    let n = nonlinear(&state.u, &state.b, state.regime, state.hall_coefficient)?;
    Ok((with_laplacian(n.nu, &state.u)?, with_laplacian(n.nb, &state.b)?))
}

/// `⟨∇×(j×B), B⟩` together with its natural scale `‖j‖·‖j×B‖`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HallNeutrality {
    pub pairing: f64,
    pub scale: f64,
}

impl HallNeutrality {
    /// `|pairing| / scale`, 0 for a vanishing scale.
    pub fn relative(&self) -> f64 {
        if self.scale == 0.0 {
            self.pairing.abs()
        } else {
            self.pairing.abs() / self.scale
        }
    }
}

pub fn hall_neutrality(b: &SpectralField) -> Result<HallNeutrality, HallError> {
    let j = b.curl()?;
    let jxb = multiply_physical(&j, b, Pairing::Cross)?;
    let pairing = jxb.curl()?.inner_product(b)?;
    Ok(HallNeutrality { pairing, scale: j.l2_norm() * jxb.l2_norm() })
}

/// Total pressure `π = p + |B|²/2` (zero mean), recovered per mode from
/// `−Δπ = ∇·[(u·∇)u − (B·∇)B]`. Diagnostic only.
pub fn total_pressure(state: &SolverState) -> Result<SpectralField, HallError> {
    let mut f = multiply_physical(&state.u, &state.u, Pairing::Advective)?;
    f.add_scaled(-1.0, &multiply_physical(&state.b, &state.b, Pairing::Advective)?)?;
    let div = f.divergence()?;
    let grid = Arc::clone(div.grid());
    let coeffs: Vec<Complex64> = div
        .coeffs()
        .iter()
        .enumerate()
        .map(|(idx, v)| {
            let k2 = grid.k_sq(idx);
            if k2 == 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                v / k2
            }
        })
        .collect();
    Ok(SpectralField::from_coeffs(&grid, 1, coeffs)?)
}
