use std::collections::BTreeMap;

use serde::de::Error as _;
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::DyadicLadder;
use crate::spectral::field::{lp_of_magnitude, pointwise_magnitude};
use crate::spectral::{multiply_physical, Pairing, SpectralError, SpectralField};

/// Outer summability index of a Besov norm.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Summability {
    One,
    Two,
    Infinity,
}

/// Homogeneous Besov norm `‖f‖_{Ḃ^s_{2,r}}` over the sharp dyadic shells;
/// the zero mode is excluded.
pub fn besov_norm(f: &SpectralField, s: f64, r: Summability) -> f64 {
    let ladder = DyadicLadder::for_grid(f.grid());
    let weighted = ladder
        .block_l2_norms(f)
        .into_iter()
        .map(|(q, n)| if n == 0.0 { 0.0 } else { 2f64.powf(q as f64 * s) * n });
    match r {
        Summability::One => weighted.sum(),
        Summability::Two => weighted.map(|w| w * w).sum::<f64>().sqrt(),
        Summability::Infinity => weighted.fold(0.0, f64::max),
    }
}

/// `‖f‖_{Ḃ^s_{2,1}}`, the norm used throughout the monitor.
pub fn besov_21(f: &SpectralField, s: f64) -> f64 {
    besov_norm(f, s, Summability::One)
}

/// `‖f‖_{Ḣ^s} = (L^d Σ_{k≠0} |k|^{2s} |f̂_k|²)^{1/2}`.
pub fn sobolev_norm_hom(f: &SpectralField, s: f64) -> f64 {
    f.weighted_energy(|k2| if k2 == 0.0 { 0.0 } else { k2.powf(s) }).sqrt()
}

/// Inhomogeneous `H^m` norm `(Σ_{j=0}^{m} ‖∇^j f‖²_{L²})^{1/2}`, where
/// `∇^j` is the full tensor of `j`-th derivatives.
pub fn sobolev_norm_inhom(f: &SpectralField, m: u32) -> f64 {
    f.weighted_energy(|k2| (0..=m).map(|j| k2.powi(j as i32)).sum()).sqrt()
}

/// `(Σ_q 2^{2qs} ‖Δ_q f‖²_{L²})^{1/2}`, the shell-quantised `Ḣ^s` norm.
pub fn ladder_sobolev(f: &SpectralField, s: f64) -> f64 {
    besov_norm(f, s, Summability::Two)
}

/// BMO proxy: grid supremum of the `Ḟ⁰_{∞,2}` square function
/// `(Σ_q |Δ_q f(x)|²)^{1/2}`, with vector fields combined in Euclidean norm
/// across components.
pub fn bmo_proxy(f: &SpectralField) -> f64 {
    DyadicLadder::for_grid(f.grid()).square_function(f).into_iter().fold(0.0, f64::max)
}

/// `[u, Δ_q] w = u Δ_q w − Δ_q(u w)`, products dealiased.
pub fn commutator(u: &SpectralField, w: &SpectralField, q: i32) -> Result<SpectralField, SpectralError> {
    let ladder = DyadicLadder::for_grid(u.grid());
    let left = multiply_physical(u, &ladder.block(w, q), Pairing::Pointwise)?;
    let right = ladder.block(&multiply_physical(u, w, Pairing::Pointwise)?, q);
    left.sub(&right)
}

/// `(p, ‖f‖_{L^p})` for every exponent from a single inverse transform.
pub(crate) fn lp_table(f: &SpectralField, exponents: &[f64]) -> Vec<(f64, f64)> {
    if exponents.is_empty() {
        return Vec::new();
    }
    let grid = f.grid();
    let mag = pointwise_magnitude(&f.to_physical(), f.ncomp(), grid.len());
    exponents.iter().map(|&p| (p, lp_of_magnitude(&mag, p, grid.volume()))).collect()
}

/// Besov regularities reported for `Ḃ^s_{2,1}`.
pub const BESOV_INDICES: [f64; 4] = [0.5, 1.5, 2.5, 3.5];
/// Regularities reported for `Ḣ^s`.
pub const SOBOLEV_INDICES: [f64; 3] = [0.5, 1.5, 2.5];

/// Norms of one field at one instant.
///
/// Serialises to a flat JSON object with the keys
/// `besov_s1_2`, `besov_s3_2`, `besov_s5_2`, `besov_s7_2` (`Ḃ^s_{2,1}`),
/// `hdot_s1_2`, `hdot_s3_2`, `hdot_s5_2` (`Ḣ^s`), `hm_order`, `hm` (`H^m`),
/// `bmo`, and one `lp_<p>` per configured exponent (`lp_inf` for `p = ∞`).
#[derive(Clone, Debug, PartialEq)]
pub struct NormReport {
    pub besov_s_2_1: [f64; 4],
    pub sobolev_hom: [f64; 3],
    pub hm_order: u32,
    pub sobolev_inhom_m: f64,
    pub bmo_proxy: f64,
    pub lp: Vec<(f64, f64)>,
}

const BESOV_KEYS: [&str; 4] = ["besov_s1_2", "besov_s3_2", "besov_s5_2", "besov_s7_2"];
const HDOT_KEYS: [&str; 3] = ["hdot_s1_2", "hdot_s3_2", "hdot_s5_2"];

/// JSON key for the `L^p` entry.
pub fn lp_key(p: f64) -> String {
    if p.is_infinite() {
        "lp_inf".to_string()
    } else if p.fract() == 0.0 {
        format!("lp_{}", p as i64)
    } else {
        format!("lp_{p}")
    }
}

fn parse_lp_key(key: &str) -> Option<f64> {
    let rest = key.strip_prefix("lp_")?;
    if rest == "inf" {
        Some(f64::INFINITY)
    } else {
        rest.parse().ok()
    }
}

impl NormReport {
    pub fn compute(f: &SpectralField, hm_order: u32, lp_exponents: &[f64]) -> Result<Self, SpectralError> {
        if let Some(&p) = lp_exponents.iter().find(|p| !(**p >= 1.0)) {
            return Err(SpectralError::InvalidExponent(p));
        }
        let mut lp = lp_table(f, lp_exponents);
        lp.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(Self {
            besov_s_2_1: BESOV_INDICES.map(|s| besov_21(f, s)),
            sobolev_hom: SOBOLEV_INDICES.map(|s| sobolev_norm_hom(f, s)),
            hm_order,
            sobolev_inhom_m: sobolev_norm_inhom(f, hm_order),
            bmo_proxy: bmo_proxy(f),
            lp,
        })
    }

    pub fn zero(hm_order: u32, lp_exponents: &[f64]) -> Self {
        Self {
            besov_s_2_1: [0.0; 4],
            sobolev_hom: [0.0; 3],
            hm_order,
            sobolev_inhom_m: 0.0,
            bmo_proxy: 0.0,
            lp: {
                let mut lp: Vec<(f64, f64)> = lp_exponents.iter().map(|&p| (p, 0.0)).collect();
                lp.sort_by(|a, b| a.0.total_cmp(&b.0));
                lp
            },
        }
    }

    pub fn besov(&self, s: f64) -> Option<f64> {
        BESOV_INDICES.iter().position(|&x| x == s).map(|i| self.besov_s_2_1[i])
    }

    pub fn hdot(&self, s: f64) -> Option<f64> {
        SOBOLEV_INDICES.iter().position(|&x| x == s).map(|i| self.sobolev_hom[i])
    }

    pub fn lp(&self, p: f64) -> Option<f64> {
        self.lp.iter().find(|(q, _)| *q == p).map(|(_, v)| *v)
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.besov_s_2_1
            .iter()
            .chain(&self.sobolev_hom)
            .copied()
            .chain([self.sobolev_inhom_m, self.bmo_proxy])
            .chain(self.lp.iter().map(|(_, v)| *v))
    }

    pub fn to_json_map(&self) -> serde_json::Map<String, serde_json::Value> {
        let mut m = serde_json::Map::new();
        for (k, v) in BESOV_KEYS.iter().zip(self.besov_s_2_1) {
            m.insert((*k).into(), v.into());
        }
        for (k, v) in HDOT_KEYS.iter().zip(self.sobolev_hom) {
            m.insert((*k).into(), v.into());
        }
        m.insert("hm_order".into(), self.hm_order.into());
        m.insert("hm".into(), self.sobolev_inhom_m.into());
        m.insert("bmo".into(), self.bmo_proxy.into());
        for (p, v) in &self.lp {
            m.insert(lp_key(*p), (*v).into());
        }
        m
    }
}

impl Serialize for NormReport {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let m = self.to_json_map();
        let mut map = serializer.serialize_map(Some(m.len()))?;
        for (k, v) in &m {
            map.serialize_entry(k, v)?;
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for NormReport {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw: BTreeMap<String, f64> = BTreeMap::deserialize(deserializer)?;
        let get = |k: &str| {
            raw.get(k).copied().ok_or_else(|| D::Error::custom(format!("missing field `{k}`")))
        };
        let mut besov = [0.0; 4];
        for (i, k) in BESOV_KEYS.iter().enumerate() {
            besov[i] = get(k)?;
        }
        let mut hdot = [0.0; 3];
        for (i, k) in HDOT_KEYS.iter().enumerate() {
            hdot[i] = get(k)?;
        }
        let mut lp: Vec<(f64, f64)> =
            raw.iter().filter_map(|(k, v)| parse_lp_key(k).map(|p| (p, *v))).collect();
        lp.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(Self {
            besov_s_2_1: besov,
            sobolev_hom: hdot,
            hm_order: get("hm_order")? as u32,
            sobolev_inhom_m: get("hm")?,
            bmo_proxy: get("bmo")?,
            lp,
        })
    }
}
