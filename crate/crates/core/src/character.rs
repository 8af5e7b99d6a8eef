//! Weyl denominators, Weyl characters on the maximal torus and the subsystem
//! decomposition of a character.
//!
//! Torus points are ambient vectors `h`; a root `alpha` contributes the factor
//! `2i sin(pi <alpha, h>)` to the denominator.

use std::f64::consts::PI;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, q, Q};
use crate::rootsys::{subsystem_weyl_group, NodeSet, RootSystem, WeylGroup};

/// Threshold on `|sin(pi x)|` below which a factor counts as vanishing.
pub const EPS_SING: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Regime {
    #[serde(rename = "REGULAR_RATIO")]
    RegularRatio,
    #[serde(rename = "FACET_LIMIT")]
    FacetLimit,
    #[serde(rename = "ALTERNATING_SUM")]
    AlternatingSum,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::RegularRatio => "REGULAR_RATIO",
            Regime::FacetLimit => "FACET_LIMIT",
            Regime::AlternatingSum => "ALTERNATING_SUM",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharValue {
    pub value: Complex64,
    pub regime: Regime,
}

fn pairing(root: &[f64], h: &[f64]) -> f64 {
    root.iter().zip(h).map(|(a, b)| a * b).sum()
}

/// `i^k` for `k >= 0`.
fn i_pow(k: usize) -> Complex64 {
    match k % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// `prod 2i sin(pi <alpha, h>)` over the roots with the given indices.
fn denominator_over(rs: &RootSystem, roots: &[usize], h: &[f64]) -> Complex64 {
    let mut mag = 1.0;
    for &i in roots {
        let a = linalg::vec_to_f64(&rs.roots[i]);
        mag *= 2.0 * (PI * pairing(&a, h)).sin();
    }
    i_pow(roots.len()) * mag
}

/// The Weyl denominator for the standard positive system.
pub fn weyl_denominator(rs: &RootSystem, h: &[f64]) -> Complex64 {
    let mut mag = 1.0;
    for a in rs.positive_f64() {
        mag *= 2.0 * (PI * pairing(a, h)).sin();
    }
    i_pow(rs.num_positive()) * mag
}

/// The partial denominators for a positive system containing `Sigma_K^+`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaFactors {
    /// Product over `Sigma_J^+`.
    pub upper: Complex64,
    /// Product over the positive roots outside `Sigma_J`.
    pub lower: Complex64,
    /// Product over `Sigma_K^+` minus `Sigma_J^+`.
    pub middle: Complex64,
    /// The full denominator for the same positive system.
    pub full: Complex64,
}

pub fn delta_factors(rs: &RootSystem, j: NodeSet, k: NodeSet, h: &[f64]) -> Result<DeltaFactors> {
    if !j.is_subset(k) {
        return Err(Error::Validation(format!("{j} is not contained in {k}")));
    }
    let pos = rs.positive_system_containing(k)?;
    let sub_j = rs.parabolic_subsystem(j)?;
    let sub_k = rs.parabolic_subsystem(k)?;
    let in_j: Vec<usize> = pos.iter().copied().filter(|i| sub_j.roots.contains(i)).collect();
    let outside_j: Vec<usize> = pos.iter().copied().filter(|i| !sub_j.roots.contains(i)).collect();
    let k_minus_j: Vec<usize> = pos
        .iter()
        .copied()
        .filter(|i| sub_k.roots.contains(i) && !sub_j.roots.contains(i))
        .collect();
    Ok(DeltaFactors {
        upper: denominator_over(rs, &in_j, h),
        lower: denominator_over(rs, &outside_j, h),
        middle: denominator_over(rs, &k_minus_j, h),
        full: denominator_over(rs, &pos, h),
    })
}

/// `sin(pi N x) / sin(pi x)`, replaced by its limit `N (-1)^{(N-1) n}` near an integer `n`.
pub fn dirichlet_factor(x: f64, n: u32) -> (f64, bool) {
    let s = (PI * x).sin();
    let nf = n as f64;
    if s.abs() < EPS_SING / nf {
        let k = x.round() as i64;
        let sign = if (n as i64 - 1) * k % 2 == 0 { 1.0 } else { -1.0 };
        (sign * nf, true)
    } else {
        ((PI * nf * x).sin() / s, false)
    }
}

/// `chi_{N rho}` from the pairings `<alpha, h>` of the positive roots.
pub fn char_nrho_from_pairings(pairings: impl IntoIterator<Item = f64>, n: u32) -> (f64, bool) {
    let mut v = 1.0;
    let mut limit = false;
    for x in pairings {
        let (f, l) = dirichlet_factor(x, n);
        v *= f;
        limit |= l;
    }
    (v, limit)
}

/// `chi_{N rho}` at the point with simple distance coordinates `t_1..t_r`.
pub fn char_nrho_t(rs: &RootSystem, t_simple: &[f64], n: u32) -> (f64, bool) {
    char_nrho_from_pairings(
        rs.positive_coeffs_f64()
            .iter()
            .map(|c| c.iter().zip(t_simple).map(|(a, b)| a * b).sum::<f64>()),
        n,
    )
}

/// The character of highest weight `(N - 1) rho`, written `chi_{N rho}` after the rho shift.
pub fn char_nrho(rs: &RootSystem, h: &[f64], n: u32) -> CharValue {
    let (v, limit) = char_nrho_from_pairings(rs.positive_f64().iter().map(|a| pairing(a, h)), n);
    CharValue {
        value: Complex64::new(v, 0.0),
        regime: if limit {
            Regime::FacetLimit
        } else {
            Regime::RegularRatio
        },
    }
}

/// A weight in the ambient realization.
#[derive(Debug, Clone, PartialEq)]
pub struct Weight {
    pub mu: Vec<Q>,
}

impl Weight {
    pub fn new(mu: Vec<Q>) -> Self {
        Weight { mu }
    }

    pub fn rho(rs: &RootSystem) -> Self {
        Weight {
            mu: rs.weyl_vector.clone(),
        }
    }

    pub fn n_rho(rs: &RootSystem, n: i64) -> Self {
        Weight {
            mu: linalg::scale(&rs.weyl_vector, q(n)),
        }
    }

    /// `sum_i a_i omega_i` with `(omega_i, alpha_j^vee) = delta_ij`.
    pub fn from_fundamental(rs: &RootSystem, coords: &[i64]) -> Result<Self> {
        if coords.len() != rs.rank {
            return Err(Error::Validation(format!(
                "expected {} fundamental-weight coordinates, got {}",
                rs.rank,
                coords.len()
            )));
        }
        let pairing_matrix: Vec<Vec<Q>> = rs
            .simple_roots
            .iter()
            .map(|ak| {
                rs.simple_roots
                    .iter()
                    .map(|aj| q(2) * linalg::dot(ak, aj) / linalg::dot(aj, aj))
                    .collect()
            })
            .collect();
        let inv = linalg::inverse(&pairing_matrix)
            .ok_or_else(|| Error::InternalConsistency("singular Cartan matrix".into()))?;
        let mut mu = vec![Q::zero(); rs.ambient_dim];
        for (i, &a) in coords.iter().enumerate() {
            for (k, ak) in rs.simple_roots.iter().enumerate() {
                let c = q(a) * inv[i][k];
                mu = linalg::add(&mu, &linalg::scale(ak, c));
            }
        }
        Ok(Weight { mu })
    }

    /// Whether `2 (mu, alpha) / (alpha, alpha)` is a positive integer for every positive root.
    pub fn is_dominant_regular(&self, rs: &RootSystem) -> bool {
        rs.positive_roots().all(|a| {
            let c = q(2) * linalg::dot(&self.mu, a) / linalg::dot(a, a);
            c.is_integer() && c >= q(1)
        })
    }
}

/// The `W`-orbit of a weight with the determinants of the group elements.
#[derive(Debug, Clone)]
pub struct WeightOrbit {
    pub points: Vec<Vec<f64>>,
    pub dets: Vec<i8>,
}

impl WeightOrbit {
    pub fn new(w: &WeylGroup, mu: &[Q]) -> Self {
        let points = (0..w.order()).map(|i| linalg::vec_to_f64(&w.apply(i, mu))).collect();
        let dets = w.elements.iter().map(|e| e.det).collect();
        WeightOrbit { points, dets }
    }
}

/// Compensated complex accumulator.
#[derive(Debug, Clone, Copy, Default)]
struct Kahan {
    sum: Complex64,
    comp: Complex64,
}

impl Kahan {
    fn add(&mut self, x: Complex64) {
        let y = x - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }
}

/// `sum_s det s e^{2 pi i <s mu, h>}`.
pub fn alternating_sum(orbit: &WeightOrbit, h: &[f64]) -> Complex64 {
    let term = |p: &Vec<f64>, d: i8| Complex64::from_polar(d as f64, 2.0 * PI * pairing(p, h));
    if orbit.points.len() >= 1000 {
        let mut acc = Kahan::default();
        for (p, &d) in orbit.points.iter().zip(&orbit.dets) {
            acc.add(term(p, d));
        }
        acc.sum
    } else {
        let mut acc = Complex64::zero();
        for (p, &d) in orbit.points.iter().zip(&orbit.dets) {
            acc += term(p, d);
        }
        acc
    }
}

/// A fixed direction pairing positively with every positive root.
fn generic_direction(rs: &RootSystem) -> Vec<f64> {
    let coeffs: Vec<f64> = (0..rs.rank).map(|j| 1.0 + 0.1 * ((j + 2) as f64).sqrt()).collect();
    rs.point_from_simple_t(&coeffs)
}

fn near_singular_count(rs: &RootSystem, h: &[f64]) -> usize {
    rs.positive_f64()
        .iter()
        .filter(|a| (PI * pairing(a, h)).sin().abs() < EPS_SING)
        .count()
}

/// Character by the Weyl formula for a precomputed orbit.
///
/// Where `s` denominator factors nearly vanish, numerator and denominator both
/// vanish to order `s` along a fixed regular direction `v`, and the value is the
/// ratio of their `s`-th derivatives in that direction. This limit is reported
/// as `FACET_LIMIT`.
pub fn char_mu_orbit(rs: &RootSystem, orbit: &WeightOrbit, h: &[f64]) -> CharValue {
    let pairings: Vec<f64> = rs.positive_f64().iter().map(|a| pairing(a, h)).collect();
    let singular: Vec<bool> = pairings.iter().map(|&x| (PI * x).sin().abs() < EPS_SING).collect();
    let s = singular.iter().filter(|&&b| b).count();
    if s == 0 {
        return CharValue {
            value: alternating_sum(orbit, h) / weyl_denominator(rs, h),
            regime: Regime::AlternatingSum,
        };
    }
    let v = generic_direction(rs);
    let mut den = Complex64::new(1.0, 0.0);
    for ((a, &x), &sing) in rs.positive_f64().iter().zip(&pairings).zip(&singular) {
        den *= if sing {
            Complex64::new(0.0, 2.0 * PI * pairing(a, &v) * (PI * x).cos())
        } else {
            Complex64::new(0.0, 2.0 * (PI * x).sin())
        };
    }
    den *= (1..=s).map(|i| i as f64).product::<f64>();
    let mut acc = Kahan::default();
    for (p, &d) in orbit.points.iter().zip(&orbit.dets) {
        let phase = Complex64::from_polar(d as f64, 2.0 * PI * pairing(p, h));
        let deriv = i_pow(s) * (2.0 * PI * pairing(p, &v)).powi(s as i32);
        acc.add(phase * deriv);
    }
    CharValue {
        value: acc.sum / den,
        regime: Regime::FacetLimit,
    }
}

pub fn char_mu(rs: &RootSystem, w: &WeylGroup, h: &[f64], mu: &Weight) -> Result<CharValue> {
    if mu.mu.len() != rs.ambient_dim || h.len() != rs.ambient_dim {
        return Err(Error::Validation(format!(
            "weight and point must have {} coordinates",
            rs.ambient_dim
        )));
    }
    let orbit = WeightOrbit::new(w, &mu.mu);
    Ok(char_mu_orbit(rs, &orbit, h))
}

/// Exact orthogonal projector onto the span of `{alpha_j : j in J}`.
pub fn node_projector(rs: &RootSystem, j: NodeSet) -> Vec<Vec<Q>> {
    // a proper node set is linearly independent
    let basis: Vec<Vec<Q>> = j.iter().map(|n| rs.node_root(n).to_vec()).collect();
    linalg::projector(&basis, rs.ambient_dim)
}

fn apply_f64(m: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    m.iter().map(|row| pairing(row, v)).collect()
}

/// Subsystem Weyl character `chi^J_gamma` at `h`, using the alternating sum over `W_J`.
pub fn char_subsystem(rs: &RootSystem, j: NodeSet, h: &[f64], gamma: &[Q], cap: usize) -> Result<Complex64> {
    let sub = rs.parabolic_subsystem(j)?;
    if !sub.nodes.is_empty() {
        let basis: Vec<Vec<Q>> = j.iter().map(|n| rs.node_root(n).to_vec()).collect();
        if linalg::coordinates(&basis, gamma).is_none() {
            return Err(Error::Validation(format!("gamma is not in the span of the nodes {j}")));
        }
    }
    let wj = subsystem_weyl_group(rs, &sub, cap)?;
    let orbit = WeightOrbit::new(&wj, gamma);
    Ok(alternating_sum(&orbit, h) / denominator_over(rs, &sub.positive, h))
}

/// Dimension of the `Sigma_J` representation with highest weight `gamma^+ - rho_J`,
/// where `gamma^+` is the `W_J`-dominant conjugate of `gamma`.
pub fn subsystem_dimension(rs: &RootSystem, j: NodeSet, gamma: &[Q], cap: usize) -> Result<f64> {
    let sub = rs.parabolic_subsystem(j)?;
    let wj = subsystem_weyl_group(rs, &sub, cap)?;
    let rho_j = sub.weyl_vector(rs);
    let dominant = (0..wj.order())
        .map(|i| wj.apply(i, gamma))
        .find(|g| sub.positive.iter().all(|&a| linalg::dot(g, &rs.roots[a]) >= Q::zero()))
        .ok_or_else(|| Error::InternalConsistency("no dominant conjugate found".into()))?;
    Ok(sub
        .positive
        .iter()
        .map(|&a| {
            linalg::to_f64(linalg::dot(&dominant, &rs.roots[a])) / linalg::to_f64(linalg::dot(&rho_j, &rs.roots[a]))
        })
        .product())
}

/// Relative residual of the subsystem decomposition of `chi_mu` at a regular point.
///
/// The right-hand side uses a positive system containing `Sigma_J^+`; it is
/// converted back to the standard system by the sign relating the two denominators.
pub fn decomposition_residual(
    rs: &RootSystem,
    w: &WeylGroup,
    h: &[f64],
    mu: &Weight,
    j: NodeSet,
    cap: usize,
) -> Result<f64> {
    rs.check_proper(j)?;
    if near_singular_count(rs, h) > 0 {
        return Err(Error::SingularPoint(
            "the decomposition needs a regular point; sample away from the root hyperplanes".into(),
        ));
    }
    let orbit = WeightOrbit::new(w, &mu.mu);
    let lhs = alternating_sum(&orbit, h) / weyl_denominator(rs, h);

    let sub = rs.parabolic_subsystem(j)?;
    let wj = subsystem_weyl_group(rs, &sub, cap)?;
    let proj_exact = node_projector(rs, j);
    let proj: Vec<Vec<f64>> = proj_exact.iter().map(|r| linalg::vec_to_f64(r)).collect();
    let h_par = apply_f64(&proj, h);
    let h_perp: Vec<f64> = h.iter().zip(&h_par).map(|(a, b)| a - b).collect();
    let upper = denominator_over(rs, &sub.positive, &h_par);

    let pos = rs.positive_system_containing(j)?;
    let lower_roots: Vec<usize> = pos.iter().copied().filter(|i| !sub.roots.contains(i)).collect();
    let lower = denominator_over(rs, &lower_roots, h);
    let flipped = pos.iter().filter(|i| !rs.positive.contains(i)).count();
    let sign = if flipped % 2 == 0 { 1.0 } else { -1.0 };

    let use_kahan = w.order() >= 1000;
    let mut acc = Kahan::default();
    let mut plain = Complex64::zero();
    for s in 0..w.order() {
        let s_mu = w.apply(s, &mu.mu);
        let s_mu_f = linalg::vec_to_f64(&s_mu);
        let gamma: Vec<Q> = proj_exact.iter().map(|row| linalg::dot(row, &s_mu)).collect();
        let chi_j = if sub.nodes.is_empty() {
            Complex64::one()
        } else {
            let inner = WeightOrbit::new(&wj, &gamma);
            alternating_sum(&inner, &h_par) / upper
        };
        let phase = Complex64::from_polar(w.elements[s].det as f64, 2.0 * PI * pairing(&s_mu_f, &h_perp));
        let term = phase * chi_j;
        if use_kahan {
            acc.add(term);
        } else {
            plain += term;
        }
    }
    let total = if use_kahan { acc.sum } else { plain };
    let rhs = total / (wj.order() as f64 * lower) * sign;
    Ok((lhs - rhs).norm() / lhs.norm())
}

/// Exact Weyl dimension `prod (alpha, mu) / prod (alpha, rho)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeylDimension {
    pub value: BigRational,
    pub singular: bool,
}

fn big(x: Q) -> BigRational {
    BigRational::new(BigInt::from(*x.numer()), BigInt::from(*x.denom()))
}

pub fn weyl_dimension(rs: &RootSystem, mu: &Weight) -> WeylDimension {
    let mut value = BigRational::one();
    for a in rs.positive_roots() {
        value *= big(linalg::dot(a, &mu.mu)) / big(linalg::dot(a, &rs.weyl_vector));
    }
    let singular = value.is_zero();
    WeylDimension { value, singular }
}
