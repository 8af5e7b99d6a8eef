//! The fundamental alcove: distance coordinates, facet charts, the
//! barycentric-semiclassical subdivision and the sharpness regions.

use num_traits::Zero;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, q, Q};
use crate::rootsys::{NodeSet, RootSystem};

/// A torus point in ambient coordinates together with its distance coordinates `t_0..t_r`.
#[derive(Debug, Clone, PartialEq)]
pub struct AlcovePoint {
    pub h: Vec<f64>,
    pub t: Vec<f64>,
}

impl AlcovePoint {
    pub fn from_h(rs: &RootSystem, h: &[f64]) -> Self {
        AlcovePoint {
            h: h.to_vec(),
            t: t_coords(rs, h),
        }
    }

    /// Builds the point from `t_0..t_r`; the affine relation must hold to within `1e-9`.
    pub fn from_t(rs: &RootSystem, t: &[f64]) -> Result<Self> {
        if t.len() != rs.rank + 1 {
            return Err(Error::Validation(format!(
                "expected {} t-coordinates, got {}",
                rs.rank + 1,
                t.len()
            )));
        }
        let rel = affine_relation(rs, t);
        if (rel - 1.0).abs() > 1e-9 {
            return Err(Error::Validation(format!(
                "t-coordinates violate the affine relation (sum is {rel})"
            )));
        }
        Ok(AlcovePoint {
            h: rs.point_from_simple_t(&t[1..]),
            t: t.to_vec(),
        })
    }

    pub fn in_closed_alcove(&self) -> bool {
        self.t.iter().all(|&x| x >= 0.0)
    }
}

/// `t_0 + sum_j m_j t_j`, which equals 1 identically.
pub fn affine_relation(rs: &RootSystem, t: &[f64]) -> f64 {
    t[0] + rs.marks.iter().zip(&t[1..]).map(|(&m, &x)| m as f64 * x).sum::<f64>()
}

/// `t_j = <alpha_j, h> + delta_{0j}` for `j = 0..r`.
pub fn t_coords(rs: &RootSystem, h: &[f64]) -> Vec<f64> {
    (0..=rs.rank)
        .map(|j| {
            let a = rs.node_root(j);
            let ip: f64 = a.iter().zip(h).map(|(&x, y)| linalg::to_f64(x) * y).sum();
            if j == 0 {
                ip + 1.0
            } else {
                ip
            }
        })
        .collect()
}

pub fn t_coords_exact(rs: &RootSystem, h: &[Q]) -> Vec<Q> {
    (0..=rs.rank)
        .map(|j| {
            let ip = linalg::dot(rs.node_root(j), h);
            if j == 0 {
                ip + q(1)
            } else {
                ip
            }
        })
        .collect()
}

/// Default barycentric threshold `c = 1 / (4 max_j m_j r)`.
pub fn default_c(rs: &RootSystem) -> f64 {
    let mmax = *rs.marks.iter().max().unwrap() as f64;
    1.0 / (4.0 * mmax * rs.rank as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BssLabel {
    Cell { k: NodeSet, j: NodeSet },
    Outside,
}

fn check_bss_params(rs: &RootSystem, n: f64, c: f64) -> Result<()> {
    if !(c > 0.0) {
        return Err(Error::Precondition(format!("threshold c = {c} must be positive")));
    }
    if !(n > 1.0 / c) {
        return Err(Error::Precondition(format!("N = {n} must exceed 1/c = {}", 1.0 / c)));
    }
    let total: i64 = 1 + rs.marks.iter().sum::<i64>();
    if c * total as f64 >= 1.0 {
        return Err(Error::Precondition(format!(
            "c = {c} is too large: c times the sum of the marks must stay below 1"
        )));
    }
    Ok(())
}

/// Locates the cell `P_{K,J}` containing the point with distance coordinates `t`.
pub fn classify_bss_t(rs: &RootSystem, t: &[f64], n: f64, c: f64) -> Result<BssLabel> {
    check_bss_params(rs, n, c)?;
    if t.iter().any(|&x| x < 0.0) {
        return Ok(BssLabel::Outside);
    }
    let inv_n = 1.0 / n;
    let mut k = NodeSet::EMPTY;
    let mut j = NodeSet::EMPTY;
    for (node, &x) in t.iter().enumerate() {
        if x <= c {
            k.insert(node);
        }
        if x <= inv_n {
            j.insert(node);
        }
    }
    Ok(BssLabel::Cell { k, j })
}

pub fn classify_bss(rs: &RootSystem, h: &[f64], n: f64, c: f64) -> Result<BssLabel> {
    classify_bss_t(rs, &t_coords(rs, h), n, c)
}

/// Membership predicate of `P_{K,J}`, written directly from its definition.
pub fn bss_cell_contains(t: &[f64], k: NodeSet, j: NodeSet, n: f64, c: f64) -> bool {
    let inv_n = 1.0 / n;
    t.iter().enumerate().all(|(node, &x)| {
        if j.contains(node) {
            x <= inv_n
        } else if k.contains(node) {
            inv_n < x && x <= c
        } else {
            x > c
        }
    })
}

/// Affine parametrization of the facet `A_J` by the free distance coordinates.
///
/// The dependent node `d` is recovered from the affine relation, so the
/// parameter region is `{t_f >= 0, sum_f m_f t_f <= 1}`.
#[derive(Debug, Clone, Serialize)]
pub struct FacetChart {
    #[serde(serialize_with = "serialize_nodes")]
    pub nodes: NodeSet,
    pub free: Vec<usize>,
    pub dependent: usize,
    pub free_marks: Vec<i64>,
    pub dependent_mark: i64,
    #[serde(serialize_with = "serialize_q_vec")]
    pub offset_exact: Vec<Q>,
    /// Column `i` is the image of the `i`-th free coordinate direction.
    #[serde(serialize_with = "serialize_q_mat")]
    pub directions_exact: Vec<Vec<Q>>,
    pub offset: Vec<f64>,
    pub directions: Vec<Vec<f64>>,
    pub volume_scale: f64,
    #[serde(skip)]
    rank: usize,
}

fn serialize_nodes<S: serde::Serializer>(n: &NodeSet, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(n.iter())
}

fn serialize_q_vec<S: serde::Serializer>(v: &[Q], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(linalg::format_q))
}

fn serialize_q_mat<S: serde::Serializer>(m: &[Vec<Q>], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(m.iter().map(|row| row.iter().map(linalg::format_q).collect::<Vec<_>>()))
}

impl FacetChart {
    pub fn dim(&self) -> usize {
        self.free.len()
    }

    /// Ambient point for free coordinates `t_free`.
    pub fn map(&self, t_free: &[f64]) -> Vec<f64> {
        let mut h = self.offset.clone();
        for (tf, dir) in t_free.iter().zip(&self.directions) {
            for (x, d) in h.iter_mut().zip(dir) {
                *x += tf * d;
            }
        }
        h
    }

    /// All distance coordinates `t_0..t_r` for free coordinates `t_free`.
    pub fn t_full(&self, t_free: &[f64]) -> Vec<f64> {
        let mut t = vec![0.0; self.rank + 1];
        let mut rest = 1.0;
        for ((&f, &m), &x) in self.free.iter().zip(&self.free_marks).zip(t_free) {
            t[f] = x;
            rest -= m as f64 * x;
        }
        t[self.dependent] = rest / self.dependent_mark as f64;
        t
    }

    /// Lebesgue measure of the parameter region, `1 / (k! prod_f m_f)`.
    pub fn parameter_volume(&self) -> f64 {
        let k = self.dim();
        let fact: f64 = (1..=k).map(|i| i as f64).product();
        let prod: f64 = self.free_marks.iter().map(|&m| m as f64).product();
        1.0 / (fact * prod)
    }

    /// Riemannian measure of the facet.
    pub fn riemannian_volume(&self) -> f64 {
        self.parameter_volume() * self.volume_scale
    }
}

pub fn facet_chart(rs: &RootSystem, nodes: NodeSet) -> Result<FacetChart> {
    rs.check_proper(nodes)?;
    let dependent = nodes
        .complement(rs.rank)
        .iter()
        .next()
        .expect("proper subset has a complement");
    facet_chart_with(rs, nodes, dependent)
}

/// Facet chart with a chosen dependent node outside `nodes`.
pub fn facet_chart_with(rs: &RootSystem, nodes: NodeSet, dependent: usize) -> Result<FacetChart> {
    rs.check_proper(nodes)?;
    if dependent > rs.rank {
        return Err(Error::InvalidNode {
            node: dependent,
            rank: rs.rank,
        });
    }
    if nodes.contains(dependent) {
        return Err(Error::Validation(format!("dependent node {dependent} lies in {nodes}")));
    }
    let free: Vec<usize> = nodes.complement(rs.rank).iter().filter(|&f| f != dependent).collect();
    let em = rs.extended_marks();
    let m_d = em[dependent];
    let dim = rs.ambient_dim;
    let (offset_exact, directions_exact): (Vec<Q>, Vec<Vec<Q>>) = if dependent == 0 {
        (vec![Q::zero(); dim], free.iter().map(|&f| coweight(rs, f)).collect())
    } else {
        let wd = &rs.coweights[dependent - 1];
        (
            linalg::scale(wd, Q::new(1, m_d)),
            free.iter()
                .map(|&f| linalg::sub(&coweight(rs, f), &linalg::scale(wd, Q::new(em[f], m_d))))
                .collect(),
        )
    };
    let volume_scale = if free.is_empty() {
        1.0
    } else {
        let det = linalg::determinant(&linalg::gram(&directions_exact));
        linalg::to_f64(det).sqrt()
    };
    Ok(FacetChart {
        nodes,
        free_marks: free.iter().map(|&f| em[f]).collect(),
        free,
        dependent,
        dependent_mark: m_d,
        offset: linalg::vec_to_f64(&offset_exact),
        directions: directions_exact.iter().map(|v| linalg::vec_to_f64(v)).collect(),
        offset_exact,
        directions_exact,
        volume_scale,
        rank: rs.rank,
    })
}

/// Fundamental coweight of a node, with the origin for node 0.
fn coweight(rs: &RootSystem, j: usize) -> Vec<Q> {
    if j == 0 {
        vec![Q::zero(); rs.ambient_dim]
    } else {
        rs.coweights[j - 1].clone()
    }
}

/// Riemannian volume of the alcove in the ambient metric.
pub fn alcove_volume(rs: &RootSystem) -> f64 {
    facet_chart(rs, NodeSet::EMPTY)
        .expect("empty node set is proper")
        .riemannian_volume()
}

/// Checks that `J` is the tail `{j_{k+1}, ..., j_r}` of `perm0` and returns `k`.
pub fn sharpness_depth(rank: usize, nodes: NodeSet, perm0: &[usize]) -> Result<usize> {
    if perm0.len() != rank + 1 {
        return Err(Error::Validation(format!(
            "permutation has {} entries, expected {}",
            perm0.len(),
            rank + 1
        )));
    }
    if nodes.len() > rank {
        return Err(Error::Validation(format!(
            "node set {nodes} must have at most {rank} elements"
        )));
    }
    let k = rank - nodes.len();
    let tail: NodeSet = perm0[k + 1..].iter().copied().collect();
    if tail != nodes {
        return Err(Error::Validation(format!(
            "node set {nodes} is not the tail {tail} of the permutation {perm0:?}"
        )));
    }
    Ok(k)
}

/// The ordered chain `1/N < t_{j_k} <= ... <= t_{j_1} <= c`.
pub fn sharpness_region_contains_t(
    rank: usize,
    nodes: NodeSet,
    perm0: &[usize],
    c: f64,
    n: f64,
    t: &[f64],
) -> Result<bool> {
    let k = sharpness_depth(rank, nodes, perm0)?;
    if k == 0 {
        return Ok(true);
    }
    let inv_n = 1.0 / n;
    let mut upper = c;
    for &j in &perm0[1..=k] {
        let x = t[j];
        if x > upper {
            return Ok(false);
        }
        upper = x;
    }
    Ok(upper > inv_n)
}

pub fn sharpness_region_contains(
    rs: &RootSystem,
    nodes: NodeSet,
    perm0: &[usize],
    c: f64,
    n: f64,
    h: &[f64],
) -> Result<bool> {
    sharpness_region_contains_t(rs.rank, nodes, perm0, c, n, &t_coords(rs, h))
}

/// A uniformly distributed point of the alcove.
pub fn sample_alcove<R: Rng + ?Sized>(rs: &RootSystem, rng: &mut R) -> AlcovePoint {
    let em = rs.extended_marks();
    let mut x: Vec<f64> = (0..=rs.rank).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
    let s: f64 = x.iter().sum();
    for (xi, &m) in x.iter_mut().zip(&em) {
        *xi /= s * m as f64;
    }
    AlcovePoint {
        h: rs.point_from_simple_t(&x[1..]),
        t: x,
    }
}

/// A uniform alcove point whose root pairings all stay at least `margin` away from the integers.
pub fn sample_regular_alcove<R: Rng + ?Sized>(rs: &RootSystem, rng: &mut R, margin: f64) -> AlcovePoint {
    loop {
        let p = sample_alcove(rs, rng);
        let regular = rs.positive_coeffs_f64().iter().all(|c| {
            let x: f64 = c.iter().zip(&p.t[1..]).map(|(a, b)| a * b).sum();
            (x - x.round()).abs() >= margin
        });
        if regular {
            return p;
        }
    }
}
