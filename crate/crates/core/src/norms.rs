//! Restricted `L^p` norms of `chi_{N rho}` on facets, sharpness regions and
//! conjugation-invariant submanifolds, exponent predictions and slope fitting.
//!
//! Facet measures are normalized so that the alcove has unit volume after
//! rescaling lengths by `lambda = vol(A)^{-1/r}`; a `k`-dimensional facet
//! carries `lambda^k` times its Riemannian measure.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::alcove::{alcove_volume, facet_chart, facet_chart_with, sharpness_depth, FacetChart};
use crate::character::char_nrho_t;
use crate::error::{Error, Result};
use crate::peeling::CriticalExponents;
use crate::quadrature::{integrate_adaptive, pairwise_sum, PanelRule};
use crate::rootsys::{NodeSet, RootSystem};

const MC_BATCHES: u64 = 16;
const P_EQ_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Scheme {
    #[serde(rename = "TENSOR_GAUSS")]
    TensorGauss,
    #[serde(rename = "MONTE_CARLO")]
    MonteCarlo,
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().replace('-', "_").as_str() {
            "TENSOR_GAUSS" | "GAUSS" => Ok(Scheme::TensorGauss),
            "MONTE_CARLO" | "MC" => Ok(Scheme::MonteCarlo),
            _ => Err(Error::Validation(format!("unknown quadrature scheme '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuadratureSpec {
    pub scheme: Scheme,
    /// Gauss nodes per panel; panels have width `1/N`.
    pub q_res: usize,
    pub seed: u64,
    /// Defaults to `1 / (10 q_res N)` when unset.
    pub boundary_inset: Option<f64>,
    pub node_budget: u128,
    pub mc_samples: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            scheme: Scheme::TensorGauss,
            q_res: 8,
            seed: 0x5eed,
            boundary_inset: None,
            node_budget: 20_000_000,
            mc_samples: 1 << 18,
        }
    }
}

impl QuadratureSpec {
    pub fn with_q_res(q_res: usize) -> Self {
        QuadratureSpec {
            q_res,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.q_res < 4 {
            return Err(Error::Validation(format!(
                "q_res must be at least 4, got {}",
                self.q_res
            )));
        }
        if let Some(b) = self.boundary_inset {
            if !(b > 0.0 && b.is_finite()) {
                return Err(Error::Validation(format!("boundary_inset must be positive, got {b}")));
            }
        }
        if self.node_budget == 0 {
            return Err(Error::Validation("node budget must be positive".into()));
        }
        if self.scheme == Scheme::MonteCarlo && (self.mc_samples as u64) < MC_BATCHES {
            return Err(Error::Validation(format!(
                "at least {MC_BATCHES} Monte Carlo samples are required"
            )));
        }
        Ok(())
    }

    pub fn inset(&self, n: u32) -> f64 {
        self.boundary_inset
            .unwrap_or(1.0 / (10.0 * self.q_res as f64 * n as f64))
    }
}

/// A norm together with its quadrature error estimate.
///
/// For tensor Gauss the estimate is the change under doubling `q_res`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormValue {
    pub value: f64,
    pub err_est: f64,
    pub nodes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum NormMode {
    Facet,
    Weighted,
    Region { perm0: Vec<usize>, c: f64 },
}

impl NormMode {
    pub fn name(&self) -> &'static str {
        match self {
            NormMode::Facet => "facet",
            NormMode::Weighted => "weighted",
            NormMode::Region { .. } => "region",
        }
    }
}

/// Integration domain in free coordinates.
enum Domain {
    /// `{x_i >= 0, sum_i m_i x_i <= 1}`.
    Simplex { marks: Vec<f64> },
    /// `lo < x_k <= ... <= x_1 <= c`, clipped to `sum_i m_i x_i <= 1`.
    Chain { lo: f64, c: f64, marks: Vec<f64> },
}

impl Domain {
    fn dim(&self) -> usize {
        match self {
            Domain::Simplex { marks } | Domain::Chain { marks, .. } => marks.len(),
        }
    }

    fn bounds(&self, level: usize, prefix: &[f64]) -> (f64, f64) {
        let (marks, lo, mut hi) = match self {
            Domain::Simplex { marks } => (marks, 0.0, f64::INFINITY),
            Domain::Chain { lo, c, marks } => (marks, *lo, prefix.last().copied().unwrap_or(*c)),
        };
        let used: f64 = prefix.iter().zip(marks).map(|(x, m)| x * m).sum();
        hi = hi.min(((1.0 - used) / marks[level]).max(0.0));
        (lo, hi)
    }

    fn estimate_nodes(&self, q_res: usize, n: u32) -> u128 {
        let k = self.dim();
        let fact: f64 = (1..=k).map(|i| i as f64).product();
        let per_dim = |len: f64| q_res as f64 * (n as f64 * len).ceil().max(1.0);
        let prod: f64 = match self {
            Domain::Simplex { marks } => marks.iter().map(|m| per_dim(1.0 / m)).product(),
            Domain::Chain { lo, c, marks } => marks.iter().map(|_| per_dim(c - lo)).product(),
        };
        (prod / fact).ceil() as u128
    }

    fn parameter_volume(&self) -> f64 {
        match self {
            Domain::Simplex { marks } => {
                let fact: f64 = (1..=marks.len()).map(|i| i as f64).product();
                1.0 / (fact * marks.iter().product::<f64>())
            }
            Domain::Chain { lo, c, marks } => (c - lo).powi(marks.len() as i32),
        }
    }

    /// A uniform sample of the simplex, or of the bounding box of the chain.
    fn sample(&self, rng: &mut ChaCha8Rng, out: &mut [f64]) {
        match self {
            Domain::Simplex { marks } => {
                let e: Vec<f64> = (0..=marks.len()).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
                let s: f64 = e.iter().sum();
                for ((x, m), ei) in out.iter_mut().zip(marks).zip(&e[1..]) {
                    *x = ei / (s * m);
                }
            }
            Domain::Chain { lo, c, .. } => {
                for x in out.iter_mut() {
                    *x = lo + (c - lo) * (1.0 - rng.gen::<f64>());
                }
            }
        }
    }

    fn contains(&self, x: &[f64]) -> bool {
        match self {
            Domain::Simplex { .. } => true,
            Domain::Chain { lo, c, marks } => {
                let mut upper = *c;
                for &xi in x {
                    if xi > upper {
                        return false;
                    }
                    upper = xi;
                }
                upper > *lo && x.iter().zip(marks).map(|(a, m)| a * m).sum::<f64>() <= 1.0
            }
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Accum {
    sum: f64,
    max: f64,
    count: u64,
}

impl Accum {
    const EMPTY: Accum = Accum {
        sum: 0.0,
        max: 0.0,
        count: 0,
    };
}

fn combine(parts: &[Accum], weights: &[f64]) -> Accum {
    let terms: Vec<f64> = parts.iter().zip(weights).map(|(a, w)| w * a.sum).collect();
    Accum {
        sum: pairwise_sum(&terms),
        max: parts.iter().map(|a| a.max).fold(0.0, f64::max),
        count: parts.iter().map(|a| a.count).sum(),
    }
}

type Integrand<'a> = dyn Fn(&[f64]) -> Option<(f64, f64)> + Sync + 'a;

/// Extra panel breaks for the innermost coordinate, given the outer coordinates and the range.
type Breaks<'a> = dyn Fn(&[f64], f64, f64) -> Vec<f64> + Sync + 'a;

struct Tensor<'a> {
    domain: &'a Domain,
    rule: PanelRule,
    width: f64,
    f: &'a Integrand<'a>,
    breaks: Option<&'a Breaks<'a>>,
}

impl Tensor<'_> {
    fn points(&self, x: &[f64]) -> Vec<(f64, f64)> {
        let level = x.len();
        let (lo, hi) = self.domain.bounds(level, x);
        match self.breaks {
            Some(b) if level + 1 == self.domain.dim() => self.rule.points_split(lo, hi, self.width, &b(x, lo, hi)),
            _ => self.rule.points(lo, hi, self.width),
        }
    }

    fn level(&self, x: &mut Vec<f64>) -> Accum {
        if x.len() == self.domain.dim() {
            return match (self.f)(x) {
                Some((v, m)) => Accum {
                    sum: v,
                    max: m,
                    count: 1,
                },
                None => Accum::EMPTY,
            };
        }
        let pts = self.points(x);
        let mut parts = Vec::with_capacity(pts.len());
        for &(t, _) in &pts {
            x.push(t);
            parts.push(self.level(x));
            x.pop();
        }
        let weights: Vec<f64> = pts.iter().map(|p| p.1).collect();
        combine(&parts, &weights)
    }

    /// The outermost level runs in parallel; sums are pairwise so the result is worker-independent.
    fn integrate(&self) -> Accum {
        if self.domain.dim() == 0 {
            return self.level(&mut Vec::new());
        }
        let pts = self.points(&[]);
        let parts: Vec<Accum> = pts
            .par_iter()
            .map(|&(t, _)| {
                let mut x = Vec::with_capacity(self.domain.dim());
                x.push(t);
                self.level(&mut x)
            })
            .collect();
        let weights: Vec<f64> = pts.iter().map(|p| p.1).collect();
        combine(&parts, &weights)
    }
}

/// Monte Carlo integral with batch means; returns the accumulator and the standard error.
fn mc_integrate(domain: &Domain, quad: &QuadratureSpec, f: &Integrand) -> (Accum, f64) {
    let per_batch = quad.mc_samples / MC_BATCHES as usize;
    let vol = domain.parameter_volume();
    let batches: Vec<Accum> = (0..MC_BATCHES)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(quad.seed);
            rng.set_stream(b);
            let mut x = vec![0.0; domain.dim()];
            let mut vals = Vec::with_capacity(per_batch);
            let mut acc = Accum::EMPTY;
            for _ in 0..per_batch {
                domain.sample(&mut rng, &mut x);
                if !domain.contains(&x) {
                    vals.push(0.0);
                    continue;
                }
                if let Some((v, m)) = f(&x) {
                    vals.push(v);
                    acc.max = acc.max.max(m);
                    acc.count += 1;
                } else {
                    vals.push(0.0);
                }
            }
            acc.sum = vol * pairwise_sum(&vals) / per_batch as f64;
            acc
        })
        .collect();
    let means: Vec<f64> = batches.iter().map(|a| a.sum).collect();
    let mean = pairwise_sum(&means) / MC_BATCHES as f64;
    let var = means.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (MC_BATCHES - 1) as f64;
    let acc = Accum {
        sum: mean,
        max: batches.iter().map(|a| a.max).fold(0.0, f64::max),
        count: batches.iter().map(|a| a.count).sum(),
    };
    (acc, (var / MC_BATCHES as f64).sqrt())
}

fn check_p(p: f64) -> Result<()> {
    if p > 0.0 && !p.is_nan() {
        Ok(())
    } else {
        Err(Error::Validation(format!("p must be positive, got {p}")))
    }
}

fn check_n(n: u32) -> Result<()> {
    if n >= 1 {
        Ok(())
    } else {
        Err(Error::Validation("N must be at least 1".into()))
    }
}

/// Length rescaling that gives the alcove unit volume.
pub fn measure_scale(rs: &RootSystem) -> f64 {
    alcove_volume(rs).powf(-1.0 / rs.rank as f64)
}

/// `|delta_J|^2` as a product over the positive roots outside `Sigma_J`, given their coefficient rows.
fn weight_from_coeffs(coeffs: &[Vec<f64>], t_simple: &[f64]) -> f64 {
    coeffs
        .iter()
        .map(|c| {
            let x: f64 = c.iter().zip(t_simple).map(|(a, b)| a * b).sum();
            let s = (std::f64::consts::PI * x).sin();
            4.0 * s * s
        })
        .product()
}

fn outside_coeffs(rs: &RootSystem, nodes: NodeSet) -> Result<Vec<Vec<f64>>> {
    let sub = rs.parabolic_subsystem(nodes)?;
    Ok(rs
        .positive
        .iter()
        .enumerate()
        .filter(|(_, i)| !sub.roots.contains(i))
        .map(|(pos, _)| rs.positive_coeffs_f64()[pos].clone())
        .collect())
}

/// Everything needed to integrate over a chart of `A_J`.
struct Setup<'a> {
    rs: &'a RootSystem,
    chart: FacetChart,
    domain: Domain,
    /// Position in `chart.free` of each domain coordinate.
    order: Vec<usize>,
    weight: Option<Vec<Vec<f64>>>,
    region: Option<(Vec<usize>, f64)>,
}

impl Setup<'_> {
    fn t_full(&self, x: &[f64]) -> Vec<f64> {
        let mut free = vec![0.0; x.len()];
        for (&pos, &xi) in self.order.iter().zip(x) {
            free[pos] = xi;
        }
        self.chart.t_full(&free)
    }

    /// Points of the innermost segment where some factor `sin(pi N <alpha, h>)` vanishes.
    fn character_zeros(&self, outer: &[f64], lo: f64, hi: f64, n: u32) -> Vec<f64> {
        let mut x = outer.to_vec();
        x.push(lo);
        let t_lo = self.t_full(&x);
        x[outer.len()] = hi;
        let t_hi = self.t_full(&x);
        let nf = n as f64;
        let mut out = Vec::new();
        for c in self.rs.positive_coeffs_f64() {
            let a: f64 = c.iter().zip(&t_lo[1..]).map(|(u, v)| u * v).sum();
            let b: f64 = c.iter().zip(&t_hi[1..]).map(|(u, v)| u * v).sum();
            if (b - a).abs() < 1e-12 {
                continue;
            }
            let (from, to) = (a.min(b) * nf, a.max(b) * nf);
            let mut k = from.ceil();
            while k <= to {
                out.push(lo + (hi - lo) * (k / nf - a) / (b - a));
                k += 1.0;
            }
        }
        out
    }

    fn measure(&self) -> f64 {
        measure_scale(self.rs).powi(self.chart.dim() as i32) * self.chart.volume_scale
    }

    fn evaluate(&self, p: f64, n: u32, quad: &QuadratureSpec) -> Result<NormValue> {
        let sup = p.is_infinite();
        // |chi|^p is smooth across the zeros of chi only for even integer p; otherwise
        // inner panels are split at those zeros, and graded near them when p < 1.
        let smooth = p.fract() == 0.0 && p % 2.0 == 0.0;
        let integrand = |x: &[f64]| -> Option<(f64, f64)> {
            let t = self.t_full(x);
            if let Some((perm0, c)) = &self.region {
                let inside =
                    crate::alcove::sharpness_region_contains_t(self.rs.rank, self.chart.nodes, perm0, *c, n as f64, &t)
                        .unwrap_or(false);
                if !inside {
                    return None;
                }
            }
            let chi = char_nrho_t(self.rs, &t[1..], n).0.abs();
            let w = self.weight.as_ref().map_or(1.0, |c| weight_from_coeffs(c, &t[1..]));
            let v = if sup { chi } else { chi.powf(p) * w };
            Some((v, chi))
        };
        let finish = |acc: Accum| -> f64 {
            if sup {
                acc.max
            } else {
                (self.measure() * acc.sum).powf(1.0 / p)
            }
        };
        let zeros = |x: &[f64], lo: f64, hi: f64| self.character_zeros(x, lo, hi, n);
        let run = |order: usize| {
            Tensor {
                domain: &self.domain,
                rule: if !sup && p < 1.0 {
                    PanelRule::graded(order)
                } else {
                    PanelRule::new(order)
                },
                width: 1.0 / n as f64,
                f: &integrand,
                breaks: if smooth || sup { None } else { Some(&zeros) },
            }
            .integrate()
        };
        if self.domain.dim() == 0 {
            let acc = run(quad.q_res);
            return Ok(NormValue {
                value: if sup { acc.max } else { acc.sum.powf(1.0 / p) },
                err_est: 0.0,
                nodes: acc.count,
            });
        }
        match quad.scheme {
            Scheme::TensorGauss => {
                let fine_order = 2 * quad.q_res;
                let estimate = self.domain.estimate_nodes(quad.q_res, n) + self.domain.estimate_nodes(fine_order, n);
                if estimate > quad.node_budget {
                    let shrink = (quad.node_budget as f64 / estimate as f64).powf(1.0 / self.domain.dim() as f64);
                    return Err(Error::Budget {
                        requested: estimate,
                        budget: quad.node_budget,
                        suggestion: format!(
                            "use N <= {} or the MONTE_CARLO scheme",
                            ((n as f64 * shrink).floor() as u64).max(1)
                        ),
                    });
                }
                let base = run(quad.q_res);
                if base.count == 0 {
                    return Err(Error::EmptyRegion(format!(
                        "no quadrature node lies in the region at N = {n}"
                    )));
                }
                let refined = run(fine_order);
                let value = finish(base);
                Ok(NormValue {
                    value,
                    err_est: (value - finish(refined)).abs(),
                    nodes: base.count + refined.count,
                })
            }
            Scheme::MonteCarlo => {
                let (acc, se) = mc_integrate(&self.domain, quad, &integrand);
                if acc.count == 0 {
                    return Err(Error::EmptyRegion(format!(
                        "no Monte Carlo sample lies in the region at N = {n}"
                    )));
                }
                let value = finish(acc);
                let err_est = if sup || acc.sum == 0.0 {
                    0.0
                } else {
                    value * se / (acc.sum.abs() * p)
                };
                Ok(NormValue {
                    value,
                    err_est,
                    nodes: acc.count,
                })
            }
        }
    }
}

fn facet_setup(rs: &RootSystem, nodes: NodeSet, weighted: bool) -> Result<Setup<'_>> {
    let chart = facet_chart(rs, nodes)?;
    let marks = chart.free_marks.iter().map(|&m| m as f64).collect();
    let order = (0..chart.dim()).collect();
    Ok(Setup {
        rs,
        domain: Domain::Simplex { marks },
        order,
        weight: if weighted {
            Some(outside_coeffs(rs, nodes)?)
        } else {
            None
        },
        region: None,
        chart,
    })
}

/// `(int_{A_J} |chi_{N rho}|^p)^{1/p}`; `p = inf` gives the maximum over quadrature nodes.
pub fn lp_norm_facet(rs: &RootSystem, nodes: NodeSet, p: f64, n: u32, quad: &QuadratureSpec) -> Result<NormValue> {
    check_p(p)?;
    check_n(n)?;
    quad.validate()?;
    facet_setup(rs, nodes, false)?.evaluate(p, n, quad)
}

/// `(int_{A_J} |chi_{N rho}|^p |delta_J|^2)^{1/p}`, the invariant-submanifold norm with unit constant.
pub fn lp_norm_weighted(rs: &RootSystem, nodes: NodeSet, p: f64, n: u32, quad: &QuadratureSpec) -> Result<NormValue> {
    check_p(p)?;
    check_n(n)?;
    quad.validate()?;
    facet_setup(rs, nodes, true)?.evaluate(p, n, quad)
}

/// The norm over the sharpness region `1/N < t_{j_k} <= ... <= t_{j_1} <= c` inside `A_J`.
pub fn lp_norm_region(
    rs: &RootSystem,
    nodes: NodeSet,
    perm0: &[usize],
    c: f64,
    p: f64,
    n: u32,
    quad: &QuadratureSpec,
) -> Result<NormValue> {
    check_p(p)?;
    check_n(n)?;
    quad.validate()?;
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::Validation(format!("c must be positive, got {c}")));
    }
    let k = sharpness_depth(rs.rank, nodes, perm0)?;
    if k == 0 {
        return lp_norm_facet(rs, nodes, p, n, quad);
    }
    let lo = 1.0 / n as f64;
    if c <= lo {
        return Err(Error::EmptyRegion(format!("c = {c} does not exceed 1/N = {lo}")));
    }
    let chart = facet_chart_with(rs, nodes, perm0[0])?;
    let chain = &perm0[1..=k];
    let order: Vec<usize> = chain
        .iter()
        .map(|j| chart.free.iter().position(|f| f == j).expect("chain nodes are free"))
        .collect();
    let marks = order.iter().map(|&pos| chart.free_marks[pos] as f64).collect();
    Setup {
        rs,
        domain: Domain::Chain { lo, c, marks },
        order,
        weight: None,
        region: Some((perm0.to_vec(), c)),
        chart,
    }
    .evaluate(p, n, quad)
}

pub fn lp_norm(
    rs: &RootSystem,
    mode: &NormMode,
    nodes: NodeSet,
    p: f64,
    n: u32,
    quad: &QuadratureSpec,
) -> Result<NormValue> {
    match mode {
        NormMode::Facet => lp_norm_facet(rs, nodes, p, n, quad),
        NormMode::Weighted => lp_norm_weighted(rs, nodes, p, n, quad),
        NormMode::Region { perm0, c } => lp_norm_region(rs, nodes, perm0, *c, p, n, quad),
    }
}

/// Rank `k = r - |J|` and dimension `n = k + 2(|Sigma^+| - |Sigma_J^+|)` of the orbit of `A_J`.
pub fn invariant_dimensions(rs: &RootSystem, nodes: NodeSet) -> Result<(usize, usize)> {
    rs.check_proper(nodes)?;
    let k = rs.rank - nodes.len();
    let sub = rs.parabolic_subsystem(nodes)?;
    Ok((k, k + 2 * (rs.num_positive() - sub.num_positive())))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Bound {
    /// Characters on `k`-dimensional submanifolds of the torus.
    Restriction,
    /// Sums of matrix coefficients, `p >= 2`.
    MatrixCoefficients,
    /// General eigenfunctions, `p >= 2`, rank at least 2.
    Eigenfunctions,
    /// Characters on conjugation-invariant submanifolds of dimension `n`.
    Invariant,
    /// The `L^2` case on conjugation-invariant submanifolds.
    InvariantL2,
    /// Norms on the whole group.
    Global,
}

impl Bound {
    pub const ALL: [Bound; 6] = [
        Bound::Restriction,
        Bound::MatrixCoefficients,
        Bound::Eigenfunctions,
        Bound::Invariant,
        Bound::InvariantL2,
        Bound::Global,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Bound::Restriction => "restriction",
            Bound::MatrixCoefficients => "matrix-coefficients",
            Bound::Eigenfunctions => "eigenfunctions",
            Bound::Invariant => "invariant",
            Bound::InvariantL2 => "invariant-l2",
            Bound::Global => "global",
        }
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Bound {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Bound::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| Error::Validation(format!("unknown bound selector '{s}'")))
    }
}

/// Growth `N^exponent (log N)^log_power`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Prediction {
    pub exponent: f64,
    pub log_power: f64,
}

impl Prediction {
    fn power(exponent: f64) -> Self {
        Prediction {
            exponent,
            log_power: 0.0,
        }
    }
}

fn near(a: f64, b: f64) -> bool {
    (a - b).abs() <= P_EQ_TOL * b.abs().max(1.0)
}

/// Predicted growth of the selected bound; `n` is the submanifold dimension where it matters.
pub fn predicted_exponent(
    rs: &RootSystem,
    ce: &CriticalExponents,
    bound: Bound,
    k: usize,
    n: Option<usize>,
    p: f64,
) -> Result<Prediction> {
    check_p(p)?;
    let r = rs.rank;
    let d = rs.group_dim() as f64;
    let base = (d - r as f64) / 2.0;
    if k > r {
        return Err(Error::Range(format!("k = {k} exceeds the rank {r}")));
    }
    if ce.p.len() != r + 1 {
        return Err(Error::Validation(
            "critical exponents do not match the root system".into(),
        ));
    }
    let kf = k as f64;
    let k_over_pk = ce.k_over_p[k] as f64;
    let pk = ce.p_f64(k);
    let need_p_ge_2 = |what: &str| -> Result<()> {
        if p >= 2.0 {
            Ok(())
        } else {
            Err(Error::Range(format!("{what} requires p >= 2, got {p}")))
        }
    };
    let dim_n = || -> Result<f64> {
        match n {
            Some(n) if n >= k => Ok(n as f64),
            Some(n) => Err(Error::Range(format!("dimension n = {n} is below the rank k = {k}"))),
            None => Err(Error::Validation("submanifold dimension n is required".into())),
        }
    };
    Ok(match bound {
        Bound::Restriction => {
            if k == 0 || p > pk && !near(p, pk) {
                Prediction::power(base - kf / p)
            } else if near(p, pk) {
                Prediction {
                    exponent: base - k_over_pk,
                    log_power: 1.0 / pk,
                }
            } else {
                Prediction::power(base - k_over_pk)
            }
        }
        Bound::MatrixCoefficients => {
            need_p_ge_2("the matrix-coefficient bound (regimes: p >= 2)")?;
            let log_power = if r == 1 && k == 1 && near(p, 2.0) { 0.5 } else { 0.0 };
            Prediction {
                exponent: base - kf / p,
                log_power,
            }
        }
        Bound::Eigenfunctions => {
            need_p_ge_2("the eigenfunction bound (regimes: p >= 2)")?;
            if r < 2 {
                return Err(Error::Range(format!(
                    "the eigenfunction bound needs rank >= 2, got {r}"
                )));
            }
            Prediction::power((d - 2.0) / 2.0 - kf / p)
        }
        Bound::Invariant => {
            let nf = dim_n()?;
            if p < 2.0 {
                return Err(Error::Range(format!(
                    "the invariant-submanifold bound requires p >= 2 (regimes: [2, {}), {}, ({}, inf)), got {p}",
                    2.0 + pk,
                    2.0 + pk,
                    2.0 + pk
                )));
            }
            let kink = 2.0 + pk;
            if near(p, kink) {
                Prediction {
                    exponent: base - nf / kink,
                    log_power: 1.0 / kink,
                }
            } else if p > kink {
                Prediction::power(base - nf / p)
            } else {
                Prediction::power(base - k_over_pk - (nf - kf - 2.0 * k_over_pk) / p)
            }
        }
        Bound::InvariantL2 => {
            let nf = dim_n()?;
            if !near(p, 2.0) {
                return Err(Error::Range(format!("the invariant L^2 bound requires p = 2, got {p}")));
            }
            Prediction::power(base - (nf - kf) / 2.0)
        }
        Bound::Global => {
            need_p_ge_2("the global bound (regimes: [2, 2d/(d-r)), 2d/(d-r), (2d/(d-r), inf))")?;
            let kink = 2.0 * d / (d - r as f64);
            if near(p, kink) {
                Prediction {
                    exponent: 0.0,
                    log_power: (d - r as f64) / (2.0 * d),
                }
            } else if p > kink {
                Prediction::power(base - d / p)
            } else {
                Prediction::power(0.0)
            }
        }
    })
}

/// Least-squares line through `(x, y)`: `(slope, intercept, slope standard error)`.
pub fn fit_line(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let m = x.len() as f64;
    let mx = x.iter().sum::<f64>() / m;
    let my = y.iter().sum::<f64>() / m;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let stderr = if x.len() > 2 {
        let ssr: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
        (ssr / (m - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    (slope, intercept, stderr)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanResult {
    #[serde(rename = "N_values")]
    pub n_values: Vec<u32>,
    pub norms: Vec<f64>,
    pub fitted_slope: f64,
    pub slope_stderr: f64,
    pub predicted: f64,
    pub log_power: f64,
    pub log_corrected: bool,
    /// Smallest `N`, when it was left out of the fit by the transient guard.
    pub discarded_n: Option<u32>,
}

/// Fits `log norm` against `log N`, optionally after dividing out `(log N)^{log_power}`.
///
/// When the residual at the smallest `N` exceeds twice the slope standard
/// error, that point is dropped and the fit repeated.
pub fn fit_scan(n_values: &[u32], norms: &[f64], prediction: Prediction, log_correct: bool) -> Result<ScanResult> {
    if n_values.len() < 4 {
        return Err(Error::Validation(format!(
            "a scan needs at least 4 values of N, got {}",
            n_values.len()
        )));
    }
    if n_values.windows(2).any(|w| w[1] <= w[0]) || n_values[0] < 2 {
        return Err(Error::Validation("N values must be increasing and at least 2".into()));
    }
    if let Some(bad) = norms.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
        return Err(Error::InternalConsistency(format!(
            "norm {bad} is not finite and positive"
        )));
    }
    let log_corrected = log_correct && prediction.log_power != 0.0;
    let x: Vec<f64> = n_values.iter().map(|&n| (n as f64).ln()).collect();
    let y: Vec<f64> = norms
        .iter()
        .zip(&x)
        .map(|(v, lx)| {
            let mut l = v.ln();
            if log_corrected {
                l -= prediction.log_power * lx.ln();
            }
            l
        })
        .collect();
    let (mut slope, intercept, mut stderr) = fit_line(&x, &y);
    let mut discarded_n = None;
    let residual = (y[0] - intercept - slope * x[0]).abs();
    if residual > 2.0 * stderr {
        let refit = fit_line(&x[1..], &y[1..]);
        slope = refit.0;
        stderr = refit.2;
        discarded_n = Some(n_values[0]);
    }
    Ok(ScanResult {
        n_values: n_values.to_vec(),
        norms: norms.to_vec(),
        fitted_slope: slope,
        slope_stderr: stderr,
        predicted: prediction.exponent,
        log_power: prediction.log_power,
        log_corrected,
        discarded_n,
    })
}

/// Evaluates `norm_at` over `n_values` concurrently and fits the slope.
pub fn scan_exponent<F>(n_values: &[u32], prediction: Prediction, log_correct: bool, norm_at: F) -> Result<ScanResult>
where
    F: Fn(u32) -> Result<f64> + Sync,
{
    let results: Vec<Result<f64>> = n_values.par_iter().map(|&n| norm_at(n)).collect();
    let mut norms = Vec::with_capacity(n_values.len());
    for (&n, r) in n_values.iter().zip(results) {
        match r {
            Ok(v) => norms.push(v),
            Err(e) => {
                return Err(Error::Scan {
                    failed_at: n,
                    partial: n_values.iter().copied().zip(norms).collect(),
                    source: Box::new(e),
                })
            }
        }
    }
    fit_scan(n_values, &norms, prediction, log_correct)
}

/// `(int_{1/N < s_k <= ... <= s_1 <= c} prod_i s_i^{-a_i p} ds)^{1/p}` by iterated adaptive quadrature.
pub fn nested_power_integral(a: &[f64], p: f64, n: f64, c: f64) -> Result<f64> {
    check_p(p)?;
    if a.is_empty() || a.iter().any(|x| !(*x > 0.0)) || a.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Validation(format!(
            "exponents must be positive and strictly decreasing, got {a:?}"
        )));
    }
    if !(n > 0.0 && c > 0.0 && n.is_finite() && c.is_finite()) {
        return Err(Error::Validation("N and c must be positive".into()));
    }
    let lo = (1.0 / n).ln();
    let hi = c.ln();
    if hi <= lo {
        return Err(Error::EmptyRegion(format!("c = {c} does not exceed 1/N")));
    }
    // G_i(u) = int_{lo}^{u} e^{v (1 - a_i p)} G_{i+1}(v) dv in the variable v = ln s.
    fn level(a: &[f64], p: f64, lo: f64, u: f64) -> f64 {
        if a.is_empty() {
            return 1.0;
        }
        let e = 1.0 - a[0] * p;
        integrate_adaptive(|v| (e * v).exp() * level(&a[1..], p, lo, v), lo, u, 1e-10)
    }
    Ok(level(a, p, lo, hi).powf(1.0 / p))
}

/// Growth of [`nested_power_integral`] in `N`: `p_0 = k / sum a_i` separates the regimes.
pub fn nested_power_prediction(a: &[f64], p: f64) -> Prediction {
    let big_a: f64 = a.iter().sum();
    let k = a.len() as f64;
    let p0 = k / big_a;
    if near(p, p0) {
        Prediction {
            exponent: 0.0,
            log_power: 1.0 / p0,
        }
    } else if p > p0 {
        Prediction::power(big_a - k / p)
    } else {
        Prediction::power(0.0)
    }
}
