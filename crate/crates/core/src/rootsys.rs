//! Irreducible reduced root systems in their Bourbaki realizations.
//!
//! Everything structural is exact: roots, simple roots, the lowest root, marks,
//! the Weyl vector and the fundamental coweights are stored as rationals. Extended
//! Dynkin nodes are numbered `0..=r`, node `0` carrying the lowest root and the
//! remaining nodes following Bourbaki's labelling of the simple roots.

use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, half, q, Q};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Family {
    A,
    B,
    C,
    D,
    E,
    F,
    G,
}

impl Family {
    pub const ALL: [Family; 7] = [
        Family::A,
        Family::B,
        Family::C,
        Family::D,
        Family::E,
        Family::F,
        Family::G,
    ];

    pub fn letter(self) -> char {
        match self {
            Family::A => 'A',
            Family::B => 'B',
            Family::C => 'C',
            Family::D => 'D',
            Family::E => 'E',
            Family::F => 'F',
            Family::G => 'G',
        }
    }

    /// Checks the rank against the classification; the message names the constraint.
    pub fn validate_rank(self, rank: usize) -> Result<()> {
        let constraint = match self {
            Family::A if rank >= 1 => None,
            Family::A => Some("A_r requires r >= 1"),
            Family::B if rank >= 2 => None,
            Family::B => Some("B_r requires r >= 2"),
            Family::C if rank >= 3 => None,
            Family::C => Some("C_r requires r >= 3"),
            Family::D if rank >= 4 => None,
            Family::D => Some("D_r requires r >= 4"),
            Family::E if (6..=8).contains(&rank) => None,
            Family::E => Some("E_r requires r in {6, 7, 8}"),
            Family::F if rank == 4 => None,
            Family::F => Some("F_r requires r = 4"),
            Family::G if rank == 2 => None,
            Family::G => Some("G_r requires r = 2"),
        };
        match constraint {
            None => Ok(()),
            Some(c) => Err(Error::InvalidRootSystem {
                family: self.letter(),
                rank,
                constraint: c.to_string(),
            }),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "A" => Ok(Family::A),
            "B" => Ok(Family::B),
            "C" => Ok(Family::C),
            "D" => Ok(Family::D),
            "E" => Ok(Family::E),
            "F" => Ok(Family::F),
            "G" => Ok(Family::G),
            other => Err(Error::Validation(format!("unknown family '{other}'"))),
        }
    }
}

/// A subset of the extended Dynkin nodes `{0, ..., r}` stored as a bitmask.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct NodeSet(pub u32);

impl NodeSet {
    pub const EMPTY: NodeSet = NodeSet(0);

    pub fn all(rank: usize) -> Self {
        NodeSet((1u32 << (rank + 1)) - 1)
    }

    /// The finite simple nodes `{1, ..., r}`.
    pub fn simple(rank: usize) -> Self {
        NodeSet(Self::all(rank).0 & !1)
    }

    pub fn single(node: usize) -> Self {
        NodeSet(1 << node)
    }

    pub fn contains(self, node: usize) -> bool {
        node < 32 && self.0 & (1 << node) != 0
    }

    pub fn insert(&mut self, node: usize) {
        self.0 |= 1 << node;
    }

    pub fn with(self, node: usize) -> Self {
        NodeSet(self.0 | 1 << node)
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn is_subset(self, other: NodeSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn complement(self, rank: usize) -> Self {
        NodeSet(Self::all(rank).0 & !self.0)
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        (0..32).filter(move |&i| self.0 & (1 << i) != 0)
    }

    pub fn is_proper(self, rank: usize) -> bool {
        self.is_subset(Self::all(rank)) && self != Self::all(rank)
    }

    /// Parses `"{0,2}"`, `"0,2"`, `"0 2"` or `""` (empty set).
    pub fn parse(s: &str) -> Result<Self> {
        let inner = s.trim().trim_start_matches('{').trim_end_matches('}');
        let mut set = NodeSet::EMPTY;
        for tok in inner.split(|c: char| c == ',' || c == ';' || c.is_whitespace()) {
            if tok.is_empty() {
                continue;
            }
            let node: usize = tok
                .parse()
                .map_err(|_| Error::Validation(format!("bad node index '{tok}'")))?;
            if node >= 32 {
                return Err(Error::Validation(format!("node index {node} too large")));
            }
            set.insert(node);
        }
        Ok(set)
    }
}

impl FromIterator<usize> for NodeSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let mut s = NodeSet::EMPTY;
        for i in iter {
            s.insert(i);
        }
        s
    }
}

impl fmt::Display for NodeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let items: Vec<String> = self.iter().map(|i| i.to_string()).collect();
        write!(f, "{{{}}}", items.join(","))
    }
}

/// An irreducible root system with its extended simple system.
#[derive(Debug, Clone)]
pub struct RootSystem {
    pub family: Family,
    pub rank: usize,
    pub ambient_dim: usize,
    /// All roots, lexicographically ordered.
    pub roots: Vec<Vec<Q>>,
    /// Coefficients of each root in the simple roots.
    pub root_coeffs: Vec<Vec<i64>>,
    /// Indices into `roots` of the positive roots, in the same lexicographic order.
    pub positive: Vec<usize>,
    pub simple_roots: Vec<Vec<Q>>,
    pub lowest_root: Vec<Q>,
    /// Marks `m_1..m_r` of the highest root.
    pub marks: Vec<i64>,
    pub weyl_vector: Vec<Q>,
    /// `coweights[j-1]` pairs to 1 with `alpha_j` and to 0 with the other simple roots.
    pub coweights: Vec<Vec<Q>>,
    root_index: HashMap<Vec<Q>, usize>,
    positive_f64: Vec<Vec<f64>>,
    positive_coeffs_f64: Vec<Vec<f64>>,
}

fn unit(dim: usize, i: usize) -> Vec<Q> {
    let mut v = vec![Q::zero(); dim];
    v[i] = q(1);
    v
}

fn simple_roots_for(family: Family, rank: usize) -> (usize, Vec<Vec<Q>>) {
    let e = |dim: usize, i: usize| unit(dim, i);
    match family {
        Family::A => {
            let n = rank + 1;
            (n, (0..rank).map(|i| linalg::sub(&e(n, i), &e(n, i + 1))).collect())
        }
        Family::B | Family::C | Family::D => {
            let n = rank;
            let mut s: Vec<Vec<Q>> = (0..rank - 1).map(|i| linalg::sub(&e(n, i), &e(n, i + 1))).collect();
            s.push(match family {
                Family::B => e(n, n - 1),
                Family::C => linalg::scale(&e(n, n - 1), q(2)),
                _ => linalg::add(&e(n, n - 2), &e(n, n - 1)),
            });
            (n, s)
        }
        Family::G => {
            let a1 = vec![q(1), q(-1), q(0)];
            let a2 = vec![q(-2), q(1), q(1)];
            (3, vec![a1, a2])
        }
        Family::F => {
            let a1 = vec![q(0), q(1), q(-1), q(0)];
            let a2 = vec![q(0), q(0), q(1), q(-1)];
            let a3 = vec![q(0), q(0), q(0), q(1)];
            let a4 = vec![half(1), half(-1), half(-1), half(-1)];
            (4, vec![a1, a2, a3, a4])
        }
        Family::E => {
            let mut a1 = vec![half(-1); 8];
            a1[0] = half(1);
            a1[7] = half(1);
            let mut s = vec![a1, linalg::add(&e(8, 0), &e(8, 1))];
            for i in 0..6 {
                s.push(linalg::sub(&e(8, i + 1), &e(8, i)));
            }
            s.truncate(rank);
            (8, s)
        }
    }
}

/// Builds the root system of the given type.
pub fn build_root_system(family: Family, rank: usize) -> Result<RootSystem> {
    family.validate_rank(rank)?;
    let (ambient_dim, simple_roots) = simple_roots_for(family, rank);

    // Every root is W-conjugate to a simple root, so the orbit of the simple
    // roots under the simple reflections is all of Sigma.
    let mut seen: HashMap<Vec<Q>, ()> = HashMap::new();
    let mut queue: VecDeque<Vec<Q>> = VecDeque::new();
    for a in &simple_roots {
        if seen.insert(a.clone(), ()).is_none() {
            queue.push_back(a.clone());
        }
    }
    while let Some(beta) = queue.pop_front() {
        for a in &simple_roots {
            let img = linalg::reflect(&beta, a);
            if seen.insert(img.clone(), ()).is_none() {
                queue.push_back(img);
            }
        }
    }
    let mut roots: Vec<Vec<Q>> = seen.into_keys().collect();
    roots.sort();

    let g_inv = linalg::inverse(&linalg::gram(&simple_roots))
        .ok_or_else(|| Error::InternalConsistency("simple roots are linearly dependent".into()))?;
    let mut root_coeffs = Vec::with_capacity(roots.len());
    for beta in &roots {
        let rhs: Vec<Q> = simple_roots.iter().map(|a| linalg::dot(a, beta)).collect();
        let coeffs: Vec<i64> = g_inv
            .iter()
            .map(|row| {
                let c = linalg::dot(row, &rhs);
                if c.is_integer() {
                    Ok(c.to_integer())
                } else {
                    Err(Error::InternalConsistency(format!(
                        "non-integral simple-root coefficient {c}"
                    )))
                }
            })
            .collect::<Result<_>>()?;
        root_coeffs.push(coeffs);
    }

    let positive: Vec<usize> = (0..roots.len())
        .filter(|&i| root_coeffs[i].iter().all(|&c| c >= 0))
        .collect();
    let highest = *positive
        .iter()
        .max_by_key(|&&i| root_coeffs[i].iter().sum::<i64>())
        .expect("root system has positive roots");
    let marks = root_coeffs[highest].clone();
    let lowest_root = linalg::neg(&roots[highest]);

    let mut weyl_vector = vec![Q::zero(); ambient_dim];
    for &i in &positive {
        weyl_vector = linalg::add(&weyl_vector, &roots[i]);
    }
    let weyl_vector = linalg::scale(&weyl_vector, Q::new(1, 2));

    let coweights: Vec<Vec<Q>> = g_inv
        .iter()
        .map(|row| {
            let mut w = vec![Q::zero(); ambient_dim];
            for (c, a) in row.iter().zip(&simple_roots) {
                w = linalg::add(&w, &linalg::scale(a, *c));
            }
            w
        })
        .collect();

    let root_index = roots.iter().enumerate().map(|(i, r)| (r.clone(), i)).collect();
    let positive_f64 = positive.iter().map(|&i| linalg::vec_to_f64(&roots[i])).collect();
    let positive_coeffs_f64 = positive
        .iter()
        .map(|&i| root_coeffs[i].iter().map(|&c| c as f64).collect())
        .collect();

    Ok(RootSystem {
        family,
        rank,
        ambient_dim,
        roots,
        root_coeffs,
        positive,
        simple_roots,
        lowest_root,
        marks,
        weyl_vector,
        coweights,
        root_index,
        positive_f64,
        positive_coeffs_f64,
    })
}

impl RootSystem {
    pub fn num_positive(&self) -> usize {
        self.positive.len()
    }

    /// Dimension `d = r + |Sigma|` of the compact group.
    pub fn group_dim(&self) -> usize {
        self.rank + self.roots.len()
    }

    pub fn name(&self) -> String {
        format!("{}{}", self.family, self.rank)
    }

    pub fn all_nodes(&self) -> NodeSet {
        NodeSet::all(self.rank)
    }

    pub fn check_nodes(&self, nodes: NodeSet) -> Result<()> {
        match nodes.iter().find(|&n| n > self.rank) {
            Some(node) => Err(Error::InvalidNode { node, rank: self.rank }),
            None => Ok(()),
        }
    }

    pub fn check_proper(&self, nodes: NodeSet) -> Result<()> {
        self.check_nodes(nodes)?;
        if nodes == self.all_nodes() {
            return Err(Error::NotProperSubset(nodes.to_string()));
        }
        Ok(())
    }

    /// The root attached to extended node `j` (`alpha_0` is the lowest root).
    pub fn node_root(&self, j: usize) -> &[Q] {
        if j == 0 {
            &self.lowest_root
        } else {
            &self.simple_roots[j - 1]
        }
    }

    /// Simple-root coefficients of the root at extended node `j`.
    pub fn node_coeffs(&self, j: usize) -> Vec<i64> {
        if j == 0 {
            self.marks.iter().map(|m| -m).collect()
        } else {
            let mut v = vec![0; self.rank];
            v[j - 1] = 1;
            v
        }
    }

    /// Marks including `m_0 = 1`, indexed by extended node.
    pub fn extended_marks(&self) -> Vec<i64> {
        std::iter::once(1).chain(self.marks.iter().copied()).collect()
    }

    pub fn root_position(&self, v: &[Q]) -> Option<usize> {
        self.root_index.get(v).copied()
    }

    pub fn positive_roots(&self) -> impl Iterator<Item = &Vec<Q>> {
        self.positive.iter().map(|&i| &self.roots[i])
    }

    pub fn positive_f64(&self) -> &[Vec<f64>] {
        &self.positive_f64
    }

    pub fn positive_coeffs_f64(&self) -> &[Vec<f64>] {
        &self.positive_coeffs_f64
    }

    pub fn cartan_matrix(&self) -> Vec<Vec<i64>> {
        self.simple_roots
            .iter()
            .map(|ai| {
                self.simple_roots
                    .iter()
                    .map(|aj| {
                        let c = q(2) * linalg::dot(ai, aj) / linalg::dot(aj, aj);
                        c.to_integer()
                    })
                    .collect()
            })
            .collect()
    }

    /// Whether the root with index `i` lies in the integral span of the nodes in `nodes`.
    ///
    /// With simple-root coefficients `c` and marks `m`, the lattice spanned by
    /// `{alpha_j : j in J}` for a proper `J` is described by: if `0 not in J`,
    /// `c` vanishes off `J`; if `0 in J`, `c` equals `-lambda * m` off `J` for an
    /// integer `lambda`.
    pub fn root_in_span(&self, i: usize, nodes: NodeSet) -> bool {
        let c = &self.root_coeffs[i];
        let outside: Vec<usize> = (1..=self.rank).filter(|&j| !nodes.contains(j)).collect();
        if outside.is_empty() {
            return true;
        }
        if !nodes.contains(0) {
            return outside.iter().all(|&j| c[j - 1] == 0);
        }
        let j0 = outside[0];
        if c[j0 - 1] % self.marks[j0 - 1] != 0 {
            return false;
        }
        let lambda = c[j0 - 1] / self.marks[j0 - 1];
        outside.iter().all(|&j| c[j - 1] == lambda * self.marks[j - 1])
    }

    /// `Sigma_J`: the roots in the integral span of `{alpha_j : j in J}`.
    pub fn parabolic_subsystem(&self, nodes: NodeSet) -> Result<Subsystem> {
        self.check_proper(nodes)?;
        let roots: Vec<usize> = (0..self.roots.len()).filter(|&i| self.root_in_span(i, nodes)).collect();
        let basis: Vec<Vec<Q>> = nodes.iter().map(|j| self.node_root(j).to_vec()).collect();
        let mut positive = Vec::new();
        for &i in &roots {
            let coeffs = linalg::coordinates(&basis, &self.roots[i])
                .ok_or_else(|| Error::InternalConsistency(format!("root {i} not expressible in {nodes}")))?;
            if coeffs.iter().all(|c| !c.is_negative()) {
                positive.push(i);
            } else if coeffs.iter().any(|c| c.is_positive()) {
                return Err(Error::InternalConsistency(format!(
                    "root {i} has mixed-sign coefficients in {nodes}"
                )));
            }
        }
        Ok(Subsystem { nodes, roots, positive })
    }

    /// A positive system of `Sigma` containing the positive roots of `Sigma_K`.
    ///
    /// For `0 not in K` this is the standard positive system. Otherwise the roots
    /// are ordered lexicographically with respect to a basis `{alpha_j : j in I}`,
    /// where `I` is `K` padded to `r` nodes and the `K` nodes come first.
    pub fn positive_system_containing(&self, k: NodeSet) -> Result<Vec<usize>> {
        self.check_proper(k)?;
        if !k.contains(0) {
            return Ok(self.positive.clone());
        }
        let mut order: Vec<usize> = k.iter().collect();
        for j in 0..=self.rank {
            if order.len() == self.rank {
                break;
            }
            if !k.contains(j) {
                order.push(j);
            }
        }
        let basis: Vec<Vec<Q>> = order
            .iter()
            .map(|&j| self.node_coeffs(j).into_iter().map(q).collect())
            .collect();
        let mut chosen = Vec::with_capacity(self.positive.len());
        for (i, c) in self.root_coeffs.iter().enumerate() {
            let cq: Vec<Q> = c.iter().map(|&x| q(x)).collect();
            let coords = linalg::coordinates(&basis, &cq)
                .ok_or_else(|| Error::InternalConsistency("padded node set is not a basis".into()))?;
            let lead = coords.iter().find(|x| !x.is_zero());
            if lead.is_some_and(|x| x.is_positive()) {
                chosen.push(i);
            }
        }
        Ok(chosen)
    }

    /// Dual-basis point `h = sum_j t_j omega_j` from the coordinates `t_1..t_r`.
    pub fn point_from_simple_t(&self, t: &[f64]) -> Vec<f64> {
        let mut h = vec![0.0; self.ambient_dim];
        for (tj, w) in t.iter().zip(&self.coweights) {
            for (x, c) in h.iter_mut().zip(w) {
                *x += tj * linalg::to_f64(*c);
            }
        }
        h
    }

    pub fn to_serial(&self) -> RootSystemSerial {
        let fmt_vec = |v: &[Q]| v.iter().map(linalg::format_q).collect::<Vec<_>>();
        RootSystemSerial {
            family: self.family.letter().to_string(),
            rank: self.rank,
            ambient_dim: self.ambient_dim,
            group_dim: self.group_dim(),
            num_roots: self.roots.len(),
            num_positive_roots: self.num_positive(),
            marks: self.marks.clone(),
            cartan_matrix: self.cartan_matrix(),
            simple_roots: self.simple_roots.iter().map(|v| fmt_vec(v)).collect(),
            lowest_root: fmt_vec(&self.lowest_root),
            weyl_vector: fmt_vec(&self.weyl_vector),
            positive_roots: self.positive_roots().map(|v| fmt_vec(v)).collect(),
        }
    }

    /// Reflection `s_alpha` as an exact matrix acting on the ambient space.
    pub fn reflection_matrix(&self, alpha: &[Q]) -> Vec<Vec<Q>> {
        let n = self.ambient_dim;
        let norm = linalg::dot(alpha, alpha);
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let delta = if i == j { q(1) } else { Q::zero() };
                        delta - q(2) * alpha[i] * alpha[j] / norm
                    })
                    .collect()
            })
            .collect()
    }
}

/// Serializable summary; rationals are written as `"p/q"` strings.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RootSystemSerial {
    pub family: String,
    pub rank: usize,
    pub ambient_dim: usize,
    pub group_dim: usize,
    pub num_roots: usize,
    pub num_positive_roots: usize,
    pub marks: Vec<i64>,
    pub cartan_matrix: Vec<Vec<i64>>,
    pub simple_roots: Vec<Vec<String>>,
    pub lowest_root: Vec<String>,
    pub weyl_vector: Vec<String>,
    pub positive_roots: Vec<Vec<String>>,
}

/// A parabolic subsystem `Sigma_J` with its positive system for the simple system `{alpha_j : j in J}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subsystem {
    pub nodes: NodeSet,
    pub roots: Vec<usize>,
    pub positive: Vec<usize>,
}

impl Subsystem {
    pub fn num_positive(&self) -> usize {
        self.positive.len()
    }

    /// `rho_J`, half the sum of the positive roots of the subsystem.
    pub fn weyl_vector(&self, rs: &RootSystem) -> Vec<Q> {
        let mut v = vec![Q::zero(); rs.ambient_dim];
        for &i in &self.positive {
            v = linalg::add(&v, &rs.roots[i]);
        }
        linalg::scale(&v, Q::new(1, 2))
    }
}

/// `|Sigma_J^+|` and `Sigma_J` for every subset `J` of the extended nodes.
#[derive(Debug, Clone)]
pub struct SubsystemTable {
    pub rank: usize,
    counts: Vec<usize>,
    membership: Vec<Vec<usize>>,
}

impl SubsystemTable {
    pub fn new(rs: &RootSystem) -> Self {
        let size = 1usize << (rs.rank + 1);
        let full = rs.all_nodes();
        let mut counts = Vec::with_capacity(size);
        let mut membership = Vec::with_capacity(size);
        for mask in 0..size {
            let nodes = NodeSet(mask as u32);
            let members: Vec<usize> = if nodes == full {
                (0..rs.roots.len()).collect()
            } else {
                (0..rs.roots.len()).filter(|&i| rs.root_in_span(i, nodes)).collect()
            };
            counts.push(members.len() / 2);
            membership.push(members);
        }
        SubsystemTable {
            rank: rs.rank,
            counts,
            membership,
        }
    }

    /// `|Sigma_J^+|`; the full node set maps to `|Sigma^+|`.
    pub fn count(&self, nodes: NodeSet) -> usize {
        self.counts[nodes.0 as usize]
    }

    pub fn members(&self, nodes: NodeSet) -> &[usize] {
        &self.membership[nodes.0 as usize]
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }
}

/// An element of a finite reflection group together with its determinant.
#[derive(Debug, Clone, PartialEq)]
pub struct WeylElement {
    pub matrix: Vec<Vec<Q>>,
    pub det: i8,
}

#[derive(Debug, Clone)]
pub struct WeylGroup {
    pub elements: Vec<WeylElement>,
    dim: usize,
    matrices_f64: Vec<Vec<f64>>,
}

impl WeylGroup {
    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Applies element `idx` to a float vector.
    pub fn apply_f64(&self, idx: usize, v: &[f64]) -> Vec<f64> {
        let m = &self.matrices_f64[idx];
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| m[i * self.dim + j] * v[j]).sum())
            .collect()
    }

    pub fn apply(&self, idx: usize, v: &[Q]) -> Vec<Q> {
        self.elements[idx]
            .matrix
            .iter()
            .map(|row| linalg::dot(row, v))
            .collect()
    }
}

/// Closure of the reflections in `generators`, tracked through the orbit of a
/// vector that is regular for the generated group.
pub fn reflection_group(dim: usize, generators: &[Vec<Q>], regular: &[Q], cap: usize) -> Result<WeylGroup> {
    if cap == 0 {
        return Err(Error::Precondition("Weyl group cap must be positive".into()));
    }
    let identity: Vec<Vec<Q>> = (0..dim).map(|i| unit(dim, i)).collect();
    let mut elements = vec![WeylElement {
        matrix: identity,
        det: 1,
    }];
    let mut orbit: HashMap<Vec<Q>, usize> = HashMap::new();
    orbit.insert(regular.to_vec(), 0);
    let mut images = vec![regular.to_vec()];
    let mut head = 0;
    while head < elements.len() {
        for alpha in generators {
            let img = linalg::reflect(&images[head], alpha);
            if orbit.contains_key(&img) {
                continue;
            }
            if elements.len() >= cap {
                return Err(Error::WeylCapExceeded {
                    cap,
                    partial: elements.len() + 1,
                });
            }
            // s_alpha * M = M - (2 / (alpha, alpha)) alpha (alpha^T M)
            let m = &elements[head].matrix;
            let k = q(2) / linalg::dot(alpha, alpha);
            let row: Vec<Q> = (0..dim)
                .map(|j| (0..dim).fold(Q::zero(), |acc, i| acc + alpha[i] * m[i][j]))
                .collect();
            let matrix: Vec<Vec<Q>> = (0..dim)
                .map(|i| (0..dim).map(|j| m[i][j] - k * alpha[i] * row[j]).collect())
                .collect();
            let det = -elements[head].det;
            orbit.insert(img.clone(), elements.len());
            images.push(img);
            elements.push(WeylElement { matrix, det });
        }
        head += 1;
    }
    let matrices_f64 = elements
        .iter()
        .map(|e| e.matrix.iter().flatten().map(|&x| linalg::to_f64(x)).collect())
        .collect();
    Ok(WeylGroup {
        elements,
        dim,
        matrices_f64,
    })
}

/// The finite Weyl group generated by the simple reflections.
pub fn weyl_group(rs: &RootSystem, cap: usize) -> Result<WeylGroup> {
    reflection_group(rs.ambient_dim, &rs.simple_roots, &rs.weyl_vector, cap)
}

/// `W_J`, generated by the reflections in `alpha_j`, `j in J`.
pub fn subsystem_weyl_group(rs: &RootSystem, sub: &Subsystem, cap: usize) -> Result<WeylGroup> {
    let gens: Vec<Vec<Q>> = sub.nodes.iter().map(|j| rs.node_root(j).to_vec()).collect();
    reflection_group(rs.ambient_dim, &gens, &sub.weyl_vector(rs), cap)
}

/// Order of the Weyl group from the classification, without generating it.
pub fn weyl_order(family: Family, rank: usize) -> u128 {
    let fact = |n: usize| (1..=n as u128).product::<u128>();
    match family {
        Family::A => fact(rank + 1),
        Family::B | Family::C => (1u128 << rank) * fact(rank),
        Family::D => (1u128 << (rank - 1)) * fact(rank),
        Family::E => match rank {
            6 => 51_840,
            7 => 2_903_040,
            _ => 696_729_600,
        },
        Family::F => 1152,
        Family::G => 12,
    }
}
