//! Peeling sequences of extended Dynkin diagrams and the critical exponents they define.

use num_rational::Rational64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rootsys::{NodeSet, RootSystem, SubsystemTable};

/// A deletion order `(j_0, ..., j_r)` of the extended nodes with its peeling numbers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PeelingProfile {
    pub perm: Vec<usize>,
    pub n: Vec<usize>,
    pub q: Vec<usize>,
}

fn check_perm(rank: usize, perm: &[usize]) -> Result<()> {
    if perm.len() != rank + 1 {
        return Err(Error::MalformedPermutation(format!(
            "expected {} entries, got {}",
            rank + 1,
            perm.len()
        )));
    }
    let mut seen = NodeSet::EMPTY;
    for &j in perm {
        if j > rank {
            return Err(Error::MalformedPermutation(format!("node {j} out of range 0..={rank}")));
        }
        if seen.contains(j) {
            return Err(Error::MalformedPermutation(format!("node {j} repeated")));
        }
        seen.insert(j);
    }
    Ok(())
}

/// Writes `n_i = |Sigma^+| - |Sigma^+_{I_i}|` with `I_i = {j_{i+1}, ..., j_r}` into `out`.
fn fill_n(table: &SubsystemTable, total: usize, perm: &[usize], out: &mut [usize]) {
    let mut suffix = NodeSet::EMPTY;
    for i in (0..perm.len()).rev() {
        out[i] = total - table.count(suffix);
        suffix.insert(perm[i]);
    }
}

fn q_from_n(n: &[usize]) -> Vec<usize> {
    let mut prev = 0;
    n.iter()
        .map(|&x| {
            let d = x - prev;
            prev = x;
            d
        })
        .collect()
}

pub fn peeling_profile(rs: &RootSystem, table: &SubsystemTable, perm: &[usize]) -> Result<PeelingProfile> {
    check_perm(rs.rank, perm)?;
    let mut n = vec![0; perm.len()];
    fill_n(table, rs.num_positive(), perm, &mut n);
    for w in n.windows(2) {
        if w[1] < w[0] {
            return Err(Error::InternalConsistency(format!(
                "peeling numbers decrease along {perm:?}"
            )));
        }
    }
    let q = q_from_n(&n);
    Ok(PeelingProfile {
        perm: perm.to_vec(),
        n,
        q,
    })
}

/// Advances `p` to the next permutation in lexicographic order.
pub fn next_permutation(p: &mut [usize]) -> bool {
    if p.len() < 2 {
        return false;
    }
    let mut i = p.len() - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = p.len() - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// Calls `f(perm, n)` for every permutation of the extended nodes in lexicographic order.
fn for_each_permutation(rs: &RootSystem, table: &SubsystemTable, mut f: impl FnMut(&[usize], &[usize])) {
    let mut perm: Vec<usize> = (0..=rs.rank).collect();
    let mut n = vec![0; perm.len()];
    let total = rs.num_positive();
    loop {
        fill_n(table, total, &perm, &mut n);
        f(&perm, &n);
        if !next_permutation(&mut perm) {
            break;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OptimalPeeling {
    pub perm: Vec<usize>,
    pub n: Vec<usize>,
    pub q: Vec<usize>,
    pub permutations_checked: usize,
    /// Number of permutations whose peeling numbers coincide with the optimum.
    pub optimal_count: usize,
}

/// Exhaustive search for the permutation with coordinatewise minimal peeling numbers.
///
/// Ties are broken by taking the lexicographically smallest permutation.
pub fn optimal_peeling(rs: &RootSystem, table: &SubsystemTable) -> Result<OptimalPeeling> {
    let len = rs.rank + 1;
    let mut min_n = vec![usize::MAX; len];
    let mut checked = 0;
    for_each_permutation(rs, table, |_, n| {
        checked += 1;
        for (m, &x) in min_n.iter_mut().zip(n) {
            *m = (*m).min(x);
        }
    });
    let mut best: Option<Vec<usize>> = None;
    let mut optimal_count = 0;
    for_each_permutation(rs, table, |perm, n| {
        if n == min_n.as_slice() {
            optimal_count += 1;
            if best.is_none() {
                best = Some(perm.to_vec());
            }
        }
    });
    let perm = best.ok_or_else(|| {
        Error::InternalConsistency(format!(
            "no permutation of the {} extended nodes attains the coordinatewise minimum {min_n:?}",
            rs.name()
        ))
    })?;
    let q = q_from_n(&min_n);
    Ok(OptimalPeeling {
        perm,
        n: min_n,
        q,
        permutations_checked: checked,
        optimal_count,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InequalityReport {
    pub permutations_checked: usize,
    /// Whether `n_i(perm_0) <= n_i(perm)` held for every permutation, per index `i`.
    pub pass: Vec<bool>,
    /// Number of permutations attaining equality at each index.
    pub equality_counts: Vec<usize>,
}

impl InequalityReport {
    pub fn passed(&self) -> bool {
        self.pass.iter().all(|&b| b)
    }
}

pub fn verify_peeling_inequality(rs: &RootSystem, table: &SubsystemTable, perm0: &[usize]) -> Result<InequalityReport> {
    let base = peeling_profile(rs, table, perm0)?;
    let len = rs.rank + 1;
    let mut pass = vec![true; len];
    let mut equality_counts = vec![0; len];
    let mut checked = 0;
    for_each_permutation(rs, table, |_, n| {
        checked += 1;
        for i in 0..len {
            if base.n[i] > n[i] {
                pass[i] = false;
            }
            if base.n[i] == n[i] {
                equality_counts[i] += 1;
            }
        }
    });
    Ok(InequalityReport {
        permutations_checked: checked,
        pass,
        equality_counts,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CriticalExponents {
    /// `k / p_k` for `k = 0..=r`.
    pub k_over_p: Vec<usize>,
    /// `p_k` for `k = 0..=r`, with `p_0 = 0`.
    #[serde(serialize_with = "serialize_rationals")]
    pub p: Vec<Rational64>,
}

fn serialize_rationals<S: serde::Serializer>(v: &[Rational64], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for x in v {
        seq.serialize_element(&crate::linalg::format_q(x))?;
    }
    seq.end()
}

impl CriticalExponents {
    pub fn from_q(q0: &[usize]) -> Self {
        let mut k_over_p = vec![0];
        let mut p = vec![Rational64::from_integer(0)];
        let mut acc = 0;
        for (k, &qk) in q0.iter().enumerate().skip(1) {
            acc += qk;
            k_over_p.push(acc);
            p.push(Rational64::new(k as i64, acc as i64));
        }
        CriticalExponents { k_over_p, p }
    }

    pub fn p_f64(&self, k: usize) -> f64 {
        crate::linalg::to_f64(self.p[k])
    }
}

pub fn critical_exponents(rs: &RootSystem) -> Result<CriticalExponents> {
    let table = SubsystemTable::new(rs);
    let opt = optimal_peeling(rs, &table)?;
    let ce = CriticalExponents::from_q(&opt.q);
    let r = rs.rank as i64;
    let d = rs.group_dim() as i64;
    if ce.p[rs.rank] != Rational64::new(2 * r, d - r) {
        return Err(Error::InternalConsistency(format!(
            "p_r = {} differs from 2r/(d-r)",
            ce.p[rs.rank]
        )));
    }
    Ok(ce)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Complexity {
    #[serde(rename = "LE")]
    Le,
    #[serde(rename = "GE")]
    Ge,
    #[serde(rename = "EQUIV")]
    Equiv,
    #[serde(rename = "INCOMPARABLE")]
    Incomparable,
}

/// Compares partial sums of the reversed optimal q-sequences over the common length.
pub fn compare_q_sequences(q1: &[usize], q2: &[usize]) -> Complexity {
    let len = (q1.len() - 1).min(q2.len() - 1);
    let (mut s1, mut s2) = (0, 0);
    let (mut le, mut ge) = (true, true);
    for (a, b) in q1.iter().rev().zip(q2.iter().rev()).take(len) {
        s1 += a;
        s2 += b;
        le &= s1 <= s2;
        ge &= s1 >= s2;
    }
    match (le, ge) {
        (true, true) => Complexity::Equiv,
        (true, false) => Complexity::Le,
        (false, true) => Complexity::Ge,
        (false, false) => Complexity::Incomparable,
    }
}

pub fn complexity_compare(rs1: &RootSystem, rs2: &RootSystem) -> Result<Complexity> {
    let q1 = optimal_peeling(rs1, &SubsystemTable::new(rs1))?.q;
    let q2 = optimal_peeling(rs2, &SubsystemTable::new(rs2))?.q;
    Ok(compare_q_sequences(&q1, &q2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rootsys::{build_root_system, Family};

    #[test]
    fn next_permutation_counts() {
        let mut p = vec![0, 1, 2, 3];
        let mut n = 1;
        while next_permutation(&mut p) {
            n += 1;
        }
        assert_eq!(n, 24);
        assert_eq!(p, vec![3, 2, 1, 0]);
    }

    #[test]
    fn malformed_permutations() {
        let rs = build_root_system(Family::A, 2).unwrap();
        let t = SubsystemTable::new(&rs);
        for bad in [vec![0, 1], vec![0, 1, 1], vec![0, 1, 3]] {
            assert!(matches!(
                peeling_profile(&rs, &t, &bad),
                Err(Error::MalformedPermutation(_))
            ));
        }
    }

    #[test]
    fn small_profiles() {
        let a1 = build_root_system(Family::A, 1).unwrap();
        let t = SubsystemTable::new(&a1);
        assert_eq!(peeling_profile(&a1, &t, &[0, 1]).unwrap().q, vec![0, 1]);
        let g2 = build_root_system(Family::G, 2).unwrap();
        let t = SubsystemTable::new(&g2);
        assert_eq!(peeling_profile(&g2, &t, &[0, 1, 2]).unwrap().q, vec![0, 5, 1]);
    }

    #[test]
    fn comparisons() {
        assert_eq!(compare_q_sequences(&[0, 3, 2, 1], &[0, 5, 3, 1]), Complexity::Le);
        assert_eq!(compare_q_sequences(&[0, 5, 3, 1], &[0, 5, 3, 1]), Complexity::Equiv);
        assert_eq!(compare_q_sequences(&[0, 5, 3, 1], &[0, 3, 2, 1]), Complexity::Ge);
    }
}
