//! Small exact-rational linear algebra used by the root-system constructions.

use num_rational::Rational64;
use num_traits::{One, Zero};

pub type Q = Rational64;

pub fn q(n: i64) -> Q {
    Q::from_integer(n)
}

pub fn half(n: i64) -> Q {
    Q::new(n, 2)
}

pub fn dot(a: &[Q], b: &[Q]) -> Q {
    a.iter().zip(b).fold(Q::zero(), |acc, (x, y)| acc + x * y)
}

pub fn add(a: &[Q], b: &[Q]) -> Vec<Q> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn sub(a: &[Q], b: &[Q]) -> Vec<Q> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn scale(a: &[Q], s: Q) -> Vec<Q> {
    a.iter().map(|x| x * s).collect()
}

pub fn neg(a: &[Q]) -> Vec<Q> {
    a.iter().map(|x| -x).collect()
}

pub fn to_f64(x: Q) -> f64 {
    *x.numer() as f64 / *x.denom() as f64
}

pub fn vec_to_f64(a: &[Q]) -> Vec<f64> {
    a.iter().map(|&x| to_f64(x)).collect()
}

/// Reflection of `v` in the hyperplane orthogonal to `alpha`.
pub fn reflect(v: &[Q], alpha: &[Q]) -> Vec<Q> {
    let k = dot(v, alpha) * q(2) / dot(alpha, alpha);
    v.iter().zip(alpha).map(|(x, a)| x - k * a).collect()
}

/// Inverse of a square matrix by Gauss-Jordan elimination; `None` if singular.
pub fn inverse(m: &[Vec<Q>]) -> Option<Vec<Vec<Q>>> {
    let n = m.len();
    let mut a: Vec<Vec<Q>> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { Q::one() } else { Q::zero() }));
            r
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, pivot);
        let p = a[col][col];
        for x in a[col].iter_mut() {
            *x /= p;
        }
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col];
                let pivot_row = a[col].clone();
                for (x, y) in a[r].iter_mut().zip(&pivot_row) {
                    *x -= f * y;
                }
            }
        }
    }
    Some(a.into_iter().map(|r| r[n..].to_vec()).collect())
}

pub fn determinant(m: &[Vec<Q>]) -> Q {
    let n = m.len();
    let mut a = m.to_vec();
    let mut det = Q::one();
    for col in 0..n {
        let Some(pivot) = (col..n).find(|&r| !a[r][col].is_zero()) else {
            return Q::zero();
        };
        if pivot != col {
            a.swap(col, pivot);
            det = -det;
        }
        let p = a[col][col];
        det *= p;
        for r in col + 1..n {
            let f = a[r][col] / p;
            if f.is_zero() {
                continue;
            }
            let pivot_row = a[col].clone();
            for (x, y) in a[r].iter_mut().zip(&pivot_row) {
                *x -= f * y;
            }
        }
    }
    det
}

pub fn gram(vectors: &[Vec<Q>]) -> Vec<Vec<Q>> {
    vectors
        .iter()
        .map(|a| vectors.iter().map(|b| dot(a, b)).collect())
        .collect()
}

/// Row-echelon basis of a subspace, for exact span-membership queries.
#[derive(Debug, Clone)]
pub struct SpanBasis {
    rows: Vec<(usize, Vec<Q>)>,
}

impl SpanBasis {
    pub fn new<'a>(vectors: impl IntoIterator<Item = &'a [Q]>) -> Self {
        let mut basis = SpanBasis { rows: Vec::new() };
        for v in vectors {
            basis.insert(v);
        }
        basis
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    fn reduce(&self, v: &[Q]) -> Vec<Q> {
        let mut w = v.to_vec();
        for (pivot, row) in &self.rows {
            if !w[*pivot].is_zero() {
                let f = w[*pivot];
                for (x, y) in w.iter_mut().zip(row) {
                    *x -= f * y;
                }
            }
        }
        w
    }

    /// Adds `v` to the basis; returns false if it was already in the span.
    pub fn insert(&mut self, v: &[Q]) -> bool {
        let w = self.reduce(v);
        let Some(pivot) = w.iter().position(|x| !x.is_zero()) else {
            return false;
        };
        let p = w[pivot];
        let w: Vec<Q> = w.iter().map(|x| x / p).collect();
        for (_, row) in self.rows.iter_mut() {
            if !row[pivot].is_zero() {
                let f = row[pivot];
                for (x, y) in row.iter_mut().zip(&w) {
                    *x -= f * y;
                }
            }
        }
        self.rows.push((pivot, w));
        true
    }

    pub fn contains(&self, v: &[Q]) -> bool {
        self.reduce(v).iter().all(|x| x.is_zero())
    }
}

/// Coefficients of `v` in a linearly independent family, if `v` lies in its span.
pub fn coordinates(basis: &[Vec<Q>], v: &[Q]) -> Option<Vec<Q>> {
    if basis.is_empty() {
        return v.iter().all(|x| x.is_zero()).then(Vec::new);
    }
    let g_inv = inverse(&gram(basis))?;
    let rhs: Vec<Q> = basis.iter().map(|b| dot(b, v)).collect();
    let coeffs: Vec<Q> = g_inv.iter().map(|row| dot(row, &rhs)).collect();
    let mut recon = vec![Q::zero(); v.len()];
    for (c, b) in coeffs.iter().zip(basis) {
        for (x, y) in recon.iter_mut().zip(b) {
            *x += c * y;
        }
    }
    (recon == v).then_some(coeffs)
}

/// Orthogonal projector onto the span of a linearly independent family.
pub fn projector(basis: &[Vec<Q>], dim: usize) -> Vec<Vec<Q>> {
    if basis.is_empty() {
        return vec![vec![Q::zero(); dim]; dim];
    }
    let g_inv = inverse(&gram(basis)).expect("projector basis must be independent");
    let mut p = vec![vec![Q::zero(); dim]; dim];
    for (i, bi) in basis.iter().enumerate() {
        for (j, bj) in basis.iter().enumerate() {
            let g = g_inv[i][j];
            if g.is_zero() {
                continue;
            }
            for a in 0..dim {
                if bi[a].is_zero() {
                    continue;
                }
                for b in 0..dim {
                    p[a][b] += g * bi[a] * bj[b];
                }
            }
        }
    }
    p
}

pub fn format_q(x: &Q) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

pub fn parse_q(s: &str) -> Option<Q> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let d: i64 = d.trim().parse().ok()?;
            let n: i64 = n.trim().parse().ok()?;
            (d != 0).then(|| Q::new(n, d))
        }
        None => s.parse().ok().map(Q::from_integer),
    }
}
