//! One-dimensional quadrature building blocks.

use std::f64::consts::PI;

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss-Legendre order must be positive");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        let w = 2.0 / ((1.0 - x * x) * d * d);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// A Gauss rule mapped onto consecutive panels of fixed width covering an interval.
#[derive(Debug, Clone)]
pub struct PanelRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl PanelRule {
    pub fn new(order: usize) -> Self {
        let (nodes, weights) = gauss_legendre(order);
        PanelRule { nodes, weights }
    }

    /// Gauss rule composed with `x = 3v^2 - 2v^3` on each panel, so nodes cluster at both panel ends.
    ///
    /// Integrands with `|x - a|^s` behaviour at a panel end become `O(v^{2s+1})`.
    pub fn graded(order: usize) -> Self {
        let (u, w) = gauss_legendre(order);
        let (nodes, weights) = u
            .iter()
            .zip(&w)
            .map(|(&ui, &wi)| {
                let v = 0.5 * (ui + 1.0);
                let phi = v * v * (3.0 - 2.0 * v);
                (2.0 * phi - 1.0, wi * 6.0 * v * (1.0 - v))
            })
            .unzip();
        PanelRule { nodes, weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// Nodes and weights on `[a, b]` split into panels of width `width` starting at `a`.
    pub fn points(&self, a: f64, b: f64, width: f64) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        if b <= a {
            return out;
        }
        let panels = ((b - a) / width).ceil().max(1.0) as usize;
        for k in 0..panels {
            let lo = a + k as f64 * width;
            let hi = (lo + width).min(b);
            if hi <= lo {
                break;
            }
            let half = 0.5 * (hi - lo);
            let mid = 0.5 * (hi + lo);
            for (x, w) in self.nodes.iter().zip(&self.weights) {
                out.push((mid + half * x, half * w));
            }
        }
        out
    }

    /// Like [`PanelRule::points`], with the panels additionally split at `breaks`.
    pub fn points_split(&self, a: f64, b: f64, width: f64, breaks: &[f64]) -> Vec<(f64, f64)> {
        if b <= a {
            return Vec::new();
        }
        let panels = ((b - a) / width).ceil().max(1.0) as usize;
        let mut edges: Vec<f64> = (0..panels).map(|k| a + k as f64 * width).collect();
        edges.extend(breaks.iter().copied().filter(|&x| x > a && x < b));
        edges.push(b);
        edges.sort_by(f64::total_cmp);
        let min_len = 1e-12 * width;
        let mut out = Vec::with_capacity(edges.len() * self.order());
        for pair in edges.windows(2) {
            let (lo, hi) = (pair[0], pair[1]);
            if hi - lo <= min_len {
                continue;
            }
            let half = 0.5 * (hi - lo);
            let mid = 0.5 * (hi + lo);
            for (x, w) in self.nodes.iter().zip(&self.weights) {
                out.push((mid + half * x, half * w));
            }
        }
        out
    }

    /// Number of nodes `points` would produce.
    pub fn count(&self, a: f64, b: f64, width: f64) -> usize {
        if b <= a {
            0
        } else {
            ((b - a) / width).ceil().max(1.0) as usize * self.order()
        }
    }
}

/// Pairwise summation; the result does not depend on how the input was produced.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= 8 {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

const KRONROD_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const KRONROD_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];

// Gauss weights for the odd-indexed Kronrod nodes 1, 3, 5, 7.
const GAUSS_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// 15-point Kronrod estimate and its difference from the embedded 7-point Gauss rule.
fn gauss_kronrod(f: &mut impl FnMut(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let fc = f(mid);
    let mut kronrod = KRONROD_WEIGHTS[7] * fc;
    let mut gauss = GAUSS_WEIGHTS[3] * fc;
    for i in 0..7 {
        let dx = half * KRONROD_NODES[i];
        let s = f(mid - dx) + f(mid + dx);
        kronrod += KRONROD_WEIGHTS[i] * s;
        if i % 2 == 1 {
            gauss += GAUSS_WEIGHTS[i / 2] * s;
        }
    }
    (kronrod * half, (kronrod - gauss).abs() * half)
}

/// Adaptive Gauss-Kronrod integration by recursive bisection.
pub fn integrate_adaptive(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, rel_tol: f64) -> f64 {
    fn recurse(f: &mut impl FnMut(f64) -> f64, a: f64, b: f64, whole: (f64, f64), tol: f64, depth: u32) -> f64 {
        let (value, err) = whole;
        if err <= tol.max(1e-300) || depth == 0 {
            return value;
        }
        let mid = 0.5 * (a + b);
        let left = gauss_kronrod(f, a, mid);
        let right = gauss_kronrod(f, mid, b);
        recurse(f, a, mid, left, 0.5 * tol, depth - 1) + recurse(f, mid, b, right, 0.5 * tol, depth - 1)
    }
    if b <= a {
        return 0.0;
    }
    let whole = gauss_kronrod(&mut f, a, b);
    let tol = rel_tol * whole.0.abs();
    recurse(&mut f, a, b, whole, tol, 40)
}
