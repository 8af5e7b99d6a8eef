//! Reference tables shared by the integration test targets.

use lierestrict::Family;

/// Every system covered by the peeling tables.
pub fn systems() -> Vec<(Family, usize)> {
    let mut v = Vec::new();
    for r in 1..=8 {
        v.push((Family::A, r));
    }
    for r in 2..=8 {
        v.push((Family::B, r));
    }
    for r in 3..=8 {
        v.push((Family::C, r));
    }
    for r in 4..=8 {
        v.push((Family::D, r));
    }
    v.extend([
        (Family::E, 6),
        (Family::E, 7),
        (Family::E, 8),
        (Family::F, 4),
        (Family::G, 2),
    ]);
    v
}

/// Optimal peeling numbers `q_{0,0}, ..., q_{r,0}`.
pub fn optimal_q_table(f: Family, r: usize) -> Vec<usize> {
    let tail: Vec<usize> = match f {
        Family::A => (1..=r).rev().collect(),
        Family::B | Family::C => (1..=r).rev().map(|i| 2 * i - 1).collect(),
        Family::D => {
            let mut v: Vec<usize> = (4..=r).rev().map(|i| 2 * i - 2).collect();
            v.extend([3, 2, 1]);
            v
        }
        Family::E => [
            vec![16, 8, 6, 3, 2, 1],
            vec![27, 16, 8, 6, 3, 2, 1],
            vec![57, 27, 16, 8, 6, 3, 2, 1],
        ][r - 6]
            .clone(),
        Family::F => vec![15, 5, 3, 1],
        Family::G => vec![5, 1],
    };
    std::iter::once(0).chain(tail).collect()
}

/// `k / p_k` for `k = 1..=r`, with the `D_r` row reading `r(r-1) - 6, - 3, - 1, + 0` for its last four entries.
pub fn k_over_p_table(f: Family, r: usize) -> Vec<usize> {
    match f {
        Family::A => (1..=r).map(|k| k * r - (k - 1) * k / 2).collect(),
        Family::B | Family::C => (1..=r).map(|k| 2 * k * r - k * k).collect(),
        Family::D => {
            let mut v: Vec<usize> = (1..=r - 4).map(|k| 2 * k * r - k * (k + 1)).collect();
            let top = r * (r - 1);
            v.extend([top - 6, top - 3, top - 1, top]);
            v
        }
        Family::E => [
            vec![16, 24, 30, 33, 35, 36],
            vec![27, 43, 51, 57, 60, 62, 63],
            vec![57, 84, 100, 108, 114, 117, 119, 120],
        ][r - 6]
            .clone(),
        Family::F => vec![15, 20, 23, 24],
        Family::G => vec![5, 6],
    }
}
