use lierestrict::alcove::{
    alcove_volume, bss_cell_contains, classify_bss, classify_bss_t, default_c, facet_chart, sample_alcove,
    sharpness_region_contains, t_coords, AlcovePoint, BssLabel,
};
use lierestrict::linalg::{self, Q};
use lierestrict::rootsys::{build_root_system, Family, NodeSet, RootSystem, SubsystemTable};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn small_systems() -> Vec<RootSystem> {
    [
        (Family::A, 1),
        (Family::A, 2),
        (Family::A, 3),
        (Family::B, 3),
        (Family::C, 3),
        (Family::D, 4),
        (Family::G, 2),
        (Family::F, 4),
    ]
    .iter()
    .map(|&(f, r)| build_root_system(f, r).unwrap())
    .collect()
}

#[test]
fn bss_partition_of_random_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for rs in small_systems() {
        let c = default_c(&rs);
        let all = NodeSet::all(rs.rank);
        for &n in &[32.0f64, 256.0] {
            let n = n.max(1.0 / c + 1.0);
            for _ in 0..10_000 / 8 {
                let p = sample_alcove(&rs, &mut rng);
                let label = classify_bss(&rs, &p.h, n, c).unwrap();
                let BssLabel::Cell { k, j } = label else {
                    panic!("sampled point classified outside");
                };
                assert!(j.is_subset(k) && k != all);
                let mut hits = 0;
                for km in 0..all.0 {
                    let kk = NodeSet(km);
                    for jm in 0..=km {
                        let jj = NodeSet(jm);
                        if jj.is_subset(kk) && bss_cell_contains(&p.t, kk, jj, n, c) {
                            hits += 1;
                            assert_eq!((kk, jj), (k, j));
                        }
                    }
                }
                assert_eq!(hits, 1, "{}", rs.name());
            }
        }
    }
}

/// A point of the alcove with `t_j <= c` exactly on `k` and `t_j > c` elsewhere.
fn point_near_facet(rs: &RootSystem, k: NodeSet, c: f64, rng: &mut ChaCha8Rng) -> Option<Vec<f64>> {
    let em = rs.extended_marks();
    let mut t = vec![0.0; rs.rank + 1];
    let mut rest = 1.0;
    for j in k.iter() {
        t[j] = rng.gen::<f64>() * c;
        rest -= em[j] as f64 * t[j];
    }
    let others: Vec<usize> = k.complement(rs.rank).iter().collect();
    let w: Vec<f64> = others.iter().map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
    let s: f64 = w.iter().sum();
    for (&j, &wj) in others.iter().zip(&w) {
        t[j] = rest * wj / s / em[j] as f64;
        if t[j] <= c {
            return None;
        }
    }
    Some(t)
}

#[test]
fn roots_outside_sigma_k_stay_away_from_integers() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for rs in small_systems() {
        let c = default_c(&rs);
        let table = SubsystemTable::new(&rs);
        let all = NodeSet::all(rs.rank);
        for km in 0..all.0 {
            let k = NodeSet(km);
            let members = table.members(k);
            let mut tested = 0;
            while tested < 50 {
                let Some(t) = point_near_facet(&rs, k, c, &mut rng) else {
                    continue;
                };
                tested += 1;
                for (i, coeffs) in rs.root_coeffs.iter().enumerate() {
                    if members.contains(&i) {
                        continue;
                    }
                    let x: f64 = coeffs.iter().zip(&t[1..]).map(|(&a, &b)| a as f64 * b).sum();
                    let dist = (x - x.round()).abs();
                    assert!(dist >= c - 1e-12, "{} K={k} root {i}: {dist} < {c}", rs.name());
                }
            }
        }
    }
}

#[test]
fn alcove_volume_matches_vertex_formula() {
    for rs in small_systems() {
        let verts: Vec<Vec<Q>> = rs
            .coweights
            .iter()
            .zip(&rs.marks)
            .map(|(w, &m)| linalg::scale(w, Q::new(1, m)))
            .collect();
        let det = linalg::to_f64(linalg::determinant(&linalg::gram(&verts)));
        let fact: f64 = (1..=rs.rank).map(|i| i as f64).product();
        let expect = det.sqrt() / fact;
        assert!((alcove_volume(&rs) - expect).abs() < 1e-12 * expect, "{}", rs.name());
    }
}

#[test]
fn sharpness_region_measure_approaches_chain_measure() {
    let rs = build_root_system(Family::A, 3).unwrap();
    let perm = [0, 1, 2, 3];
    let nodes = NodeSet::single(3);
    let chart = facet_chart(&rs, nodes).unwrap();
    let c = 0.2;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let samples = 200_000;
    let mut prev_gap = f64::INFINITY;
    for &n in &[8.0f64, 32.0, 256.0] {
        let mut hits = 0;
        for _ in 0..samples {
            // uniform in the box [0, c]^2 containing the chain region
            let tf = [rng.gen::<f64>() * c, rng.gen::<f64>() * c];
            let h = chart.map(&tf);
            if sharpness_region_contains(&rs, nodes, &perm, c, n, &h).unwrap() {
                hits += 1;
            }
        }
        let measure = hits as f64 / samples as f64 * c * c;
        let limit = c * c / 2.0;
        let exact = (c - 1.0 / n).powi(2) / 2.0;
        assert!((measure - exact).abs() < 5e-4, "N={n}: {measure} vs {exact}");
        let gap = (limit - measure).abs();
        assert!(gap < prev_gap + 5e-4);
        prev_gap = gap;
    }
}

proptest! {
    #[test]
    fn chart_roundtrip(sys in 0usize..8, mask in 0u32..512, raw in prop::collection::vec(0.0f64..1.0, 8)) {
        let rs = &small_systems()[sys];
        let all = NodeSet::all(rs.rank);
        let nodes = NodeSet(mask & all.0);
        prop_assume!(nodes != all);
        let chart = facet_chart(rs, nodes).unwrap();
        // scale the raw draw into the parameter simplex
        let mut tf: Vec<f64> = raw[..chart.dim()].to_vec();
        let s: f64 = tf.iter().zip(&chart.free_marks).map(|(x, &m)| x * m as f64).sum::<f64>() + 0.1;
        for x in tf.iter_mut() {
            *x /= s;
        }
        let t = t_coords(rs, &chart.map(&tf));
        let expect = chart.t_full(&tf);
        for j in 0..=rs.rank {
            prop_assert!((t[j] - expect[j]).abs() < 1e-12);
            if nodes.contains(j) {
                prop_assert!(t[j].abs() < 1e-12);
            }
        }
        for (f, x) in chart.free.iter().zip(&tf) {
            prop_assert!((t[*f] - x).abs() < 1e-12);
        }
        prop_assert!(t[chart.dependent] >= -1e-12);
    }

    #[test]
    fn affine_relation_holds(sys in 0usize..8, seed in any::<u64>()) {
        let rs = &small_systems()[sys];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = sample_alcove(rs, &mut rng);
        prop_assert!(p.in_closed_alcove());
        let t = t_coords(rs, &p.h);
        for (a, b) in t.iter().zip(&p.t) {
            prop_assert!((a - b).abs() < 1e-12);
        }
        prop_assert!(AlcovePoint::from_t(rs, &p.t).is_ok());
        let c = default_c(rs);
        prop_assert!(classify_bss_t(rs, &p.t, 2.0 / c, c).is_ok());
    }
}
