use lierestrict::alcove::{sample_regular_alcove, AlcovePoint};
use lierestrict::character::{
    alternating_sum, char_mu, char_nrho, char_subsystem, decomposition_residual, delta_factors, subsystem_dimension,
    weyl_denominator, weyl_dimension, Regime, Weight, WeightOrbit,
};
use lierestrict::linalg::{self, Q};
use lierestrict::rootsys::{build_root_system, weyl_group, Family, NodeSet, RootSystem};
use num_complex::Complex64;
use num_traits::ToPrimitive;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Minimum distance of every root pairing from the integers for "regular" test points.
const REGULAR_MARGIN: f64 = 1e-2;

fn sys(f: Family, r: usize) -> RootSystem {
    build_root_system(f, r).unwrap()
}

fn coroot(a: &[Q]) -> Vec<f64> {
    let k = linalg::to_f64(Q::from_integer(2) / linalg::dot(a, a));
    a.iter().map(|&x| k * linalg::to_f64(x)).collect()
}

#[test]
fn denominator_equals_alternating_sum_of_rho() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for rs in [
        sys(Family::A, 2),
        sys(Family::B, 2),
        sys(Family::C, 3),
        sys(Family::G, 2),
    ] {
        let w = weyl_group(&rs, 1_000_000).unwrap();
        let orbit = WeightOrbit::new(&w, &rs.weyl_vector);
        for _ in 0..100 {
            let p = sample_regular_alcove(&rs, &mut rng, REGULAR_MARGIN);
            let prod = weyl_denominator(&rs, &p.h);
            let sum = alternating_sum(&orbit, &p.h);
            assert!(
                (prod - sum).norm() <= 1e-10 * prod.norm(),
                "{} {prod} {sum} {:?}",
                rs.name(),
                p.t
            );
        }
    }
    let a2 = sys(Family::A, 2);
    let bary = AlcovePoint::from_t(&a2, &[1.0 / 3.0; 3]).unwrap();
    let w = weyl_group(&a2, 100).unwrap();
    let sum = alternating_sum(&WeightOrbit::new(&w, &a2.weyl_vector), &bary.h);
    assert!((weyl_denominator(&a2, &bary.h) - sum).norm() < 1e-12);
}

#[test]
fn char_mu_agrees_with_nrho_product() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for rs in [sys(Family::A, 2), sys(Family::B, 2), sys(Family::G, 2)] {
        let w = weyl_group(&rs, 1000).unwrap();
        for n in [1i64, 2, 5, 9] {
            let mu = Weight::n_rho(&rs, n);
            for _ in 0..20 {
                let p = sample_regular_alcove(&rs, &mut rng, REGULAR_MARGIN);
                let a = char_mu(&rs, &w, &p.h, &mu).unwrap();
                let b = char_nrho(&rs, &p.h, n as u32);
                assert_eq!(a.regime, Regime::AlternatingSum);
                assert_eq!(b.regime, Regime::RegularRatio);
                let scale = b.value.norm().max(1.0);
                assert!((a.value - b.value).norm() <= 1e-9 * scale, "{} N={n}", rs.name());
            }
        }
    }
}

#[test]
fn characters_at_identity_give_dimensions() {
    for rs in [sys(Family::A, 2), sys(Family::B, 2), sys(Family::G, 2)] {
        let w = weyl_group(&rs, 1000).unwrap();
        let zero = vec![0.0; rs.ambient_dim];
        for n in [1i64, 3] {
            let mu = Weight::n_rho(&rs, n);
            let dim = weyl_dimension(&rs, &mu).value.to_f64().unwrap();
            assert_eq!(char_nrho(&rs, &zero, n as u32).value.re, dim);
            let v = char_mu(&rs, &w, &zero, &mu).unwrap();
            assert_eq!(v.regime, Regime::FacetLimit);
            assert!(
                (v.value.re - dim).abs() < 1e-9 * dim,
                "{} {} vs {dim}",
                rs.name(),
                v.value
            );
        }
        let mu = Weight::from_fundamental(&rs, &vec![2; rs.rank]).unwrap();
        let dim = weyl_dimension(&rs, &mu).value.to_f64().unwrap();
        let v = char_mu(&rs, &w, &zero, &mu).unwrap();
        assert!((v.value.re - dim).abs() < 1e-9 * dim);
    }
    let a1 = sys(Family::A, 1);
    for k in 0..6i64 {
        let mu = Weight::new(linalg::scale(&a1.simple_roots[0], Q::new(k + 1, 2)));
        assert_eq!(weyl_dimension(&a1, &mu).value.to_integer(), (k + 1).into());
    }
}

#[test]
fn characters_are_weyl_invariant_and_periodic() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for rs in [sys(Family::A, 2), sys(Family::G, 2)] {
        let w = weyl_group(&rs, 1000).unwrap();
        let mu = Weight::from_fundamental(&rs, &vec![3; rs.rank]).unwrap();
        for _ in 0..10 {
            let p = sample_regular_alcove(&rs, &mut rng, REGULAR_MARGIN);
            let base = char_mu(&rs, &w, &p.h, &mu).unwrap().value;
            for s in 0..w.order() {
                let sh = w.apply_f64(s, &p.h);
                let v = char_mu(&rs, &w, &sh, &mu).unwrap().value;
                assert!((v - base).norm() < 1e-9 * base.norm().max(1.0));
            }
            for a in &rs.simple_roots {
                let shifted: Vec<f64> = p.h.iter().zip(coroot(a)).map(|(x, c)| x + c).collect();
                let v = char_mu(&rs, &w, &shifted, &mu).unwrap().value;
                assert!((v - base).norm() < 1e-9 * base.norm().max(1.0));
                let n1 = char_nrho(&rs, &p.h, 7).value;
                let n2 = char_nrho(&rs, &shifted, 7).value;
                assert!((n1 - n2).norm() < 1e-9 * n1.norm().max(1.0));
            }
        }
    }
}

#[test]
fn delta_factor_examples() {
    let a2 = sys(Family::A, 2);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let p = sample_regular_alcove(&a2, &mut rng, REGULAR_MARGIN);
    let e = delta_factors(&a2, NodeSet::EMPTY, NodeSet::EMPTY, &p.h).unwrap();
    assert_eq!(e.upper, Complex64::new(1.0, 0.0));
    assert!((e.lower - weyl_denominator(&a2, &p.h)).norm() < 1e-14);
    let j = NodeSet::single(2);
    let f = delta_factors(&a2, j, j, &p.h).unwrap();
    assert_eq!(f.middle, Complex64::new(1.0, 0.0));
    assert!((f.upper * f.lower - weyl_denominator(&a2, &p.h)).norm() < 1e-14);
    assert!(delta_factors(&a2, NodeSet(0b011), NodeSet(0b001), &p.h).is_err());
}

#[test]
fn delta_factorization_for_all_node_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for rs in [sys(Family::B, 3), sys(Family::G, 2), sys(Family::C, 3)] {
        let all = NodeSet::all(rs.rank);
        let p = sample_regular_alcove(&rs, &mut rng, REGULAR_MARGIN);
        for km in 0..all.0 {
            for jm in 0..=km {
                let (j, k) = (NodeSet(jm), NodeSet(km));
                if !j.is_subset(k) {
                    continue;
                }
                let f = delta_factors(&rs, j, k, &p.h).unwrap();
                assert!((f.upper * f.lower - f.full).norm() < 1e-12 * f.full.norm());
                // the full product differs from the standard one at most by a sign
                let std = weyl_denominator(&rs, &p.h);
                assert!((f.full.norm() - std.norm()).abs() < 1e-12 * std.norm());
            }
        }
    }
}

#[test]
fn decomposition_examples() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let a2 = sys(Family::A, 2);
    let w = weyl_group(&a2, 1000).unwrap();
    let mu = Weight::n_rho(&a2, 3);
    let p = sample_regular_alcove(&a2, &mut rng, REGULAR_MARGIN);
    assert_eq!(
        decomposition_residual(&a2, &w, &p.h, &mu, NodeSet::EMPTY, 1000).unwrap(),
        0.0
    );
    assert!(decomposition_residual(&a2, &w, &p.h, &mu, NodeSet::single(1), 1000).unwrap() < 1e-9);
    let g2 = sys(Family::G, 2);
    let wg = weyl_group(&g2, 1000).unwrap();
    let p = sample_regular_alcove(&g2, &mut rng, REGULAR_MARGIN);
    let r = decomposition_residual(&g2, &wg, &p.h, &Weight::n_rho(&g2, 2), NodeSet::single(2), 1000).unwrap();
    assert!(r < 1e-9);
    assert!(decomposition_residual(&g2, &wg, &[0.0; 3], &Weight::n_rho(&g2, 2), NodeSet::single(2), 1000).is_err());
}

#[test]
fn subsystem_characters() {
    let b3 = sys(Family::B, 3);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let p = sample_regular_alcove(&b3, &mut rng, REGULAR_MARGIN);
    let one = char_subsystem(&b3, NodeSet::EMPTY, &p.h, &[Q::from_integer(0); 3], 100).unwrap();
    assert_eq!(one, Complex64::new(1.0, 0.0));
    for mask in [0b0001u32, 0b0011, 0b1010, 0b1101] {
        let j = NodeSet(mask);
        let rho_j = b3.parabolic_subsystem(j).unwrap().weyl_vector(&b3);
        let v = char_subsystem(&b3, j, &p.h, &rho_j, 1000).unwrap();
        assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-10, "{j}");
    }
}

#[test]
fn subsystem_character_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for rs in [sys(Family::A, 3), sys(Family::B, 3), sys(Family::G, 2)] {
        let w = weyl_group(&rs, 10_000).unwrap();
        let all = NodeSet::all(rs.rank);
        let mu = Weight::n_rho(&rs, 4);
        for jm in 1..all.0 {
            let j = NodeSet(jm);
            let proj = lierestrict::character::node_projector(&rs, j);
            for _ in 0..3 {
                let p = sample_regular_alcove(&rs, &mut rng, REGULAR_MARGIN);
                let s = rand::Rng::gen_range(&mut rng, 0..w.order());
                let s_mu = w.apply(s, &mu.mu);
                let gamma: Vec<Q> = proj.iter().map(|row| linalg::dot(row, &s_mu)).collect();
                let h_par: Vec<f64> = proj
                    .iter()
                    .map(|row| row.iter().zip(&p.h).map(|(a, b)| linalg::to_f64(*a) * b).sum())
                    .collect();
                let v = char_subsystem(&rs, j, &h_par, &gamma, 10_000).unwrap();
                let bound = subsystem_dimension(&rs, j, &gamma, 10_000).unwrap();
                assert!(
                    v.norm() <= bound * (1.0 + 1e-8) + 1e-8,
                    "{} {j}: {} > {bound}",
                    rs.name(),
                    v.norm()
                );
            }
        }
    }
}

#[test]
fn facet_approach_converges_to_limit_value() {
    let a2 = sys(Family::A, 2);
    let n = 6;
    let facet = AlcovePoint::from_t(&a2, &[0.55, 0.45, 0.0]).unwrap();
    let limit = char_nrho(&a2, &facet.h, n);
    assert_eq!(limit.regime, Regime::FacetLimit);
    let mut prev = f64::INFINITY;
    for eps in [1e-3, 1e-5] {
        let p = AlcovePoint::from_t(&a2, &[0.55 - eps, 0.45, eps]).unwrap();
        let v = char_nrho(&a2, &p.h, n);
        assert_eq!(v.regime, Regime::RegularRatio);
        let rel = (v.value.norm() - limit.value.norm()).abs() / limit.value.norm();
        assert!(rel < prev / 50.0);
        prev = rel;
    }
    assert!(prev < 1e-3);
}

proptest! {
    #[test]
    fn character_bounded_by_dimension(seed in any::<u64>(), n in 1u32..12) {
        let rs = sys(Family::B, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = sample_regular_alcove(&rs, &mut rng, REGULAR_MARGIN);
        let v = char_nrho(&rs, &p.h, n);
        prop_assert!(v.value.norm() <= (n as f64).powi(4) * (1.0 + 1e-9));
    }

    #[test]
    fn decomposition_holds_for_every_node_set(seed in any::<u64>(), mask in 1u32..7) {
        let rs = sys(Family::G, 2);
        let w = weyl_group(&rs, 100).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = sample_regular_alcove(&rs, &mut rng, REGULAR_MARGIN);
        let r = decomposition_residual(&rs, &w, &p.h, &Weight::n_rho(&rs, 3), NodeSet(mask), 100).unwrap();
        prop_assert!(r < 1e-9);
    }
}
