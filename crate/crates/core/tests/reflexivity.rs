mod common;

use common::{q, rational};
use proptest::prelude::*;
use rnpcert::norm::{l1_norm, summing_norm};
use rnpcert::reflexivity::{
    basic_constant_by_vertices, convex_hull_separation, forward_embedding_check, is_active, positive_decomposition,
    ReflexivityWitness,
};
use rnpcert::{Norm, Rational};

fn unit_vectors(m: usize) -> Vec<Vec<Rational>> {
    (0..m)
        .map(|i| (0..m).map(|j| Rational::int((i == j) as i64)).collect())
        .collect()
}

#[test]
fn hull_distances_of_unit_vectors() {
    // In ℓ₁ the two hulls have disjoint supports and unit mass, so 2. In ℓ∞
    // the best choice spreads each side evenly: max(1/k, 1/(m − k)).
    for m in 2..=6 {
        let pts = unit_vectors(m);
        for k in 1..m {
            let l1 = convex_hull_separation(&pts, k, &Norm::L1).unwrap();
            assert!((l1.distance - 2.0).abs() < 1e-6, "m = {m}, k = {k}: {}", l1.distance);
            let linf = convex_hull_separation(&pts, k, &Norm::Linf).unwrap();
            let expected = (1.0 / k as f64).max(1.0 / (m - k) as f64);
            assert!((linf.distance - expected).abs() < 1e-6, "m = {m}, k = {k}: {}", linf.distance);
        }
    }
}

#[test]
fn prefix_witness_forward_check_for_small_n() {
    for n in 2..=6 {
        let mut w = ReflexivityWitness::prefix_vectors(n);
        let b = basic_constant_by_vertices(&w.vectors).unwrap();
        assert_eq!(b, q(2, 1), "n = {n}");
        w.basic_constant = Some(b);
        let r = forward_embedding_check(&w, &q(2, 1), 500, n as u64, &[]).unwrap();
        assert!(r.pass, "n = {n}: {:?}", r.violations.first());
    }
}

proptest! {
    #[test]
    fn decomposition_parts_are_positive_and_disjoint(z in proptest::collection::vec(rational(), 1..12)) {
        let p = positive_decomposition(&z);
        prop_assert_eq!(p.identities(&z), [true; 4]);
        for ((x, y), zi) in p.positive.iter().zip(&p.negative).zip(&z) {
            prop_assert!(!x.is_negative() && !y.is_negative());
            prop_assert!(x.is_zero() || y.is_zero());
            prop_assert_eq!(&(x - y), zi);
        }
    }

    #[test]
    fn activity_is_monotone_in_delta(
        x in proptest::collection::vec(rational(), 1..8),
        y in proptest::collection::vec(rational(), 1..8),
        d in 1i64..8,
    ) {
        if is_active(&x, &y, &Rational::int(d)) {
            prop_assert!(is_active(&x, &y, &Rational::int(d + 1)));
        }
        // |z_i| is a difference of two prefix sums, so ‖z‖₁ ≤ 2n‖z‖_s.
        let n = x.len().max(y.len()) as i64;
        prop_assert!(is_active(&x, &y, &Rational::int(2 * n)));
    }

    #[test]
    fn same_sign_vectors_have_equal_l1_and_summing_norms(z in proptest::collection::vec(0i64..20, 1..10)) {
        let z: Vec<Rational> = z.into_iter().map(Rational::int).collect();
        prop_assert_eq!(l1_norm(&z), summing_norm(&z));
        prop_assert!(is_active(&z, &vec![Rational::zero(); z.len()], &Rational::one()));
    }
}
