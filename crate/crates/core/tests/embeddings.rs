mod common;

use common::{floyd_warshall, positive_rational, q, vector};
use proptest::prelude::*;
use rnpcert::embeddings::{
    distortion, dyadic_l1_tree, in_tail, stegall_diamond_embedding, tail_indices, verify_delta_tree, Embedding,
    PairSelection,
};
use rnpcert::generators::{diamond, DEFAULT_VERTEX_CAP};
use rnpcert::{shortest_path_metric, Norm, Rational, Scalar};

/// Weighted ℓ₁ with every weight `2^-m`, written out by hand.
fn dyadic_weighted_l1(v: &[Rational], m: u32) -> Rational {
    v.iter().map(Rational::abs).sum::<Rational>() * Rational::inv_pow(2, m)
}

#[test]
fn stegall_constants_match_a_hand_scan() {
    for m in 1..=3 {
        let g = diamond(m, DEFAULT_VERTEX_CAP).unwrap();
        let e = stegall_diamond_embedding(&dyadic_l1_tree(m).unwrap(), &g).unwrap();
        let fw = floyd_warshall(g.graph());
        let ids = g.graph().ids();
        let (mut lo, mut hi): (Option<Rational>, Option<Rational>) = (None, None);
        for i in 0..ids.len() {
            for j in i + 1..ids.len() {
                let diff: Vec<Rational> = e
                    .image(&ids[i])
                    .unwrap()
                    .iter()
                    .zip(e.image(&ids[j]).unwrap())
                    .map(|(a, b)| a - b)
                    .collect();
                let r = dyadic_weighted_l1(&diff, m) / fw[i][j].clone().unwrap();
                lo = Some(lo.map_or(r.clone(), |l| if r < l { r.clone() } else { l }));
                hi = Some(hi.map_or(r.clone(), |h| if r > h { r.clone() } else { h }));
            }
        }
        let report = distortion(&e, &shortest_path_metric(g.graph()), PairSelection::All).unwrap();
        assert_eq!(report.lower, Scalar::Exact(lo.clone().unwrap()), "D_{m}");
        assert_eq!(report.upper, Scalar::Exact(hi.clone().unwrap()), "D_{m}");
        assert!(lo.unwrap() >= q(1, 2));
        assert_eq!(hi.unwrap(), Rational::one());
    }
}

proptest! {
    #[test]
    fn scaling_an_embedding_scales_its_constants(s in positive_rational()) {
        let g = diamond(2, DEFAULT_VERTEX_CAP).unwrap();
        let e = stegall_diamond_embedding(&dyadic_l1_tree(2).unwrap(), &g).unwrap();
        let space = shortest_path_metric(g.graph());
        let base = distortion(&e, &space, PairSelection::All).unwrap();
        let scaled = distortion(&e.scaled(&s), &space, PairSelection::All).unwrap();
        prop_assert_eq!(scaled.lower, base.lower.mul(&s));
        prop_assert_eq!(scaled.upper, base.upper.mul(&s));
        prop_assert_eq!(scaled.distortion, base.distortion);
    }

    #[test]
    fn translating_a_tree_keeps_it_a_tree(n in 1u32..=4, t in vector(16)) {
        let sys = dyadic_l1_tree(n).unwrap();
        let dim = sys.tree.dim();
        let moved = sys.tree.translated(&t[..dim]);
        let before = verify_delta_tree(sys.tree.vectors(), sys.tree.norm()).unwrap();
        let after = verify_delta_tree(moved.vectors(), moved.norm()).unwrap();
        prop_assert!(after.pass());
        prop_assert_eq!(after.delta, before.delta);
    }

    #[test]
    fn tails_are_the_dyadic_descendants(j in 1usize..40, max in 1usize..300) {
        let descends = |m: usize| {
            let mut m = m;
            while m > j {
                m /= 2;
            }
            m == j
        };
        let expected: Vec<usize> = (1..=max).filter(|&m| descends(m)).collect();
        prop_assert_eq!(tail_indices(j, max), expected.clone());
        for m in 1..=max {
            prop_assert_eq!(in_tail(j, m), expected.contains(&m));
        }
    }

    #[test]
    fn embeddings_survive_their_file_form(points in proptest::collection::vec(vector(3), 2..6)) {
        let ids: Vec<String> = (0..points.len()).map(|i| format!("x{i}")).collect();
        let e = Embedding::new(ids, points, Norm::Summing).unwrap();
        let back = Embedding::from_doc(e.to_doc()).unwrap();
        prop_assert_eq!(back.images(), e.images());
        prop_assert_eq!(back.ids(), e.ids());
    }
}
