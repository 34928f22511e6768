mod common;

use std::sync::Arc;

use common::{positive_rational, q};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rnpcert::generators::diamond::{BOTTOM, TOP};
use rnpcert::generators::{diamond, DEFAULT_VERTEX_CAP};
use rnpcert::geodesics::{
    b_equivalence_ratio, diamond_thick_witness, is_c_geodesic, partition_from_lengths, partition_of, random_geodesic,
    refine_partition, verify_thick_witness, Partition,
};
use rnpcert::{GraphMetric, GraphPoint, Metric, MetricGraph, Rational};

/// A path `p0 - p1 - … - pn` with the given edge lengths.
fn path_graph(lengths: &[Rational]) -> GraphMetric {
    let ids: Vec<String> = (0..=lengths.len()).map(|i| format!("p{i}")).collect();
    let edges: Vec<(String, String, Rational)> = lengths
        .iter()
        .enumerate()
        .map(|(i, l)| (ids[i].clone(), ids[i + 1].clone(), l.clone()))
        .collect();
    GraphMetric::new(Arc::new(MetricGraph::from_id_edges(ids, &edges).unwrap()))
}

fn chain(keep: &[bool]) -> Vec<GraphPoint> {
    keep.iter()
        .enumerate()
        .filter(|(_, &k)| k)
        .map(|(i, _)| GraphPoint::Vertex(i))
        .collect()
}

#[test]
fn c_geodesic_across_the_quadrilateral() {
    let d = diamond(1, DEFAULT_VERTEX_CAP).unwrap();
    let m = d.metric();
    let (a, b) = (m.graph().vertex("a").unwrap(), m.graph().vertex("b").unwrap());
    let seq: Vec<GraphPoint> = [BOTTOM, a, b, TOP].into_iter().map(GraphPoint::Vertex).collect();
    // 1/2 + 1 + 1/2 against d(u, v) = 1.
    assert!(is_c_geodesic(m, &seq, &q(2, 1)).unwrap().holds);
    assert!(!is_c_geodesic(m, &seq, &q(3, 2)).unwrap().holds);
    let p = partition_of(m, &seq).unwrap();
    assert_eq!(p.breaks(), &[q(0, 1), q(1, 4), q(3, 4), q(1, 1)]);
}

#[test]
fn diamond_witnesses_for_random_pairs_on_a_geodesic() {
    let d = diamond(5, DEFAULT_VERTEX_CAP).unwrap();
    let m = d.metric();
    let (u, v) = (GraphPoint::Vertex(BOTTOM), GraphPoint::Vertex(TOP));
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..30 {
        let path = random_geodesic(m, BOTTOM, TOP, &mut rng).unwrap();
        // Vertices of the path at level ≤ 3 leave room for one refinement.
        let shallow: Vec<usize> = path.vertices.iter().copied().filter(|&x| d.vertex_level(x) <= 3).collect();
        for w in shallow.windows(2) {
            let wit = diamond_thick_witness(&d, w[0], w[1], 1).unwrap();
            let r = verify_thick_witness(m, &u, &v, &wit, &Rational::one());
            assert!(r.pass, "{:?}", r.failed());
            let width: Rational = wit.z.iter().zip(&wit.z_tilde).map(|(a, b)| m.distance(a, b)).sum();
            assert!(width >= m.vertex_distance(w[0], w[1]));
        }
    }
}

proptest! {
    #[test]
    fn partition_intervals_are_proportional_to_lengths(lengths in proptest::collection::vec(positive_rational(), 1..8)) {
        let p = partition_from_lengths(&lengths).unwrap();
        let total: Rational = lengths.iter().sum();
        prop_assert_eq!(p.interval_count(), lengths.len());
        for (i, l) in lengths.iter().enumerate() {
            prop_assert_eq!(p.length(i), l / &total);
        }
        prop_assert!(Partition::trivial().is_refined_by(&p));
    }

    #[test]
    fn iterated_refinement_on_a_path_is_direct(
        lengths in proptest::collection::vec(positive_rational(), 2..10),
        masks in proptest::collection::vec(proptest::collection::vec(any::<bool>(), 10), 1..5),
    ) {
        let m = path_graph(&lengths);
        let n = lengths.len() + 1;
        let mut keep: Vec<bool> = (0..n).map(|i| i == 0 || i + 1 == n).collect();
        let mut seq = chain(&keep);
        let mut iterated = partition_of(&m, &seq).unwrap();
        for mask in masks {
            for (k, add) in keep.iter_mut().zip(mask) {
                *k |= add;
            }
            let next = chain(&keep);
            iterated = refine_partition(&m, &iterated, &seq, &next).unwrap();
            let direct = partition_of(&m, &next).unwrap();
            prop_assert_eq!(b_equivalence_ratio(&iterated, &direct).unwrap(), Rational::one());
            prop_assert_eq!(&iterated, &direct);
            seq = next;
        }
    }

    #[test]
    fn b_ratio_is_symmetric_and_the_worst_interval(
        pairs in proptest::collection::vec((positive_rational(), positive_rational()), 1..8),
    ) {
        let (a, b): (Vec<Rational>, Vec<Rational>) = pairs.into_iter().unzip();
        let (p, r) = (partition_from_lengths(&a).unwrap(), partition_from_lengths(&b).unwrap());
        let forward = b_equivalence_ratio(&p, &r).unwrap();
        prop_assert_eq!(&forward, &b_equivalence_ratio(&r, &p).unwrap());
        let mut worst = Rational::one();
        for i in 0..p.interval_count() {
            for x in [p.length(i) / r.length(i), r.length(i) / p.length(i)] {
                if x > worst {
                    worst = x;
                }
            }
        }
        prop_assert_eq!(forward, worst);
    }
}
