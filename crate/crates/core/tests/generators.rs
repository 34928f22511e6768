mod common;

use common::floyd_warshall;
use proptest::prelude::*;
use rnpcert::generators::diamond::{BOTTOM, TOP};
use rnpcert::generators::laakso::{U, V};
use rnpcert::generators::{diamond, laakso2, DEFAULT_VERTEX_CAP};
use rnpcert::geodesics::enumerate_geodesics;
use rnpcert::{MetricGraph, Rational};

fn counts(g: &MetricGraph) -> (usize, usize) {
    (g.vertex_count(), g.edge_count())
}

#[test]
fn diamond_counts_follow_edge_substitution() {
    // Each edge turns into four and brings two new vertices.
    let (mut v, mut e) = (2, 1);
    for n in 0..=6 {
        assert_eq!(counts(diamond(n, DEFAULT_VERTEX_CAP).unwrap().graph()), (v, e), "D_{n}");
        (v, e) = (v + 2 * e, 4 * e);
    }
}

#[test]
fn laakso_counts_follow_trisect_and_paste() {
    // Trisection adds two vertices per edge and triples the edges. The two
    // copies share only the trisection points.
    let (mut v, mut e) = (2, 1);
    for i in 0..=4 {
        assert_eq!(counts(laakso2(i, DEFAULT_VERTEX_CAP).unwrap().graph()), (v, e), "X_{i}");
        (v, e) = (2 * v + 2 * e, 2 * 3 * e);
    }
}

#[test]
fn shortest_paths_agree_with_floyd_warshall() {
    let d3 = diamond(3, DEFAULT_VERTEX_CAP).unwrap();
    let x2 = laakso2(2, DEFAULT_VERTEX_CAP).unwrap();
    for m in [d3.metric(), x2.metric()] {
        let fw = floyd_warshall(m.graph());
        for (i, row) in fw.iter().enumerate() {
            for (j, d) in row.iter().enumerate() {
                assert_eq!(Some(m.vertex_distance(i, j)), *d, "{} {}", m.graph().id(i), m.graph().id(j));
            }
        }
    }
}

#[test]
fn diamond_geodesic_counts() {
    // A bottom-top geodesic of D_n picks a side of the top quadrilateral and
    // then a geodesic in each of the two halves: g_n = 2 g_{n-1}^2.
    let mut g = 1usize;
    for n in 0..=3 {
        let d = diamond(n, DEFAULT_VERTEX_CAP).unwrap();
        let all = enumerate_geodesics(d.metric(), BOTTOM, TOP, usize::MAX).unwrap();
        assert_eq!(all.len(), g, "D_{n}");
        g = 2 * g * g;
    }
}

#[test]
fn caps_are_enforced() {
    assert!(matches!(diamond(7, 100), Err(rnpcert::Error::Resource { .. })));
    assert!(matches!(laakso2(3, 100), Err(rnpcert::Error::Resource { .. })));
}

proptest! {
    #[test]
    fn every_diamond_vertex_is_on_a_bottom_top_geodesic(n in 1u32..=5, pick in any::<usize>()) {
        let d = diamond(n, DEFAULT_VERTEX_CAP).unwrap();
        let m = d.metric();
        let x = pick % m.graph().vertex_count();
        prop_assert_eq!(m.vertex_distance(BOTTOM, x) + m.vertex_distance(x, TOP), Rational::one());
    }

    #[test]
    fn laakso_projection_is_one_lipschitz(i in 0u32..=3, a in any::<usize>(), b in any::<usize>()) {
        let g = laakso2(i, DEFAULT_VERTEX_CAP).unwrap();
        let m = g.metric();
        let k = m.graph().vertex_count();
        let (a, b) = (a % k, b % k);
        prop_assert!(m.vertex_distance(a, b) >= (g.vertex_pos(a) - g.vertex_pos(b)).abs());
        prop_assert_eq!(m.vertex_distance(U, V), Rational::one());
    }

    #[test]
    fn diamond_distances_are_a_metric(n in 1u32..=4, a in any::<usize>(), b in any::<usize>(), c in any::<usize>()) {
        let d = diamond(n, DEFAULT_VERTEX_CAP).unwrap();
        let m = d.metric();
        let k = m.graph().vertex_count();
        let (a, b, c) = (a % k, b % k, c % k);
        prop_assert_eq!(m.vertex_distance(a, b), m.vertex_distance(b, a));
        prop_assert!(m.vertex_distance(a, c) <= m.vertex_distance(a, b) + m.vertex_distance(b, c));
        prop_assert_eq!(m.vertex_distance(a, b).is_zero(), a == b);
    }
}
