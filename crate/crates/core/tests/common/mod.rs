#![allow(dead_code)]

use proptest::prelude::*;
use rnpcert::{MetricGraph, Rational};

pub fn q(a: i64, b: i64) -> Rational {
    Rational::frac(a, b)
}

/// All-pairs distances by Floyd–Warshall, independent of the library's
/// shortest-path code.
pub fn floyd_warshall(g: &MetricGraph) -> Vec<Vec<Option<Rational>>> {
    let n = g.vertex_count();
    let mut d: Vec<Vec<Option<Rational>>> = vec![vec![None; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = Some(Rational::zero());
    }
    for e in g.edges() {
        for (a, b) in [(e.u, e.v), (e.v, e.u)] {
            if d[a][b].as_ref().is_none_or(|x| e.len < *x) {
                d[a][b] = Some(e.len.clone());
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            let Some(ik) = d[i][k].clone() else { continue };
            for j in 0..n {
                if let Some(kj) = &d[k][j] {
                    let via = &ik + kj;
                    if d[i][j].as_ref().is_none_or(|x| via < *x) {
                        d[i][j] = Some(via);
                    }
                }
            }
        }
    }
    d
}

pub fn rational() -> impl Strategy<Value = Rational> {
    (-30i64..=30, 1i64..=8).prop_map(|(a, b)| q(a, b))
}

pub fn positive_rational() -> impl Strategy<Value = Rational> {
    (1i64..=30, 1i64..=8).prop_map(|(a, b)| q(a, b))
}

pub fn vector(dim: usize) -> impl Strategy<Value = Vec<Rational>> {
    proptest::collection::vec(rational(), dim)
}
