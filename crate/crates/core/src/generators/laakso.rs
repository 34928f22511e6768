//! The second Laakso graphs `X_i`.
//!
//! `X_0` is one edge of length 1 from `u` to `v`. To build `X_{i+1}`, every
//! edge of `X_i` is trisected (the new vertices form the set `N_i`), and two
//! copies of the trisected graph are glued along `N_i`.
//!
//! Indexing is arithmetic so that points can be moved between levels without
//! touching the graphs:
//! * vertices of `X_i` keep their index in `X_{i+1}` (copy 0), the two
//!   trisection vertices of edge `e` get `V_i + 2e` and `V_i + 2e + 1`, and
//!   the copy-1 twin of vertex `x` gets `V_i + 2E_i + x`;
//! * edge `e` of `X_i` has children `6e + 2t + c` for third `t` and copy `c`.
//!
//! Every edge is stored with its endpoint nearer to `u` (in projection onto
//! `X_0 = [0, 1]`) first.

use std::sync::{Arc, RwLock};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{Edge, GraphMetric, GraphPoint, Metric, MetricGraph};
use crate::rational::Rational;

pub const U: usize = 0;
pub const V: usize = 1;

/// `(V_i, E_i)` for the second Laakso graph of level `i`, saturating on overflow.
pub fn laakso_counts(i: u32) -> (u128, u128) {
    let (mut v, mut e) = (2u128, 1u128);
    for _ in 0..i {
        let nv = v.saturating_mul(2).saturating_add(e.saturating_mul(2));
        e = e.saturating_mul(6);
        v = nv;
    }
    (v, e)
}

fn counts_usize(i: u32) -> (usize, usize) {
    let (v, e) = laakso_counts(i);
    (v as usize, e as usize)
}

/// Vertices glued at one construction step.
#[derive(Clone, Debug, Serialize)]
pub struct Pasting {
    /// The level created by this step.
    pub step: u32,
    /// Trisection vertices shared by both copies.
    pub pasted: Vec<String>,
    /// `(copy 0, copy 1)` ids of every vertex of the previous level.
    pub twins: Vec<(String, String)>,
}

pub struct LaaksoGraph {
    level: u32,
    metric: GraphMetric,
    /// Projection of each vertex onto `[0, 1]`.
    pos: Vec<Rational>,
    addresses: Vec<String>,
}

impl LaaksoGraph {
    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn graph(&self) -> &MetricGraph {
        self.metric.graph()
    }

    pub fn metric(&self) -> &GraphMetric {
        &self.metric
    }

    pub fn edge_len(&self) -> Rational {
        Rational::inv_pow(3, self.level)
    }

    pub fn edge_address(&self, e: usize) -> &str {
        &self.addresses[e]
    }

    pub fn vertex_pos(&self, x: usize) -> &Rational {
        &self.pos[x]
    }

    pub fn pos(&self, p: &GraphPoint) -> Rational {
        match p {
            GraphPoint::Vertex(x) => self.pos[*x].clone(),
            GraphPoint::Interior { edge, offset } => &self.pos[self.graph().edge(*edge).u] + offset,
        }
    }

    /// The set `N_{i-1}` and twin pairs of the step that produced this level.
    pub fn pasting(&self) -> Option<Pasting> {
        if self.level == 0 {
            return None;
        }
        let (pv, pe) = counts_usize(self.level - 1);
        let g = self.graph();
        Some(Pasting {
            step: self.level,
            pasted: (pv..pv + 2 * pe).map(|x| g.id(x).to_string()).collect(),
            twins: (0..pv)
                .map(|x| (g.id(x).to_string(), g.id(pv + 2 * pe + x).to_string()))
                .collect(),
        })
    }
}

fn build_next(prev: &LaaksoGraph, cap: u128) -> Result<LaaksoGraph> {
    let i = prev.level;
    let (nv, _) = laakso_counts(i + 1);
    if nv > cap {
        return Err(Error::Resource {
            what: format!("second Laakso graph X_{} vertices", i + 1),
            requested: nv,
            cap,
        });
    }
    let g = prev.graph();
    let (pv, pe) = (g.vertex_count(), g.edge_count());
    let third = Rational::inv_pow(3, i + 1);
    let mut ids: Vec<String> = g.ids().to_vec();
    let mut pos = prev.pos.clone();
    for (e, edge) in g.edges().iter().enumerate() {
        let addr = &prev.addresses[e];
        ids.push(format!("{addr}p"));
        ids.push(format!("{addr}q"));
        pos.push(&prev.pos[edge.u] + &third);
        pos.push(&prev.pos[edge.u] + &third + &third);
    }
    for x in 0..pv {
        ids.push(format!("{}'{}", g.id(x), i + 1));
        pos.push(prev.pos[x].clone());
    }
    let twin = |x: usize, c: usize| if c == 0 { x } else { pv + 2 * pe + x };
    let mut edges = Vec::with_capacity(6 * pe);
    let mut addresses = Vec::with_capacity(6 * pe);
    for (e, edge) in g.edges().iter().enumerate() {
        let (p, q) = (pv + 2 * e, pv + 2 * e + 1);
        for t in 0..3 {
            for c in 0..2 {
                let (a, b) = match t {
                    0 => (twin(edge.u, c), p),
                    1 => (p, q),
                    _ => (q, twin(edge.v, c)),
                };
                edges.push(Edge {
                    u: a,
                    v: b,
                    len: third.clone(),
                });
                addresses.push(format!("{}{t}{c}", prev.addresses[e]));
            }
        }
    }
    let graph = MetricGraph::new(ids, edges)?;
    Ok(LaaksoGraph {
        level: i + 1,
        metric: GraphMetric::new(Arc::new(graph)),
        pos,
        addresses,
    })
}

fn level_zero() -> LaaksoGraph {
    let graph = MetricGraph::new(
        vec!["u".into(), "v".into()],
        vec![Edge {
            u: U,
            v: V,
            len: Rational::one(),
        }],
    )
    .expect("single edge graph is valid");
    LaaksoGraph {
        level: 0,
        metric: GraphMetric::new(Arc::new(graph)),
        pos: vec![Rational::zero(), Rational::one()],
        addresses: vec![String::new()],
    }
}

/// `X_i` on its own, refusing when its vertex count exceeds `cap`.
pub fn laakso2(i: u32, cap: u128) -> Result<LaaksoGraph> {
    let (nv, _) = laakso_counts(i);
    if nv > cap {
        return Err(Error::Resource {
            what: format!("second Laakso graph X_{i} vertices"),
            requested: nv,
            cap,
        });
    }
    let mut g = level_zero();
    for _ in 0..i {
        g = build_next(&g, cap)?;
    }
    Ok(g)
}

/// All levels `X_0, X_1, …`, built on first use and shared between threads.
pub struct LaaksoFamily {
    cap: u128,
    levels: RwLock<Vec<Arc<LaaksoGraph>>>,
}

/// A point of some `X_j`, stored at the lowest level containing it.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct LaaksoPoint {
    pub level: u32,
    pub point: GraphPoint,
}

impl LaaksoPoint {
    pub fn vertex(level: u32, x: usize) -> Self {
        LaaksoPoint {
            level,
            point: GraphPoint::Vertex(x),
        }
        .canonical()
    }

    /// Moves the point down while it lies in the copy-0 image of a lower level.
    /// An interior point at a triadic offset is a vertex of some higher
    /// level and is first lifted to it, so every point has exactly one
    /// canonical form.
    pub fn canonical(self) -> Self {
        let LaaksoPoint { mut level, mut point } = self;
        while let GraphPoint::Interior { offset, .. } = &point {
            if !is_triadic(offset) {
                break;
            }
            point = lift_once(level, point);
            level += 1;
        }
        loop {
            if level == 0 {
                break;
            }
            let (pv, _) = counts_usize(level - 1);
            match &point {
                GraphPoint::Vertex(x) => {
                    if *x >= pv {
                        break;
                    }
                    level -= 1;
                }
                GraphPoint::Interior { edge, offset } => {
                    let (parent, t, c) = (edge / 6, (edge % 6) / 2, edge % 2);
                    if c != 0 {
                        break;
                    }
                    let offset = offset + Rational::inv_pow(3, level) * Rational::from(t as u64);
                    point = GraphPoint::Interior { edge: parent, offset };
                    level -= 1;
                }
            }
        }
        LaaksoPoint { level, point }
    }

    /// The same point at a level `to >= self.level`.
    pub fn at_level(&self, to: u32) -> GraphPoint {
        assert!(to >= self.level, "points can only be lifted upward");
        let mut point = self.point.clone();
        for l in self.level..to {
            point = lift_once(l, point);
        }
        point
    }
}

fn is_triadic(r: &Rational) -> bool {
    let three = num_bigint::BigInt::from(3u8);
    let mut d = r.denom().clone();
    while (&d % &three) == num_bigint::BigInt::from(0u8) {
        d /= &three;
    }
    d == num_bigint::BigInt::from(1u8)
}

fn lift_once(level: u32, p: GraphPoint) -> GraphPoint {
    match p {
        GraphPoint::Vertex(x) => GraphPoint::Vertex(x),
        GraphPoint::Interior { edge, offset } => {
            let (pv, _) = counts_usize(level);
            let third = Rational::inv_pow(3, level + 1);
            let ratio = &offset / &third;
            let t = ratio.floor();
            let t: usize = t.try_into().expect("offset is inside the edge");
            let rest = &offset - &third * Rational::from(t as u64);
            if rest.is_zero() {
                // t is 1 or 2: the trisection vertices p, q of this edge.
                GraphPoint::Vertex(pv + 2 * edge + (t - 1))
            } else {
                GraphPoint::Interior {
                    edge: 6 * edge + 2 * t,
                    offset: rest,
                }
            }
        }
    }
}

/// The copy-1 twin, created at step `level`, of a copy-0 point of `X_level`
/// that does not lie in the glued set.
pub fn twin_at(level: u32, p: &GraphPoint) -> Result<GraphPoint> {
    if level == 0 {
        return Err(Error::precondition("X_0 has no twins"));
    }
    let (pv, pe) = counts_usize(level - 1);
    match p {
        GraphPoint::Vertex(x) if *x < pv => Ok(GraphPoint::Vertex(pv + 2 * pe + x)),
        GraphPoint::Vertex(_) => Err(Error::precondition(format!(
            "vertex is glued or already a copy-1 vertex at step {level}"
        ))),
        GraphPoint::Interior { edge, offset } if edge % 2 == 0 => Ok(GraphPoint::Interior {
            edge: edge + 1,
            offset: offset.clone(),
        }),
        GraphPoint::Interior { .. } => Err(Error::precondition("point already lies on a copy-1 edge")),
    }
}

impl LaaksoFamily {
    pub fn new(cap: u128) -> Self {
        LaaksoFamily {
            cap,
            levels: RwLock::new(vec![Arc::new(level_zero())]),
        }
    }

    pub fn level(&self, i: u32) -> Result<Arc<LaaksoGraph>> {
        if let Some(g) = self.levels.read().expect("lock").get(i as usize) {
            return Ok(g.clone());
        }
        let mut levels = self.levels.write().expect("lock");
        while levels.len() <= i as usize {
            let next = build_next(levels.last().expect("level 0 present"), self.cap)?;
            levels.push(Arc::new(next));
        }
        Ok(levels[i as usize].clone())
    }

    pub fn pos(&self, p: &LaaksoPoint) -> Result<Rational> {
        Ok(self.level(p.level)?.pos(&p.point))
    }

    pub fn describe_point(&self, p: &LaaksoPoint) -> String {
        match self.level(p.level) {
            Ok(g) => format!("X{}:{}", p.level, g.graph().describe(&p.point)),
            Err(_) => format!("X{}:{}", p.level, p.point),
        }
    }

    pub fn try_distance(&self, a: &LaaksoPoint, b: &LaaksoPoint) -> Result<Rational> {
        let l = a.level.max(b.level);
        let g = self.level(l)?;
        Ok(g.metric().point_distance(&a.at_level(l), &b.at_level(l)))
    }
}

impl Metric for LaaksoFamily {
    type Point = LaaksoPoint;

    /// Panics if the level needed exceeds the family's vertex cap; use
    /// [`LaaksoFamily::try_distance`] to handle that case.
    fn distance(&self, a: &LaaksoPoint, b: &LaaksoPoint) -> Rational {
        self.try_distance(a, b).expect("level within the vertex cap")
    }

    fn describe(&self, p: &LaaksoPoint) -> String {
        self.describe_point(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_match_recurrence() {
        assert_eq!(laakso_counts(0), (2, 1));
        assert_eq!(laakso_counts(1), (6, 6));
        assert_eq!(laakso_counts(2), (24, 36));
        assert_eq!(laakso_counts(3), (120, 216));
    }

    #[test]
    fn x1_structure() {
        let x1 = laakso2(1, 100).unwrap();
        let g = x1.graph();
        assert_eq!(g.ids(), &["u", "v", "p", "q", "u'1", "v'1"]);
        assert_eq!(g.edge_count(), 6);
        // The middle thirds are parallel edges between p and q.
        assert_eq!((g.edge(2).u, g.edge(2).v), (2, 3));
        assert_eq!((g.edge(3).u, g.edge(3).v), (2, 3));
        assert_eq!(x1.metric().vertex_distance(U, V), Rational::one());
        assert_eq!(x1.metric().vertex_distance(U, 4), Rational::frac(2, 3));
        let p = x1.pasting().unwrap();
        assert_eq!(p.pasted, vec!["p", "q"]);
        assert_eq!(p.twins[0], ("u".to_string(), "u'1".to_string()));
    }

    #[test]
    fn twin_midpoints_are_one_edge_apart() {
        let x1 = laakso2(1, 100).unwrap();
        let mid = x1.graph().point(2, Rational::frac(1, 6)).unwrap();
        let tw = twin_at(1, &GraphPoint::Interior { edge: 2, offset: Rational::frac(1, 6) }).unwrap();
        assert_eq!(x1.metric().point_distance(&mid, &tw), Rational::frac(1, 3));
    }

    #[test]
    fn canonical_and_lift_round_trip() {
        let fam = LaaksoFamily::new(1_000_000);
        let x0_mid = LaaksoPoint {
            level: 0,
            point: GraphPoint::Interior { edge: 0, offset: Rational::frac(1, 6) },
        };
        let at2 = x0_mid.at_level(2);
        let back = LaaksoPoint { level: 2, point: at2 }.canonical();
        assert_eq!(back, x0_mid);
        let p = LaaksoPoint {
            level: 0,
            point: GraphPoint::Interior { edge: 0, offset: Rational::frac(1, 3) },
        };
        assert_eq!(p.at_level(1), GraphPoint::Vertex(2));
        assert_eq!(p.clone().canonical(), LaaksoPoint::vertex(1, 2));
        let ninth = LaaksoPoint {
            level: 0,
            point: GraphPoint::Interior { edge: 0, offset: Rational::frac(1, 9) },
        }
        .canonical();
        assert_eq!((ninth.level, ninth.point.clone()), (2, GraphPoint::Vertex(6)));
        assert_eq!(LaaksoPoint::vertex(3, 2), LaaksoPoint::vertex(1, 2));
        assert_eq!(fam.try_distance(&LaaksoPoint::vertex(0, U), &x0_mid).unwrap(), Rational::frac(1, 6));
    }

    #[test]
    fn resource_cap_applies() {
        assert!(matches!(laakso2(3, 100), Err(Error::Resource { requested: 120, .. })));
    }
}
