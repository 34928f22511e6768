//! Stock witness builders for the diamond and second Laakso families.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::generators::diamond::{DiamondGraph, BOTTOM, TOP};
use crate::generators::laakso::{self, twin_at, LaaksoFamily, LaaksoPoint};
use crate::geodesics::{enumerate_geodesics, ThickWitness};
use crate::graph::{GraphPoint, Metric};
use crate::rational::Rational;

/// Supplies fork witnesses for pairs of points on geodesics joining two
/// fixed endpoints.
pub trait ThickOracle {
    type Space: Metric;

    fn space(&self) -> &Self::Space;

    /// The endpoints `u`, `v` of the geodesic family.
    fn endpoints(&self) -> (<Self::Space as Metric>::Point, <Self::Space as Metric>::Point);

    /// The width constant every witness achieves.
    fn constant(&self) -> Rational;

    fn witness(
        &self,
        u0: &<Self::Space as Metric>::Point,
        v0: &<Self::Space as Metric>::Point,
    ) -> Result<ThickWitness<<Self::Space as Metric>::Point>>;
}

fn reverse_witness<P: Clone>(mut w: ThickWitness<P>) -> ThickWitness<P> {
    std::mem::swap(&mut w.u0, &mut w.v0);
    w.w.reverse();
    w.z.reverse();
    w.z_tilde.reverse();
    w
}

/// Witness in `D_N` for two vertices on a common bottom-top geodesic.
///
/// The `w` points are the vertices of the first monotone path of level
/// `n = max(level(u0), level(v0)) + refine` between them, and each edge of
/// that path contributes the two side corners of its quadrilateral in
/// `D_{n+1}`. Needs `n < N`.
pub fn diamond_thick_witness(d: &DiamondGraph, u0: usize, v0: usize, refine: u32) -> Result<ThickWitness<GraphPoint>> {
    let count = d.graph().vertex_count();
    if u0 >= count || v0 >= count {
        return Err(Error::InvalidPoint("vertex index out of range".into()));
    }
    if u0 == v0 {
        return Err(Error::precondition("fork witness needs u0 != v0"));
    }
    let full = d.d(BOTTOM, TOP);
    let (lo, hi, swapped) = if d.d(BOTTOM, u0) + d.d(u0, v0) + d.d(v0, TOP) == full {
        (u0, v0, false)
    } else if d.d(BOTTOM, v0) + d.d(v0, u0) + d.d(u0, TOP) == full {
        (v0, u0, true)
    } else {
        return Err(Error::NotOnGeodesic(format!(
            "{} and {}",
            d.graph().id(u0),
            d.graph().id(v0)
        )));
    };
    let n = d.vertex_level(u0).max(d.vertex_level(v0)) + refine;
    if n >= d.level() {
        return Err(Error::precondition(format!(
            "witness at level {n} needs quadrilaterals of D_{}, graph is D_{}",
            n + 1,
            d.level()
        )));
    }
    let path = d
        .monotone_path(n, lo, hi)
        .ok_or_else(|| Error::NotOnGeodesic(format!("no level-{n} path from {} to {}", d.graph().id(lo), d.graph().id(hi))))?;
    let mut w = vec![GraphPoint::Vertex(lo)];
    let (mut z, mut zt) = (Vec::new(), Vec::new());
    for e in path {
        let node = d.node(e);
        let quad = d.quads()[node.quad.expect("edge below the top level is replaced")];
        w.push(GraphPoint::Vertex(node.upper));
        z.push(GraphPoint::Vertex(quad.a));
        zt.push(GraphPoint::Vertex(quad.b));
    }
    let witness = ThickWitness {
        u0: GraphPoint::Vertex(lo),
        v0: GraphPoint::Vertex(hi),
        w,
        z,
        z_tilde: zt,
    };
    Ok(if swapped { reverse_witness(witness) } else { witness })
}

/// Diamond witnesses with width constant 1.
pub struct DiamondOracle<'a> {
    pub graph: &'a DiamondGraph,
    pub refine: u32,
}

impl ThickOracle for DiamondOracle<'_> {
    type Space = crate::graph::GraphMetric;

    fn space(&self) -> &Self::Space {
        self.graph.metric()
    }

    fn endpoints(&self) -> (GraphPoint, GraphPoint) {
        (GraphPoint::Vertex(BOTTOM), GraphPoint::Vertex(TOP))
    }

    fn constant(&self) -> Rational {
        Rational::one()
    }

    fn witness(&self, u0: &GraphPoint, v0: &GraphPoint) -> Result<ThickWitness<GraphPoint>> {
        match (u0, v0) {
            (GraphPoint::Vertex(a), GraphPoint::Vertex(b)) => diamond_thick_witness(self.graph, *a, *b, self.refine),
            _ => Err(Error::precondition("diamond witnesses join vertices only")),
        }
    }
}

/// The fork witness built by repeated trisection, with the data that
/// produced it.
#[derive(Clone, Debug, Serialize)]
pub struct LaaksoWitness {
    pub witness: ThickWitness<LaaksoPoint>,
    /// Lowest level containing both endpoints.
    pub start_level: u32,
    /// Level at which the `z~` twins exist.
    pub twin_level: u32,
    pub trisections: u32,
    /// Projections of the trisection points `a_0, …, a_n` onto `[0, 1]`.
    pub a_positions: Vec<Rational>,
    /// `d(a_0, a_n)`, which equals the sum of twin distances.
    pub span: Rational,
    pub threshold: Rational,
}

/// A stretch of one edge of `X_j`, between two projections.
struct Segment {
    edge: usize,
    lower: Rational,
    upper: Rational,
}

/// Witness for two points of the second Laakso space lying on a common
/// `u`-`v` geodesic.
///
/// Starting from the lowest level `j` containing both points, the edges of a
/// geodesic `S` between them are trisected until the first and last new
/// points on `S` are at least `threshold · d(u0, v0)` apart. Those points
/// become the `w`s, the `z`s are midpoints of consecutive ones on `S`, and
/// each `z~` is the copy-1 twin of its `z` at the next level.
pub fn laakso_thick_witness(
    family: &LaaksoFamily,
    u0: &LaaksoPoint,
    v0: &LaaksoPoint,
    threshold: &Rational,
) -> Result<LaaksoWitness> {
    if !threshold.is_positive() || *threshold >= Rational::one() {
        return Err(Error::precondition(format!("threshold {threshold} is not in (0, 1)")));
    }
    let (u0, v0) = (u0.clone().canonical(), v0.clone().canonical());
    if u0 == v0 {
        return Err(Error::precondition("fork witness needs u0 != v0"));
    }
    let j = u0.level.max(v0.level);
    let g = family.level(j)?;
    let m = g.metric();
    let (p0, p1) = (u0.at_level(j), v0.at_level(j));
    let (u, v) = (GraphPoint::Vertex(laakso::U), GraphPoint::Vertex(laakso::V));
    let d = |a: &GraphPoint, b: &GraphPoint| m.point_distance(a, b);
    let full = d(&u, &v);
    let (lo, hi, swapped) = if d(&u, &p0) + d(&p0, &p1) + d(&p1, &v) == full {
        (p0, p1, false)
    } else if d(&u, &p1) + d(&p1, &p0) + d(&p0, &v) == full {
        (p1, p0, true)
    } else {
        return Err(Error::NotOnGeodesic(format!(
            "{} and {}",
            family.describe_point(&u0),
            family.describe_point(&v0)
        )));
    };
    let (pos0, pos1) = (d(&u, &lo), d(&u, &hi));
    let span_total = &pos1 - &pos0;

    let graph = g.graph();
    let seg = |edge: usize, lower: Rational, upper: Rational| Segment { edge, lower, upper };
    let mut segments = Vec::new();
    let same_edge = match (&lo, &hi) {
        (GraphPoint::Interior { edge: a, .. }, GraphPoint::Interior { edge: b, .. }) if a == b => Some(*a),
        (GraphPoint::Interior { edge, .. }, GraphPoint::Vertex(y)) if graph.edge(*edge).v == *y => Some(*edge),
        (GraphPoint::Vertex(x), GraphPoint::Interior { edge, .. }) if graph.edge(*edge).u == *x => Some(*edge),
        _ => None,
    };
    if let Some(e) = same_edge {
        segments.push(seg(e, pos0.clone(), pos1.clone()));
    } else {
        let exit = match &lo {
            GraphPoint::Vertex(x) => *x,
            GraphPoint::Interior { edge, .. } => {
                let top = graph.edge(*edge).v;
                segments.push(seg(*edge, pos0.clone(), g.vertex_pos(top).clone()));
                top
            }
        };
        let (entry, tail) = match &hi {
            GraphPoint::Vertex(y) => (*y, None),
            GraphPoint::Interior { edge, .. } => {
                let bottom = graph.edge(*edge).u;
                (bottom, Some(seg(*edge, g.vertex_pos(bottom).clone(), pos1.clone())))
            }
        };
        if exit != entry {
            let path = enumerate_geodesics(m, exit, entry, 1)?.remove(0);
            for (k, &e) in path.edges.iter().enumerate() {
                let (a, b) = (path.vertices[k], path.vertices[k + 1]);
                segments.push(seg(e, g.vertex_pos(a).clone(), g.vertex_pos(b).clone()));
            }
        }
        segments.extend(tail);
    }
    let covered: Rational = segments.iter().map(|s| &s.upper - &s.lower).sum();
    if covered != span_total || segments.iter().any(|s| s.upper <= s.lower) {
        return Err(Error::NotOnGeodesic("no monotone geodesic between the points".into()));
    }
    let locate = |p: &Rational| -> Result<LaaksoPoint> {
        let s = segments
            .iter()
            .find(|s| s.lower <= *p && *p <= s.upper)
            .expect("position within the geodesic");
        let offset = p - g.vertex_pos(graph.edge(s.edge).u);
        Ok(LaaksoPoint {
            level: j,
            point: graph.point(s.edge, offset)?,
        })
    };

    // Trisect until the new points on S span enough of it.
    let need = threshold * &span_total;
    let mut level = j;
    let (a_pos, scale) = loop {
        let scale = Rational::inv_pow(3, level + 1).recip();
        let lo_m: i128 = (&pos0 * &scale).ceil().try_into().expect("small level");
        let hi_m: i128 = (&pos1 * &scale).floor().try_into().expect("small level");
        let ms: Vec<i128> = (lo_m..=hi_m).filter(|m| m % 3 != 0).collect();
        if ms.len() >= 2 {
            let spread = Rational::from(ms[ms.len() - 1] - ms[0]) / &scale;
            if spread >= need {
                break (ms, scale);
            }
        }
        level += 1;
        if level > j + 64 {
            return Err(Error::precondition("trisection did not reach the threshold"));
        }
    };
    let twin_level = level + 1;
    family.level(twin_level)?;
    let a_positions: Vec<Rational> = a_pos.iter().map(|&m| Rational::from(m) / &scale).collect();
    let n = a_positions.len() - 1;
    let mut w = vec![LaaksoPoint { level: j, point: lo }.canonical()];
    for a in &a_positions[1..n] {
        w.push(locate(a)?.canonical());
    }
    w.push(LaaksoPoint { level: j, point: hi }.canonical());
    let (mut z, mut zt) = (Vec::with_capacity(n), Vec::with_capacity(n));
    for pair in a_positions.windows(2) {
        let mid = (&pair[0] + &pair[1]) / Rational::int(2);
        let lifted = locate(&mid)?.at_level(twin_level);
        let twin = twin_at(twin_level, &lifted)?;
        z.push(LaaksoPoint { level: twin_level, point: lifted }.canonical());
        zt.push(LaaksoPoint { level: twin_level, point: twin }.canonical());
    }
    let span = &a_positions[n] - &a_positions[0];
    let witness = ThickWitness {
        u0: w[0].clone(),
        v0: w[n].clone(),
        w,
        z,
        z_tilde: zt,
    };
    Ok(LaaksoWitness {
        witness: if swapped { reverse_witness(witness) } else { witness },
        start_level: j,
        twin_level,
        trisections: twin_level - j,
        a_positions,
        span,
        threshold: threshold.clone(),
    })
}

/// Laakso witnesses with width constant equal to the trisection threshold.
pub struct LaaksoOracle {
    pub family: Arc<LaaksoFamily>,
    pub threshold: Rational,
}

impl ThickOracle for LaaksoOracle {
    type Space = LaaksoFamily;

    fn space(&self) -> &LaaksoFamily {
        &self.family
    }

    fn endpoints(&self) -> (LaaksoPoint, LaaksoPoint) {
        (LaaksoPoint::vertex(0, laakso::U), LaaksoPoint::vertex(0, laakso::V))
    }

    fn constant(&self) -> Rational {
        self.threshold.clone()
    }

    fn witness(&self, u0: &LaaksoPoint, v0: &LaaksoPoint) -> Result<ThickWitness<LaaksoPoint>> {
        Ok(laakso_thick_witness(&self.family, u0, v0, &self.threshold)?.witness)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{diamond, DEFAULT_VERTEX_CAP};
    use crate::geodesics::verify_thick_witness;

    fn q(a: i64, b: i64) -> Rational {
        Rational::frac(a, b)
    }

    #[test]
    fn laakso_hand_trace_from_the_endpoints() {
        let fam = LaaksoFamily::new(DEFAULT_VERTEX_CAP);
        let (u, v) = (LaaksoPoint::vertex(0, laakso::U), LaaksoPoint::vertex(0, laakso::V));
        let lw = laakso_thick_witness(&fam, &u, &v, &q(1, 2)).unwrap();
        assert_eq!((lw.start_level, lw.trisections, lw.witness.n()), (0, 2, 5));
        let pos: Vec<Rational> = lw.witness.w.iter().map(|p| fam.pos(p).unwrap()).collect();
        assert_eq!(pos, vec![q(0, 1), q(2, 9), q(4, 9), q(5, 9), q(7, 9), q(1, 1)]);
        let zpos: Vec<Rational> = lw.witness.z.iter().map(|p| fam.pos(p).unwrap()).collect();
        assert_eq!(zpos, vec![q(1, 6), q(1, 3), q(1, 2), q(2, 3), q(5, 6)]);
        assert_eq!(lw.span, q(7, 9));
        let r = verify_thick_witness(&fam, &u, &v, &lw.witness, &q(1, 2));
        assert!(r.pass, "{:?}", r.failed());
        assert_eq!(r.clause("width").unwrap().values["sum d(z_i, z~_i)"], q(7, 9));
    }

    #[test]
    fn laakso_single_trisection_and_reversed_input() {
        let fam = LaaksoFamily::new(DEFAULT_VERTEX_CAP);
        // u and the second trisection point q of X_1: the points 1/9, 2/9,
        // 4/9, 5/9 of the first trisection span 4/9 >= 1/3.
        let u = LaaksoPoint::vertex(0, laakso::U);
        let qv = LaaksoPoint::vertex(1, 3);
        let lw = laakso_thick_witness(&fam, &qv, &u, &q(1, 2)).unwrap();
        assert_eq!(lw.trisections, 1);
        assert_eq!(lw.witness.w[0], qv);
        let (a, b) = (LaaksoPoint::vertex(0, laakso::U), LaaksoPoint::vertex(0, laakso::V));
        let r = verify_thick_witness(&fam, &a, &b, &lw.witness, &q(1, 2));
        assert!(r.pass, "{:?}", r.failed());
    }

    #[test]
    fn laakso_rejects_degenerate_and_off_geodesic_pairs() {
        let fam = LaaksoFamily::new(DEFAULT_VERTEX_CAP);
        let u = LaaksoPoint::vertex(0, laakso::U);
        assert!(laakso_thick_witness(&fam, &u, &u, &q(1, 2)).is_err());
        // The midpoints of the two copies of the middle edge of X_1 project
        // to the same place, so no u-v geodesic passes through both.
        let p_twin_a = LaaksoPoint {
            level: 1,
            point: GraphPoint::Interior { edge: 2, offset: q(1, 6) },
        };
        let p_twin_b = LaaksoPoint {
            level: 1,
            point: GraphPoint::Interior { edge: 3, offset: q(1, 6) },
        };
        assert!(matches!(
            laakso_thick_witness(&fam, &p_twin_a, &p_twin_b, &q(1, 2)),
            Err(Error::NotOnGeodesic(_))
        ));
    }

    #[test]
    fn diamond_witness_has_width_one() {
        let d = diamond(3, DEFAULT_VERTEX_CAP).unwrap();
        let (u, v) = (GraphPoint::Vertex(BOTTOM), GraphPoint::Vertex(TOP));
        let w = diamond_thick_witness(&d, BOTTOM, TOP, 0).unwrap();
        assert_eq!(w.n(), 1);
        let r = verify_thick_witness(d.metric(), &u, &v, &w, &Rational::one());
        assert!(r.pass, "{:?}", r.failed());
        let w = diamond_thick_witness(&d, TOP, BOTTOM, 2).unwrap();
        assert_eq!(w.n(), 4);
        let r = verify_thick_witness(d.metric(), &u, &v, &w, &Rational::one());
        assert!(r.pass, "{:?}", r.failed());
        let a = d.graph().vertex("a").unwrap();
        let w = diamond_thick_witness(&d, a, TOP, 0).unwrap();
        let r = verify_thick_witness(d.metric(), &u, &v, &w, &Rational::one());
        assert!(r.pass, "{:?}", r.failed());
        assert!(diamond_thick_witness(&d, a, a, 0).is_err());
        let b = d.graph().vertex("b").unwrap();
        assert!(matches!(diamond_thick_witness(&d, a, b, 0), Err(Error::NotOnGeodesic(_))));
        assert!(diamond_thick_witness(&d, BOTTOM, TOP, 3).is_err());
    }
}
