//! Geodesics, C-geodesics and the partitions of `[0, 1]` they induce.

mod oracles;
mod witness;

pub use oracles::{
    diamond_thick_witness, laakso_thick_witness, DiamondOracle, LaaksoOracle, LaaksoWitness, ThickOracle,
};
pub use witness::{
    on_geodesic_in_order, verify_iso_witness, verify_thick_witness, Clause, IsoWitness, Report, ThickWitness,
};

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{GraphMetric, GraphPoint, Metric};
use crate::rational::Rational;

/// A vertex geodesic together with the edges it uses, so that geodesics
/// through parallel edges stay distinct.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GeodesicPath {
    pub vertices: Vec<usize>,
    pub edges: Vec<usize>,
}

impl GeodesicPath {
    pub fn points(&self) -> Vec<GraphPoint> {
        self.vertices.iter().map(|&v| GraphPoint::Vertex(v)).collect()
    }
}

/// Shortest-path successors of `x` towards the vertex whose distance row is `row`.
fn successors(metric: &GraphMetric, x: usize, row: &crate::graph::DistRow) -> Vec<(usize, usize)> {
    let g = metric.graph();
    let dx = row.get(x);
    g.neighbors(x)
        .iter()
        .copied()
        .filter(|&(y, e)| &g.edge(e).len + &row.get(y) == dx)
        .collect()
}

/// Up to `limit` vertex geodesics from `u` to `v`, in depth-first order over
/// edge indices. For the stock generators edge indices follow addresses, so
/// the order is lexicographic in copy bits and quadrilateral sides.
pub fn enumerate_geodesics(metric: &GraphMetric, u: usize, v: usize, limit: usize) -> Result<Vec<GeodesicPath>> {
    if u == v {
        return Err(Error::precondition("geodesic enumeration needs u != v"));
    }
    let row = metric.row(v);
    let mut out = Vec::new();
    if limit == 0 {
        return Ok(out);
    }
    let mut path = GeodesicPath {
        vertices: vec![u],
        edges: Vec::new(),
    };
    let mut stack = vec![(successors(metric, u, &row), 0usize)];
    while let Some((cands, next)) = stack.last_mut() {
        let here = *path.vertices.last().expect("path starts at u");
        if here == v {
            out.push(path.clone());
            if out.len() == limit {
                break;
            }
            stack.pop();
            path.vertices.pop();
            path.edges.pop();
            continue;
        }
        if *next < cands.len() {
            let (y, e) = cands[*next];
            *next += 1;
            path.vertices.push(y);
            path.edges.push(e);
            stack.push((successors(metric, y, &row), 0));
        } else {
            stack.pop();
            path.vertices.pop();
            path.edges.pop();
        }
    }
    Ok(out)
}

/// A geodesic from `u` to `v` choosing uniformly among shortest-path
/// successors at every vertex.
pub fn random_geodesic<R: Rng>(metric: &GraphMetric, u: usize, v: usize, rng: &mut R) -> Result<GeodesicPath> {
    if u == v {
        return Err(Error::precondition("random geodesic needs u != v"));
    }
    let row = metric.row(v);
    let mut path = GeodesicPath {
        vertices: vec![u],
        edges: Vec::new(),
    };
    let mut x = u;
    while x != v {
        let cands = successors(metric, x, &row);
        let (y, e) = cands[rng.gen_range(0..cands.len())];
        path.vertices.push(y);
        path.edges.push(e);
        x = y;
    }
    Ok(path)
}

/// Exact comparison of a chain's length with `C · d(u, v)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CGeodesicCheck {
    pub total: Rational,
    pub direct: Rational,
    /// `total / direct`, absent when the endpoints coincide.
    pub ratio: Option<Rational>,
    pub constant: Rational,
    pub holds: bool,
}

pub fn chain_lengths<M: Metric>(metric: &M, seq: &[M::Point]) -> Vec<Rational> {
    seq.windows(2).map(|w| metric.distance(&w[0], &w[1])).collect()
}

pub fn is_c_geodesic<M: Metric>(metric: &M, seq: &[M::Point], c: &Rational) -> Result<CGeodesicCheck> {
    if seq.len() < 2 {
        return Err(Error::precondition("a C-geodesic has at least two points"));
    }
    let total: Rational = chain_lengths(metric, seq).iter().sum();
    let direct = metric.distance(&seq[0], &seq[seq.len() - 1]);
    let ratio = (!direct.is_zero()).then(|| &total / &direct);
    Ok(CGeodesicCheck {
        holds: total <= c * &direct,
        total,
        direct,
        ratio,
        constant: c.clone(),
    })
}

/// Breakpoints `0 = a_0 < a_1 < … < a_n = 1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct Partition {
    breaks: Vec<Rational>,
}

impl Partition {
    pub fn new(breaks: Vec<Rational>) -> Result<Self> {
        if breaks.len() < 2 {
            return Err(Error::precondition("a partition has at least two breakpoints"));
        }
        if !breaks[0].is_zero() || breaks[breaks.len() - 1] != Rational::one() {
            return Err(Error::precondition("partition must start at 0 and end at 1"));
        }
        if let Some(i) = (1..breaks.len()).find(|&i| breaks[i] <= breaks[i - 1]) {
            return Err(Error::precondition(format!(
                "breakpoints not strictly increasing at index {i}: {} then {}",
                breaks[i - 1],
                breaks[i]
            )));
        }
        Ok(Partition { breaks })
    }

    pub fn trivial() -> Self {
        Partition {
            breaks: vec![Rational::zero(), Rational::one()],
        }
    }

    pub fn breaks(&self) -> &[Rational] {
        &self.breaks
    }

    pub fn interval_count(&self) -> usize {
        self.breaks.len() - 1
    }

    pub fn interval(&self, i: usize) -> (&Rational, &Rational) {
        (&self.breaks[i], &self.breaks[i + 1])
    }

    pub fn length(&self, i: usize) -> Rational {
        &self.breaks[i + 1] - &self.breaks[i]
    }

    /// Whether every breakpoint of `self` is a breakpoint of `finer`.
    pub fn is_refined_by(&self, finer: &Partition) -> bool {
        let mut j = 0;
        for b in &self.breaks {
            while j < finer.breaks.len() && finer.breaks[j] < *b {
                j += 1;
            }
            if j == finer.breaks.len() || finer.breaks[j] != *b {
                return false;
            }
        }
        true
    }

    /// Union of the breakpoints of two partitions.
    pub fn common_refinement(&self, other: &Partition) -> Partition {
        let mut breaks: Vec<Rational> = self.breaks.iter().chain(&other.breaks).cloned().collect();
        breaks.sort();
        breaks.dedup();
        Partition { breaks }
    }
}

/// Cumulative normalized sums of positive segment lengths.
pub fn partition_from_lengths(lengths: &[Rational]) -> Result<Partition> {
    if lengths.is_empty() {
        return Err(Error::precondition("no segments"));
    }
    if let Some(i) = lengths.iter().position(|l| !l.is_positive()) {
        return Err(Error::precondition(format!(
            "segment {i} has non-positive length {}",
            lengths[i]
        )));
    }
    let total: Rational = lengths.iter().sum();
    let mut acc = Rational::zero();
    let mut breaks = vec![Rational::zero()];
    for l in lengths {
        acc += l;
        breaks.push(&acc / &total);
    }
    Partition::new(breaks)
}

/// The partition attached to a C-geodesic.
pub fn partition_of<M: Metric>(metric: &M, seq: &[M::Point]) -> Result<Partition> {
    if seq.len() < 2 {
        return Err(Error::precondition("a C-geodesic has at least two points"));
    }
    partition_from_lengths(&chain_lengths(metric, seq))
}

/// Indices at which `sub` occurs in `seq` as a subsequence, with both
/// endpoints pinned. Inner points are matched leftmost first.
pub fn match_subsequence<P: PartialEq>(sub: &[P], seq: &[P]) -> Option<Vec<usize>> {
    if sub.len() < 2 || seq.len() < sub.len() || sub[0] != seq[0] || sub[sub.len() - 1] != seq[seq.len() - 1] {
        return None;
    }
    let last = seq.len() - 1;
    let mut idx = vec![0];
    let mut j = 1;
    for p in &sub[1..sub.len() - 1] {
        while j < last && seq[j] != *p {
            j += 1;
        }
        if j >= last {
            return None;
        }
        idx.push(j);
        j += 1;
    }
    idx.push(last);
    Some(idx)
}

/// Refines `parent` along an extension whose segment lengths are `lengths`
/// and in which the parent's points sit at positions `anchors`. Each parent
/// interval is split in proportion to the extension's segments inside it.
pub fn refine_with_lengths(parent: &Partition, lengths: &[Rational], anchors: &[usize]) -> Result<Partition> {
    if anchors.len() != parent.breaks.len() {
        return Err(Error::precondition(format!(
            "{} anchors for a partition with {} breakpoints",
            anchors.len(),
            parent.breaks.len()
        )));
    }
    if anchors[0] != 0 || anchors[anchors.len() - 1] != lengths.len() || anchors.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::precondition("anchors must increase from 0 to the segment count"));
    }
    let mut breaks = vec![Rational::zero()];
    for (i, w) in anchors.windows(2).enumerate() {
        let segs = &lengths[w[0]..w[1]];
        let total: Rational = segs.iter().sum();
        if !total.is_positive() {
            return Err(Error::precondition(format!("extension has zero length inside interval {i}")));
        }
        let (a, _) = parent.interval(i);
        let span = parent.length(i);
        let mut acc = Rational::zero();
        for (k, s) in segs.iter().enumerate() {
            acc += s;
            if k + 1 == segs.len() {
                breaks.push(parent.breaks[i + 1].clone());
            } else {
                breaks.push(a + &(&span * &acc / &total));
            }
        }
    }
    Partition::new(breaks)
}

/// Refinement of `parent` (the partition of `parent_geo`) along `extension`.
pub fn refine_partition<M: Metric>(
    metric: &M,
    parent: &Partition,
    parent_geo: &[M::Point],
    extension: &[M::Point],
) -> Result<Partition> {
    let anchors = match_subsequence(parent_geo, extension)
        .ok_or_else(|| Error::precondition("extension does not contain the parent geodesic as a subsequence"))?;
    refine_with_lengths(parent, &chain_lengths(metric, extension), &anchors)
}

/// Largest ratio, in either direction, of corresponding interval lengths.
pub fn b_equivalence_ratio(iterated: &Partition, direct: &Partition) -> Result<Rational> {
    if iterated.breaks.len() != direct.breaks.len() {
        return Err(Error::precondition(format!(
            "partitions have {} and {} breakpoints",
            iterated.breaks.len(),
            direct.breaks.len()
        )));
    }
    let mut worst = Rational::one();
    for i in 0..iterated.interval_count() {
        let r = iterated.length(i) / direct.length(i);
        worst = Rational::max_of(&worst, &Rational::max_of(&r, &r.recip()));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::generators::{diamond, laakso2, DEFAULT_VERTEX_CAP};
    use crate::graph::{Edge, MetricGraph};

    fn q(a: i64, b: i64) -> Rational {
        Rational::frac(a, b)
    }

    fn path_graph(n: usize) -> GraphMetric {
        let ids = (0..n).map(|i| format!("p{i}")).collect();
        let edges = (1..n)
            .map(|i| Edge {
                u: i - 1,
                v: i,
                len: Rational::one(),
            })
            .collect();
        GraphMetric::new(Arc::new(MetricGraph::new(ids, edges).unwrap()))
    }

    #[test]
    fn geodesic_counts() {
        let d1 = diamond(1, DEFAULT_VERTEX_CAP).unwrap();
        let gs = enumerate_geodesics(d1.metric(), 1, 0, 10).unwrap();
        assert_eq!(gs.len(), 2);
        let x1 = laakso2(1, DEFAULT_VERTEX_CAP).unwrap();
        let gs = enumerate_geodesics(x1.metric(), 0, 1, 10).unwrap();
        assert_eq!(gs.len(), 2);
        assert_eq!(gs[0].vertices, gs[1].vertices);
        assert_ne!(gs[0].edges, gs[1].edges);
        let p = path_graph(5);
        assert_eq!(enumerate_geodesics(&p, 0, 4, 10).unwrap().len(), 1);
        assert!(enumerate_geodesics(&p, 0, 4, 0).unwrap().is_empty());
        assert!(enumerate_geodesics(&p, 2, 2, 1).is_err());
    }

    #[test]
    fn geodesic_count_in_d2_is_eight() {
        // Two sides in D_1, each made of two edges that both become diamonds
        // with two geodesics: 2 * 2 * 2.
        let d2 = diamond(2, DEFAULT_VERTEX_CAP).unwrap();
        assert_eq!(enumerate_geodesics(d2.metric(), 0, 1, 100).unwrap().len(), 8);
    }

    #[test]
    fn c_geodesic_examples() {
        let p = path_graph(3);
        let pts = |v: &[usize]| v.iter().map(|&i| GraphPoint::Vertex(i)).collect::<Vec<_>>();
        let direct = pts(&[0, 2]);
        for c in [q(1, 1), q(3, 2), q(5, 1)] {
            assert!(is_c_geodesic(&p, &direct, &c).unwrap().holds);
        }
        let detour = pts(&[0, 1, 2, 1, 2]);
        let chk = is_c_geodesic(&p, &detour, &q(2, 1)).unwrap();
        assert_eq!((chk.total.clone(), chk.ratio.clone()), (q(4, 1), Some(q(2, 1))));
        assert!(chk.holds);
        assert!(!is_c_geodesic(&p, &detour, &q(19, 10)).unwrap().holds);
        assert!(is_c_geodesic(&p, &pts(&[0]), &q(1, 1)).is_err());
    }

    #[test]
    fn partition_examples() {
        let p = partition_from_lengths(&[q(1, 1), q(3, 1)]).unwrap();
        assert_eq!(p.breaks(), &[q(0, 1), q(1, 4), q(1, 1)]);
        let p = partition_from_lengths(&vec![q(1, 1); 4]).unwrap();
        assert_eq!(p.breaks(), &[q(0, 1), q(1, 4), q(1, 2), q(3, 4), q(1, 1)]);
        assert_eq!(partition_from_lengths(&[q(2, 1)]).unwrap(), Partition::trivial());
        assert!(partition_from_lengths(&[q(0, 1)]).is_err());
    }

    #[test]
    fn refinement_examples() {
        let parent = Partition::new(vec![q(0, 1), q(1, 2), q(1, 1)]).unwrap();
        let r = refine_with_lengths(&parent, &[q(1, 1), q(1, 1), q(7, 1)], &[0, 2, 3]).unwrap();
        assert_eq!(r.breaks(), &[q(0, 1), q(1, 4), q(1, 2), q(1, 1)]);
        let r = refine_with_lengths(&parent, &[q(1, 1), q(3, 1), q(5, 1)], &[0, 2, 3]).unwrap();
        assert_eq!(r.breaks()[1], q(1, 8));
        let same = refine_with_lengths(&parent, &[q(2, 1), q(9, 1)], &[0, 1, 2]).unwrap();
        assert_eq!(same, parent);
    }

    #[test]
    fn refine_checks_subsequence() {
        let p = path_graph(4);
        let v = |i| GraphPoint::Vertex(i);
        let geo = vec![v(0), v(2), v(3)];
        let parent = partition_of(&p, &geo).unwrap();
        let ext = vec![v(0), v(1), v(2), v(3)];
        let r = refine_partition(&p, &parent, &geo, &ext).unwrap();
        assert_eq!(r, partition_of(&p, &ext).unwrap());
        let bad = vec![v(0), v(1), v(3)];
        assert!(refine_partition(&p, &parent, &geo, &bad).is_err());
    }

    #[test]
    fn b_ratio_examples() {
        let a = Partition::new(vec![q(0, 1), q(1, 4), q(1, 1)]).unwrap();
        let b = Partition::new(vec![q(0, 1), q(1, 2), q(1, 1)]).unwrap();
        assert_eq!(b_equivalence_ratio(&a, &a).unwrap(), q(1, 1));
        assert_eq!(b_equivalence_ratio(&a, &b).unwrap(), q(2, 1));
        assert!(b_equivalence_ratio(&a, &Partition::trivial()).is_err());
    }

    #[test]
    fn subsequence_matching_pins_endpoints() {
        assert_eq!(match_subsequence(&[1, 3], &[1, 2, 3]), Some(vec![0, 2]));
        assert_eq!(match_subsequence(&[1, 2, 3], &[1, 2, 2, 3]), Some(vec![0, 1, 3]));
        assert_eq!(match_subsequence(&[1, 3], &[1, 3, 2]), None);
        assert_eq!(match_subsequence(&[1, 4, 3], &[1, 2, 3]), None);
    }
}
