//! Metric graphs with exact rational edge lengths, points in edge interiors,
//! and shortest-path distances.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap, VecDeque};
use std::fmt;
use std::sync::{Arc, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::Rational;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub len: Rational,
}

/// Edge lengths rescaled to integers by a common denominator, when they fit.
#[derive(Clone, Debug)]
struct Scaled {
    unit: Rational,
    lens: Vec<u64>,
}

#[derive(Clone, Debug)]
pub struct MetricGraph {
    ids: Vec<String>,
    index: HashMap<String, usize>,
    edges: Vec<Edge>,
    adj: Vec<Vec<(usize, usize)>>,
    scaled: Option<Scaled>,
}

/// A point of the graph thickening. Offsets equal to 0 or to the edge length
/// are always stored as the corresponding vertex.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum GraphPoint {
    Vertex(usize),
    Interior { edge: usize, offset: Rational },
}

impl MetricGraph {
    pub fn new(ids: Vec<String>, edges: Vec<Edge>) -> Result<Self> {
        if ids.is_empty() {
            return Err(Error::InvalidGraph("graph has no vertices".into()));
        }
        let mut index = HashMap::with_capacity(ids.len());
        for (i, id) in ids.iter().enumerate() {
            if index.insert(id.clone(), i).is_some() {
                return Err(Error::InvalidGraph(format!("duplicate vertex id {id:?}")));
            }
        }
        let mut adj = vec![Vec::new(); ids.len()];
        for (k, e) in edges.iter().enumerate() {
            if e.u >= ids.len() || e.v >= ids.len() {
                return Err(Error::InvalidGraph(format!("edge {k} has an endpoint out of range")));
            }
            if e.u == e.v {
                return Err(Error::InvalidGraph(format!("edge {k} is a self-loop at {:?}", ids[e.u])));
            }
            if !e.len.is_positive() {
                return Err(Error::InvalidGraph(format!("edge {k} has non-positive length {}", e.len)));
            }
            adj[e.u].push((e.v, k));
            adj[e.v].push((e.u, k));
        }
        let graph = MetricGraph {
            scaled: scale_lengths(&edges),
            ids,
            index,
            edges,
            adj,
        };
        graph.check_connected()?;
        Ok(graph)
    }

    /// Builds a graph from id-based edge triples.
    pub fn from_id_edges(ids: Vec<String>, edges: &[(String, String, Rational)]) -> Result<Self> {
        let index: HashMap<&str, usize> = ids.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
        let lookup = |s: &str| {
            index
                .get(s)
                .copied()
                .ok_or_else(|| Error::schema(format!("edge endpoint {s:?} is not a listed vertex")))
        };
        let edges = edges
            .iter()
            .map(|(u, v, len)| {
                Ok(Edge {
                    u: lookup(u)?,
                    v: lookup(v)?,
                    len: len.clone(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        MetricGraph::new(ids, edges)
    }

    fn check_connected(&self) -> Result<()> {
        let mut seen = vec![false; self.ids.len()];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        while let Some(x) = queue.pop_front() {
            for &(y, _) in &self.adj[x] {
                if !seen[y] {
                    seen[y] = true;
                    queue.push_back(y);
                }
            }
        }
        match seen.iter().position(|s| !s) {
            Some(i) => Err(Error::Disconnected {
                vertex: self.ids[i].clone(),
                from: self.ids[0].clone(),
            }),
            None => Ok(()),
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.ids.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn id(&self, v: usize) -> &str {
        &self.ids[v]
    }

    pub fn vertex(&self, id: &str) -> Result<usize> {
        self.index
            .get(id)
            .copied()
            .ok_or_else(|| Error::InvalidPoint(format!("unknown vertex {id:?}")))
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, k: usize) -> &Edge {
        &self.edges[k]
    }

    /// `(neighbor, edge index)` pairs in edge-index order.
    pub fn neighbors(&self, v: usize) -> &[(usize, usize)] {
        &self.adj[v]
    }

    /// Canonical point at `offset` from the first endpoint of `edge`.
    pub fn point(&self, edge: usize, offset: Rational) -> Result<GraphPoint> {
        let e = self
            .edges
            .get(edge)
            .ok_or_else(|| Error::InvalidPoint(format!("edge index {edge} out of range")))?;
        if offset.is_negative() || offset > e.len {
            return Err(Error::InvalidPoint(format!(
                "offset {offset} outside [0, {}] on edge {edge}",
                e.len
            )));
        }
        Ok(if offset.is_zero() {
            GraphPoint::Vertex(e.u)
        } else if offset == e.len {
            GraphPoint::Vertex(e.v)
        } else {
            GraphPoint::Interior { edge, offset }
        })
    }

    pub fn check_point(&self, p: &GraphPoint) -> Result<()> {
        match p {
            GraphPoint::Vertex(v) if *v < self.ids.len() => Ok(()),
            GraphPoint::Vertex(v) => Err(Error::InvalidPoint(format!("vertex index {v} out of range"))),
            GraphPoint::Interior { edge, offset } => match self.point(*edge, offset.clone())? {
                GraphPoint::Interior { .. } => Ok(()),
                GraphPoint::Vertex(_) => Err(Error::InvalidPoint(
                    "interior point with endpoint offset is not canonical".into(),
                )),
            },
        }
    }

    /// Parses `id` or `edge:offset` (offset as `n` or `n/d`).
    pub fn parse_point(&self, s: &str) -> Result<GraphPoint> {
        if let Some(&v) = self.index.get(s) {
            return Ok(GraphPoint::Vertex(v));
        }
        match s.split_once(':') {
            Some((e, off)) => {
                let edge: usize = e
                    .trim()
                    .parse()
                    .map_err(|_| Error::InvalidPoint(format!("bad edge index in {s:?}")))?;
                self.point(edge, off.parse()?)
            }
            None => Err(Error::InvalidPoint(format!("unknown vertex {s:?}"))),
        }
    }

    pub fn describe(&self, p: &GraphPoint) -> String {
        match p {
            GraphPoint::Vertex(v) => self.ids[*v].clone(),
            GraphPoint::Interior { edge, offset } => format!("{edge}:{offset}"),
        }
    }

    /// Exact single-source distances to every vertex.
    pub fn distances_from(&self, src: usize) -> DistRow {
        match &self.scaled {
            Some(s) => DistRow::Scaled {
                unit: s.unit.clone(),
                d: dijkstra_scaled(&self.adj, &s.lens, src),
            },
            None => DistRow::Exact(dijkstra_exact(&self.adj, &self.edges, src)),
        }
    }
}

impl fmt::Display for GraphPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphPoint::Vertex(v) => write!(f, "#{v}"),
            GraphPoint::Interior { edge, offset } => write!(f, "{edge}:{offset}"),
        }
    }
}

fn scale_lengths(edges: &[Edge]) -> Option<Scaled> {
    let mut lcm = BigInt::one();
    for e in edges {
        lcm = lcm.lcm(e.len.denom());
    }
    let mut total: u128 = 0;
    let mut lens = Vec::with_capacity(edges.len());
    for e in edges {
        let scaled = (e.len.numer() * (&lcm / e.len.denom())).to_u64()?;
        total += scaled as u128;
        lens.push(scaled);
    }
    if total > (u64::MAX / 4) as u128 {
        return None;
    }
    Some(Scaled {
        unit: Rational::from_bigint(lcm).recip(),
        lens,
    })
}

fn dijkstra_scaled(adj: &[Vec<(usize, usize)>], lens: &[u64], src: usize) -> Vec<u64> {
    let mut dist = vec![u64::MAX; adj.len()];
    let mut heap = BinaryHeap::new();
    dist[src] = 0;
    heap.push(Reverse((0u64, src)));
    while let Some(Reverse((d, x))) = heap.pop() {
        if d > dist[x] {
            continue;
        }
        for &(y, e) in &adj[x] {
            let nd = d + lens[e];
            if nd < dist[y] {
                dist[y] = nd;
                heap.push(Reverse((nd, y)));
            }
        }
    }
    dist
}

fn dijkstra_exact(adj: &[Vec<(usize, usize)>], edges: &[Edge], src: usize) -> Vec<Rational> {
    let mut dist: Vec<Option<Rational>> = vec![None; adj.len()];
    let mut done = vec![false; adj.len()];
    let mut heap = BinaryHeap::new();
    dist[src] = Some(Rational::zero());
    heap.push(Reverse((Rational::zero(), src)));
    while let Some(Reverse((d, x))) = heap.pop() {
        if done[x] {
            continue;
        }
        done[x] = true;
        for &(y, e) in &adj[x] {
            let nd = &d + &edges[e].len;
            if dist[y].as_ref().is_none_or(|cur| nd < *cur) {
                dist[y] = Some(nd.clone());
                heap.push(Reverse((nd, y)));
            }
        }
    }
    dist.into_iter().map(|d| d.expect("graph is connected")).collect()
}

/// One row of exact distances.
#[derive(Clone, Debug)]
pub enum DistRow {
    Scaled { unit: Rational, d: Vec<u64> },
    Exact(Vec<Rational>),
}

impl DistRow {
    pub fn get(&self, j: usize) -> Rational {
        match self {
            DistRow::Scaled { unit, d } => unit * Rational::from(d[j]),
            DistRow::Exact(d) => d[j].clone(),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            DistRow::Scaled { d, .. } => d.len(),
            DistRow::Exact(d) => d.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn max(&self) -> Rational {
        match self {
            DistRow::Scaled { unit, d } => unit * Rational::from(d.iter().copied().max().unwrap_or(0)),
            DistRow::Exact(d) => d.iter().max().cloned().unwrap_or_else(Rational::zero),
        }
    }
}

/// Anything that can measure exact distances between its points.
pub trait Metric {
    type Point: Clone + PartialEq + fmt::Debug;

    fn distance(&self, a: &Self::Point, b: &Self::Point) -> Rational;

    fn describe(&self, p: &Self::Point) -> String;
}

/// Shortest-path metric on a graph thickening, with per-source rows computed
/// on first use. Safe to share across threads.
pub struct GraphMetric {
    graph: Arc<MetricGraph>,
    rows: Vec<OnceLock<Arc<DistRow>>>,
}

impl GraphMetric {
    pub fn new(graph: Arc<MetricGraph>) -> Self {
        let rows = (0..graph.vertex_count()).map(|_| OnceLock::new()).collect();
        GraphMetric { graph, rows }
    }

    pub fn graph(&self) -> &MetricGraph {
        &self.graph
    }

    pub fn graph_arc(&self) -> &Arc<MetricGraph> {
        &self.graph
    }

    pub fn row(&self, src: usize) -> Arc<DistRow> {
        self.rows[src]
            .get_or_init(|| Arc::new(self.graph.distances_from(src)))
            .clone()
    }

    pub fn vertex_distance(&self, a: usize, b: usize) -> Rational {
        self.row(a).get(b)
    }

    /// Exact distance between two points of the thickening.
    pub fn point_distance(&self, p: &GraphPoint, q: &GraphPoint) -> Rational {
        use GraphPoint::*;
        match (p, q) {
            (Vertex(a), Vertex(b)) => self.vertex_distance(*a, *b),
            (Vertex(a), Interior { edge, offset }) | (Interior { edge, offset }, Vertex(a)) => {
                let e = self.graph.edge(*edge);
                let row = self.row(*a);
                let via_u = offset + row.get(e.u);
                let via_v = (&e.len - offset) + row.get(e.v);
                Rational::min_of(&via_u, &via_v)
            }
            (Interior { edge: e1, offset: t1 }, Interior { edge: e2, offset: t2 }) => {
                let a = self.graph.edge(*e1);
                let b = self.graph.edge(*e2);
                let ends_a = [(a.u, t1.clone()), (a.v, &a.len - t1)];
                let ends_b = [(b.u, t2.clone()), (b.v, &b.len - t2)];
                let mut best: Option<Rational> = None;
                if e1 == e2 {
                    best = Some((t1 - t2).abs());
                }
                for (x, dx) in &ends_a {
                    let row = self.row(*x);
                    for (y, dy) in &ends_b {
                        let cand = dx + &row.get(*y) + dy;
                        if best.as_ref().is_none_or(|b| cand < *b) {
                            best = Some(cand);
                        }
                    }
                }
                best.expect("four candidate paths")
            }
        }
    }
}

impl Metric for GraphMetric {
    type Point = GraphPoint;

    fn distance(&self, a: &GraphPoint, b: &GraphPoint) -> Rational {
        self.point_distance(a, b)
    }

    fn describe(&self, p: &GraphPoint) -> String {
        self.graph.describe(p)
    }
}

/// Serialized form of a graph: `{"vertices": [...], "edges": [{"u","v","len"}]}`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct GraphDoc {
    pub vertices: Vec<String>,
    pub edges: Vec<EdgeDoc>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct EdgeDoc {
    pub u: String,
    pub v: String,
    pub len: Rational,
}

impl MetricGraph {
    pub fn to_doc(&self) -> GraphDoc {
        GraphDoc {
            vertices: self.ids.clone(),
            edges: self
                .edges
                .iter()
                .map(|e| EdgeDoc {
                    u: self.ids[e.u].clone(),
                    v: self.ids[e.v].clone(),
                    len: e.len.clone(),
                })
                .collect(),
        }
    }

    pub fn from_doc(doc: &GraphDoc) -> Result<Self> {
        let triples: Vec<_> = doc
            .edges
            .iter()
            .map(|e| (e.u.clone(), e.v.clone(), e.len.clone()))
            .collect();
        MetricGraph::from_id_edges(doc.vertices.clone(), &triples)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path3() -> MetricGraph {
        let ids = vec!["x".into(), "y".into(), "z".into()];
        let h = Rational::frac(1, 2);
        MetricGraph::from_id_edges(
            ids,
            &[("x".into(), "y".into(), h.clone()), ("y".into(), "z".into(), Rational::frac(1, 3))],
        )
        .unwrap()
    }

    #[test]
    fn disconnected_graph_names_a_vertex() {
        let ids = vec!["x".into(), "y".into(), "lonely".into()];
        let err = MetricGraph::from_id_edges(ids, &[("x".into(), "y".into(), Rational::one())]).unwrap_err();
        assert_eq!(
            err,
            Error::Disconnected {
                vertex: "lonely".into(),
                from: "x".into()
            }
        );
    }

    #[test]
    fn rejects_bad_edges() {
        let ids = vec!["x".into(), "y".into()];
        assert!(MetricGraph::from_id_edges(ids.clone(), &[("x".into(), "x".into(), Rational::one())]).is_err());
        assert!(MetricGraph::from_id_edges(ids.clone(), &[("x".into(), "y".into(), Rational::zero())]).is_err());
        assert!(MetricGraph::from_id_edges(ids, &[("x".into(), "w".into(), Rational::one())]).is_err());
    }

    #[test]
    fn endpoint_offsets_are_canonical() {
        let g = path3();
        assert_eq!(g.point(0, Rational::zero()).unwrap(), GraphPoint::Vertex(0));
        assert_eq!(g.point(0, Rational::frac(1, 2)).unwrap(), GraphPoint::Vertex(1));
        assert!(g.point(0, Rational::one()).is_err());
        assert!(g.point(0, Rational::frac(-1, 3)).is_err());
        assert_eq!(g.parse_point("1:1/6").unwrap(), g.point(1, Rational::frac(1, 6)).unwrap());
    }

    #[test]
    fn interior_distances() {
        let g = Arc::new(path3());
        let m = GraphMetric::new(g.clone());
        let p = g.point(0, Rational::frac(1, 4)).unwrap();
        let q = g.point(1, Rational::frac(1, 6)).unwrap();
        assert_eq!(m.point_distance(&p, &p), Rational::zero());
        assert_eq!(m.point_distance(&p, &q), Rational::frac(1, 4) + Rational::frac(1, 6));
        assert_eq!(m.point_distance(&GraphPoint::Vertex(0), &GraphPoint::Vertex(2)), Rational::frac(5, 6));
    }

    #[test]
    fn exact_fallback_agrees_with_scaled() {
        let huge = Rational::new(BigInt::from(1u8), num_traits::pow(BigInt::from(10u8), 30)).unwrap();
        let ids: Vec<String> = vec!["x".into(), "y".into(), "z".into()];
        let g = MetricGraph::from_id_edges(
            ids,
            &[
                ("x".into(), "y".into(), huge.clone()),
                ("y".into(), "z".into(), Rational::frac(1, 3)),
                ("x".into(), "z".into(), Rational::one()),
            ],
        )
        .unwrap();
        assert!(g.scaled.is_none());
        let row = g.distances_from(0);
        assert_eq!(row.get(2), huge + Rational::frac(1, 3));
    }
}
