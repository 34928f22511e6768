//! Diamond graphs `D_n`.
//!
//! `D_0` is a single edge of length 1 from the bottom `u` to the top `v`.
//! `D_n` replaces every edge `(x, y)` of `D_{n-1}` by a quadrilateral
//! `x, a, y, b` with sides of half the length. Every edge at every level is
//! addressed by the digit string of its position in the replacement tree:
//! the children of edge `E` are `E0 = (x, a)`, `E1 = (a, y)`, `E2 = (x, b)`
//! and `E3 = (b, y)`, and the new corners are named `Ea` and `Eb`. Vertex ids
//! therefore never change between levels.
//!
//! Each edge also carries a dyadic tree index: the root edge is 1, and an
//! edge with index `j` has children `2j, 2j+1, 2j+1, 2j` in the order above.
//! An embedding built from a dyadic tree maps the edge with index `j` at
//! level `k` to the vector `y_j / 2^k`.

use std::collections::BTreeSet;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{Edge, GraphMetric, GraphPoint, MetricGraph};
use crate::rational::Rational;

pub const DEFAULT_VERTEX_CAP: u128 = 10_000_000;

pub fn diamond_vertex_count(n: u32) -> u128 {
    let four_n = 4u128.checked_pow(n).unwrap_or(u128::MAX);
    2 + 2 * ((four_n - 1) / 3)
}

pub fn diamond_edge_count(n: u32) -> u128 {
    4u128.checked_pow(n).unwrap_or(u128::MAX)
}

/// One edge of some level of the replacement tree.
#[derive(Clone, Debug)]
pub struct EdgeNode {
    pub address: String,
    pub level: u32,
    /// Endpoint closer to the bottom.
    pub lower: usize,
    pub upper: usize,
    pub tree_index: u64,
    pub parent: Option<usize>,
    /// Children in address order, present when the edge is replaced.
    pub children: Option<[usize; 4]>,
    pub quad: Option<usize>,
}

/// The quadrilateral `u, a, v, b` replacing one edge; its sides have
/// length `2^-level`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Quad {
    pub u: usize,
    pub a: usize,
    pub v: usize,
    pub b: usize,
    pub level: u32,
    pub node: usize,
}

pub struct DiamondGraph {
    level: u32,
    metric: GraphMetric,
    nodes: Vec<EdgeNode>,
    by_level: Vec<Vec<usize>>,
    quads: Vec<Quad>,
    vertex_level: Vec<u32>,
    vertex_origin: Vec<Option<usize>>,
    leaves: Vec<usize>,
}

pub const BOTTOM: usize = 0;
pub const TOP: usize = 1;

/// `D_n`, refusing when its vertex count exceeds `cap`.
pub fn diamond(n: u32, cap: u128) -> Result<DiamondGraph> {
    let count = diamond_vertex_count(n);
    if count > cap {
        return Err(Error::Resource {
            what: format!("diamond graph D_{n} vertices"),
            requested: count,
            cap,
        });
    }
    let mut ids: Vec<String> = vec!["u".into(), "v".into()];
    let mut vertex_level = vec![0, 0];
    let mut vertex_origin = vec![None, None];
    let mut nodes = vec![EdgeNode {
        address: String::new(),
        level: 0,
        lower: BOTTOM,
        upper: TOP,
        tree_index: 1,
        parent: None,
        children: None,
        quad: None,
    }];
    let mut by_level = vec![vec![0usize]];
    let mut quads = Vec::new();
    for k in 1..=n {
        let mut next = Vec::with_capacity(by_level[k as usize - 1].len() * 4);
        for &p in &by_level[k as usize - 1] {
            let (addr, x, y, j) = {
                let e = &nodes[p];
                (e.address.clone(), e.lower, e.upper, e.tree_index)
            };
            let a = ids.len();
            ids.push(format!("{addr}a"));
            let b = ids.len();
            ids.push(format!("{addr}b"));
            vertex_level.extend([k, k]);
            vertex_origin.extend([Some(p), Some(p)]);
            let specs = [(x, a, 2 * j), (a, y, 2 * j + 1), (x, b, 2 * j + 1), (b, y, 2 * j)];
            let first = nodes.len();
            for (digit, (lo, hi, t)) in specs.into_iter().enumerate() {
                nodes.push(EdgeNode {
                    address: format!("{addr}{digit}"),
                    level: k,
                    lower: lo,
                    upper: hi,
                    tree_index: t,
                    parent: Some(p),
                    children: None,
                    quad: None,
                });
                next.push(first + digit);
            }
            nodes[p].children = Some([first, first + 1, first + 2, first + 3]);
            nodes[p].quad = Some(quads.len());
            quads.push(Quad {
                u: x,
                a,
                v: y,
                b,
                level: k,
                node: p,
            });
        }
        by_level.push(next);
    }
    let len = Rational::inv_pow(2, n);
    let leaves = by_level[n as usize].clone();
    let edges = leaves
        .iter()
        .map(|&i| Edge {
            u: nodes[i].lower,
            v: nodes[i].upper,
            len: len.clone(),
        })
        .collect();
    let graph = MetricGraph::new(ids, edges)?;
    Ok(DiamondGraph {
        level: n,
        metric: GraphMetric::new(Arc::new(graph)),
        nodes,
        by_level,
        quads,
        vertex_level,
        vertex_origin,
        leaves,
    })
}

/// Unordered vertex pairs, each stored with the smaller index first.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ActivePairSet {
    pub pairs: BTreeSet<(usize, usize)>,
}

impl ActivePairSet {
    pub fn insert(&mut self, x: usize, y: usize) {
        if x != y {
            self.pairs.insert((x.min(y), x.max(y)));
        }
    }

    pub fn contains(&self, x: usize, y: usize) -> bool {
        self.pairs.contains(&(x.min(y), x.max(y)))
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.pairs.iter().copied()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SideClass {
    SameSide,
    /// Different sides, both points at least as close to the same end.
    DifferentSidesA,
    /// Different sides, one point strictly closer to each end.
    DifferentSidesB,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubdiamondId {
    pub address: String,
    pub level: u32,
    pub u: usize,
    pub v: usize,
    pub node: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subdiamond {
    pub id: SubdiamondId,
    pub quad: Option<Quad>,
    pub class: SideClass,
}

impl DiamondGraph {
    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn graph(&self) -> &MetricGraph {
        self.metric.graph()
    }

    pub fn metric(&self) -> &GraphMetric {
        &self.metric
    }

    pub fn bottom(&self) -> usize {
        BOTTOM
    }

    pub fn top(&self) -> usize {
        TOP
    }

    pub fn nodes(&self) -> &[EdgeNode] {
        &self.nodes
    }

    pub fn node(&self, i: usize) -> &EdgeNode {
        &self.nodes[i]
    }

    /// Tree nodes of the edges of `D_k`, in address order.
    pub fn nodes_at_level(&self, k: u32) -> &[usize] {
        &self.by_level[k as usize]
    }

    pub fn quads(&self) -> &[Quad] {
        &self.quads
    }

    /// Tree node of graph edge `e`.
    pub fn leaf(&self, e: usize) -> usize {
        self.leaves[e]
    }

    /// Level at which vertex `x` first appears.
    pub fn vertex_level(&self, x: usize) -> u32 {
        self.vertex_level[x]
    }

    pub fn d(&self, x: usize, y: usize) -> Rational {
        self.metric.vertex_distance(x, y)
    }

    /// Height above the bottom vertex.
    pub fn height(&self, x: usize) -> Rational {
        self.d(BOTTOM, x)
    }

    /// Pairs of vertices of a common quadrilateral, plus optionally the pair
    /// of endpoints of `D_0`.
    pub fn active_pairs(&self, include_root_pair: bool) -> ActivePairSet {
        let mut set = ActivePairSet::default();
        if include_root_pair {
            set.insert(BOTTOM, TOP);
        }
        for q in &self.quads {
            let c = [q.u, q.a, q.v, q.b];
            for i in 0..4 {
                for j in i + 1..4 {
                    set.insert(c[i], c[j]);
                }
            }
        }
        set
    }

    /// Whether vertex `x` belongs to the subdiamond generated by tree node `node`.
    pub fn in_subdiamond(&self, node: usize, x: usize) -> bool {
        let e = &self.nodes[node];
        if x == e.lower || x == e.upper {
            return true;
        }
        match self.vertex_origin[x] {
            Some(o) => self.nodes[o].level >= e.level && self.nodes[o].address.starts_with(&e.address),
            None => false,
        }
    }

    /// The smallest subdiamond (among those whose quadrilateral is present in
    /// this graph) containing `w` and `z`, with the side classification of
    /// the pair inside it.
    pub fn smallest_subdiamond(&self, w: usize, z: usize) -> Result<Subdiamond> {
        if w == z {
            return Err(Error::precondition("smallest subdiamond needs two distinct vertices"));
        }
        let n = self.graph().vertex_count();
        if w >= n || z >= n {
            return Err(Error::InvalidPoint("vertex index out of range".into()));
        }
        let mut node = 0usize;
        while let Some(children) = self.nodes[node].children {
            let next = children.into_iter().find(|&c| {
                self.nodes[c].children.is_some() && self.in_subdiamond(c, w) && self.in_subdiamond(c, z)
            });
            match next {
                Some(c) => node = c,
                None => break,
            }
        }
        let e = &self.nodes[node];
        let id = SubdiamondId {
            address: e.address.clone(),
            level: e.level,
            u: e.lower,
            v: e.upper,
            node,
        };
        let Some(qi) = e.quad else {
            return Ok(Subdiamond {
                id,
                quad: None,
                class: SideClass::SameSide,
            });
        };
        let quad = self.quads[qi];
        let ch = e.children.expect("replaced edge has children");
        let a_side = |x| self.in_subdiamond(ch[0], x) || self.in_subdiamond(ch[1], x);
        let b_side = |x| self.in_subdiamond(ch[2], x) || self.in_subdiamond(ch[3], x);
        let class = if (a_side(w) && a_side(z)) || (b_side(w) && b_side(z)) {
            SideClass::SameSide
        } else {
            let (wu, wv) = (self.d(w, quad.u), self.d(w, quad.v));
            let (zu, zv) = (self.d(z, quad.u), self.d(z, quad.v));
            if (wu <= wv && zu <= zv) || (wu >= wv && zu >= zv) {
                SideClass::DifferentSidesA
            } else {
                SideClass::DifferentSidesB
            }
        };
        Ok(Subdiamond {
            id,
            quad: Some(quad),
            class,
        })
    }

    /// Edge nodes of `D_k` whose lower endpoint is `x`, in address order.
    pub fn upward_edges(&self, k: u32, x: usize) -> Vec<usize> {
        self.by_level[k as usize]
            .iter()
            .copied()
            .filter(|&i| self.nodes[i].lower == x)
            .collect()
    }

    /// A monotone path of level-`k` edges from `lo` up to `hi`, first in
    /// address order. Both endpoints must be vertices of `D_k` with `hi`
    /// reachable upward from `lo` along a geodesic.
    pub fn monotone_path(&self, k: u32, lo: usize, hi: usize) -> Option<Vec<usize>> {
        let target_h = self.height(hi);
        let mut path = Vec::new();
        let mut stack: Vec<(usize, Vec<usize>, usize)> = vec![(lo, self.upward_edges(k, lo), 0)];
        while let Some(top) = stack.last_mut() {
            if top.0 == hi {
                return Some(path);
            }
            if top.2 < top.1.len() {
                let e = top.1[top.2];
                top.2 += 1;
                let y = self.nodes[e].upper;
                let hy = self.height(y);
                if hy <= target_h && self.d(y, hi) == &target_h - &hy {
                    path.push(e);
                    stack.push((y, self.upward_edges(k, y), 0));
                }
            } else {
                stack.pop();
                path.pop();
            }
        }
        None
    }

    pub fn point(&self, x: usize) -> GraphPoint {
        GraphPoint::Vertex(x)
    }
}

/// Result of comparing distances of shared vertices between two levels.
#[derive(Clone, Debug, Serialize)]
pub struct InclusionReport {
    pub lower_level: u32,
    pub higher_level: u32,
    pub pairs_checked: u64,
    pub mismatches: Vec<(String, String, Rational, Rational)>,
    pub isometric: bool,
}

/// Checks that the identity on vertex ids is an isometry from the lower
/// level into the higher one. Levels must be equal or consecutive.
pub fn inclusion_isometry_check(
    lower: (&GraphMetric, u32),
    higher: (&GraphMetric, u32),
) -> Result<InclusionReport> {
    let (lm, ll) = lower;
    let (hm, hl) = higher;
    if hl != ll && hl != ll + 1 {
        return Err(Error::precondition(format!(
            "inclusion check needs equal or consecutive levels, got {ll} and {hl}"
        )));
    }
    let lg = lm.graph();
    let hg = hm.graph();
    let map: Vec<usize> = lg.ids().iter().map(|id| hg.vertex(id)).collect::<Result<_>>()?;
    let n = lg.vertex_count();
    let mut mismatches = Vec::new();
    let mut checked = 0u64;
    for i in 0..n {
        let lr = lm.row(i);
        let hr = hm.row(map[i]);
        for j in i + 1..n {
            checked += 1;
            let (a, b) = (lr.get(j), hr.get(map[j]));
            if a != b && mismatches.len() < 16 {
                mismatches.push((lg.id(i).to_string(), lg.id(j).to_string(), a, b));
            }
        }
    }
    Ok(InclusionReport {
        lower_level: ll,
        higher_level: hl,
        pairs_checked: checked,
        isometric: mismatches.is_empty(),
        mismatches,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_levels() {
        let d0 = diamond(0, DEFAULT_VERTEX_CAP).unwrap();
        assert_eq!((d0.graph().vertex_count(), d0.graph().edge_count()), (2, 1));
        assert_eq!(d0.graph().edge(0).len, Rational::one());
        let d1 = diamond(1, DEFAULT_VERTEX_CAP).unwrap();
        assert_eq!(d1.graph().ids(), &["u", "v", "a", "b"]);
        assert!(d1.graph().edges().iter().all(|e| e.len == Rational::frac(1, 2)));
        let (a, b) = (d1.graph().vertex("a").unwrap(), d1.graph().vertex("b").unwrap());
        assert_eq!(d1.d(a, b), Rational::one());
    }

    #[test]
    fn resource_cap() {
        assert!(matches!(diamond(3, 20), Err(Error::Resource { requested: 44, cap: 20, .. })));
    }

    #[test]
    fn tree_indices_follow_parallelogram_rule() {
        let d = diamond(2, DEFAULT_VERTEX_CAP).unwrap();
        let idx: Vec<u64> = d.nodes_at_level(1).iter().map(|&i| d.node(i).tree_index).collect();
        assert_eq!(idx, vec![2, 3, 3, 2]);
        let idx2: Vec<u64> = d.nodes_at_level(2)[..4].iter().map(|&i| d.node(i).tree_index).collect();
        assert_eq!(idx2, vec![4, 5, 5, 4]);
    }

    #[test]
    fn subdiamond_examples() {
        let d1 = diamond(1, DEFAULT_VERTEX_CAP).unwrap();
        let g = d1.graph();
        let (u, a, b) = (g.vertex("u").unwrap(), g.vertex("a").unwrap(), g.vertex("b").unwrap());
        let s = d1.smallest_subdiamond(u, a).unwrap();
        assert_eq!(s.id.address, "");
        assert_eq!(s.class, SideClass::SameSide);
        assert_eq!(d1.smallest_subdiamond(a, b).unwrap().class, SideClass::DifferentSidesA);
        assert!(d1.smallest_subdiamond(a, a).is_err());

        let d2 = diamond(2, DEFAULT_VERTEX_CAP).unwrap();
        let g = d2.graph();
        // 0a lies in D(u, a), 3a lies in D(b, v).
        let (w, z) = (g.vertex("0a").unwrap(), g.vertex("3a").unwrap());
        let s = d2.smallest_subdiamond(w, z).unwrap();
        assert_eq!(s.id.address, "");
        assert_eq!(s.class, SideClass::DifferentSidesB);
        let (w, z) = (g.vertex("0a").unwrap(), g.vertex("0b").unwrap());
        let s = d2.smallest_subdiamond(w, z).unwrap();
        assert_eq!(s.id.address, "0");
        assert_eq!(s.id.level, 1);
    }

    #[test]
    fn monotone_path_in_d2() {
        let d = diamond(2, DEFAULT_VERTEX_CAP).unwrap();
        let path = d.monotone_path(1, BOTTOM, TOP).unwrap();
        let addrs: Vec<&str> = path.iter().map(|&i| d.node(i).address.as_str()).collect();
        assert_eq!(addrs, vec!["0", "1"]);
        let a = d.graph().vertex("a").unwrap();
        let b = d.graph().vertex("b").unwrap();
        assert!(d.monotone_path(1, a, b).is_none());
    }
}
