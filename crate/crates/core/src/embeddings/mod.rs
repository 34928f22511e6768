//! Embeddings of finite metric spaces into normed spaces: explicit
//! constructions of diamond graphs from dyadic trees, and brute-force
//! distortion over all pairs or a marked subset.

mod diamond;
mod distortion;
mod tree;

pub use diamond::{
    edge_correspondence, stegall_diamond_embedding, structural_check, tree_to_diamond_partial_embedding,
    FromTreeEmbedding, Shift, StructuralCheck, TailExpansion,
};
pub use distortion::{distortion, DistortionReport, PairSelection};
pub use tree::{dyadic_l1_tree, verify_delta_tree, verify_separation, DeltaTree, SeparatedTreeSystem, SeparationCheck, TreeCheck, TreeViolation};

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generators::{LaaksoGraph, LaaksoPoint};
use crate::graph::{GraphPoint, MetricGraph};
use crate::martingale::PointMap;
use crate::norm::{self, Norm};
use crate::rational::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PairScope {
    All,
    Active,
}

/// Lipschitz constants that hold over the recorded pair set:
/// `lower·d(x, y) ≤ ‖f(x) − f(y)‖ ≤ upper·d(x, y)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certified {
    pub lower: Rational,
    pub upper: Rational,
    pub pairs: PairScope,
}

/// Images of named points, one coordinate vector each.
#[derive(Clone, Debug, PartialEq)]
pub struct Embedding {
    pub space: Option<String>,
    pub norm: Norm,
    ids: Vec<String>,
    images: Vec<Vec<Rational>>,
    index: HashMap<String, usize>,
    certified: Option<Certified>,
}

impl Embedding {
    pub fn new(ids: Vec<String>, images: Vec<Vec<Rational>>, norm: Norm) -> Result<Self> {
        if ids.len() != images.len() {
            return Err(Error::schema(format!("{} ids for {} images", ids.len(), images.len())));
        }
        if let Some(first) = images.first() {
            for v in &images {
                if v.len() != first.len() {
                    return Err(Error::Dimension {
                        expected: first.len(),
                        found: v.len(),
                    });
                }
            }
            norm.check_dim(first.len())?;
        }
        let mut index = HashMap::with_capacity(ids.len());
        for (i, id) in ids.iter().enumerate() {
            if index.insert(id.clone(), i).is_some() {
                return Err(Error::schema(format!("duplicate point id {id:?}")));
            }
        }
        Ok(Embedding {
            space: None,
            norm,
            ids,
            images,
            index,
            certified: None,
        })
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn images(&self) -> &[Vec<Rational>] {
        &self.images
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.images.first().map_or(0, Vec::len)
    }

    pub fn row(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn image(&self, id: &str) -> Result<&[Rational]> {
        self.row(id)
            .map(|i| self.images[i].as_slice())
            .ok_or_else(|| Error::InvalidPoint(format!("no image for {id:?}")))
    }

    pub fn certified(&self) -> Option<&Certified> {
        self.certified.as_ref()
    }

    pub fn certify(&mut self, lower: Rational, upper: Rational, pairs: PairScope) -> Result<()> {
        if lower > upper {
            return Err(Error::precondition(format!(
                "certified lower constant {lower} exceeds upper constant {upper}"
            )));
        }
        self.certified = Some(Certified { lower, upper, pairs });
        Ok(())
    }

    /// The map `x ↦ s·f(x)`; certified constants scale with it.
    pub fn scaled(&self, s: &Rational) -> Embedding {
        let mut out = self.clone();
        out.images = self.images.iter().map(|v| norm::scale(v, s)).collect();
        out.certified = self.certified.as_ref().map(|c| {
            let (lo, hi) = (&c.lower * s.abs(), &c.upper * s.abs());
            Certified {
                lower: lo,
                upper: hi,
                pairs: c.pairs,
            }
        });
        out
    }

    pub fn to_doc(&self) -> EmbeddingDoc {
        EmbeddingDoc {
            space: self.space.clone(),
            norm: self.norm.tag().to_string(),
            weights: self.norm.weights().map(<[Rational]>::to_vec),
            points: self.ids.iter().cloned().zip(self.images.iter().cloned()).collect(),
            certified: self.certified.clone(),
        }
    }

    pub fn from_doc(doc: EmbeddingDoc) -> Result<Self> {
        let norm = Norm::from_tag(&doc.norm, doc.weights)?;
        let (ids, images) = doc.points.into_iter().unzip();
        let mut e = Embedding::new(ids, images, norm)?;
        e.space = doc.space;
        if let Some(c) = doc.certified {
            e.certify(c.lower, c.upper, c.pairs)?;
        }
        Ok(e)
    }
}

/// Serialized embedding:
/// `{"space", "norm", "weights", "points": {id: [r, …]}, "certified"}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmbeddingDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub space: Option<String>,
    pub norm: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<Rational>>,
    pub points: BTreeMap<String, Vec<Rational>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certified: Option<Certified>,
}

/// An embedding of a graph's vertices, extended linearly along each edge.
pub struct GraphEmbedding<'a> {
    embedding: &'a Embedding,
    graph: &'a MetricGraph,
    rows: Vec<usize>,
}

impl<'a> GraphEmbedding<'a> {
    pub fn new(embedding: &'a Embedding, graph: &'a MetricGraph) -> Result<Self> {
        let rows = graph
            .ids()
            .iter()
            .map(|id| {
                embedding
                    .row(id)
                    .ok_or_else(|| Error::InvalidPoint(format!("embedding has no image for vertex {id:?}")))
            })
            .collect::<Result<_>>()?;
        Ok(GraphEmbedding { embedding, graph, rows })
    }
}

impl PointMap<GraphPoint> for GraphEmbedding<'_> {
    fn norm(&self) -> &Norm {
        &self.embedding.norm
    }

    fn image(&self, p: &GraphPoint) -> Result<Vec<Rational>> {
        self.graph.check_point(p)?;
        let images = &self.embedding.images;
        Ok(match p {
            GraphPoint::Vertex(v) => images[self.rows[*v]].clone(),
            GraphPoint::Interior { edge, offset } => {
                let e = self.graph.edge(*edge);
                let (a, b) = (&images[self.rows[e.u]], &images[self.rows[e.v]]);
                let t = offset / &e.len;
                norm::add(a, &norm::scale(&norm::sub(b, a), &t))
            }
        })
    }
}

/// An embedding of the vertices of `X_i`, read through the canonical form
/// of points of the Laakso family. Points first appearing above level `i`
/// have no image.
pub struct LaaksoEmbedding<'a> {
    inner: GraphEmbedding<'a>,
    level: u32,
}

impl<'a> LaaksoEmbedding<'a> {
    pub fn new(embedding: &'a Embedding, graph: &'a LaaksoGraph) -> Result<Self> {
        Ok(LaaksoEmbedding {
            inner: GraphEmbedding::new(embedding, graph.graph())?,
            level: graph.level(),
        })
    }
}

impl PointMap<LaaksoPoint> for LaaksoEmbedding<'_> {
    fn norm(&self) -> &Norm {
        self.inner.norm()
    }

    fn image(&self, p: &LaaksoPoint) -> Result<Vec<Rational>> {
        let p = p.clone().canonical();
        if p.level > self.level {
            return Err(Error::InvalidPoint(format!(
                "embedding covers X_{} but the point lives in X_{}",
                self.level, p.level
            )));
        }
        self.inner.image(&p.at_level(self.level))
    }
}

/// `{j, 2j, 2j+1, 4j, …, 4j+3, …} ∩ [1, max]`, in increasing order.
pub fn tail_indices(j: usize, max: usize) -> Vec<usize> {
    let mut out = Vec::new();
    if j == 0 {
        return out;
    }
    let (mut lo, mut hi) = (j, j);
    while lo <= max {
        out.extend(lo..=hi.min(max));
        lo = lo.saturating_mul(2);
        hi = hi.saturating_mul(2).saturating_add(1);
    }
    out
}

/// Whether `m` lies in the tail of `j`.
pub fn in_tail(j: usize, mut m: usize) -> bool {
    while m > j {
        m /= 2;
    }
    m == j
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{diamond, laakso, laakso2, DEFAULT_VERTEX_CAP};

    fn q(a: i64, b: i64) -> Rational {
        Rational::frac(a, b)
    }

    #[test]
    fn tails() {
        assert_eq!(tail_indices(2, 7), vec![2, 4, 5]);
        assert_eq!(tail_indices(1, 3), vec![1, 2, 3]);
        assert_eq!(tail_indices(6, 6), vec![6]);
        assert_eq!(tail_indices(3, 15), vec![3, 6, 7, 12, 13, 14, 15]);
        for m in 1..64 {
            assert_eq!(in_tail(3, m), tail_indices(3, 63).contains(&m), "m = {m}");
        }
    }

    #[test]
    fn interior_points_interpolate() {
        let d1 = diamond(1, DEFAULT_VERTEX_CAP).unwrap();
        let g = d1.graph();
        let imgs = vec![vec![q(0, 1)], vec![q(1, 1)], vec![q(1, 2)], vec![q(1, 2)]];
        let e = Embedding::new(g.ids().to_vec(), imgs, Norm::L1).unwrap();
        let ge = GraphEmbedding::new(&e, g).unwrap();
        let edge = (0..g.edge_count()).find(|&k| g.edge(k).u == 0).unwrap();
        let p = g.point(edge, q(1, 4)).unwrap();
        let img = ge.image(&p).unwrap();
        let far = &ge.image(&GraphPoint::Vertex(g.edge(edge).v)).unwrap()[0];
        assert_eq!(img, vec![far * q(1, 2)]);
    }

    #[test]
    fn scaling_scales_certificate() {
        let mut e = Embedding::new(vec!["x".into(), "y".into()], vec![vec![q(0, 1)], vec![q(1, 1)]], Norm::L1).unwrap();
        e.certify(q(1, 2), q(1, 1), PairScope::All).unwrap();
        let s = e.scaled(&q(-3, 1));
        assert_eq!(s.certified().unwrap().lower, q(3, 2));
        assert_eq!(s.image("y").unwrap(), &[q(-3, 1)]);
        assert!(e.certify(q(2, 1), q(1, 1), PairScope::All).is_err());
    }

    #[test]
    fn doc_round_trip() {
        let mut e = Embedding::new(
            vec!["b".into(), "a".into()],
            vec![vec![q(1, 3), q(0, 1)], vec![q(-2, 5), q(7, 1)]],
            Norm::weighted_l1(vec![q(1, 2), q(1, 2)]).unwrap(),
        )
        .unwrap();
        e.certify(q(1, 2), q(1, 1), PairScope::Active).unwrap();
        let json = serde_json::to_string(&e.to_doc()).unwrap();
        let back = Embedding::from_doc(serde_json::from_str(&json).unwrap()).unwrap();
        assert_eq!(back.image("b").unwrap(), e.image("b").unwrap());
        assert_eq!(back.certified(), e.certified());
        assert_eq!(back.norm, e.norm);
    }

    #[test]
    fn laakso_points_above_the_embedded_level_have_no_image() {
        let g = laakso2(1, DEFAULT_VERTEX_CAP).unwrap();
        let n = g.graph().vertex_count();
        let images = (0..n).map(|x| vec![g.vertex_pos(x).clone()]).collect();
        let e = Embedding::new(g.graph().ids().to_vec(), images, Norm::L1).unwrap();
        let f = LaaksoEmbedding::new(&e, &g).unwrap();
        let v = LaaksoPoint::vertex(0, laakso::V);
        assert_eq!(f.image(&v).unwrap(), vec![q(1, 1)]);
        let mid = LaaksoPoint {
            level: 1,
            point: g.graph().point(0, q(1, 6)).unwrap(),
        };
        assert_eq!(f.image(&mid).unwrap(), vec![g.pos(&mid.point)]);
        let deep = LaaksoPoint::vertex(2, 7);
        assert!(matches!(f.image(&deep), Err(Error::InvalidPoint(_))));
    }
}
