//! Finite metric spaces with an exact distance table.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{DistRow, GraphMetric, Metric, MetricGraph};
use crate::rational::Rational;

#[derive(Clone, Debug)]
enum Table {
    /// `d(i, j) = unit * raw[i * n + j]`.
    Scaled { unit: Rational, raw: Vec<u64> },
    Exact(Vec<Rational>),
}

#[derive(Clone, Debug)]
pub struct FiniteMetricSpace {
    ids: Vec<String>,
    index: HashMap<String, usize>,
    table: Table,
}

/// A failed metric axiom, with the points that witness it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MetricViolation {
    pub axiom: &'static str,
    pub points: Vec<String>,
    pub detail: String,
}

impl FiniteMetricSpace {
    /// Builds a space from a full square table. The table is taken as given;
    /// use [`FiniteMetricSpace::violations`] to check the axioms.
    pub fn from_table(ids: Vec<String>, table: Vec<Vec<Rational>>) -> Result<Self> {
        let n = ids.len();
        if table.len() != n || table.iter().any(|r| r.len() != n) {
            return Err(Error::schema(format!("distance table must be {n}x{n}")));
        }
        let index = index_of(&ids)?;
        Ok(FiniteMetricSpace {
            ids,
            index,
            table: Table::Exact(table.into_iter().flatten().collect()),
        })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn d(&self, i: usize, j: usize) -> Rational {
        let n = self.ids.len();
        match &self.table {
            Table::Scaled { unit, raw } => unit * Rational::from(raw[i * n + j]),
            Table::Exact(t) => t[i * n + j].clone(),
        }
    }

    /// Integer form of the table, `d(i, j) = unit * raw(i, j)`, when available.
    pub fn scaled(&self) -> Option<(&Rational, ScaledView<'_>)> {
        match &self.table {
            Table::Scaled { unit, raw } => Some((unit, ScaledView { n: self.ids.len(), raw })),
            Table::Exact(_) => None,
        }
    }

    pub fn diameter(&self) -> Rational {
        match &self.table {
            Table::Scaled { unit, raw } => unit * Rational::from(raw.iter().copied().max().unwrap_or(0)),
            Table::Exact(t) => t.iter().max().cloned().unwrap_or_else(Rational::zero),
        }
    }

    /// All violated axioms: symmetry, zero diagonal, positivity and (for at
    /// most `triangle_limit` points) the triangle inequality over all triples.
    pub fn violations(&self, triangle_limit: usize) -> Vec<MetricViolation> {
        let n = self.len();
        let mut out = Vec::new();
        for i in 0..n {
            if !self.d(i, i).is_zero() {
                out.push(MetricViolation {
                    axiom: "zero diagonal",
                    points: vec![self.ids[i].clone()],
                    detail: format!("d = {}", self.d(i, i)),
                });
            }
            for j in i + 1..n {
                let (a, b) = (self.d(i, j), self.d(j, i));
                if a != b {
                    out.push(MetricViolation {
                        axiom: "symmetry",
                        points: vec![self.ids[i].clone(), self.ids[j].clone()],
                        detail: format!("{a} != {b}"),
                    });
                }
                if !a.is_positive() {
                    out.push(MetricViolation {
                        axiom: "positivity",
                        points: vec![self.ids[i].clone(), self.ids[j].clone()],
                        detail: format!("d = {a}"),
                    });
                }
            }
        }
        if n <= triangle_limit {
            out.extend(self.triangle_violations());
        }
        out
    }

    fn triangle_violations(&self) -> Vec<MetricViolation> {
        let n = self.len();
        (0..n)
            .into_par_iter()
            .flat_map_iter(|x| {
                let mut found = Vec::new();
                for y in 0..n {
                    let dxy = self.d(x, y);
                    for z in 0..n {
                        let dxz = self.d(x, z);
                        let via = &dxy + &self.d(y, z);
                        if dxz > via {
                            found.push(MetricViolation {
                                axiom: "triangle",
                                points: vec![self.ids[x].clone(), self.ids[y].clone(), self.ids[z].clone()],
                                detail: format!("{dxz} > {via}"),
                            });
                        }
                    }
                }
                found
            })
            .collect()
    }
}

/// Borrowed integer distance table.
#[derive(Clone, Copy, Debug)]
pub struct ScaledView<'a> {
    n: usize,
    raw: &'a [u64],
}

impl ScaledView<'_> {
    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.raw[i * self.n + j]
    }
}

fn index_of(ids: &[String]) -> Result<HashMap<String, usize>> {
    let mut index = HashMap::with_capacity(ids.len());
    for (i, id) in ids.iter().enumerate() {
        if index.insert(id.clone(), i).is_some() {
            return Err(Error::schema(format!("duplicate point id {id:?}")));
        }
    }
    Ok(index)
}

/// Exact all-pairs distances between the vertices of a connected graph.
pub fn shortest_path_metric(graph: &MetricGraph) -> FiniteMetricSpace {
    let n = graph.vertex_count();
    let rows: Vec<DistRow> = (0..n).into_par_iter().map(|s| graph.distances_from(s)).collect();
    let common_unit = match rows.first() {
        Some(DistRow::Scaled { unit, .. }) => Some(unit.clone()),
        _ => None,
    };
    let table = match common_unit {
        Some(unit) => {
            let mut raw = Vec::with_capacity(n * n);
            for r in &rows {
                match r {
                    DistRow::Scaled { d, .. } => raw.extend_from_slice(d),
                    DistRow::Exact(_) => unreachable!("all rows share one representation"),
                }
            }
            Table::Scaled { unit, raw }
        }
        None => Table::Exact(rows.iter().flat_map(|r| (0..n).map(move |j| r.get(j))).collect()),
    };
    FiniteMetricSpace {
        ids: graph.ids().to_vec(),
        index: graph.ids().iter().enumerate().map(|(i, s)| (s.clone(), i)).collect(),
        table,
    }
}

/// Largest vertex distance, computed one source row at a time.
pub fn graph_diameter(metric: &GraphMetric) -> Rational {
    let n = metric.graph().vertex_count();
    (0..n)
        .into_par_iter()
        .map(|s| metric.graph().distances_from(s).max())
        .max()
        .unwrap_or_else(Rational::zero)
}

impl Metric for FiniteMetricSpace {
    type Point = usize;

    fn distance(&self, a: &usize, b: &usize) -> Rational {
        self.d(*a, *b)
    }

    fn describe(&self, p: &usize) -> String {
        self.ids[*p].clone()
    }
}

/// Serialized table: `{"points": [...], "distances": [[r, ...], ...]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceDoc {
    pub points: Vec<String>,
    pub distances: Vec<Vec<Rational>>,
}

impl FiniteMetricSpace {
    pub fn to_doc(&self) -> SpaceDoc {
        let n = self.len();
        SpaceDoc {
            points: self.ids.clone(),
            distances: (0..n).map(|i| (0..n).map(|j| self.d(i, j)).collect()).collect(),
        }
    }

    pub fn from_doc(doc: SpaceDoc) -> Result<Self> {
        FiniteMetricSpace::from_table(doc.points, doc.distances)
    }
}
