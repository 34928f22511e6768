//! Exact finite-scale constructions around bilipschitz embeddings of diamond
//! and Laakso graphs: generators, geodesic witnesses, martingale extraction
//! with certified bounds, tree-based embeddings and summing-norm tests.

pub mod acceptance;
pub mod embeddings;
pub mod error;
pub mod generators;
pub mod geodesics;
pub mod graph;
pub mod martingale;
pub mod norm;
pub mod rational;
pub mod reflexivity;
pub mod space;

pub use error::{Error, Result};
pub use graph::{GraphMetric, GraphPoint, Metric, MetricGraph};
pub use norm::{Norm, Scalar};
pub use rational::Rational;
pub use space::{shortest_path_metric, FiniteMetricSpace};
