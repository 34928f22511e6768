//! Builders for the diamond graphs and the second Laakso graphs.

pub mod diamond;
pub mod laakso;

pub use diamond::{
    diamond, diamond_edge_count, diamond_vertex_count, inclusion_isometry_check, ActivePairSet, DiamondGraph,
    EdgeNode, InclusionReport, Quad, SideClass, Subdiamond, SubdiamondId, DEFAULT_VERTEX_CAP,
};
pub use laakso::{laakso2, laakso_counts, twin_at, LaaksoFamily, LaaksoGraph, LaaksoPoint, Pasting};
