//! Diamond graphs built from dyadic trees of vectors.
//!
//! The bottom of `D_0` goes to `0` and the top to `y_1`. Each level-`k` edge
//! from `x` to `y` whose image difference is `y_j / 2^k` becomes the
//! parallelogram `f(a) = f(x) + y_{2j}/2^(k+1)`, `f(b) = f(x) + y_{2j+1}/2^(k+1)`.
//! With the tree indices stored on the edge nodes (`2j, 2j+1, 2j+1, 2j` for
//! the four children) every edge of every level carries `y_t / 2^k` for its
//! own index `t`.

use serde::Serialize;

use super::{distortion, in_tail, DeltaTree, Embedding, PairScope, PairSelection, SeparatedTreeSystem};
use crate::error::{Error, Result};
use crate::generators::{ActivePairSet, DiamondGraph, SideClass};
use crate::norm::{self, Scalar};
use crate::rational::Rational;
use crate::space::shortest_path_metric;

fn tree_images(graph: &DiamondGraph, y: impl Fn(usize) -> Vec<Rational>, dim: usize) -> Vec<Vec<Rational>> {
    let mut images = vec![Vec::new(); graph.graph().vertex_count()];
    images[graph.bottom()] = norm::zeros(dim);
    images[graph.top()] = y(1);
    for quad in graph.quads() {
        let node = graph.node(quad.node);
        let j = node.tree_index as usize;
        let step = Rational::inv_pow(2, node.level + 1);
        let base = images[quad.u].clone();
        images[quad.a] = norm::add(&base, &norm::scale(&y(2 * j), &step));
        images[quad.b] = norm::add(&base, &norm::scale(&y(2 * j + 1), &step));
    }
    images
}

fn check_depth(graph: &DiamondGraph, depth: u32) -> Result<()> {
    if graph.level() > depth {
        return Err(Error::precondition(format!(
            "D_{} needs a tree of depth at least {}, got {depth}",
            graph.level(),
            graph.level()
        )));
    }
    Ok(())
}

/// The parallelogram embedding of `D_m` built from a separated tree system.
/// Certified upper constant `max ‖y_j‖` and lower constant
/// `(1 − 3ε) / (2(1 + ε))` over all pairs.
pub fn stegall_diamond_embedding(sys: &SeparatedTreeSystem, graph: &DiamondGraph) -> Result<Embedding> {
    check_depth(graph, sys.depth())?;
    let eps = &sys.epsilon;
    let one = Rational::one();
    let lower = (&one - Rational::int(3) * eps) / (Rational::int(2) * (&one + eps));
    if !lower.is_positive() {
        return Err(Error::precondition(format!(
            "with ε = {eps} the separation bound (1 − 3ε)/(2(1 + ε)) = {lower} certifies nothing; ε must be below 1/3"
        )));
    }
    let tree = &sys.tree;
    let mut upper = Rational::zero();
    for v in tree.vectors() {
        upper = Rational::max_of(&upper, &tree.norm().eval_exact(v)?);
    }
    let images = tree_images(graph, |j| tree.y(j).to_vec(), tree.dim());
    let mut e = Embedding::new(graph.graph().ids().to_vec(), images, tree.norm().clone())?;
    e.space = Some(format!("diamond {}", graph.level()));
    e.certify(lower, upper, PairScope::All)?;
    Ok(e)
}

/// The translation applied before building from a δ-tree.
#[derive(Clone, Debug, Serialize)]
pub struct Shift {
    /// `max_j ‖x_j − x_1‖`.
    pub radius: Rational,
    /// Multiple `r` of the first unit coordinate vector added after
    /// subtracting `x_1`.
    pub r: Rational,
    pub translation: Vec<Rational>,
}

#[derive(Clone, Debug, Serialize)]
pub struct FromTreeEmbedding {
    #[serde(skip)]
    pub embedding: Embedding,
    #[serde(skip)]
    pub active: ActivePairSet,
    pub shift: Option<Shift>,
    pub min_norm: Rational,
    pub max_norm: Rational,
    /// Smallest `‖f(x) − f(y)‖ / d(x, y)` over active pairs.
    pub lambda: Rational,
    /// Largest ratio over active pairs divided by `lambda`.
    pub c: Rational,
}

fn norm_range(tree: &DeltaTree) -> Result<(Rational, Rational)> {
    let mut lo: Option<Rational> = None;
    let mut hi = Rational::zero();
    for v in tree.vectors() {
        let n = tree.norm().eval_exact(v)?;
        hi = Rational::max_of(&hi, &n);
        lo = Some(lo.map_or(n.clone(), |l| Rational::min_of(&l, &n)));
    }
    Ok((lo.expect("tree is not empty"), hi))
}

/// A translation making `min ‖x_j‖ ≥ max ‖x_j‖ / 4`, or `None` when the
/// tree already satisfies it. The tree is moved by `−x_1 + r·e/‖e‖` for the
/// first coordinate vector `e` and the least `r` on the grid `R/4, 2R/4, …`
/// that works, `R = max ‖x_j − x_1‖`; `r = 2R` always does.
fn choose_shift(tree: &DeltaTree) -> Result<Option<Shift>> {
    let (lo, hi) = norm_range(tree)?;
    if lo.is_positive() && Rational::int(4) * &lo >= hi {
        return Ok(None);
    }
    let norm = tree.norm();
    let x1 = tree.y(1).to_vec();
    let mut radius = Rational::zero();
    for v in tree.vectors() {
        radius = Rational::max_of(&radius, &norm.eval_exact(&norm::sub(v, &x1))?);
    }
    let mut e = norm::zeros(tree.dim());
    e[0] = Rational::one();
    let e_len = norm.eval_exact(&e)?;
    let unit = norm::scale(&e, &e_len.recip());
    for k in 1..=8 {
        let r = &radius * Rational::frac(k, 4);
        let translation = norm::sub(&norm::scale(&unit, &r), &x1);
        let (lo, hi) = norm_range(&tree.translated(&translation))?;
        if lo.is_positive() && Rational::int(4) * &lo >= hi {
            return Ok(Some(Shift { radius, r, translation }));
        }
    }
    unreachable!("r = 2R puts every norm in [R, 3R]")
}

/// Builds `D_m` from a δ-tree (after the shift, if one is needed) and
/// measures the partial bilipschitz constants over the active pairs:
/// `d ≤ ‖f(x) − f(y)‖ / λ ≤ C·d`.
pub fn tree_to_diamond_partial_embedding(tree: &DeltaTree, graph: &DiamondGraph) -> Result<FromTreeEmbedding> {
    check_depth(graph, tree.depth())?;
    let shift = choose_shift(tree)?;
    let shifted = match &shift {
        Some(s) => tree.translated(&s.translation),
        None => tree.clone(),
    };
    let (min_norm, max_norm) = norm_range(&shifted)?;
    if !min_norm.is_positive() {
        return Err(Error::precondition("some tree vector has norm zero after the shift"));
    }
    let images = tree_images(graph, |j| shifted.y(j).to_vec(), shifted.dim());
    let mut embedding = Embedding::new(graph.graph().ids().to_vec(), images, shifted.norm().clone())?;
    embedding.space = Some(format!("diamond {}", graph.level()));
    let active = graph.active_pairs(true);
    let list: Vec<(usize, usize)> = active.iter().collect();
    let space = shortest_path_metric(graph.graph());
    let report = distortion(&embedding, &space, PairSelection::Listed(&list))?;
    let (Scalar::Exact(lambda), Scalar::Exact(top)) = (report.lower, report.upper) else {
        return Err(Error::Unsupported("partial bilipschitz constants need an exact norm".into()));
    };
    if !lambda.is_positive() {
        return Err(Error::precondition("the construction collapses an active pair"));
    }
    embedding.certify(lambda.clone(), top.clone(), PairScope::Active)?;
    Ok(FromTreeEmbedding {
        embedding,
        active,
        shift,
        min_norm,
        max_norm,
        c: &top / &lambda,
        lambda,
    })
}

/// Edges whose image difference is not `y_t / 2^k` for their recorded index.
pub fn edge_correspondence(graph: &DiamondGraph, f: &Embedding, vectors: &[Vec<Rational>]) -> Vec<String> {
    let mut bad = Vec::new();
    for k in 0..=graph.level() {
        for &i in graph.nodes_at_level(k) {
            let node = graph.node(i);
            let t = node.tree_index as usize;
            let diff = norm::sub(&f.images()[node.upper], &f.images()[node.lower]);
            let want = norm::scale(&vectors[t - 1], &Rational::inv_pow(2, k));
            if diff != want {
                bad.push(format!("edge {:?} (index {t}, level {k})", node.address));
            }
        }
    }
    bad
}

/// `f(hi) − f(lo)` written as `Σ y_t / 2^k` along a monotone path.
#[derive(Clone, Debug, Serialize)]
pub struct TailExpansion {
    pub from: String,
    pub to: String,
    pub tail_of: usize,
    pub coefficient_sum: Rational,
    pub distance: Rational,
    pub indices_in_tail: bool,
    pub sums_to_difference: bool,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct StructuralCheck {
    pub pair: (String, String),
    pub class: SideClass,
    pub expansions: Vec<TailExpansion>,
    pub pass: bool,
}

fn expand(graph: &DiamondGraph, f: &Embedding, vectors: &[Vec<Rational>], lo: usize, hi: usize, tail_of: usize) -> Result<TailExpansion> {
    let ids = graph.graph().ids();
    let path = graph
        .monotone_path(graph.level(), lo, hi)
        .ok_or_else(|| Error::precondition(format!("no monotone path from {} up to {}", ids[lo], ids[hi])))?;
    let mut sum = norm::zeros(f.dim());
    let mut coefficient_sum = Rational::zero();
    let mut indices_in_tail = true;
    for e in path {
        let node = graph.node(e);
        let t = node.tree_index as usize;
        let coeff = Rational::inv_pow(2, node.level);
        indices_in_tail &= in_tail(tail_of, t);
        sum = norm::add(&sum, &norm::scale(&vectors[t - 1], &coeff));
        coefficient_sum += &coeff;
    }
    let distance = graph.d(lo, hi);
    let sums_to_difference = sum == norm::sub(&f.images()[hi], &f.images()[lo]);
    Ok(TailExpansion {
        from: ids[lo].clone(),
        to: ids[hi].clone(),
        tail_of,
        pass: indices_in_tail && sums_to_difference && coefficient_sum == distance,
        coefficient_sum,
        distance,
        indices_in_tail,
        sums_to_difference,
    })
}

/// Checks, for one vertex pair of a tree-built embedding, the expansions the
/// lower bound rests on. In the smallest subdiamond `D(u, v)` with
/// quadrilateral `u, a, v, b` containing the pair:
///
/// - same side `s`: `f(s) − f(w)` over the tail of edge `(u, s)` and
///   `f(z) − f(s)` over the tail of edge `(s, v)`;
/// - different sides, both nearer the same end `p`: each of `f(w) − f(p)`,
///   `f(z) − f(p)` over the tail of the edge of its own side at `p`;
/// - different sides, one nearer each end: `f(w) − f(u)` over the tail of
///   `(u, s_w)` and `f(z) − f(s_z)` over the tail of `(s_z, v)`.
///
/// In each expansion the coefficients are nonnegative and sum to the graph
/// distance.
pub fn structural_check(graph: &DiamondGraph, f: &Embedding, vectors: &[Vec<Rational>], w: usize, z: usize) -> Result<StructuralCheck> {
    let ids = graph.graph().ids();
    let sub = graph.smallest_subdiamond(w, z)?;
    let pair = (ids[w].clone(), ids[z].clone());
    let Some(quad) = sub.quad else {
        // Only D_0 has no quadrilateral; its one edge is y_1 itself.
        let (lo, hi) = if graph.height(w) <= graph.height(z) { (w, z) } else { (z, w) };
        let e = expand(graph, f, vectors, lo, hi, 1)?;
        return Ok(StructuralCheck {
            pair,
            class: sub.class,
            pass: e.pass,
            expansions: vec![e],
        });
    };
    let ch = graph.node(sub.id.node).children.expect("quad node has children");
    let index = |c: usize| graph.node(c).tree_index as usize;
    let on_a = |x: usize| graph.in_subdiamond(ch[0], x) || graph.in_subdiamond(ch[1], x);
    // Child edges (u, s) and (s, v) of the side containing x.
    let side = |x: usize| if on_a(x) { (ch[0], ch[1], quad.a) } else { (ch[2], ch[3], quad.b) };
    let mut expansions = Vec::new();
    match sub.class {
        SideClass::SameSide => {
            let (lo, hi) = if graph.height(w) <= graph.height(z) { (w, z) } else { (z, w) };
            let (low_edge, high_edge, s) = if on_a(w) && on_a(z) {
                (ch[0], ch[1], quad.a)
            } else {
                (ch[2], ch[3], quad.b)
            };
            expansions.push(expand(graph, f, vectors, lo, s, index(low_edge))?);
            expansions.push(expand(graph, f, vectors, s, hi, index(high_edge))?);
        }
        SideClass::DifferentSidesA => {
            for x in [w, z] {
                let (low_edge, high_edge, _) = side(x);
                if graph.d(x, quad.u) <= graph.d(x, quad.v) {
                    expansions.push(expand(graph, f, vectors, quad.u, x, index(low_edge))?);
                } else {
                    expansions.push(expand(graph, f, vectors, x, quad.v, index(high_edge))?);
                }
            }
        }
        SideClass::DifferentSidesB => {
            let (near_u, near_v) = if graph.d(w, quad.u) < graph.d(w, quad.v) { (w, z) } else { (z, w) };
            let (low_edge, _, _) = side(near_u);
            let (_, high_edge, s) = side(near_v);
            expansions.push(expand(graph, f, vectors, quad.u, near_u, index(low_edge))?);
            expansions.push(expand(graph, f, vectors, s, near_v, index(high_edge))?);
        }
    }
    Ok(StructuralCheck {
        pair,
        class: sub.class,
        pass: expansions.iter().all(|e| e.pass),
        expansions,
    })
}
