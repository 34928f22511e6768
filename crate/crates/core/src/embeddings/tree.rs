//! Finite dyadic trees of vectors: the δ-tree conditions, and tree systems
//! with separating functionals.

use serde::Serialize;

use super::tail_indices;
use crate::error::{Error, Result};
use crate::norm::{self, Norm};
use crate::rational::Rational;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TreeViolation {
    pub j: usize,
    pub kind: &'static str,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct TreeCheck {
    pub depth: u32,
    /// `min_j ‖y_{2j} − y_j‖` over internal nodes.
    pub delta: Rational,
    pub degenerate: bool,
    pub violations: Vec<TreeViolation>,
}

impl TreeCheck {
    pub fn pass(&self) -> bool {
        self.violations.is_empty() && !self.degenerate
    }
}

fn depth_of(len: usize) -> Result<u32> {
    let n = (len + 1).trailing_zeros();
    if len < 3 || (len + 1) != 1usize << n {
        return Err(Error::precondition(format!(
            "a tree of depth n >= 1 has 2^(n+1) - 1 vectors, got {len}"
        )));
    }
    Ok(n - 1)
}

fn exact_norm(norm: &Norm) -> Result<()> {
    if norm.is_exact() {
        Ok(())
    } else {
        Err(Error::Unsupported(format!(
            "tree checks need a norm with exact rational values, not {}",
            norm.tag()
        )))
    }
}

/// Checks `y_j = (y_{2j} + y_{2j+1})/2` exactly for every internal node and
/// returns the largest δ with `‖y_{2j} − y_j‖ = ‖y_{2j+1} − y_j‖ ≥ δ`.
/// `vectors[i]` holds `y_{i+1}`.
pub fn verify_delta_tree(vectors: &[Vec<Rational>], norm: &Norm) -> Result<TreeCheck> {
    exact_norm(norm)?;
    let depth = depth_of(vectors.len())?;
    let dim = vectors[0].len();
    for v in vectors {
        if v.len() != dim {
            return Err(Error::Dimension {
                expected: dim,
                found: v.len(),
            });
        }
    }
    norm.check_dim(dim)?;
    let y = |j: usize| &vectors[j - 1];
    let half = Rational::frac(1, 2);
    let mut violations = Vec::new();
    let mut delta: Option<Rational> = None;
    for j in 1..(1usize << depth) {
        let mid = norm::scale(&norm::add(y(2 * j), y(2 * j + 1)), &half);
        if &mid != y(j) {
            violations.push(TreeViolation {
                j,
                kind: "averaging",
                detail: format!("y_{j} differs from the mean of y_{} and y_{}", 2 * j, 2 * j + 1),
            });
        }
        let left = norm.eval_exact(&norm::sub(y(2 * j), y(j)))?;
        let right = norm.eval_exact(&norm::sub(y(2 * j + 1), y(j)))?;
        if left != right {
            violations.push(TreeViolation {
                j,
                kind: "unequal sides",
                detail: format!("{left} != {right}"),
            });
        }
        let side = Rational::min_of(&left, &right);
        delta = Some(match delta {
            Some(d) => Rational::min_of(&d, &side),
            None => side,
        });
    }
    let delta = delta.expect("depth >= 1 has an internal node");
    Ok(TreeCheck {
        depth,
        degenerate: delta.is_zero(),
        delta,
        violations,
    })
}

/// A verified δ-tree with `δ > 0`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DeltaTree {
    vectors: Vec<Vec<Rational>>,
    #[serde(skip)]
    norm: Norm,
    delta: Rational,
    depth: u32,
}

impl DeltaTree {
    pub fn new(vectors: Vec<Vec<Rational>>, norm: Norm) -> Result<Self> {
        let check = verify_delta_tree(&vectors, &norm)?;
        if let Some(v) = check.violations.first() {
            return Err(Error::precondition(format!("not a δ-tree: {} at j = {}: {}", v.kind, v.j, v.detail)));
        }
        if check.degenerate {
            return Err(Error::precondition("not a δ-tree: some children coincide with their parent (δ = 0)"));
        }
        Ok(DeltaTree {
            vectors,
            norm,
            delta: check.delta,
            depth: check.depth,
        })
    }

    /// `y_j`, 1-based.
    pub fn y(&self, j: usize) -> &[Rational] {
        &self.vectors[j - 1]
    }

    pub fn vectors(&self) -> &[Vec<Rational>] {
        &self.vectors
    }

    pub fn norm(&self) -> &Norm {
        &self.norm
    }

    pub fn delta(&self) -> &Rational {
        &self.delta
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.vectors[0].len()
    }

    /// The same tree moved by `t`; translation keeps the δ-tree conditions.
    pub fn translated(&self, t: &[Rational]) -> DeltaTree {
        DeltaTree {
            vectors: self.vectors.iter().map(|v| norm::add(v, t)).collect(),
            ..self.clone()
        }
    }
}

/// A tree together with a functional for every internal node `j` that
/// separates the tail of `y_{2j}` (values of modulus `≥ 1 − ε`) from the tail
/// of `y_{2j+1}` (values of modulus `≤ ε`).
#[derive(Clone, Debug, Serialize)]
pub struct SeparatedTreeSystem {
    pub tree: DeltaTree,
    /// `functionals[j - 1]` belongs to internal node `j`.
    pub functionals: Vec<Vec<Rational>>,
    pub epsilon: Rational,
}

#[derive(Clone, Debug, Serialize)]
pub struct SeparationCheck {
    /// Smallest ε for which every tail inequality holds.
    pub needed_epsilon: Rational,
    pub max_functional_norm: Rational,
    pub max_vector_norm: Rational,
    pub pass: bool,
}

impl SeparatedTreeSystem {
    pub fn new(tree: DeltaTree, functionals: Vec<Vec<Rational>>, epsilon: Rational) -> Result<Self> {
        let sys = SeparatedTreeSystem {
            tree,
            functionals,
            epsilon,
        };
        let check = verify_separation(&sys)?;
        if !check.pass {
            return Err(Error::precondition(format!(
                "tail separation needs ε = {} (declared {}), functional norms up to {}",
                check.needed_epsilon, sys.epsilon, check.max_functional_norm
            )));
        }
        Ok(sys)
    }

    pub fn depth(&self) -> u32 {
        self.tree.depth()
    }
}

/// Recomputes the tail inequalities and the functional norms exactly.
pub fn verify_separation(sys: &SeparatedTreeSystem) -> Result<SeparationCheck> {
    let tree = &sys.tree;
    let norm = tree.norm();
    let max = tree.len();
    let internal = max / 2;
    if sys.functionals.len() != internal {
        return Err(Error::precondition(format!(
            "{} functionals for {internal} internal nodes",
            sys.functionals.len()
        )));
    }
    if sys.epsilon.is_negative() {
        return Err(Error::precondition("ε must be nonnegative"));
    }
    let one = Rational::one();
    let mut needed = Rational::zero();
    let mut fmax = Rational::zero();
    for j in 1..=internal {
        let phi = &sys.functionals[j - 1];
        let fnorm = norm.dual_norm(phi)?.exact().cloned().expect("exact norm");
        fmax = Rational::max_of(&fmax, &fnorm);
        for m in tail_indices(2 * j, max) {
            let gap = &one - norm.pairing(tree.y(m), phi)?.abs();
            needed = Rational::max_of(&needed, &gap);
        }
        for m in tail_indices(2 * j + 1, max) {
            needed = Rational::max_of(&needed, &norm.pairing(tree.y(m), phi)?.abs());
        }
    }
    let mut vmax = Rational::zero();
    for v in tree.vectors() {
        vmax = Rational::max_of(&vmax, &norm.eval_exact(v)?);
    }
    Ok(SeparationCheck {
        pass: needed <= sys.epsilon && fmax <= one,
        needed_epsilon: needed,
        max_functional_norm: fmax,
        max_vector_norm: vmax,
    })
}

/// The dyadic model in weighted ℓ₁ of dimension `2^n` with weights `2^-n`:
/// for `2^k ≤ j < 2^(k+1)`, `y_j` equals `2^k` on the coordinates of the
/// `(j − 2^k)`-th dyadic interval of length `2^-k` and vanishes elsewhere.
/// The functional of node `j` is the indicator of the left half of its
/// interval, so the system separates with `ε = 0`.
pub fn dyadic_l1_tree(n: u32) -> Result<SeparatedTreeSystem> {
    if n == 0 {
        return Err(Error::precondition("dyadic tree depth must be at least 1"));
    }
    if n > 20 {
        return Err(Error::Resource {
            what: "dyadic tree dimension 2^n".into(),
            requested: 1u128 << n,
            cap: 1 << 20,
        });
    }
    let dim = 1usize << n;
    let count = (1usize << (n + 1)) - 1;
    let interval = |j: usize| {
        let k = usize::BITS - 1 - j.leading_zeros();
        let width = dim >> k;
        let start = (j - (1 << k)) * width;
        (k, start..start + width)
    };
    let vectors: Vec<Vec<Rational>> = (1..=count)
        .map(|j| {
            let (k, range) = interval(j);
            let mut v = norm::zeros(dim);
            for c in range {
                v[c] = Rational::int(1 << k);
            }
            v
        })
        .collect();
    let functionals = (1..(1usize << n))
        .map(|j| {
            let (_, left) = interval(2 * j);
            let mut phi = norm::zeros(dim);
            for c in left {
                phi[c] = Rational::one();
            }
            phi
        })
        .collect();
    let norm = Norm::weighted_l1(vec![Rational::inv_pow(2, n); dim])?;
    let tree = DeltaTree::new(vectors, norm)?;
    SeparatedTreeSystem::new(tree, functionals, Rational::zero())
}
