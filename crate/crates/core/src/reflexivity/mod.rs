//! The submetric space `X_Δ`: `ℓ₁` in which a pair `(x, y)` is active when
//! `‖x − y‖₁ ≤ Δ‖x − y‖_s`, with `‖·‖_s` the summing norm.
//!
//! Everything works on finitely supported vectors at a fixed dimension.

mod lp;

pub use lp::{basic_constant, basic_constant_by_vertices, convex_hull_separation, BasicConstant, HullDistance};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::norm::{self, l1_norm, summing_norm, Norm};
use crate::rational::Rational;

fn padded(x: &[Rational], y: &[Rational]) -> Vec<Rational> {
    let n = x.len().max(y.len());
    let zero = Rational::zero();
    (0..n)
        .map(|i| x.get(i).unwrap_or(&zero) - y.get(i).unwrap_or(&zero))
        .collect()
}

/// `‖x − y‖₁ ≤ Δ‖x − y‖_s`; shorter vectors are padded with zeros.
pub fn is_active(x: &[Rational], y: &[Rational], delta: &Rational) -> bool {
    let z = padded(x, y);
    l1_norm(&z) <= delta * summing_norm(&z)
}

/// Positive and negative parts `z = x₁ − x₂`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PositiveDecomposition {
    pub positive: Vec<Rational>,
    pub negative: Vec<Rational>,
}

impl PositiveDecomposition {
    /// `‖x₁‖₁ = ‖x₁‖_s`, `‖x₂‖₁ = ‖x₂‖_s`, `‖z‖₁ = ‖x₁‖₁ + ‖x₂‖₁` and
    /// `z = x₁ − x₂`, evaluated exactly.
    pub fn identities(&self, z: &[Rational]) -> [bool; 4] {
        let (p, n) = (&self.positive, &self.negative);
        [
            l1_norm(p) == summing_norm(p),
            l1_norm(n) == summing_norm(n),
            l1_norm(z) == l1_norm(p) + l1_norm(n),
            p.len() == z.len() && norm::sub(p, n) == z,
        ]
    }
}

pub fn positive_decomposition(z: &[Rational]) -> PositiveDecomposition {
    let zero = Rational::zero();
    PositiveDecomposition {
        positive: z.iter().map(|x| Rational::max_of(x, &zero)).collect(),
        negative: z.iter().map(|x| Rational::max_of(&-x.clone(), &zero)).collect(),
    }
}

/// A normalized sequence `y_i` with a norm-one functional taking the value
/// `θ` on each of them, and a basic constant `B` for the sequence.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReflexivityWitness {
    pub vectors: Vec<Vec<Rational>>,
    pub functional: Vec<Rational>,
    pub theta: Rational,
    pub norm: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<Rational>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basic_constant: Option<Rational>,
}

impl ReflexivityWitness {
    /// `y_i = e_1 + … + e_i` in `ℓ∞ⁿ` with the first coordinate functional,
    /// `θ = 1`.
    pub fn prefix_vectors(n: usize) -> Self {
        let vectors = (1..=n)
            .map(|i| (0..n).map(|j| Rational::int((j < i) as i64)).collect())
            .collect();
        let mut functional = norm::zeros(n);
        functional[0] = Rational::one();
        ReflexivityWitness {
            vectors,
            functional,
            theta: Rational::one(),
            norm: "linf".into(),
            weights: None,
            basic_constant: None,
        }
    }

    pub fn norm(&self) -> Result<Norm> {
        Norm::from_tag(&self.norm, self.weights.clone())
    }

    /// Checks `‖y_i‖ = 1`, `‖f‖ = 1`, `f(y_i) = θ` and `0 < θ ≤ 1` exactly.
    pub fn verify(&self) -> Result<()> {
        let norm = self.norm()?;
        if !norm.is_exact() {
            return Err(Error::Unsupported("witness checks need an exact norm".into()));
        }
        let one = Rational::one();
        if !self.theta.is_positive() || self.theta > one {
            return Err(Error::precondition(format!("θ = {} is not in (0, 1]", self.theta)));
        }
        if self.vectors.is_empty() {
            return Err(Error::precondition("witness has no vectors"));
        }
        let fnorm = norm.dual_norm(&self.functional)?;
        if fnorm.exact() != Some(&one) {
            return Err(Error::precondition(format!("functional has norm {fnorm:?}, not 1")));
        }
        for (i, y) in self.vectors.iter().enumerate() {
            let len = norm.eval_exact(y)?;
            if len != one {
                return Err(Error::precondition(format!("‖y_{}‖ = {len}, not 1", i + 1)));
            }
            let val = norm.pairing(y, &self.functional)?;
            if val != self.theta {
                return Err(Error::precondition(format!("f(y_{}) = {val}, not θ = {}", i + 1, self.theta)));
            }
        }
        Ok(())
    }

    /// `T u = Σ u_i y_i`.
    pub fn apply(&self, u: &[Rational]) -> Vec<Rational> {
        let mut out = norm::zeros(self.vectors[0].len());
        for (c, y) in u.iter().zip(&self.vectors) {
            if !c.is_zero() {
                out = norm::add(&out, &norm::scale(y, c));
            }
        }
        out
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PairViolation {
    pub u: Vec<Rational>,
    pub v: Vec<Rational>,
    pub image_distance: Rational,
    pub l1_distance: Rational,
    pub side: &'static str,
}

#[derive(Clone, Debug, Serialize)]
pub struct ForwardReport {
    /// `θ / (B·Δ)`.
    pub lower_constant: Rational,
    pub samples: usize,
    pub min_ratio: Option<Rational>,
    pub max_ratio: Option<Rational>,
    pub violations: Vec<PairViolation>,
    pub pass: bool,
}

/// Draws an active pair: `u` uniform on a small grid and `v = u − z` with
/// `z` biased toward one sign, retried until `(u, v)` is active.
pub fn sample_active_pair(rng: &mut ChaCha8Rng, n: usize, delta: &Rational) -> (Vec<Rational>, Vec<Rational>) {
    let grid = |rng: &mut ChaCha8Rng, r: i64| Rational::frac(rng.gen_range(-r..=r), 4);
    loop {
        let u: Vec<Rational> = (0..n).map(|_| grid(rng, 16)).collect();
        let bias: f64 = rng.gen_range(0.5..1.0);
        let sign = if rng.gen_bool(0.5) { 1 } else { -1 };
        let z: Vec<Rational> = (0..n)
            .map(|_| {
                if rng.gen_bool(0.3) {
                    return Rational::zero();
                }
                let m = Rational::frac(rng.gen_range(1..=12), 4);
                if rng.gen_bool(bias) {
                    m * Rational::int(sign)
                } else {
                    m * Rational::int(-sign)
                }
            })
            .collect();
        let v = norm::sub(&u, &z);
        if is_active(&u, &v, delta) {
            return (u, v);
        }
    }
}

/// For `T e_i = y_i`, checks `(θ/(BΔ))·‖u − v‖₁ ≤ ‖Tu − Tv‖ ≤ ‖u − v‖₁` on
/// seeded active pairs, plus any pairs given explicitly.
pub fn forward_embedding_check(
    w: &ReflexivityWitness,
    delta: &Rational,
    samples: usize,
    seed: u64,
    extra: &[(Vec<Rational>, Vec<Rational>)],
) -> Result<ForwardReport> {
    w.verify()?;
    let b = w
        .basic_constant
        .clone()
        .ok_or_else(|| Error::precondition("witness has no basic constant"))?;
    if b < Rational::one() {
        return Err(Error::precondition(format!("basic constant {b} is below 1")));
    }
    if delta < &Rational::one() {
        return Err(Error::precondition(format!("Δ = {delta} is below 1")));
    }
    let norm = w.norm()?;
    let n = w.vectors.len();
    let lower_constant = &w.theta / (&b * delta);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs: Vec<(Vec<Rational>, Vec<Rational>)> = extra.to_vec();
    for (u, v) in extra {
        if u.len() != n || v.len() != n {
            return Err(Error::Dimension {
                expected: n,
                found: u.len().max(v.len()),
            });
        }
        if !is_active(u, v, delta) {
            return Err(Error::precondition("an explicitly given pair is not active"));
        }
    }
    pairs.extend((0..samples).map(|_| sample_active_pair(&mut rng, n, delta)));
    let mut violations = Vec::new();
    let mut min_ratio: Option<Rational> = None;
    let mut max_ratio: Option<Rational> = None;
    for (u, v) in &pairs {
        let z = norm::sub(u, v);
        let l1 = l1_norm(&z);
        let image = norm.eval_exact(&w.apply(&z))?;
        let mut fail = |side| {
            violations.push(PairViolation {
                u: u.clone(),
                v: v.clone(),
                image_distance: image.clone(),
                l1_distance: l1.clone(),
                side,
            })
        };
        if image < &lower_constant * &l1 {
            fail("lower");
        }
        if image > l1 {
            fail("upper");
        }
        if l1.is_positive() {
            let r = &image / &l1;
            min_ratio = Some(min_ratio.map_or(r.clone(), |m| Rational::min_of(&m, &r)));
            max_ratio = Some(max_ratio.map_or(r.clone(), |m| Rational::max_of(&m, &r)));
        }
    }
    Ok(ForwardReport {
        lower_constant,
        samples: pairs.len(),
        min_ratio,
        max_ratio,
        pass: violations.is_empty(),
        violations,
    })
}

/// The two legs `y → y + x₁ → y + z` of the Lipschitz estimate and their
/// verdicts against `C`.
#[derive(Clone, Debug, Serialize)]
pub struct LipschitzChain {
    pub lhs: Rational,
    pub leg_positive: Rational,
    pub leg_negative: Rational,
    pub bound: Rational,
    /// Both legs join active pairs and respect `C` times their ℓ₁ length.
    pub legs_ok: bool,
    pub pass: bool,
}

/// Bounds `‖T(y + z) − T(y)‖` by `C‖z‖₁` through the active pairs
/// `(y, y + x₁)` and `(y + x₁, y + z)`, with `z = x₁ − x₂`.
pub fn lipschitz_via_decomposition(
    t: impl Fn(&[Rational]) -> Vec<Rational>,
    norm: &Norm,
    c: &Rational,
    delta: &Rational,
    y: &[Rational],
    z: &[Rational],
) -> Result<LipschitzChain> {
    let parts = positive_decomposition(z);
    let mid = norm::add(y, &parts.positive);
    let end = norm::add(y, z);
    let (ty, tmid, tend) = (t(y), t(&mid), t(&end));
    let leg_positive = norm.eval_exact(&norm::sub(&tmid, &ty))?;
    let leg_negative = norm.eval_exact(&norm::sub(&tend, &tmid))?;
    let lhs = norm.eval_exact(&norm::sub(&tend, &ty))?;
    let bound = c * l1_norm(z);
    let legs_ok = is_active(&mid, y, delta)
        && is_active(&end, &mid, delta)
        && leg_positive <= c * l1_norm(&parts.positive)
        && leg_negative <= c * l1_norm(&parts.negative);
    Ok(LipschitzChain {
        pass: legs_ok && lhs <= &leg_positive + &leg_negative && lhs <= bound,
        lhs,
        leg_positive,
        leg_negative,
        bound,
        legs_ok,
    })
}
