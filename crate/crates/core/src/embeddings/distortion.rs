//! Brute-force Lipschitz constants of an embedding over a pair set.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::Serialize;

use super::Embedding;
use crate::error::{Error, Result};
use crate::norm::{self, Norm, Scalar, DEFAULT_TOLERANCE};
use crate::rational::Rational;
use crate::space::FiniteMetricSpace;

#[derive(Clone, Copy, Debug)]
pub enum PairSelection<'a> {
    All,
    Listed(&'a [(usize, usize)]),
}

#[derive(Clone, Debug, Serialize)]
pub struct DistortionReport {
    pub lower: Scalar,
    pub upper: Scalar,
    /// `upper / lower`; absent when the map collapses some pair.
    pub distortion: Option<Scalar>,
    pub pairs: u64,
    pub lower_pair: (String, String),
    pub upper_pair: (String, String),
    pub method: &'static str,
}

/// Min and max of `‖f(x) − f(y)‖ / d(x, y)` over pairs of points of
/// `space`. Exact for rational coordinates under ℓ₁, ℓ∞, weighted ℓ₁ and the
/// summing norm; toleranced under ℓ₂.
pub fn distortion(f: &Embedding, space: &FiniteMetricSpace, pairs: PairSelection<'_>) -> Result<DistortionReport> {
    let n = space.len();
    let images: Vec<&[Rational]> = space.ids().iter().map(|id| f.image(id)).collect::<Result<_>>()?;
    if let PairSelection::Listed(p) = pairs {
        if let Some(&(x, y)) = p.iter().find(|&&(x, y)| x >= n || y >= n || x == y) {
            return Err(Error::InvalidPoint(format!("({x}, {y}) is not a pair of distinct points")));
        }
    }
    let count = match pairs {
        PairSelection::All => (n as u64) * (n as u64).saturating_sub(1) / 2,
        PairSelection::Listed(p) => p.len() as u64,
    };
    if count == 0 {
        return Err(Error::precondition("distortion needs at least one pair"));
    }
    for x in 0..n {
        for y in x + 1..n {
            if !space.d(x, y).is_positive() {
                return Err(Error::precondition(format!(
                    "points {} and {} are at distance zero",
                    space.ids()[x],
                    space.ids()[y]
                )));
            }
        }
    }

    let ((lower, lp), (upper, up), method) = if let Some(form) = IntegerForm::build(f, &images, space) {
        let (lo, hi) = scan(n, pairs, |x, y| form.ratio(x, y))?;
        (form.finish(lo), form.finish(hi), "integer")
    } else if f.norm.is_exact() {
        let (lo, hi) = scan(n, pairs, |x, y| {
            let diff = norm::sub(images[x], images[y]);
            Ok(ExactRatio(f.norm.eval_exact(&diff)? / space.d(x, y)))
        })?;
        ((Scalar::Exact(lo.0 .0), lo.1), (Scalar::Exact(hi.0 .0), hi.1), "exact")
    } else {
        let (lo, hi) = scan(n, pairs, |x, y| {
            let diff = norm::sub(images[x], images[y]);
            Ok(FloatRatio(f.norm.eval(&diff)?.to_f64() / space.d(x, y).to_f64()))
        })?;
        ((Scalar::Approx(lo.0 .0), lo.1), (Scalar::Approx(hi.0 .0), hi.1), "approx")
    };
    let id_pair = |(x, y): (usize, usize)| (space.ids()[x].clone(), space.ids()[y].clone());
    let distortion = match (&lower, &upper) {
        (Scalar::Exact(l), Scalar::Exact(u)) if l.is_positive() => Some(Scalar::Exact(u / l)),
        (Scalar::Exact(_), Scalar::Exact(_)) => None,
        (l, u) if l.to_f64() > DEFAULT_TOLERANCE => Some(Scalar::Approx(u.to_f64() / l.to_f64())),
        _ => None,
    };
    Ok(DistortionReport {
        lower,
        upper,
        distortion,
        pairs: count,
        lower_pair: id_pair(lp),
        upper_pair: id_pair(up),
        method,
    })
}

trait Ratio: Send {
    fn cmp_ratio(&self, other: &Self) -> Ordering;
}

struct ExactRatio(Rational);

impl Ratio for ExactRatio {
    fn cmp_ratio(&self, other: &Self) -> Ordering {
        self.0.cmp(&other.0)
    }
}

struct FloatRatio(f64);

impl Ratio for FloatRatio {
    fn cmp_ratio(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// `num / den`, compared by cross-multiplication.
struct IntRatio {
    num: i128,
    den: i128,
}

impl Ratio for IntRatio {
    fn cmp_ratio(&self, other: &Self) -> Ordering {
        (self.num * other.den).cmp(&(other.num * self.den))
    }
}

type Extreme<R> = (R, (usize, usize));

/// Smallest and largest ratio with the pair attaining each. Ties go to the
/// lexicographically first pair, so the answer does not depend on how the
/// work is split across threads.
fn scan<R, F>(n: usize, pairs: PairSelection<'_>, ratio: F) -> Result<(Extreme<R>, Extreme<R>)>
where
    R: Ratio,
    F: Fn(usize, usize) -> Result<R> + Sync,
{
    type Acc<R> = Option<(Extreme<R>, Extreme<R>)>;
    fn pick<R: Ratio>(a: (Extreme<R>, Extreme<R>), b: (Extreme<R>, Extreme<R>)) -> (Extreme<R>, Extreme<R>) {
        let lo = match a.0 .0.cmp_ratio(&b.0 .0).then(a.0 .1.cmp(&b.0 .1)) {
            Ordering::Greater => b.0,
            _ => a.0,
        };
        let hi = match a.1 .0.cmp_ratio(&b.1 .0).then(b.1 .1.cmp(&a.1 .1)) {
            Ordering::Less => b.1,
            _ => a.1,
        };
        (lo, hi)
    }
    let single = |x: usize, y: usize| -> Result<(Extreme<R>, Extreme<R>)> {
        let (x, y) = (x.min(y), x.max(y));
        Ok(((ratio(x, y)?, (x, y)), (ratio(x, y)?, (x, y))))
    };
    let merge = |a: Result<Acc<R>>, b: Result<Acc<R>>| -> Result<Acc<R>> {
        Ok(match (a?, b?) {
            (Some(a), Some(b)) => Some(pick(a, b)),
            (a, b) => a.or(b),
        })
    };
    let result = match pairs {
        PairSelection::Listed(p) => p
            .par_iter()
            .map(|&(x, y)| single(x, y).map(Some))
            .reduce(|| Ok(None), merge),
        PairSelection::All => (0..n)
            .into_par_iter()
            .map(|x| {
                let mut acc: Acc<R> = None;
                for y in x + 1..n {
                    let t = single(x, y)?;
                    acc = Some(match acc {
                        Some(a) => pick(a, t),
                        None => t,
                    });
                }
                Ok(acc)
            })
            .reduce(|| Ok(None), merge),
    };
    Ok(result?.expect("pair set is not empty"))
}

/// Coordinates, weights and distances cleared of denominators, so that
/// `‖f(x) − f(y)‖ / d(x, y) = (N / raw) · factor` with integers `N`, `raw`.
struct IntegerForm<'a> {
    coords: Vec<Vec<i64>>,
    weights: Option<Vec<i64>>,
    kind: Kind,
    space: &'a FiniteMetricSpace,
    factor: Rational,
}

#[derive(Clone, Copy)]
enum Kind {
    Sum,
    Max,
    Summing,
}

/// Keeps every cross product inside `i128`.
const LIMIT: i128 = 1 << 60;

fn common_denominator<'r>(vals: impl Iterator<Item = &'r Rational>) -> Rational {
    let mut l = BigInt::from(1);
    for v in vals {
        l = l.lcm(v.denom());
    }
    Rational::from_bigint(l)
}

impl<'a> IntegerForm<'a> {
    fn build(f: &Embedding, images: &[&[Rational]], space: &'a FiniteMetricSpace) -> Option<Self> {
        let (unit, view) = space.scaled()?;
        let n = space.len();
        if (0..n).any(|i| (0..n).any(|j| view.get(i, j) as i128 >= LIMIT)) {
            return None;
        }
        let kind = match f.norm {
            Norm::L1 | Norm::WeightedL1(_) => Kind::Sum,
            Norm::Linf => Kind::Max,
            Norm::Summing => Kind::Summing,
            Norm::L2 => return None,
        };
        let to_int = |r: &Rational, s: &Rational| (r * s).numer().to_i64();
        let d = common_denominator(images.iter().flat_map(|v| v.iter()));
        let coords: Vec<Vec<i64>> = images
            .iter()
            .map(|v| v.iter().map(|x| to_int(x, &d)).collect::<Option<Vec<_>>>())
            .collect::<Option<_>>()?;
        let (weights, wd) = match f.norm.weights() {
            Some(w) => {
                let s = common_denominator(w.iter());
                (Some(w.iter().map(|x| to_int(x, &s)).collect::<Option<Vec<_>>>()?), s)
            }
            None => (None, Rational::one()),
        };
        let cmax = coords.iter().flatten().map(|c| (*c as i128).abs()).max().unwrap_or(0);
        let wmax = weights.as_ref().map_or(1, |w| w.iter().map(|&x| x as i128).max().unwrap_or(1));
        let bound = (f.dim() as i128).checked_mul(wmax)?.checked_mul(2 * cmax)?;
        if bound >= LIMIT {
            return None;
        }
        Some(IntegerForm {
            coords,
            weights,
            kind,
            space,
            factor: unit.recip() / (d * wd),
        })
    }

    fn ratio(&self, x: usize, y: usize) -> Result<IntRatio> {
        let diffs = self.coords[x].iter().zip(&self.coords[y]).map(|(p, q)| *p as i128 - *q as i128);
        let num = match (self.kind, &self.weights) {
            (Kind::Sum, Some(w)) => diffs.zip(w).map(|(t, w)| t.abs() * *w as i128).sum(),
            (Kind::Sum, None) => diffs.map(i128::abs).sum(),
            (Kind::Max, _) => diffs.map(i128::abs).max().unwrap_or(0),
            (Kind::Summing, _) => {
                let (mut s, mut best) = (0i128, 0i128);
                for t in diffs {
                    s += t;
                    best = best.max(s.abs());
                }
                best
            }
        };
        let (_, view) = self.space.scaled().expect("integer table");
        Ok(IntRatio {
            num,
            den: view.get(x, y) as i128,
        })
    }

    fn finish(&self, e: Extreme<IntRatio>) -> (Scalar, (usize, usize)) {
        let r = Rational::from(e.0.num) / Rational::from(e.0.den) * &self.factor;
        (Scalar::Exact(r), e.1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::shortest_path_metric;
    use crate::generators::{diamond, DEFAULT_VERTEX_CAP};

    fn q(a: i64, b: i64) -> Rational {
        Rational::frac(a, b)
    }

    fn d1_isometric() -> (Embedding, FiniteMetricSpace) {
        let d1 = diamond(1, DEFAULT_VERTEX_CAP).unwrap();
        let imgs = vec![
            vec![q(0, 1), q(0, 1)],
            vec![q(1, 1), q(1, 1)],
            vec![q(1, 1), q(0, 1)],
            vec![q(0, 1), q(1, 1)],
        ];
        let norm = Norm::weighted_l1(vec![q(1, 2), q(1, 2)]).unwrap();
        let e = Embedding::new(d1.graph().ids().to_vec(), imgs, norm).unwrap();
        (e, shortest_path_metric(d1.graph()))
    }

    #[test]
    fn isometric_d1() {
        let (e, s) = d1_isometric();
        let r = distortion(&e, &s, PairSelection::All).unwrap();
        assert_eq!(r.method, "integer");
        assert_eq!((r.lower, r.upper), (Scalar::Exact(q(1, 1)), Scalar::Exact(q(1, 1))));
        assert_eq!(r.distortion, Some(Scalar::Exact(q(1, 1))));
        assert_eq!(r.pairs, 6);
    }

    #[test]
    fn scaling_keeps_distortion() {
        let (e, s) = d1_isometric();
        let mut bent = e.clone();
        bent = Embedding::new(
            bent.ids().to_vec(),
            bent.images().iter().enumerate().map(|(i, v)| if i == 2 { vec![q(1, 1), q(1, 3)] } else { v.clone() }).collect(),
            bent.norm.clone(),
        )
        .unwrap();
        let r1 = distortion(&bent, &s, PairSelection::All).unwrap();
        let r3 = distortion(&bent.scaled(&q(3, 1)), &s, PairSelection::All).unwrap();
        assert_eq!(r1.distortion, r3.distortion);
        assert_eq!(r3.lower, r1.lower.mul(&q(3, 1)));
        assert_eq!(r3.upper, r1.upper.mul(&q(3, 1)));
    }

    #[test]
    fn integer_path_matches_exact_and_float_paths() {
        let (e, s) = d1_isometric();
        let bent = Embedding::new(
            e.ids().to_vec(),
            vec![
                vec![q(0, 1), q(0, 1)],
                vec![q(5, 4), q(1, 1)],
                vec![q(1, 1), q(-1, 3)],
                vec![q(1, 7), q(1, 1)],
            ],
            Norm::Summing,
        )
        .unwrap();
        let fast = distortion(&bent, &s, PairSelection::All).unwrap();
        assert_eq!(fast.method, "integer");
        // Independent recomputation pair by pair.
        let mut lo: Option<Rational> = None;
        let mut hi: Option<Rational> = None;
        for x in 0..4 {
            for y in x + 1..4 {
                let r = Norm::Summing.eval_exact(&norm::sub(&bent.images()[x], &bent.images()[y])).unwrap() / s.d(x, y);
                lo = Some(lo.map_or(r.clone(), |l| Rational::min_of(&l, &r)));
                hi = Some(hi.map_or(r.clone(), |h| Rational::max_of(&h, &r)));
            }
        }
        assert_eq!(fast.lower, Scalar::Exact(lo.unwrap()));
        assert_eq!(fast.upper, Scalar::Exact(hi.unwrap()));
        let l2 = Embedding::new(e.ids().to_vec(), bent.images().to_vec(), Norm::L2).unwrap();
        assert_eq!(distortion(&l2, &s, PairSelection::All).unwrap().method, "approx");
    }

    #[test]
    fn listed_pairs_and_errors() {
        let (e, s) = d1_isometric();
        let r = distortion(&e, &s, PairSelection::Listed(&[(2, 3)])).unwrap();
        assert_eq!(r.lower_pair, ("a".to_string(), "b".to_string()));
        assert!(distortion(&e, &s, PairSelection::Listed(&[])).is_err());
        assert!(distortion(&e, &s, PairSelection::Listed(&[(1, 1)])).is_err());
    }

    #[test]
    fn collapsed_pair_has_no_distortion() {
        let (e, s) = d1_isometric();
        let flat = Embedding::new(e.ids().to_vec(), vec![vec![q(0, 1), q(0, 1)]; 4], e.norm.clone()).unwrap();
        let r = distortion(&flat, &s, PairSelection::All).unwrap();
        assert_eq!(r.lower, Scalar::Exact(q(0, 1)));
        assert!(r.distortion.is_none());
    }
}
