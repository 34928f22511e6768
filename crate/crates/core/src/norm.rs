//! The norms used by the constructions: ℓ₁, ℓ₂, ℓ∞, weighted ℓ₁ and the
//! summing norm `sup_k |a_1 + … + a_k|`.
//!
//! Every norm except ℓ₂ is evaluated exactly on rational coordinates. ℓ₂ is
//! evaluated in floating point and compared with a tolerance.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::Rational;

/// Default absolute tolerance for comparisons involving floating-point values.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Norm {
    L1,
    L2,
    Linf,
    /// `Σ w_i |x_i|` with fixed positive weights.
    WeightedL1(Vec<Rational>),
    Summing,
}

/// A norm value: exact where the norm allows it, otherwise a float.
#[derive(Clone, Debug, PartialEq)]
pub enum Scalar {
    Exact(Rational),
    Approx(f64),
}

impl Scalar {
    pub fn zero() -> Self {
        Scalar::Exact(Rational::zero())
    }

    pub fn exact(&self) -> Option<&Rational> {
        match self {
            Scalar::Exact(r) => Some(r),
            Scalar::Approx(_) => None,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Scalar::Exact(_))
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Scalar::Exact(r) => r.to_f64(),
            Scalar::Approx(x) => *x,
        }
    }

    pub fn add(&self, other: &Scalar) -> Scalar {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => Scalar::Exact(a + b),
            _ => Scalar::Approx(self.to_f64() + other.to_f64()),
        }
    }

    pub fn sub(&self, other: &Scalar) -> Scalar {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => Scalar::Exact(a - b),
            _ => Scalar::Approx(self.to_f64() - other.to_f64()),
        }
    }

    pub fn mul(&self, r: &Rational) -> Scalar {
        match self {
            Scalar::Exact(a) => Scalar::Exact(a * r),
            Scalar::Approx(x) => Scalar::Approx(x * r.to_f64()),
        }
    }

    pub fn div(&self, r: &Rational) -> Scalar {
        match self {
            Scalar::Exact(a) => Scalar::Exact(a / r),
            Scalar::Approx(x) => Scalar::Approx(x / r.to_f64()),
        }
    }

    /// Exact comparison when both sides are exact; otherwise values within
    /// `tol` of each other compare equal.
    pub fn compare(&self, other: &Scalar, tol: f64) -> Ordering {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => a.cmp(b),
            _ => {
                let (a, b) = (self.to_f64(), other.to_f64());
                if (a - b).abs() <= tol {
                    Ordering::Equal
                } else if a < b {
                    Ordering::Less
                } else {
                    Ordering::Greater
                }
            }
        }
    }

    pub fn ge(&self, other: &Scalar, tol: f64) -> bool {
        self.compare(other, tol) != Ordering::Less
    }

    pub fn le(&self, other: &Scalar, tol: f64) -> bool {
        self.compare(other, tol) != Ordering::Greater
    }

    pub fn max(self, other: Scalar, tol: f64) -> Scalar {
        if other.compare(&self, tol) == Ordering::Greater {
            other
        } else {
            self
        }
    }
}

impl From<Rational> for Scalar {
    fn from(r: Rational) -> Self {
        Scalar::Exact(r)
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Exact(r) => write!(f, "{r}"),
            Scalar::Approx(x) => write!(f, "{x:e}"),
        }
    }
}

impl Serialize for Scalar {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Scalar::Exact(r) => r.serialize(s),
            Scalar::Approx(x) => s.serialize_f64(*x),
        }
    }
}

impl<'de> Deserialize<'de> for Scalar {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Exact(Rational),
            Approx(f64),
        }
        Ok(match Repr::deserialize(d)? {
            Repr::Exact(r) => Scalar::Exact(r),
            Repr::Approx(x) => Scalar::Approx(x),
        })
    }
}

pub fn l1_norm(v: &[Rational]) -> Rational {
    v.iter().map(Rational::abs).sum()
}

pub fn linf_norm(v: &[Rational]) -> Rational {
    v.iter().map(Rational::abs).max().unwrap_or_else(Rational::zero)
}

pub fn summing_norm(v: &[Rational]) -> Rational {
    let mut prefix = Rational::zero();
    let mut best = Rational::zero();
    for x in v {
        prefix += x;
        let a = prefix.abs();
        if a > best {
            best = a;
        }
    }
    best
}

impl Norm {
    pub fn weighted_l1(weights: Vec<Rational>) -> Result<Norm> {
        if let Some(w) = weights.iter().find(|w| !w.is_positive()) {
            return Err(Error::schema(format!("weights must be positive, found {w}")));
        }
        Ok(Norm::WeightedL1(weights))
    }

    pub fn tag(&self) -> &'static str {
        match self {
            Norm::L1 => "l1",
            Norm::L2 => "l2",
            Norm::Linf => "linf",
            Norm::WeightedL1(_) => "weighted_l1",
            Norm::Summing => "summing",
        }
    }

    pub fn from_tag(tag: &str, weights: Option<Vec<Rational>>) -> Result<Norm> {
        let norm = match tag {
            "l1" => Norm::L1,
            "l2" => Norm::L2,
            "linf" => Norm::Linf,
            "summing" => Norm::Summing,
            "weighted_l1" => {
                let w = weights.ok_or_else(|| Error::schema("weighted_l1 needs \"weights\""))?;
                return Norm::weighted_l1(w);
            }
            other => return Err(Error::schema(format!("unknown norm tag {other:?}"))),
        };
        if matches!(&weights, Some(w) if !w.is_empty()) {
            return Err(Error::schema(format!("norm {tag} takes no weights")));
        }
        Ok(norm)
    }

    pub fn weights(&self) -> Option<&[Rational]> {
        match self {
            Norm::WeightedL1(w) => Some(w),
            _ => None,
        }
    }

    /// True when the norm value of a rational vector is itself rational.
    pub fn is_exact(&self) -> bool {
        !matches!(self, Norm::L2)
    }

    pub fn check_dim(&self, len: usize) -> Result<()> {
        match self {
            Norm::WeightedL1(w) if w.len() != len => Err(Error::Dimension {
                expected: w.len(),
                found: len,
            }),
            _ => Ok(()),
        }
    }

    pub fn eval(&self, v: &[Rational]) -> Result<Scalar> {
        self.check_dim(v.len())?;
        Ok(match self {
            Norm::L1 => Scalar::Exact(l1_norm(v)),
            Norm::Linf => Scalar::Exact(linf_norm(v)),
            Norm::Summing => Scalar::Exact(summing_norm(v)),
            Norm::WeightedL1(w) => Scalar::Exact(w.iter().zip(v).map(|(w, x)| w * x.abs()).sum()),
            Norm::L2 => {
                let sq: Rational = v.iter().map(|x| x * x).sum();
                Scalar::Approx(sq.to_f64().sqrt())
            }
        })
    }

    pub fn eval_exact(&self, v: &[Rational]) -> Result<Rational> {
        match self.eval(v)? {
            Scalar::Exact(r) => Ok(r),
            Scalar::Approx(_) => Err(Error::Unsupported(format!(
                "norm {} has no exact value on rationals",
                self.tag()
            ))),
        }
    }

    pub fn eval_f64(&self, v: &[f64]) -> Result<f64> {
        self.check_dim(v.len())?;
        Ok(match self {
            Norm::L1 => v.iter().map(|x| x.abs()).sum(),
            Norm::L2 => v.iter().map(|x| x * x).sum::<f64>().sqrt(),
            Norm::Linf => v.iter().fold(0.0, |m, x| m.max(x.abs())),
            Norm::WeightedL1(w) => w.iter().zip(v).map(|(w, x)| w.to_f64() * x.abs()).sum(),
            Norm::Summing => {
                let mut prefix = 0.0f64;
                let mut best = 0.0f64;
                for x in v {
                    prefix += x;
                    best = best.max(prefix.abs());
                }
                best
            }
        })
    }

    /// The duality pairing `⟨y, x⟩`. For weighted ℓ₁ the pairing carries the
    /// weights, `Σ w_i y_i x_i`, so the dual unit ball is `max |x_i| ≤ 1`.
    pub fn pairing(&self, y: &[Rational], x: &[Rational]) -> Result<Rational> {
        if y.len() != x.len() {
            return Err(Error::Dimension {
                expected: y.len(),
                found: x.len(),
            });
        }
        self.check_dim(y.len())?;
        Ok(match self {
            Norm::WeightedL1(w) => w.iter().zip(y.iter().zip(x)).map(|(w, (a, b))| w * a * b).sum(),
            _ => y.iter().zip(x).map(|(a, b)| a * b).sum(),
        })
    }

    /// Norm of a functional under [`Norm::pairing`].
    pub fn dual_norm(&self, x: &[Rational]) -> Result<Scalar> {
        self.check_dim(x.len())?;
        Ok(match self {
            Norm::L1 | Norm::WeightedL1(_) => Scalar::Exact(linf_norm(x)),
            Norm::Linf => Scalar::Exact(l1_norm(x)),
            Norm::L2 => Norm::L2.eval(x)?,
            Norm::Summing => {
                // ‖x‖_s = ‖Sx‖∞ with S the prefix-sum operator, so the dual
                // norm is ‖S⁻ᵀ g‖₁ = Σ |g_i − g_{i+1}|.
                let zero = Rational::zero();
                let total = x
                    .iter()
                    .enumerate()
                    .map(|(i, g)| (g - x.get(i + 1).unwrap_or(&zero)).abs())
                    .sum();
                Scalar::Exact(total)
            }
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Coords {
    Exact(Vec<Rational>),
    Approx(Vec<f64>),
}

/// A coordinate vector tagged with the norm of its ambient space.
#[derive(Clone, Debug, PartialEq)]
pub struct NormedVector {
    pub coords: Coords,
    pub norm: Norm,
}

impl NormedVector {
    pub fn exact(coords: Vec<Rational>, norm: Norm) -> Result<Self> {
        norm.check_dim(coords.len())?;
        Ok(NormedVector {
            coords: Coords::Exact(coords),
            norm,
        })
    }

    pub fn approx(coords: Vec<f64>, norm: Norm) -> Result<Self> {
        norm.check_dim(coords.len())?;
        if let Some(x) = coords.iter().find(|x| !x.is_finite()) {
            return Err(Error::schema(format!("non-finite coordinate {x}")));
        }
        Ok(NormedVector {
            coords: Coords::Approx(coords),
            norm,
        })
    }

    pub fn norm(&self) -> Result<Scalar> {
        match &self.coords {
            Coords::Exact(v) => self.norm.eval(v),
            Coords::Approx(v) => self.norm.eval_f64(v).map(Scalar::Approx),
        }
    }
}

pub fn sub(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    assert_eq!(a.len(), b.len(), "vector length mismatch");
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    assert_eq!(a.len(), b.len(), "vector length mismatch");
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn scale(a: &[Rational], s: &Rational) -> Vec<Rational> {
    a.iter().map(|x| x * s).collect()
}

pub fn zeros(n: usize) -> Vec<Rational> {
    vec![Rational::zero(); n]
}
