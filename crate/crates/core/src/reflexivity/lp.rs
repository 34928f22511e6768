//! Linear programs for the basic constant and for distances between convex
//! hulls, with an exact vertex-enumeration oracle for square ℓ∞ systems.

use minilp::{ComparisonOp, OptimizationDirection, Problem, Variable};
use num_integer::Integer;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::norm::Norm;
use crate::rational::Rational;

#[derive(Clone, Debug, Serialize)]
pub struct BasicConstant {
    /// Upper estimate: the best LP optimum plus the resolution.
    pub estimate: f64,
    /// Best LP optimum found.
    pub optimum: f64,
    /// The `k` whose projection attains the optimum.
    pub worst_k: usize,
    pub method: &'static str,
    pub resolution: f64,
    pub programs: usize,
}

/// Exact rank by Gaussian elimination over the rationals.
fn rank(rows: &[Vec<Rational>]) -> usize {
    let mut m: Vec<Vec<Rational>> = rows.to_vec();
    let cols = m.first().map_or(0, Vec::len);
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        for i in r + 1..m.len() {
            if !m[i][c].is_zero() {
                let f = &m[i][c] / &m[r][c];
                for j in c..cols {
                    let d = &f * &m[r][j];
                    m[i][j] -= &d;
                }
            }
        }
        r += 1;
    }
    r
}

fn check_vectors(vectors: &[Vec<Rational>], norm: &Norm) -> Result<usize> {
    let dim = vectors.first().map(Vec::len).ok_or_else(|| Error::precondition("no vectors"))?;
    for v in vectors {
        if v.len() != dim {
            return Err(Error::Dimension {
                expected: dim,
                found: v.len(),
            });
        }
    }
    norm.check_dim(dim)?;
    if rank(vectors) < vectors.len() {
        return Err(Error::precondition("vectors are linearly dependent"));
    }
    Ok(dim)
}

/// The norm as `max_r |⟨row_r, x⟩|` (ℓ∞ and summing) or, for ℓ₁-type
/// norms, `max_σ ⟨σ·w, x⟩` over sign vectors.
fn dual_rows(norm: &Norm, dim: usize) -> Result<Vec<Vec<f64>>> {
    Ok(match norm {
        Norm::Linf => (0..dim)
            .map(|r| (0..dim).map(|c| (r == c) as u8 as f64).collect())
            .collect(),
        Norm::Summing => (0..dim)
            .map(|r| (0..dim).map(|c| (c <= r) as u8 as f64).collect())
            .collect(),
        Norm::L1 | Norm::WeightedL1(_) => {
            if dim > 10 {
                return Err(Error::Unsupported(format!(
                    "ℓ₁-type basic constants enumerate sign vectors; dimension {dim} is above 10"
                )));
            }
            let w: Vec<f64> = match norm.weights() {
                Some(w) => w.iter().map(Rational::to_f64).collect(),
                None => vec![1.0; dim],
            };
            // σ and −σ give the same absolute value, so fix σ_0 = +1.
            (0..1usize << (dim - 1))
                .map(|mask| {
                    (0..dim)
                        .map(|c| if c > 0 && mask >> (c - 1) & 1 == 1 { -w[c] } else { w[c] })
                        .collect()
                })
                .collect()
        }
        Norm::L2 => return Err(Error::Unsupported("basic constant for ℓ₂ is not supported".into())),
    })
}

/// Estimates `sup_k sup_a ‖Σ_{i≤k} a_i y_i‖ / ‖Σ_{i≤n} a_i y_i‖` by one LP
/// per `k` and dual row: maximize the row on the `k`-th partial sum subject
/// to the full sum lying in the unit ball.
pub fn basic_constant(vectors: &[Vec<Rational>], norm: &Norm, resolution: f64) -> Result<BasicConstant> {
    let dim = check_vectors(vectors, norm)?;
    let n = vectors.len();
    if n == 1 {
        return Ok(BasicConstant {
            estimate: 1.0,
            optimum: 1.0,
            worst_k: 1,
            method: "single vector",
            resolution,
            programs: 0,
        });
    }
    let rows = dual_rows(norm, dim)?;
    let y: Vec<Vec<f64>> = vectors.iter().map(|v| v.iter().map(Rational::to_f64).collect()).collect();
    // Row r applied to Σ_{i≤k} a_i y_i has coefficient ⟨row_r, y_i⟩ on a_i.
    let coeff: Vec<Vec<f64>> = rows
        .iter()
        .map(|row| y.iter().map(|yi| row.iter().zip(yi).map(|(a, b)| a * b).sum()).collect())
        .collect();
    let tasks: Vec<(usize, usize)> = (1..n).flat_map(|k| (0..rows.len()).map(move |r| (k, r))).collect();
    let results: Vec<(f64, usize)> = tasks
        .par_iter()
        .map(|&(k, r)| {
            let mut p = Problem::new(OptimizationDirection::Maximize);
            let a: Vec<Variable> = (0..n)
                .map(|i| p.add_var(if i < k { coeff[r][i] } else { 0.0 }, (f64::NEG_INFINITY, f64::INFINITY)))
                .collect();
            for c in &coeff {
                let expr: Vec<(Variable, f64)> = a.iter().copied().zip(c.iter().copied()).collect();
                p.add_constraint(expr.as_slice(), ComparisonOp::Le, 1.0);
                p.add_constraint(expr.as_slice(), ComparisonOp::Ge, -1.0);
            }
            p.solve()
                .map(|s| (s.objective(), k))
                .map_err(|e| Error::Lp(format!("k = {k}: {e}")))
        })
        .collect::<Result<_>>()?;
    let (optimum, worst_k) = results
        .into_iter()
        .fold((1.0, n), |best, cur| if cur.0 > best.0 { cur } else { best });
    Ok(BasicConstant {
        estimate: optimum + resolution,
        optimum,
        worst_k,
        method: "linear programming",
        resolution,
        programs: tasks.len(),
    })
}

/// Exact basic constant of `n` vectors spanning `ℓ∞ⁿ`. The unit ball
/// `{a : ‖Ya‖∞ ≤ 1}` is a parallelepiped with vertices `Y⁻¹s`,
/// `s ∈ {±1}ⁿ`, and each `‖P_k Y a‖∞` is convex in `a`, so the supremum is
/// a maximum over those vertices.
pub fn basic_constant_by_vertices(vectors: &[Vec<Rational>]) -> Result<Rational> {
    let n = vectors.len();
    check_vectors(vectors, &Norm::Linf)?;
    if vectors[0].len() != n {
        return Err(Error::precondition("vertex enumeration needs n vectors in dimension n"));
    }
    if n > 24 {
        return Err(Error::Resource {
            what: "sign vectors".into(),
            requested: 1u128 << n,
            cap: 1 << 24,
        });
    }
    // Columns y_i of Y; invert Y exactly.
    let y: Vec<Vec<Rational>> = (0..n).map(|r| (0..n).map(|i| vectors[i][r].clone()).collect()).collect();
    let inv = invert(&y).ok_or_else(|| Error::precondition("vectors are linearly dependent"))?;
    let to_ints = |m: &[Vec<Rational>]| -> Option<(Vec<Vec<i64>>, Rational)> {
        let mut l = num_bigint::BigInt::from(1);
        for x in m.iter().flatten() {
            l = l.lcm(x.denom());
        }
        let s = Rational::from_bigint(l);
        let ints = m
            .iter()
            .map(|row| row.iter().map(|x| (x * &s).numer().to_i64()).collect::<Option<Vec<_>>>())
            .collect::<Option<Vec<_>>>()?;
        Some((ints, s))
    };
    let overflow = || Error::Unsupported("entries too large for exact enumeration".into());
    let (inv_i, l) = to_ints(&inv).ok_or_else(overflow)?;
    let (y_i, g) = to_ints(&y).ok_or_else(overflow)?;
    let max_abs = |m: &[Vec<i64>]| m.iter().flatten().map(|x| x.unsigned_abs()).max().unwrap_or(0) as u128;
    if (n as u128).pow(2) * max_abs(&inv_i) * max_abs(&y_i) >= 1u128 << 62 {
        return Err(overflow());
    }
    // s and −s give the same values: fix s_0 = +1.
    let best = (0..1u64 << (n - 1))
        .into_par_iter()
        .map(|mask| {
            let s = |j: usize| if j > 0 && mask >> (j - 1) & 1 == 1 { -1i64 } else { 1 };
            let a: Vec<i64> = (0..n).map(|i| (0..n).map(|j| inv_i[i][j] * s(j)).sum()).collect();
            let mut partial = vec![0i64; n];
            let mut best = 0i64;
            for k in 0..n {
                for r in 0..n {
                    partial[r] += y_i[r][k] * a[k];
                }
                best = best.max(partial.iter().map(|x| x.abs()).max().unwrap_or(0));
            }
            best
        })
        .max()
        .unwrap_or(0);
    Ok(Rational::int(best) / (l * g))
}

fn invert(m: &[Vec<Rational>]) -> Option<Vec<Vec<Rational>>> {
    let n = m.len();
    let mut a: Vec<Vec<Rational>> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| Rational::int((i == j) as i64)));
            r
        })
        .collect();
    for c in 0..n {
        let p = (c..n).find(|&i| !a[i][c].is_zero())?;
        a.swap(c, p);
        let pivot = a[c][c].clone();
        for x in a[c].iter_mut() {
            *x = &*x / &pivot;
        }
        for i in 0..n {
            if i != c && !a[i][c].is_zero() {
                let f = a[i][c].clone();
                for j in 0..2 * n {
                    let d = &f * &a[c][j];
                    a[i][j] -= &d;
                }
            }
        }
    }
    Some(a.into_iter().map(|r| r[n..].to_vec()).collect())
}

#[derive(Clone, Debug, Serialize)]
pub struct HullDistance {
    pub distance: f64,
    pub split: usize,
    pub points: usize,
}

/// `dist(conv(u_1, …, u_k), conv(u_{k+1}, …, u_m))` as a linear program
/// over the two coefficient simplices.
pub fn convex_hull_separation(points: &[Vec<Rational>], k: usize, norm: &Norm) -> Result<HullDistance> {
    let m = points.len();
    if k < 1 || k >= m {
        return Err(Error::precondition(format!("split {k} must satisfy 1 ≤ k < {m}")));
    }
    let dim = points[0].len();
    for p in points {
        if p.len() != dim {
            return Err(Error::Dimension {
                expected: dim,
                found: p.len(),
            });
        }
    }
    norm.check_dim(dim)?;
    let mut p = Problem::new(OptimizationDirection::Minimize);
    let coeffs: Vec<Variable> = (0..m).map(|_| p.add_var(0.0, (0.0, f64::INFINITY))).collect();
    for range in [0..k, k..m] {
        let expr: Vec<(Variable, f64)> = range.map(|i| (coeffs[i], 1.0)).collect();
        p.add_constraint(expr.as_slice(), ComparisonOp::Eq, 1.0);
    }
    // Coordinates of the difference Σ α_i u_i − Σ β_j u_j as expressions.
    let coord = |c: usize| -> Vec<(Variable, f64)> {
        (0..m)
            .map(|i| {
                let x = points[i][c].to_f64();
                (coeffs[i], if i < k { x } else { -x })
            })
            .collect()
    };
    let bound = |p: &mut Problem, expr: Vec<(Variable, f64)>, t: Variable| {
        let mut up = expr.clone();
        up.push((t, -1.0));
        p.add_constraint(up.as_slice(), ComparisonOp::Le, 0.0);
        let mut down = expr;
        down.push((t, 1.0));
        p.add_constraint(down.as_slice(), ComparisonOp::Ge, 0.0);
    };
    match norm {
        Norm::L1 | Norm::WeightedL1(_) => {
            for c in 0..dim {
                let w = norm.weights().map_or(1.0, |w| w[c].to_f64());
                let t = p.add_var(w, (0.0, f64::INFINITY));
                bound(&mut p, coord(c), t);
            }
        }
        Norm::Linf => {
            let t = p.add_var(1.0, (0.0, f64::INFINITY));
            for c in 0..dim {
                bound(&mut p, coord(c), t);
            }
        }
        Norm::Summing => {
            let t = p.add_var(1.0, (0.0, f64::INFINITY));
            let mut prefix: Vec<(Variable, f64)> = coeffs.iter().map(|&v| (v, 0.0)).collect();
            for c in 0..dim {
                for (acc, (_, x)) in prefix.iter_mut().zip(coord(c)) {
                    acc.1 += x;
                }
                bound(&mut p, prefix.clone(), t);
            }
        }
        Norm::L2 => return Err(Error::Unsupported("hull distance under ℓ₂ is not a linear program".into())),
    }
    let s = p.solve().map_err(|e| Error::Lp(e.to_string()))?;
    Ok(HullDistance {
        distance: s.objective(),
        split: k,
        points: m,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reflexivity::ReflexivityWitness;

    fn q(a: i64, b: i64) -> Rational {
        Rational::frac(a, b)
    }

    fn unit(n: usize, i: usize) -> Vec<Rational> {
        (0..n).map(|j| Rational::int((i == j) as i64)).collect()
    }

    #[test]
    fn disjoint_unit_vectors_have_constant_one() {
        let v: Vec<_> = (0..4).map(|i| unit(4, i)).collect();
        let b = basic_constant(&v, &Norm::Linf, 1e-9).unwrap();
        assert!((b.optimum - 1.0).abs() < 1e-9);
        assert_eq!(basic_constant_by_vertices(&v).unwrap(), q(1, 1));
    }

    #[test]
    fn single_vector() {
        let b = basic_constant(&[unit(3, 1)], &Norm::Linf, 1e-9).unwrap();
        assert_eq!(b.estimate, 1.0);
    }

    #[test]
    fn dependent_vectors_are_an_error() {
        let v = vec![unit(3, 0), unit(3, 0)];
        assert!(matches!(basic_constant(&v, &Norm::Linf, 1e-9), Err(Error::Precondition(_))));
    }

    #[test]
    fn prefix_vectors_have_constant_two() {
        // Σ a_i y_i has coordinates S_j = a_j + … + a_n, and the k-th partial
        // sum has coordinates S_j − S_{k+1} for j ≤ k: at most 2 max |S_j|,
        // attained by S_1 = 1, S_2 = −1.
        for n in [2, 5, 8] {
            let w = ReflexivityWitness::prefix_vectors(n);
            assert_eq!(basic_constant_by_vertices(&w.vectors).unwrap(), q(2, 1));
            let lp = basic_constant(&w.vectors, &Norm::Linf, 1e-9).unwrap();
            assert!((lp.optimum - 2.0).abs() < 1e-7, "n = {n}: {}", lp.optimum);
        }
    }

    #[test]
    fn lp_and_vertices_agree_on_a_skewed_basis() {
        let v = vec![
            vec![q(1, 1), q(0, 1), q(0, 1)],
            vec![q(1, 2), q(1, 1), q(0, 1)],
            vec![q(-1, 3), q(1, 2), q(1, 1)],
        ];
        let exact = basic_constant_by_vertices(&v).unwrap();
        let lp = basic_constant(&v, &Norm::Linf, 1e-9).unwrap();
        assert!((lp.optimum - exact.to_f64()).abs() < 1e-7);
    }

    #[test]
    fn l1_and_summing_targets_run() {
        let v = vec![unit(3, 0), unit(3, 1), unit(3, 2)];
        for norm in [Norm::L1, Norm::Summing] {
            let b = basic_constant(&v, &norm, 1e-9).unwrap();
            assert!(b.optimum >= 1.0 - 1e-9);
        }
        // Under the summing norm a partial sum of the unit basis is a prefix
        // of the coordinates, whose prefix sums differ from the full ones by
        // a constant tail: the ratio is at most 2.
        let b = basic_constant(&v, &Norm::Summing, 1e-9).unwrap();
        assert!(b.optimum <= 2.0 + 1e-9);
        assert!(basic_constant(&v, &Norm::L2, 1e-9).is_err());
    }

    #[test]
    fn hull_examples() {
        let a = vec![vec![q(0, 1), q(0, 1)], vec![q(2, 1), q(3, 1)]];
        assert!((convex_hull_separation(&a, 1, &Norm::L1).unwrap().distance - 5.0).abs() < 1e-9);
        let n = 6;
        let basis: Vec<_> = (0..n).map(|i| unit(n, i)).collect();
        for k in 1..n {
            let d = convex_hull_separation(&basis, k, &Norm::L1).unwrap();
            assert!((d.distance - 2.0).abs() < 1e-6);
        }
        let same = vec![unit(2, 0), unit(2, 1), unit(2, 0)];
        assert!(convex_hull_separation(&same, 2, &Norm::L1).unwrap().distance.abs() < 1e-9);
        assert!(convex_hull_separation(&same, 0, &Norm::L1).is_err());
        assert!(convex_hull_separation(&same, 3, &Norm::L1).is_err());
    }

    #[test]
    fn hull_distance_in_other_norms() {
        let a = vec![vec![q(0, 1), q(0, 1)], vec![q(2, 1), q(-3, 1)]];
        let linf = convex_hull_separation(&a, 1, &Norm::Linf).unwrap().distance;
        let s = convex_hull_separation(&a, 1, &Norm::Summing).unwrap().distance;
        assert!((linf - 3.0).abs() < 1e-9);
        // Prefix sums of (−2, 3) are −2, 1.
        assert!((s - 2.0).abs() < 1e-9);
    }
}
