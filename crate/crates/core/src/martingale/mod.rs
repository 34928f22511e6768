//! Piecewise-constant vector functions on `(0, 1]` and the martingales
//! extracted from embeddings of spaces with thick geodesic families.
//!
//! Intervals are left-open and right-closed.

mod extract;

pub use extract::{
    certify_trace, extract_martingale, Branch, BranchRecord, CertLine, ExtractConfig, MartingaleTrace, Mode,
    TraceCertificate, TraceStep,
};

use std::collections::HashMap;
use std::hash::Hash;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geodesics::Partition;
use crate::graph::Metric;
use crate::norm::{self, Norm, Scalar};
use crate::rational::Rational;

/// A map from points of a space to rational vectors in a normed space.
pub trait PointMap<P> {
    fn norm(&self) -> &Norm;

    fn image(&self, p: &P) -> Result<Vec<Rational>>;
}

/// Images listed point by point.
#[derive(Clone, Debug)]
pub struct PointTable<P> {
    pub norm: Norm,
    pub table: HashMap<P, Vec<Rational>>,
}

impl<P: Hash + Eq + std::fmt::Debug> PointMap<P> for PointTable<P> {
    fn norm(&self) -> &Norm {
        &self.norm
    }

    fn image(&self, p: &P) -> Result<Vec<Rational>> {
        self.table
            .get(p)
            .cloned()
            .ok_or_else(|| Error::InvalidPoint(format!("no image for {p:?}")))
    }
}

/// One vector value per interval of a partition.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StepFunction {
    partition: Partition,
    values: Vec<Vec<Rational>>,
    #[serde(skip)]
    norm: Norm,
}

impl StepFunction {
    pub fn new(partition: Partition, values: Vec<Vec<Rational>>, norm: Norm) -> Result<Self> {
        if values.len() != partition.interval_count() {
            return Err(Error::precondition(format!(
                "{} values for {} intervals",
                values.len(),
                partition.interval_count()
            )));
        }
        let dim = values[0].len();
        for v in &values {
            if v.len() != dim {
                return Err(Error::Dimension {
                    expected: dim,
                    found: v.len(),
                });
            }
            norm.check_dim(v.len())?;
        }
        Ok(StepFunction {
            partition,
            values,
            norm,
        })
    }

    pub fn constant(value: Vec<Rational>, norm: Norm) -> Result<Self> {
        StepFunction::new(Partition::trivial(), vec![value], norm)
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn values(&self) -> &[Vec<Rational>] {
        &self.values
    }

    pub fn norm(&self) -> &Norm {
        &self.norm
    }

    pub fn dim(&self) -> usize {
        self.values[0].len()
    }

    /// The same function written over a finer partition.
    pub fn on(&self, finer: &Partition) -> Result<StepFunction> {
        if !self.partition.is_refined_by(finer) {
            return Err(Error::precondition("target partition does not refine the function's partition"));
        }
        let mut values = Vec::with_capacity(finer.interval_count());
        let mut i = 0;
        for k in 0..finer.interval_count() {
            let (_, right) = finer.interval(k);
            while self.partition.breaks()[i + 1] < *right {
                i += 1;
            }
            values.push(self.values[i].clone());
        }
        StepFunction::new(finer.clone(), values, self.norm.clone())
    }

    pub fn value_norms(&self) -> Result<Vec<Scalar>> {
        self.values.iter().map(|v| self.norm.eval(v)).collect()
    }
}

/// Length-weighted averages of `fine` over the intervals of `coarse`.
pub fn conditional_expectation(fine: &StepFunction, coarse: &Partition) -> Result<StepFunction> {
    if !coarse.is_refined_by(&fine.partition) {
        return Err(Error::precondition("coarse partition is not a coarsening of the fine one"));
    }
    let dim = fine.dim();
    let mut values = Vec::with_capacity(coarse.interval_count());
    let mut k = 0;
    for i in 0..coarse.interval_count() {
        let (_, right) = coarse.interval(i);
        let mut acc = norm::zeros(dim);
        while k < fine.partition.interval_count() && fine.partition.breaks()[k + 1] <= *right {
            acc = norm::add(&acc, &norm::scale(&fine.values[k], &fine.partition.length(k)));
            k += 1;
        }
        values.push(norm::scale(&acc, &coarse.length(i).recip()));
    }
    StepFunction::new(coarse.clone(), values, fine.norm.clone())
}

/// `∫₀¹ ‖f − g‖ dt`.
pub fn l1_distance(f: &StepFunction, g: &StepFunction) -> Result<Scalar> {
    if f.norm != g.norm {
        return Err(Error::precondition("functions take values in different normed spaces"));
    }
    let common = f.partition.common_refinement(&g.partition);
    let (fa, ga) = (f.on(&common)?, g.on(&common)?);
    let mut total = Scalar::zero();
    for k in 0..common.interval_count() {
        let d = f.norm.eval(&norm::sub(&fa.values[k], &ga.values[k]))?;
        total = total.add(&d.mul(&common.length(k)));
    }
    Ok(total)
}

/// Largest value norm.
pub fn sup_norm(f: &StepFunction) -> Result<Scalar> {
    let mut best = Scalar::zero();
    for n in f.value_norms()? {
        best = if n.compare(&best, 0.0).is_gt() { n } else { best };
    }
    Ok(best)
}

/// The step function of a point sequence on a `u`-`v` geodesic: on
/// `(d(u, v_k), d(u, v_{k+1})]` (rescaled so that `d(u, v) = 1`) it takes
/// the value `(f(v_{k+1}) − f(v_k)) / d(v_k, v_{k+1})`.
pub fn step_from_geodesic<M: Metric, F: PointMap<M::Point>>(
    metric: &M,
    map: &F,
    seq: &[M::Point],
    u: &M::Point,
    v: &M::Point,
) -> Result<StepFunction> {
    let duv = metric.distance(u, v);
    if !duv.is_positive() || seq.len() < 2 {
        return Err(Error::precondition("need d(u, v) > 0 and at least two points"));
    }
    let mut breaks = Vec::with_capacity(seq.len());
    for (k, p) in seq.iter().enumerate() {
        let t = metric.distance(u, p) / &duv;
        if let Some(prev) = breaks.last() {
            if t < *prev {
                return Err(Error::precondition(format!("d(u, v_k) decreases at k = {k}")));
            }
            if t == *prev {
                return Err(Error::precondition(format!("zero-length segment ending at k = {k}")));
            }
        }
        breaks.push(t);
    }
    let partition = Partition::new(breaks)?;
    let images: Vec<Vec<Rational>> = seq.iter().map(|p| map.image(p)).collect::<Result<_>>()?;
    let values = (0..seq.len() - 1)
        .map(|k| {
            let d = metric.distance(&seq[k], &seq[k + 1]);
            norm::scale(&norm::sub(&images[k + 1], &images[k]), &d.recip())
        })
        .collect();
    StepFunction::new(partition, values, map.norm().clone())
}

/// The step function of a C-geodesic over a partition attached to it: on
/// `(α_i, α_{i+1}]` the value is `(f(w_{i+1}) − f(w_i)) / (α_{i+1} − α_i)`.
pub fn step_from_cgeodesic<P, F: PointMap<P>>(map: &F, seq: &[P], partition: &Partition) -> Result<StepFunction> {
    if partition.breaks().len() != seq.len() {
        return Err(Error::precondition(format!(
            "partition has {} breakpoints for {} points",
            partition.breaks().len(),
            seq.len()
        )));
    }
    let images: Vec<Vec<Rational>> = seq.iter().map(|p| map.image(p)).collect::<Result<_>>()?;
    let values = (0..seq.len() - 1)
        .map(|k| norm::scale(&norm::sub(&images[k + 1], &images[k]), &partition.length(k).recip()))
        .collect();
    StepFunction::new(partition.clone(), values, map.norm().clone())
}

/// Both sides of `A‖x − z‖ + B‖y − z‖ ≥ ½‖x − y‖ · min(A, B)`.
#[derive(Clone, Debug, Serialize)]
pub struct IntervalBound {
    pub lhs: Scalar,
    pub rhs: Scalar,
    pub pass: bool,
}

pub fn interval_lower_bound(
    norm: &Norm,
    a: &Rational,
    b: &Rational,
    x: &[Rational],
    y: &[Rational],
    z: &[Rational],
    tol: f64,
) -> Result<IntervalBound> {
    if !a.is_positive() || !b.is_positive() {
        return Err(Error::precondition("interval lengths must be positive"));
    }
    let lhs = norm
        .eval(&norm::sub(x, z))?
        .mul(a)
        .add(&norm.eval(&norm::sub(y, z))?.mul(b));
    let rhs = norm
        .eval(&norm::sub(x, y))?
        .mul(&(Rational::min_of(a, b) / Rational::int(2)));
    Ok(IntervalBound {
        pass: lhs.ge(&rhs, tol),
        lhs,
        rhs,
    })
}

/// Normalized second differences around `z` and around `z~`, and the lower
/// bound one of them must meet.
#[derive(Clone, Debug, Serialize)]
pub struct BranchChoice {
    pub choice: Branch,
    pub lhs_z: Scalar,
    pub lhs_z_tilde: Scalar,
    pub bound: Scalar,
    pub pass: bool,
}

/// Picks the branch whose difference quotient jumps more across the fork.
///
/// `a` and `b` are the lengths in front of and behind the fork point (the
/// same for both branches), `ell` the lower Lipschitz constant and `dzz`
/// the distance between the branch points. Ties go to `z`.
#[allow(clippy::too_many_arguments)]
pub fn choose_branch(
    norm: &Norm,
    f_prev: &[Rational],
    f_z: &[Rational],
    f_zt: &[Rational],
    f_next: &[Rational],
    a: &Rational,
    b: &Rational,
    ell: &Rational,
    dzz: &Rational,
    tol: f64,
) -> Result<BranchChoice> {
    if !a.is_positive() || !b.is_positive() {
        return Err(Error::precondition(format!("zero denominator: A = {a}, B = {b}")));
    }
    let gap = norm.eval(&norm::sub(f_z, f_zt))?;
    let need = Scalar::Exact(ell * dzz);
    if !gap.ge(&need, tol) {
        return Err(Error::precondition(format!(
            "‖f(z) − f(z~)‖ = {gap} is below ℓ·d(z, z~) = {need}"
        )));
    }
    let quotient = |f_mid: &[Rational]| -> Result<Scalar> {
        let right = norm::scale(&norm::sub(f_next, f_mid), &b.recip());
        let left = norm::scale(&norm::sub(f_mid, f_prev), &a.recip());
        norm.eval(&norm::sub(&right, &left))
    };
    let lhs_z = quotient(f_z)?;
    let lhs_z_tilde = quotient(f_zt)?;
    let bound = Scalar::Exact(ell / Rational::int(2) * dzz * (a.recip() + b.recip()));
    let choice = if lhs_z.compare(&lhs_z_tilde, 0.0).is_lt() {
        Branch::ZTilde
    } else {
        Branch::Z
    };
    let best = if choice == Branch::Z { &lhs_z } else { &lhs_z_tilde };
    Ok(BranchChoice {
        pass: best.ge(&bound, tol),
        choice,
        lhs_z,
        lhs_z_tilde,
        bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{diamond, DEFAULT_VERTEX_CAP};
    use crate::graph::GraphPoint;

    fn q(a: i64, b: i64) -> Rational {
        Rational::frac(a, b)
    }

    fn vq(v: &[(i64, i64)]) -> Vec<Rational> {
        v.iter().map(|&(a, b)| q(a, b)).collect()
    }

    /// The isometric picture of D_1 in ℓ₁²: u, v, a, b.
    fn d1_map() -> PointTable<GraphPoint> {
        let mut table = HashMap::new();
        table.insert(GraphPoint::Vertex(0), vq(&[(0, 1), (0, 1)]));
        table.insert(GraphPoint::Vertex(1), vq(&[(1, 2), (1, 2)]));
        table.insert(GraphPoint::Vertex(2), vq(&[(1, 2), (0, 1)]));
        table.insert(GraphPoint::Vertex(3), vq(&[(0, 1), (1, 2)]));
        PointTable { norm: Norm::L1, table }
    }

    #[test]
    fn d1_step_functions() {
        let d1 = diamond(1, DEFAULT_VERTEX_CAP).unwrap();
        let f = d1_map();
        let p = GraphPoint::Vertex;
        let m0 = step_from_geodesic(d1.metric(), &f, &[p(0), p(1)], &p(0), &p(1)).unwrap();
        assert_eq!(m0.values(), &[vq(&[(1, 2), (1, 2)])]);
        let m2 = step_from_geodesic(d1.metric(), &f, &[p(0), p(2), p(1)], &p(0), &p(1)).unwrap();
        assert_eq!(m2.partition().breaks(), &[q(0, 1), q(1, 2), q(1, 1)]);
        assert_eq!(m2.values(), &[vq(&[(1, 1), (0, 1)]), vq(&[(0, 1), (1, 1)])]);
        assert_eq!(conditional_expectation(&m2, m0.partition()).unwrap(), m0);
        assert_eq!(conditional_expectation(&m2, m2.partition()).unwrap(), m2);
        assert_eq!(l1_distance(&m2, &m0).unwrap(), Scalar::Exact(q(1, 1)));
        assert_eq!(l1_distance(&m2, &m2).unwrap(), Scalar::zero());
        assert_eq!(sup_norm(&m2).unwrap(), Scalar::Exact(q(1, 1)));
        assert!(step_from_geodesic(d1.metric(), &f, &[p(0), p(2), p(2), p(1)], &p(0), &p(1)).is_err());
        assert!(step_from_geodesic(d1.metric(), &f, &[p(0), p(1), p(2)], &p(0), &p(1)).is_err());
    }

    #[test]
    fn constant_map_gives_zero_function() {
        let d1 = diamond(1, DEFAULT_VERTEX_CAP).unwrap();
        let p = GraphPoint::Vertex;
        let mut f = d1_map();
        for v in f.table.values_mut() {
            *v = vq(&[(3, 1), (1, 1)]);
        }
        let m = step_from_geodesic(d1.metric(), &f, &[p(0), p(3), p(1)], &p(0), &p(1)).unwrap();
        assert_eq!(sup_norm(&m).unwrap(), Scalar::zero());
    }

    #[test]
    fn cgeodesic_steps() {
        let f = d1_map();
        let p = GraphPoint::Vertex;
        let m = step_from_cgeodesic(&f, &[p(0), p(1)], &Partition::trivial()).unwrap();
        assert_eq!(m.values(), &[vq(&[(1, 2), (1, 2)])]);
        let part = Partition::new(vq(&[(0, 1), (1, 2), (1, 1)])).unwrap();
        let m = step_from_cgeodesic(&f, &[p(0), p(2), p(1)], &part).unwrap();
        assert_eq!(m.values(), &[vq(&[(1, 1), (0, 1)]), vq(&[(0, 1), (1, 1)])]);
        assert!(step_from_cgeodesic(&f, &[p(0), p(1)], &part).is_err());
    }

    #[test]
    fn conditional_expectation_of_constant_is_constant() {
        let part = Partition::new(vq(&[(0, 1), (1, 3), (1, 2), (1, 1)])).unwrap();
        let c = vq(&[(2, 1), (-1, 5)]);
        let f = StepFunction::new(part, vec![c.clone(); 3], Norm::Linf).unwrap();
        let coarse = Partition::new(vq(&[(0, 1), (1, 2), (1, 1)])).unwrap();
        let e = conditional_expectation(&f, &coarse).unwrap();
        assert!(e.values().iter().all(|v| *v == c));
        let bad = Partition::new(vq(&[(0, 1), (1, 4), (1, 1)])).unwrap();
        assert!(conditional_expectation(&f, &bad).is_err());
    }

    #[test]
    fn interval_bound_examples() {
        let r = interval_lower_bound(
            &Norm::L1,
            &q(1, 2),
            &q(1, 2),
            &vq(&[(1, 1), (0, 1)]),
            &vq(&[(0, 1), (1, 1)]),
            &vq(&[(1, 2), (1, 2)]),
            0.0,
        )
        .unwrap();
        assert_eq!((r.lhs, r.rhs, r.pass), (Scalar::Exact(q(1, 1)), Scalar::Exact(q(1, 2)), true));
        let zero = vq(&[(0, 1)]);
        let r = interval_lower_bound(&Norm::L1, &q(1, 1), &q(2, 1), &zero, &zero, &zero, 0.0).unwrap();
        assert!(r.pass && r.lhs == Scalar::zero());
    }

    #[test]
    fn branch_choice_on_d1() {
        let f = d1_map();
        let g = |i| f.table[&GraphPoint::Vertex(i)].clone();
        let c = choose_branch(&Norm::L1, &g(0), &g(2), &g(3), &g(1), &q(1, 2), &q(1, 2), &q(1, 1), &q(1, 1), 0.0)
            .unwrap();
        assert_eq!(c.choice, Branch::Z);
        assert_eq!(c.lhs_z, Scalar::Exact(q(2, 1)));
        assert_eq!(c.lhs_z_tilde, Scalar::Exact(q(2, 1)));
        assert_eq!(c.bound, Scalar::Exact(q(2, 1)));
        assert!(c.pass);
        // Collapsing a and b violates the lower Lipschitz bound.
        let err = choose_branch(&Norm::L1, &g(0), &g(2), &g(2), &g(1), &q(1, 2), &q(1, 2), &q(1, 1), &q(1, 1), 0.0);
        assert!(matches!(err, Err(Error::Precondition(_))));
        assert!(choose_branch(&Norm::L1, &g(0), &g(2), &g(3), &g(1), &q(0, 1), &q(1, 2), &q(1, 1), &q(1, 1), 0.0)
            .is_err());
    }

    #[test]
    fn perturbed_branch_is_strict() {
        let f = d1_map();
        let g = |i| f.table[&GraphPoint::Vertex(i)].clone();
        let a = vq(&[(1, 2), (-1, 10)]);
        let c = choose_branch(&Norm::L1, &g(0), &a, &g(3), &g(1), &q(1, 2), &q(1, 2), &q(1, 2), &q(1, 1), 0.0).unwrap();
        assert_eq!(c.choice, Branch::Z);
        assert!(c.lhs_z.compare(&c.lhs_z_tilde, 0.0).is_gt());
    }
}
