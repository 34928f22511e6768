//! Thick-family and C-geodesic extension witnesses, verified clause by clause.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::geodesics::{is_c_geodesic, match_subsequence};
use crate::graph::Metric;
use crate::rational::Rational;

/// One verified clause with the exact numbers behind the verdict.
#[derive(Clone, Debug, Serialize)]
pub struct Clause {
    pub clause: String,
    pub pass: bool,
    pub values: BTreeMap<String, Rational>,
    pub detail: String,
}

impl Clause {
    fn new(clause: &str, pass: bool) -> Self {
        Clause {
            clause: clause.to_string(),
            pass,
            values: BTreeMap::new(),
            detail: String::new(),
        }
    }

    fn value(mut self, key: &str, v: Rational) -> Self {
        self.values.insert(key.to_string(), v);
        self
    }

    fn detail(mut self, d: impl Into<String>) -> Self {
        self.detail = d.into();
        self
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Report {
    pub pass: bool,
    pub clauses: Vec<Clause>,
}

impl Report {
    fn push(&mut self, c: Clause) {
        self.clauses.push(c);
        self.pass = self.clauses.iter().all(|c| c.pass);
    }

    pub fn clause(&self, name: &str) -> Option<&Clause> {
        self.clauses.iter().find(|c| c.clause == name)
    }

    pub fn failed(&self) -> Vec<&str> {
        self.clauses.iter().filter(|c| !c.pass).map(|c| c.clause.as_str()).collect()
    }
}

/// Fork points between `u0` and `v0`: the interleavings
/// `w_0, z_1, w_1, …, z_n, w_n` and the same with `z̃` are meant to lie on
/// two geodesics from `u` to `v`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ThickWitness<P> {
    pub u0: P,
    pub v0: P,
    pub w: Vec<P>,
    pub z: Vec<P>,
    pub z_tilde: Vec<P>,
}

impl<P: Clone> ThickWitness<P> {
    pub fn n(&self) -> usize {
        self.z.len()
    }

    /// `w_0, z_1, w_1, …, z_n, w_n`, or the same with `z̃` when `tilde`.
    pub fn interleaving(&self, tilde: bool) -> Vec<P> {
        let zs = if tilde { &self.z_tilde } else { &self.z };
        let mut out = vec![self.w[0].clone()];
        for (z, w) in zs.iter().zip(&self.w[1..]) {
            out.push(z.clone());
            out.push(w.clone());
        }
        out
    }

    /// Recasts the witness as an extension witness: the base chain is
    /// `(u0, v0)` and the two extensions are the two interleavings.
    pub fn to_iso(&self, constant: Rational) -> IsoWitness<P> {
        IsoWitness {
            base: vec![self.u0.clone(), self.v0.clone()],
            z: self.interleaving(false),
            z_tilde: self.interleaving(true),
            constant,
        }
    }
}

/// How a point sequence sits relative to a `u`-`v` geodesic.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GeodesicOrder {
    pub total: Rational,
    pub duv: Rational,
    /// `d(u, first) + total + d(last, v)`.
    pub forward: Rational,
    /// `d(v, first) + total + d(last, u)`.
    pub backward: Rational,
    pub holds: bool,
}

/// Whether `seq` lies, in the listed order, on some geodesic from `u` to
/// `v` traversed in either direction. Exact: the chain through the listed
/// points from one end to the other must have length `d(u, v)`.
pub fn on_geodesic_in_order<M: Metric>(metric: &M, u: &M::Point, v: &M::Point, seq: &[M::Point]) -> GeodesicOrder {
    let total: Rational = seq.windows(2).map(|w| metric.distance(&w[0], &w[1])).sum();
    let duv = metric.distance(u, v);
    let (first, last) = (&seq[0], &seq[seq.len() - 1]);
    let forward = metric.distance(u, first) + &total + metric.distance(last, v);
    let backward = metric.distance(v, first) + &total + metric.distance(last, u);
    GeodesicOrder {
        holds: forward == duv || backward == duv,
        total,
        duv,
        forward,
        backward,
    }
}

fn order_clause(name: &str, o: GeodesicOrder) -> Clause {
    Clause::new(name, o.holds)
        .value("chain length", o.total)
        .value("d(u,v)", o.duv)
        .value("through u first", o.forward)
        .value("through v first", o.backward)
}

/// Checks every clause of the thick-family condition for `witness` inside
/// the geodesic family joining `u` and `v`, with width constant `c`.
pub fn verify_thick_witness<M: Metric>(
    metric: &M,
    u: &M::Point,
    v: &M::Point,
    witness: &ThickWitness<M::Point>,
    c: &Rational,
) -> Report {
    let mut report = Report::default();
    let n = witness.z.len();
    let shape_ok = n >= 1
        && witness.w.len() == n + 1
        && witness.z_tilde.len() == n
        && witness.w[0] == witness.u0
        && witness.w[n] == witness.v0;
    report.push(
        Clause::new("shape", shape_ok)
            .value("n", Rational::from(n as u64))
            .value("w count", Rational::from(witness.w.len() as u64))
            .value("z~ count", Rational::from(witness.z_tilde.len() as u64))
            .detail(if shape_ok {
                "w runs from u0 to v0 with one z and one z~ per gap"
            } else {
                "need n >= 1, n + 1 w points starting at u0 and ending at v0, n z and n z~ points"
            }),
    );
    if !shape_ok {
        return report;
    }
    report.push(order_clause(
        "w points in order on a u-v geodesic",
        on_geodesic_in_order(metric, u, v, &witness.w),
    ));
    report.push(order_clause(
        "w, z interleaving in order on a u-v geodesic",
        on_geodesic_in_order(metric, u, v, &witness.interleaving(false)),
    ));
    report.push(order_clause(
        "w, z~ interleaving in order on a u-v geodesic",
        on_geodesic_in_order(metric, u, v, &witness.interleaving(true)),
    ));

    let gaps: Vec<Rational> = (0..n)
        .map(|i| metric.distance(&witness.z[i], &witness.z_tilde[i]))
        .collect();
    let distinct = gaps.iter().filter(|g| g.is_positive()).count();
    report.push(
        Clause::new("different geodesics", distinct > 0)
            .value("pairs with z != z~", Rational::from(distinct as u64))
            .detail("some z_i must differ from its z~_i"),
    );

    let mut bad = None;
    for i in 1..=n {
        let (z, zt) = (&witness.z[i - 1], &witness.z_tilde[i - 1]);
        let right = (metric.distance(&witness.w[i], z), metric.distance(&witness.w[i], zt));
        let left = (metric.distance(&witness.w[i - 1], z), metric.distance(&witness.w[i - 1], zt));
        if right.0 != right.1 || left.0 != left.1 {
            bad = Some((i, left, right));
            break;
        }
    }
    let mut eq = Clause::new("equal distances to neighbouring w", bad.is_none());
    eq = match bad {
        None => eq.detail("d(w_i, z_i) = d(w_i, z~_i) and d(w_{i-1}, z_i) = d(w_{i-1}, z~_i) for all i"),
        Some((i, left, right)) => eq
            .value("index", Rational::from(i as u64))
            .value("d(w_{i-1}, z_i)", left.0)
            .value("d(w_{i-1}, z~_i)", left.1)
            .value("d(w_i, z_i)", right.0)
            .value("d(w_i, z~_i)", right.1)
            .detail(format!("first mismatch at i = {i}")),
    };
    report.push(eq);

    let width: Rational = gaps.iter().sum();
    let d0 = metric.distance(&witness.u0, &witness.v0);
    let need = c * &d0;
    report.push(
        Clause::new("width", width >= need)
            .value("sum d(z_i, z~_i)", width)
            .value("c", c.clone())
            .value("d(u0, v0)", d0)
            .value("c * d(u0, v0)", need),
    );
    report
}

/// Two extensions of a base C-geodesic that share some points and fork at
/// the others.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IsoWitness<P> {
    pub base: Vec<P>,
    pub z: Vec<P>,
    pub z_tilde: Vec<P>,
    /// The C-geodesic constant.
    pub constant: Rational,
}

impl<P: Clone + PartialEq> IsoWitness<P> {
    /// Indices where the two extensions agree.
    pub fn common(&self) -> Vec<usize> {
        (0..self.z.len()).filter(|&i| self.z[i] == self.z_tilde[i]).collect()
    }

    /// Indices where the two extensions differ.
    pub fn distinct(&self) -> Vec<usize> {
        (0..self.z.len()).filter(|&i| self.z[i] != self.z_tilde[i]).collect()
    }

    pub fn common_points(&self) -> Vec<P> {
        self.common().into_iter().map(|i| self.z[i].clone()).collect()
    }
}

/// Longest chain obtainable by picking `z_i` or `z̃_i` at every index.
fn longest_mixture<M: Metric>(metric: &M, z: &[M::Point], zt: &[M::Point]) -> Rational {
    let pick = |i: usize, s: usize| if s == 0 { &z[i] } else { &zt[i] };
    let mut best = [Rational::zero(), Rational::zero()];
    for i in 1..z.len() {
        let mut next = [Rational::zero(), Rational::zero()];
        for (s, slot) in next.iter_mut().enumerate() {
            *slot = (0..2)
                .map(|t| &best[t] + &metric.distance(pick(i - 1, t), pick(i, s)))
                .max()
                .expect("two candidates");
        }
        best = next;
    }
    Rational::max_of(&best[0], &best[1])
}

/// Checks every clause of the extension condition with width constant `c`.
pub fn verify_iso_witness<M: Metric>(metric: &M, witness: &IsoWitness<M::Point>, c: &Rational) -> Report {
    let mut report = Report::default();
    let (z, zt) = (&witness.z, &witness.z_tilde);
    let m = z.len().saturating_sub(1);
    let shape_ok = z.len() >= 2
        && zt.len() == z.len()
        && witness.base.len() >= 2
        && z[0] == zt[0]
        && z[m] == zt[m]
        && witness.base[0] == z[0]
        && witness.base[witness.base.len() - 1] == z[m];
    report.push(
        Clause::new("shape", shape_ok)
            .value("m", Rational::from(m as u64))
            .value("base length", Rational::from(witness.base.len() as u64))
            .detail("extensions of equal length sharing the endpoints of the base"),
    );
    if !shape_ok {
        return report;
    }
    let cc = &witness.constant;
    let (u, v) = (&z[0], &z[m]);
    let duv = metric.distance(u, v);
    let bound = cc * &duv;

    let base = is_c_geodesic(metric, &witness.base, cc).expect("base has two points");
    report.push(
        Clause::new("base is a C-geodesic", base.holds)
            .value("length", base.total)
            .value("C * d(u,v)", bound.clone()),
    );

    let common = witness.common();
    let common_pts = witness.common_points();
    let sub = match_subsequence(&witness.base, &common_pts).is_some();
    report.push(
        Clause::new("base is a subsequence of the common points", sub)
            .value("common points", Rational::from(common.len() as u64)),
    );

    let cg = is_c_geodesic(metric, &common_pts, cc).expect("endpoints are common");
    report.push(
        Clause::new("common points form a C-geodesic", cg.holds)
            .value("length", cg.total)
            .value("C * d(u,v)", bound.clone()),
    );

    let longest = longest_mixture(metric, z, zt);
    report.push(
        Clause::new("every mixture is a C-geodesic", longest <= bound)
            .value("longest mixture", longest)
            .value("C * d(u,v)", bound.clone()),
    );

    let distinct = witness.distinct();
    let isolated = distinct.iter().all(|&i| z[i - 1] == zt[i - 1] && z[i + 1] == zt[i + 1]);
    report.push(
        Clause::new("distinct pairs sit between common points", isolated)
            .value("distinct pairs", Rational::from(distinct.len() as u64)),
    );

    let mut prop = Clause::new("equal proportions", true);
    if isolated {
        for &i in &distinct {
            let (a, b) = (metric.distance(&z[i], &z[i - 1]), metric.distance(&z[i], &z[i + 1]));
            let (at, bt) = (metric.distance(&zt[i], &z[i - 1]), metric.distance(&zt[i], &z[i + 1]));
            if &a * &bt != &at * &b {
                prop = Clause::new("equal proportions", false)
                    .value("index", Rational::from(i as u64))
                    .value("d(z_i, z_{i-1})", a)
                    .value("d(z_i, z_{i+1})", b)
                    .value("d(z~_i, z_{i-1})", at)
                    .value("d(z~_i, z_{i+1})", bt)
                    .detail(format!("proportion differs at i = {i}"));
                break;
            }
        }
    } else {
        prop = prop.detail("not evaluated: some distinct pair has a distinct neighbour");
        prop.pass = false;
    }
    report.push(prop);

    let width: Rational = distinct.iter().map(|&i| metric.distance(&z[i], &zt[i])).sum();
    let need = c * &duv;
    report.push(
        Clause::new("width", width >= need && !(distinct.is_empty() && duv.is_positive()))
            .value("sum d(z_i, z~_i)", width)
            .value("c", c.clone())
            .value("d(u,v)", duv)
            .value("c * d(u,v)", need),
    );
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{diamond, DEFAULT_VERTEX_CAP};
    use crate::graph::GraphPoint;

    fn v(i: usize) -> GraphPoint {
        GraphPoint::Vertex(i)
    }

    // In D_1: u = 0, v = 1, a = 2, b = 3.
    fn d1_witness() -> ThickWitness<GraphPoint> {
        ThickWitness {
            u0: v(0),
            v0: v(1),
            w: vec![v(0), v(1)],
            z: vec![v(2)],
            z_tilde: vec![v(3)],
        }
    }

    #[test]
    fn d1_witness_passes_with_width_one() {
        let d1 = diamond(1, DEFAULT_VERTEX_CAP).unwrap();
        let r = verify_thick_witness(d1.metric(), &v(0), &v(1), &d1_witness(), &Rational::one());
        assert!(r.pass, "{:?}", r.failed());
        assert_eq!(r.clause("width").unwrap().values["sum d(z_i, z~_i)"], Rational::one());
        let r = verify_thick_witness(d1.metric(), &v(0), &v(1), &d1_witness(), &Rational::frac(3, 2));
        assert_eq!(r.failed(), vec!["width"]);
    }

    #[test]
    fn identical_branches_fail_the_different_geodesics_clause() {
        let d1 = diamond(1, DEFAULT_VERTEX_CAP).unwrap();
        let mut w = d1_witness();
        w.z_tilde = w.z.clone();
        let r = verify_thick_witness(d1.metric(), &v(0), &v(1), &w, &Rational::zero());
        assert_eq!(r.failed(), vec!["different geodesics"]);
    }

    #[test]
    fn bad_shape_stops_early() {
        let d1 = diamond(1, DEFAULT_VERTEX_CAP).unwrap();
        let mut w = d1_witness();
        w.z_tilde.clear();
        let r = verify_thick_witness(d1.metric(), &v(0), &v(1), &w, &Rational::one());
        assert_eq!(r.clauses.len(), 1);
        assert!(!r.pass);
    }

    #[test]
    fn order_accepts_reverse_traversal() {
        let d1 = diamond(1, DEFAULT_VERTEX_CAP).unwrap();
        assert!(on_geodesic_in_order(d1.metric(), &v(0), &v(1), &[v(1), v(2), v(0)]).holds);
        assert!(!on_geodesic_in_order(d1.metric(), &v(0), &v(1), &[v(2), v(3)]).holds);
    }

    #[test]
    fn thick_recast_passes_iso_checks() {
        let d1 = diamond(1, DEFAULT_VERTEX_CAP).unwrap();
        let iso = d1_witness().to_iso(Rational::one());
        let r = verify_iso_witness(d1.metric(), &iso, &Rational::one());
        assert!(r.pass, "{:?}", r.failed());
    }

    #[test]
    fn iso_proportion_and_empty_width_failures() {
        let d2 = diamond(2, DEFAULT_VERTEX_CAP).unwrap();
        let g = d2.graph();
        let id = |s: &str| v(g.vertex(s).unwrap());
        // Perturb z~ from the opposite corner b to a vertex of the b side
        // that is not at the same height.
        let iso = IsoWitness {
            base: vec![id("u"), id("v")],
            z: vec![id("u"), id("a"), id("v")],
            z_tilde: vec![id("u"), id("2a"), id("v")],
            constant: Rational::one(),
        };
        let r = verify_iso_witness(d2.metric(), &iso, &Rational::frac(1, 4));
        assert!(r.failed().contains(&"equal proportions"), "{:?}", r.failed());
        let flat = IsoWitness {
            base: vec![id("u"), id("v")],
            z: vec![id("u"), id("a"), id("v")],
            z_tilde: vec![id("u"), id("a"), id("v")],
            constant: Rational::one(),
        };
        let r = verify_iso_witness(d2.metric(), &flat, &Rational::frac(1, 4));
        assert_eq!(r.failed(), vec!["width"]);
    }
}
