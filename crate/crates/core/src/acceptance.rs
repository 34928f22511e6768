//! The acceptance suite run by `rnpcert selftest`.
//!
//! Each check records the exact numbers behind its verdict. Nothing
//! time-dependent goes into a [`CriterionResult`], so two runs with the same
//! seed serialize to the same bytes; elapsed times are returned separately.

use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::Value;

use crate::embeddings::{
    distortion, dyadic_l1_tree, stegall_diamond_embedding, tree_to_diamond_partial_embedding, verify_delta_tree,
    GraphEmbedding, PairSelection,
};
use crate::error::{Error, Result};
use crate::generators::diamond::{BOTTOM, TOP};
use crate::generators::laakso::{U, V};
use crate::generators::{diamond, inclusion_isometry_check, laakso2, LaaksoFamily, LaaksoPoint, DEFAULT_VERTEX_CAP};
use crate::geodesics::{
    b_equivalence_ratio, is_c_geodesic, laakso_thick_witness, partition_of, random_geodesic, refine_partition,
    verify_thick_witness, DiamondOracle,
};
use crate::graph::{GraphMetric, GraphPoint};
use crate::martingale::{
    certify_trace, choose_branch, conditional_expectation, extract_martingale, interval_lower_bound, l1_distance,
    sup_norm, ExtractConfig, Mode,
};
use crate::norm::{self, l1_norm, Norm, Scalar};
use crate::rational::Rational;
use crate::reflexivity::{
    basic_constant, basic_constant_by_vertices, convex_hull_separation, forward_embedding_check,
    positive_decomposition, ReflexivityWitness,
};
use crate::space::shortest_path_metric;

/// Criteria computed in-process. The determinism criterion compares two
/// whole selftest runs and is checked by whoever runs them.
pub const IN_PROCESS: [u32; 8] = [1, 2, 3, 4, 5, 6, 7, 8];

pub const DETERMINISM: u32 = 9;

/// Failures beyond this many are counted but not listed.
const MAX_LISTED: usize = 20;

#[derive(Clone, Debug, Serialize)]
pub struct CriterionResult {
    pub id: u32,
    pub name: &'static str,
    pub pass: bool,
    pub values: BTreeMap<String, Value>,
    pub failure_count: usize,
    pub failures: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SelftestReport {
    pub seed: u64,
    pub pass: bool,
    pub criteria: Vec<CriterionResult>,
}

pub fn name(id: u32) -> &'static str {
    match id {
        1 => "generators",
        2 => "thickness",
        3 => "tree model embedding",
        4 => "martingale extraction",
        5 => "interval lemma and branch dichotomy",
        6 => "partitions",
        7 => "delta trees",
        8 => "reflexivity",
        9 => "determinism",
        _ => "unknown",
    }
}

fn budget(id: u32) -> Option<Duration> {
    match id {
        1 => Some(Duration::from_secs(60)),
        3 => Some(Duration::from_secs(120)),
        _ => None,
    }
}

struct Recorder {
    values: BTreeMap<String, Value>,
    failures: Vec<String>,
    failure_count: usize,
}

impl Recorder {
    fn new() -> Self {
        Recorder {
            values: BTreeMap::new(),
            failures: Vec::new(),
            failure_count: 0,
        }
    }

    fn put(&mut self, key: &str, v: impl Serialize) {
        let v = serde_json::to_value(v).expect("report values serialize");
        self.values.insert(key.to_string(), v);
    }

    fn fail(&mut self, msg: String) {
        self.failure_count += 1;
        if self.failures.len() < MAX_LISTED {
            self.failures.push(msg);
        }
    }

    fn check(&mut self, ok: bool, msg: impl FnOnce() -> String) -> bool {
        if !ok {
            self.fail(msg());
        }
        ok
    }

    fn finish(self, id: u32) -> CriterionResult {
        CriterionResult {
            id,
            name: name(id),
            pass: self.failure_count == 0,
            values: self.values,
            failure_count: self.failure_count,
            failures: self.failures,
        }
    }
}

/// Per-criterion stream so that running a subset does not shift the
/// randomness of the others.
fn rng_for(seed: u64, id: u32) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ (u64::from(id)).wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

/// Runs one in-process criterion. Errors raised by the library are recorded
/// as failures, not propagated.
pub fn run_criterion(id: u32, seed: u64) -> Result<(CriterionResult, Duration)> {
    let mut rec = Recorder::new();
    let start = Instant::now();
    let outcome = match id {
        1 => generators(&mut rec),
        2 => thickness(&mut rec, seed),
        3 => tree_model_embedding(&mut rec),
        4 => martingale(&mut rec),
        5 => interval_and_branch(&mut rec, seed),
        6 => partitions(&mut rec, seed),
        7 => delta_trees(&mut rec),
        8 => reflexivity(&mut rec, seed),
        DETERMINISM => {
            return Err(Error::precondition(
                "criterion 9 compares two selftest runs and cannot be computed inside one",
            ))
        }
        _ => return Err(Error::precondition(format!("no criterion {id}"))),
    };
    if let Err(e) = outcome {
        rec.fail(format!("error: {e}"));
    }
    let elapsed = start.elapsed();
    if let Some(limit) = budget(id) {
        rec.check(elapsed <= limit, || format!("runtime budget of {} s exceeded", limit.as_secs()));
    }
    Ok((rec.finish(id), elapsed))
}

pub fn run_criteria(ids: &[u32], seed: u64) -> Result<(SelftestReport, Vec<Duration>)> {
    let mut criteria = Vec::new();
    let mut times = Vec::new();
    for &id in ids {
        let (r, t) = run_criterion(id, seed)?;
        criteria.push(r);
        times.push(t);
    }
    let report = SelftestReport {
        seed,
        pass: criteria.iter().all(|c| c.pass),
        criteria,
    };
    Ok((report, times))
}

/// The determinism verdict for two serialized selftest reports.
pub fn determinism(first: &[u8], second: &[u8]) -> CriterionResult {
    let mut rec = Recorder::new();
    rec.put("bytes", [first.len(), second.len()]);
    let differ = first.iter().zip(second).position(|(a, b)| a != b);
    rec.put("first difference", differ);
    rec.check(!first.is_empty(), || "empty report".into());
    rec.check(first == second, || match differ {
        Some(i) => format!("reports differ at byte {i}"),
        None => "reports differ in length".into(),
    });
    rec.finish(DETERMINISM)
}

fn q(a: i64, b: i64) -> Rational {
    Rational::frac(a, b)
}

fn generators(rec: &mut Recorder) -> Result<()> {
    let mut counts = Vec::new();
    let mut prev: Option<crate::generators::DiamondGraph> = None;
    for n in 0..=6u32 {
        let g = diamond(n, DEFAULT_VERTEX_CAP)?;
        let four = 4u128.pow(n);
        let (ev, ee) = (2 + 2 * (four - 1) / 3, four);
        let (v, e) = (g.graph().vertex_count() as u128, g.graph().edge_count() as u128);
        rec.check(v == ev && e == ee, || format!("D_{n}: {v} vertices, {e} edges, expected {ev}, {ee}"));
        counts.push([v, e]);
        if n <= 4 {
            let d = g.metric().vertex_distance(BOTTOM, TOP);
            rec.check(d == Rational::one(), || format!("D_{n}: d(u, v) = {d}"));
            if let Some(p) = &prev {
                let r = inclusion_isometry_check((p.metric(), n - 1), (g.metric(), n))?;
                rec.check(r.isometric, || format!("D_{} -> D_{n} is not isometric", n - 1));
            }
        }
        prev = Some(g);
    }
    rec.put("diamond [vertices, edges], n = 0..6", counts);

    let mut counts = Vec::new();
    let (mut ev, mut ee) = (2u128, 1u128);
    let mut prev: Option<crate::generators::LaaksoGraph> = None;
    for i in 0..=4u32 {
        let g = laakso2(i, DEFAULT_VERTEX_CAP)?;
        let (v, e) = (g.graph().vertex_count() as u128, g.graph().edge_count() as u128);
        rec.check(v == ev && e == ee, || format!("X_{i}: {v} vertices, {e} edges, expected {ev}, {ee}"));
        counts.push([v, e]);
        (ev, ee) = (2 * ev + 2 * ee, 6 * ee);
        if i <= 3 {
            let d = g.metric().vertex_distance(U, V);
            rec.check(d == Rational::one(), || format!("X_{i}: d(u, v) = {d}"));
            if let Some(p) = &prev {
                let r = inclusion_isometry_check((p.metric(), i - 1), (g.metric(), i))?;
                rec.check(r.isometric, || format!("X_{} -> X_{i} is not isometric", i - 1));
            }
            prev = Some(g);
        }
    }
    rec.put("laakso [vertices, edges], i = 0..4", counts);
    Ok(())
}

fn thickness(rec: &mut Recorder, seed: u64) -> Result<()> {
    let fam = Arc::new(LaaksoFamily::new(DEFAULT_VERTEX_CAP));
    let (u, v) = (LaaksoPoint::vertex(0, U), LaaksoPoint::vertex(0, V));
    let half = q(1, 2);
    let lw = laakso_thick_witness(&fam, &u, &v, &half)?;
    let width = twin_width(&fam, &lw.witness.z, &lw.witness.z_tilde)?;
    rec.put("endpoint trisections", lw.trisections);
    rec.put("endpoint n", lw.witness.n());
    rec.put("endpoint width", &width);
    rec.check(lw.trisections == 2 && lw.witness.n() == 5, || {
        format!("endpoint witness has k = {}, n = {}", lw.trisections, lw.witness.n())
    });
    rec.check(width == q(7, 9) && width >= half, || format!("endpoint width {width}"));
    let report = verify_thick_witness(fam.as_ref(), &u, &v, &lw.witness, &half);
    rec.put("endpoint clauses", report.clauses.len());
    rec.check(report.pass, || format!("endpoint witness fails {:?}", report.failed()));

    let mut rng = rng_for(seed, 2);
    let mut min_ratio: Option<Rational> = None;
    let mut levels = [0usize; 4];
    for t in 0..100 {
        let level = rng.gen_range(0..=3u32);
        levels[level as usize] += 1;
        let g = fam.level(level)?;
        let path = random_geodesic(g.metric(), U, V, &mut rng)?;
        // Positions 2i are the path's vertices, 2i + 1 interior points of its edges.
        let slots = 2 * path.edges.len() + 1;
        let s0 = rng.gen_range(0..slots);
        let s1 = (s0 + rng.gen_range(1..slots)) % slots;
        let mut point = |s: usize| -> Result<LaaksoPoint> {
            let p = if s.is_multiple_of(2) {
                GraphPoint::Vertex(path.vertices[s / 2])
            } else {
                let e = path.edges[s / 2];
                let len = g.graph().edge(e).len.clone();
                g.graph().point(e, len * q(rng.gen_range(1..=6), 7))?
            };
            Ok(LaaksoPoint { level, point: p }.canonical())
        };
        let (p0, p1) = (point(s0)?, point(s1)?);
        let lw = match laakso_thick_witness(&fam, &p0, &p1, &half) {
            Ok(lw) => lw,
            Err(e) => {
                rec.fail(format!("pair {t} at level {level}: {e}"));
                continue;
            }
        };
        let r = verify_thick_witness(fam.as_ref(), &u, &v, &lw.witness, &half);
        rec.check(r.pass, || format!("pair {t} at level {level} fails {:?}", r.failed()));
        let ratio = twin_width(&fam, &lw.witness.z, &lw.witness.z_tilde)? / fam.try_distance(&p0, &p1)?;
        min_ratio = Some(min_ratio.map_or(ratio.clone(), |m| Rational::min_of(&m, &ratio)));
    }
    rec.put("random pairs per level", levels);
    rec.put("random min width / d(u0, v0)", min_ratio);
    Ok(())
}

fn twin_width(fam: &LaaksoFamily, z: &[LaaksoPoint], zt: &[LaaksoPoint]) -> Result<Rational> {
    let mut sum = Rational::zero();
    for (a, b) in z.iter().zip(zt) {
        sum += fam.try_distance(a, b)?;
    }
    Ok(sum)
}

fn tree_model_embedding(rec: &mut Recorder) -> Result<()> {
    let mut rows = Vec::new();
    for m in 1..=5u32 {
        let sys = dyadic_l1_tree(m)?;
        let g = diamond(m, DEFAULT_VERTEX_CAP)?;
        let e = stegall_diamond_embedding(&sys, &g)?;
        rec.check(e.dim() == 1 << m && matches!(e.norm, Norm::WeightedL1(_)), || {
            format!("D_{m}: target is {} of dimension {}", e.norm.tag(), e.dim())
        });
        let eps = &sys.epsilon;
        let formula = (Rational::one() - Rational::int(3) * eps) / (Rational::int(2) * (Rational::one() + eps));
        let space = shortest_path_metric(g.graph());
        let r = distortion(&e, &space, PairSelection::All)?;
        let (Scalar::Exact(lo), Scalar::Exact(hi)) = (&r.lower, &r.upper) else {
            rec.fail(format!("D_{m}: constants are not exact"));
            continue;
        };
        rec.check(*hi <= Rational::one(), || format!("D_{m}: upper constant {hi} > 1"));
        rec.check(*lo >= q(1, 2) && *lo >= formula, || format!("D_{m}: lower constant {lo} < {formula}"));
        let cert = e.certified().expect("the construction certifies itself");
        rec.check(cert.lower == formula && cert.lower <= *lo && cert.upper >= *hi, || {
            format!("D_{m}: certificate ({}, {}) against measured ({lo}, {hi})", cert.lower, cert.upper)
        });
        rows.push(serde_json::json!({
            "m": m, "vertices": space.len(), "pairs": r.pairs,
            "lower": lo, "upper": hi, "bound": formula,
        }));
    }
    rec.put("levels", rows);
    Ok(())
}

fn martingale(rec: &mut Recorder) -> Result<()> {
    let sys = dyadic_l1_tree(5)?;
    let g = diamond(5, DEFAULT_VERTEX_CAP)?;
    let e = stegall_diamond_embedding(&sys, &g)?;
    let cert = e.certified().expect("the construction certifies itself").clone();
    let map = GraphEmbedding::new(&e, g.graph())?;
    let oracle = DiamondOracle { graph: &g, refine: 0 };
    let config = ExtractConfig::new(6, Mode::Geodesic, cert.lower.clone(), cert.upper.clone());
    let trace = extract_martingale(&oracle, &map, &config)?;
    let tc = certify_trace(&trace)?;
    rec.put("ell", &trace.ell);
    rec.put("c", &trace.c);
    rec.put("steps", trace.steps.len() - 1);
    rec.check(trace.ell == q(1, 2) && trace.c == Rational::one(), || {
        format!("ell = {}, c = {}", trace.ell, trace.c)
    });
    rec.check(tc.pass, || {
        let bad: Vec<String> = tc
            .lines
            .iter()
            .filter(|l| !l.pass && !l.flagged_only)
            .map(|l| format!("{} at step {}", l.check, l.step))
            .collect();
        format!("trace certificate fails: {bad:?}")
    });
    rec.put("certificate lines", tc.lines.len());

    // Recomputed from the step functions themselves.
    let bound = Scalar::Exact(&trace.ell * &trace.c / Rational::int(4));
    let tol = config.tolerance;
    let fs: Vec<_> = trace.steps.iter().map(|s| &s.function).collect();
    let mut even = Vec::new();
    for k in 1..fs.len() {
        rec.check(fs[k - 1].partition().is_refined_by(fs[k].partition()), || {
            format!("P_{k} does not refine P_{}", k - 1)
        });
        let ce = conditional_expectation(fs[k], fs[k - 1].partition())?;
        let gap = l1_distance(&ce, fs[k - 1])?;
        rec.check(gap.le(&Scalar::zero(), 0.0), || format!("E[M_{k} | P_{}] misses M_{} by {gap}", k - 1, k - 1));
        if k % 2 == 0 {
            let d = l1_distance(fs[k], fs[k - 1])?;
            rec.check(d.ge(&bound, 0.0), || format!("‖M_{k} − M_{}‖₁ = {d} < {bound}", k - 1));
            if k + 1 < fs.len() {
                let further = l1_distance(fs[k + 1], fs[k - 1])?;
                rec.check(further.ge(&d, tol), || {
                    format!("‖M_{} − M_{}‖₁ = {further} < ‖M_{k} − M_{}‖₁ = {d}", k + 1, k - 1, k - 1)
                });
            }
            even.push(d);
        }
    }
    for (k, f) in fs.iter().enumerate() {
        let s = sup_norm(f)?;
        rec.check(s.le(&Scalar::Exact(Rational::one()), 0.0), || format!("sup ‖M_{k}‖ = {s}"));
    }
    rec.put("even step differences", even);
    rec.put("even step bound", bound);
    Ok(())
}

fn random_rational(rng: &mut ChaCha8Rng) -> Rational {
    q(rng.gen_range(-20..=20), rng.gen_range(1..=6))
}

fn random_vector(rng: &mut ChaCha8Rng, dim: usize) -> Vec<Rational> {
    (0..dim).map(|_| random_rational(rng)).collect()
}

fn positive_rational(rng: &mut ChaCha8Rng) -> Rational {
    q(rng.gen_range(1..=20), rng.gen_range(1..=6))
}

fn random_norm(rng: &mut ChaCha8Rng, dim: usize) -> Result<Norm> {
    Ok(match rng.gen_range(0..4) {
        0 => Norm::L1,
        1 => Norm::Linf,
        2 => Norm::Summing,
        _ => Norm::weighted_l1((0..dim).map(|_| positive_rational(rng)).collect())?,
    })
}

fn interval_and_branch(rec: &mut Recorder, seed: u64) -> Result<()> {
    let mut rng = rng_for(seed, 5);
    let tol = norm::DEFAULT_TOLERANCE;
    let mut by_norm: BTreeMap<&'static str, usize> = BTreeMap::new();
    for t in 0..10_000 {
        let dim = rng.gen_range(1..=4);
        let nm = random_norm(&mut rng, dim)?;
        *by_norm.entry(nm.tag()).or_default() += 1;
        let (a, b) = (positive_rational(&mut rng), positive_rational(&mut rng));
        let (x, y, z) = (random_vector(&mut rng, dim), random_vector(&mut rng, dim), random_vector(&mut rng, dim));
        let r = interval_lower_bound(&nm, &a, &b, &x, &y, &z, tol)?;
        rec.check(r.pass, || format!("interval instance {t}: {} < {}", r.lhs, r.rhs));
    }
    rec.put("interval instances by norm", &by_norm);

    let mut by_branch = [0usize; 2];
    for t in 0..10_000 {
        let dim = rng.gen_range(1..=4);
        let nm = random_norm(&mut rng, dim)?;
        let f_prev = random_vector(&mut rng, dim);
        let f_next = random_vector(&mut rng, dim);
        let f_z = random_vector(&mut rng, dim);
        let (f_zt, gap) = loop {
            let f = random_vector(&mut rng, dim);
            let gap = nm.eval_exact(&norm::sub(&f_z, &f))?;
            if gap.is_positive() {
                break (f, gap);
            }
        };
        let (a, b, dzz) = (positive_rational(&mut rng), positive_rational(&mut rng), positive_rational(&mut rng));
        let ell = &gap / &dzz * q(rng.gen_range(1..=8), 8);
        let c = choose_branch(&nm, &f_prev, &f_z, &f_zt, &f_next, &a, &b, &ell, &dzz, tol)?;
        by_branch[c.choice as usize] += 1;
        rec.check(c.pass, || format!("branch instance {t}: max({}, {}) < {}", c.lhs_z, c.lhs_z_tilde, c.bound));
    }
    rec.put("branch choices [z, z~]", by_branch);
    Ok(())
}

fn partitions(rec: &mut Recorder, seed: u64) -> Result<()> {
    let mut rng = rng_for(seed, 6);
    let d4 = diamond(4, DEFAULT_VERTEX_CAP)?;
    let x2 = laakso2(2, DEFAULT_VERTEX_CAP)?;
    let spaces: [&GraphMetric; 2] = [d4.metric(), x2.metric()];
    let mut refinements = 0usize;
    for t in 0..1000 {
        let m = spaces[t % 2];
        let n = m.graph().vertex_count();
        let x = rng.gen_range(0..n);
        let y = (x + rng.gen_range(1..n)) % n;
        let path = random_geodesic(m, x, y, &mut rng)?.points();
        // Each extension adds a random nonempty set of unused path points.
        let mut used: Vec<bool> = (0..path.len()).map(|i| i == 0 || i + 1 == path.len()).collect();
        let pick = |used: &[bool]| -> Vec<GraphPoint> {
            path.iter().zip(used).filter(|(_, &u)| u).map(|(p, _)| p.clone()).collect()
        };
        let mut seq = pick(&used);
        let mut iterated = partition_of(m, &seq)?;
        let length = rng.gen_range(1..=5);
        for _ in 0..length {
            let free: Vec<usize> = (0..path.len()).filter(|&i| !used[i]).collect();
            if free.is_empty() {
                break;
            }
            let take = rng.gen_range(1..=free.len());
            for _ in 0..take {
                used[free[rng.gen_range(0..free.len())]] = true;
            }
            let next = pick(&used);
            iterated = refine_partition(m, &iterated, &seq, &next)?;
            let direct = partition_of(m, &next)?;
            let ratio = b_equivalence_ratio(&iterated, &direct)?;
            refinements += 1;
            rec.check(iterated == direct && ratio == Rational::one(), || {
                format!("chain {t}: iterated partition differs from the direct one, ratio {ratio}")
            });
            seq = next;
        }
    }
    rec.put("geodesic chains", 1000);
    rec.put("geodesic refinements", refinements);

    // Chains that stay 2-geodesic, grown by inserting arbitrary vertices.
    let d3 = diamond(3, DEFAULT_VERTEX_CAP)?;
    let m = d3.metric();
    let n = m.graph().vertex_count();
    let c = Rational::int(2);
    let mut worst = Rational::one();
    let mut ratios = 0usize;
    for t in 0..200 {
        let x = rng.gen_range(0..n);
        let y = (x + rng.gen_range(1..n)) % n;
        let mut seq = vec![GraphPoint::Vertex(x), GraphPoint::Vertex(y)];
        let mut iterated = partition_of(m, &seq)?;
        for _ in 0..rng.gen_range(1..=5) {
            let mut next = None;
            for _ in 0..50 {
                let gap = rng.gen_range(0..seq.len() - 1);
                let r = GraphPoint::Vertex(rng.gen_range(0..n));
                if r == seq[gap] || r == seq[gap + 1] {
                    continue;
                }
                let mut cand = seq.clone();
                cand.insert(gap + 1, r);
                if is_c_geodesic(m, &cand, &c)?.holds {
                    next = Some(cand);
                    break;
                }
            }
            let Some(next) = next else { break };
            iterated = refine_partition(m, &iterated, &seq, &next)?;
            let direct = partition_of(m, &next)?;
            match b_equivalence_ratio(&iterated, &direct) {
                Ok(r) => {
                    worst = Rational::max_of(&worst, &r);
                    ratios += 1;
                }
                Err(e) => rec.fail(format!("C-geodesic chain {t}: {e}")),
            }
            seq = next;
        }
    }
    rec.put("2-geodesic refinements", ratios);
    rec.put("2-geodesic max b-ratio", worst);
    Ok(())
}

fn delta_trees(rec: &mut Recorder) -> Result<()> {
    let mut deltas = Vec::new();
    for n in 1..=6u32 {
        let sys = dyadic_l1_tree(n)?;
        let check = verify_delta_tree(sys.tree.vectors(), sys.tree.norm())?;
        rec.check(check.pass() && check.delta == Rational::one(), || {
            format!("dyadic tree {n}: δ = {}, violations {:?}", check.delta, check.violations)
        });
        deltas.push(check.delta);
    }
    rec.put("dyadic deltas, n = 1..6", deltas);

    let mut rows = Vec::new();
    for m in 1..=4u32 {
        let sys = dyadic_l1_tree(m)?;
        let g = diamond(m, DEFAULT_VERTEX_CAP)?;
        let fe = tree_to_diamond_partial_embedding(&sys.tree, &g)?;
        // Exhaustive recomputation over the active pairs.
        let mut lo: Option<Rational> = None;
        for (x, y) in fe.active.iter() {
            let (ix, iy) = (fe.embedding.image(g.graph().id(x))?, fe.embedding.image(g.graph().id(y))?);
            let r = fe.embedding.norm.eval_exact(&norm::sub(ix, iy))? / g.d(x, y);
            lo = Some(lo.map_or(r.clone(), |l| Rational::min_of(&l, &r)));
        }
        let lo = lo.unwrap_or_else(Rational::zero);
        rec.check(lo == fe.lambda, || format!("D_{m}: λ = {} but the active pairs give {lo}", fe.lambda));
        rec.check(lo >= q(1, 2), || format!("D_{m}: active-pair lower constant {lo} < 1/2"));
        rows.push(serde_json::json!({
            "m": m, "active pairs": fe.active.len(), "lambda": lo, "c": fe.c, "shifted": fe.shift.is_some(),
        }));
    }
    rec.put("from tree", rows);
    Ok(())
}

fn reflexivity(rec: &mut Recorder, seed: u64) -> Result<()> {
    let mut w = ReflexivityWitness::prefix_vectors(16);
    let b = basic_constant_by_vertices(&w.vectors)?;
    let lp = basic_constant(&w.vectors, &Norm::Linf, 1e-6)?;
    rec.put("basic constant", &b);
    rec.put("basic constant by LP", lp.optimum);
    rec.check((lp.optimum - b.to_f64()).abs() <= 1e-6, || {
        format!("vertex enumeration gives {b}, the LP {}", lp.optimum)
    });
    w.basic_constant = Some(b);
    let delta = Rational::int(2);
    let mut rng = rng_for(seed, 8);
    let fwd = forward_embedding_check(&w, &delta, 10_000, rng.gen(), &[])?;
    rec.put("forward samples", fwd.samples);
    rec.put("forward lower constant", &fwd.lower_constant);
    rec.put("forward ratio range", (&fwd.min_ratio, &fwd.max_ratio));
    rec.put("forward violations", fwd.violations.len());
    rec.check(fwd.pass && fwd.samples == 10_000, || {
        format!("{} forward violations, first {:?}", fwd.violations.len(), fwd.violations.first())
    });

    for t in 0..10_000 {
        let dim = rng.gen_range(1..=16);
        let z = random_vector(&mut rng, dim);
        let p = positive_decomposition(&z);
        let ids = p.identities(&z);
        let nonneg = p.positive.iter().chain(&p.negative).all(|x| !x.is_negative());
        let disjoint = p.positive.iter().zip(&p.negative).all(|(a, b)| a.is_zero() || b.is_zero());
        let difference = norm::sub(&p.positive, &p.negative) == z;
        let mass = l1_norm(&p.positive) + l1_norm(&p.negative) == l1_norm(&z);
        rec.check(ids.iter().all(|&i| i) && nonneg && disjoint && difference && mass, || {
            format!("decomposition {t} of {z:?}: identities {ids:?}")
        });
    }
    rec.put("decompositions", 10_000);

    let m = 8;
    let points: Vec<Vec<Rational>> = (0..m)
        .map(|i| (0..m).map(|j| Rational::int((i == j) as i64)).collect())
        .collect();
    let mut distances = Vec::new();
    for k in 1..m {
        let h = convex_hull_separation(&points, k, &Norm::L1)?;
        rec.check((h.distance - 2.0).abs() <= 1e-6, || format!("hull split {k}: distance {}", h.distance));
        distances.push(h.distance);
    }
    rec.put("hull distances, unit vectors of l1^8", distances);
    Ok(())
}
