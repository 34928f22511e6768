//! Extraction of a divergent martingale from an embedding, and an
//! independent checker for the resulting trace.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geodesics::{
    b_equivalence_ratio, chain_lengths, partition_of, refine_partition, verify_thick_witness, Partition, ThickOracle,
    ThickWitness,
};
use crate::graph::Metric;
use crate::martingale::{
    choose_branch, conditional_expectation, l1_distance, step_from_cgeodesic, step_from_geodesic, sup_norm,
    PointMap, StepFunction,
};
use crate::norm::{self, Norm, Scalar, DEFAULT_TOLERANCE};
use crate::rational::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Breakpoints at normalized distances from `u`.
    Geodesic,
    /// Breakpoints by iterated proportional refinement of C-geodesics.
    Iso,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Branch {
    Z,
    ZTilde,
}

#[derive(Clone, Debug)]
pub struct ExtractConfig {
    pub steps: usize,
    pub mode: Mode,
    /// Certified lower Lipschitz constant of the map (before normalization).
    pub lower: Rational,
    /// Certified upper Lipschitz constant of the map; images are divided by it.
    pub upper: Rational,
    pub tolerance: f64,
    /// Run the full clause check on every witness the oracle returns.
    pub verify_witnesses: bool,
}

impl ExtractConfig {
    pub fn new(steps: usize, mode: Mode, lower: Rational, upper: Rational) -> Self {
        ExtractConfig {
            steps,
            mode,
            lower,
            upper,
            tolerance: DEFAULT_TOLERANCE,
            verify_witnesses: true,
        }
    }
}

/// The fork decision at one `z`/`z~` pair.
#[derive(Clone, Debug, Serialize)]
pub struct BranchRecord {
    pub z: String,
    pub z_tilde: String,
    pub chosen: Branch,
    pub lhs_z: Scalar,
    pub lhs_z_tilde: Scalar,
    pub bound: Scalar,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct TraceStep {
    pub index: usize,
    pub points: Vec<String>,
    pub function: StepFunction,
    pub choices: Vec<BranchRecord>,
    /// Iso mode: length of the chain over `d(u, v)`.
    pub chain_ratio: Option<Rational>,
    /// Iso mode: B-ratio of the iterated partition against the direct one.
    pub b_ratio: Option<Rational>,
}

#[derive(Clone, Debug, Serialize)]
pub struct MartingaleTrace {
    pub mode: Mode,
    /// Lower constant after dividing the map by `upper`.
    pub ell: Rational,
    pub upper: Rational,
    pub c: Rational,
    pub duv: Rational,
    pub steps: Vec<TraceStep>,
    #[serde(skip)]
    pub tolerance: f64,
}

struct Normalized<'a, F> {
    inner: &'a F,
    factor: Rational,
}

impl<P, F: PointMap<P>> PointMap<P> for Normalized<'_, F> {
    fn norm(&self) -> &Norm {
        self.inner.norm()
    }

    fn image(&self, p: &P) -> Result<Vec<Rational>> {
        Ok(norm::scale(&self.inner.image(p)?, &self.factor))
    }
}

/// Builds `M_0, …, M_steps`.
///
/// Odd steps ask the oracle for fork witnesses on every consecutive pair of
/// the current chain and insert the `w` points; even steps insert, at every
/// fork, whichever of `z`, `z~` makes the difference quotient jump more.
pub fn extract_martingale<O, F>(oracle: &O, map: &F, config: &ExtractConfig) -> Result<MartingaleTrace>
where
    O: ThickOracle,
    F: PointMap<<O::Space as Metric>::Point>,
{
    if !config.lower.is_positive() {
        return Err(Error::precondition(format!(
            "lower Lipschitz constant must be positive, got {}",
            config.lower
        )));
    }
    if config.upper < config.lower {
        return Err(Error::precondition("upper Lipschitz constant is below the lower one"));
    }
    let space = oracle.space();
    let (u, v) = oracle.endpoints();
    let duv = space.distance(&u, &v);
    let c = oracle.constant();
    let ell = &config.lower / &config.upper;
    let f = Normalized {
        inner: map,
        factor: config.upper.recip(),
    };
    let tol = config.tolerance;
    let describe = |seq: &[<O::Space as Metric>::Point]| seq.iter().map(|p| space.describe(p)).collect::<Vec<_>>();

    let mut seq = vec![u.clone(), v.clone()];
    let mut partition = Partition::trivial();
    let first = match config.mode {
        Mode::Geodesic => step_from_geodesic(space, &f, &seq, &u, &v)?,
        Mode::Iso => step_from_cgeodesic(&f, &seq, &partition)?,
    };
    let mut steps = vec![TraceStep {
        index: 0,
        points: describe(&seq),
        function: first,
        choices: Vec::new(),
        chain_ratio: iso_ratio(config.mode, space, &seq, &duv),
        b_ratio: iso_b(config.mode, space, &seq, &partition)?,
    }];
    let mut pending: Vec<ThickWitness<<O::Space as Metric>::Point>> = Vec::new();

    for s in 1..=config.steps {
        let mut choices = Vec::new();
        let next = if s % 2 == 1 {
            pending.clear();
            let mut next = vec![seq[0].clone()];
            for pair in seq.windows(2) {
                let fail = |reason: String| Error::Oracle {
                    u0: space.describe(&pair[0]),
                    v0: space.describe(&pair[1]),
                    reason,
                };
                let w = oracle.witness(&pair[0], &pair[1]).map_err(|e| fail(e.to_string()))?;
                if config.verify_witnesses {
                    let report = verify_thick_witness(space, &u, &v, &w, &c);
                    if !report.pass {
                        return Err(fail(format!("witness fails {:?}", report.failed())));
                    }
                }
                next.extend(w.w[1..].iter().cloned());
                pending.push(w);
            }
            next
        } else {
            // The fork sequence with every z chosen fixes the interval
            // lengths; the branch choice does not change them.
            let all_z: Vec<_> = interleave(&pending, |_, _| Branch::Z);
            let lengths: Vec<(Rational, Rational)> = match config.mode {
                Mode::Geodesic => fork_lengths(&chain_lengths(space, &all_z)),
                Mode::Iso => {
                    let gamma = refine_partition(space, &partition, &seq, &all_z)?;
                    let l: Vec<Rational> = (0..gamma.interval_count()).map(|k| gamma.length(k)).collect();
                    fork_lengths(&l)
                }
            };
            let mut picks = Vec::new();
            let mut k = 0;
            for w in &pending {
                for i in 1..=w.n() {
                    let (a, b) = &lengths[k];
                    k += 1;
                    let (z, zt) = (&w.z[i - 1], &w.z_tilde[i - 1]);
                    let dzz = space.distance(z, zt);
                    let choice = choose_branch(
                        f.norm(),
                        &f.image(&w.w[i - 1])?,
                        &f.image(z)?,
                        &f.image(zt)?,
                        &f.image(&w.w[i])?,
                        a,
                        b,
                        &ell,
                        &dzz,
                        tol,
                    )
                    .map_err(|e| Error::Oracle {
                        u0: space.describe(&w.w[i - 1]),
                        v0: space.describe(&w.w[i]),
                        reason: e.to_string(),
                    })?;
                    choices.push(BranchRecord {
                        z: space.describe(z),
                        z_tilde: space.describe(zt),
                        chosen: choice.choice,
                        lhs_z: choice.lhs_z,
                        lhs_z_tilde: choice.lhs_z_tilde,
                        bound: choice.bound,
                        pass: choice.pass,
                    });
                    picks.push(choice.choice);
                }
            }
            let mut it = picks.into_iter();
            interleave(&pending, |_, _| it.next().expect("one pick per fork"))
        };
        let function = match config.mode {
            Mode::Geodesic => step_from_geodesic(space, &f, &next, &u, &v)?,
            Mode::Iso => {
                let refined = refine_partition(space, &partition, &seq, &next)?;
                partition = refined;
                step_from_cgeodesic(&f, &next, &partition)?
            }
        };
        seq = next;
        steps.push(TraceStep {
            index: s,
            points: describe(&seq),
            function,
            choices,
            chain_ratio: iso_ratio(config.mode, space, &seq, &duv),
            b_ratio: iso_b(config.mode, space, &seq, &partition)?,
        });
    }
    Ok(MartingaleTrace {
        mode: config.mode,
        ell,
        upper: config.upper.clone(),
        c,
        duv,
        steps,
        tolerance: tol,
    })
}

/// `w_0, z'_1, w_1, …` over all pending witnesses, joined end to end.
fn interleave<P: Clone>(pending: &[ThickWitness<P>], mut pick: impl FnMut(usize, usize) -> Branch) -> Vec<P> {
    let mut out = vec![pending[0].w[0].clone()];
    for (s, w) in pending.iter().enumerate() {
        for i in 1..=w.n() {
            out.push(match pick(s, i) {
                Branch::Z => w.z[i - 1].clone(),
                Branch::ZTilde => w.z_tilde[i - 1].clone(),
            });
            out.push(w.w[i].clone());
        }
    }
    out
}

/// Pairs of consecutive lengths `(before fork, after fork)`.
fn fork_lengths(lengths: &[Rational]) -> Vec<(Rational, Rational)> {
    lengths.chunks(2).map(|c| (c[0].clone(), c[1].clone())).collect()
}

fn iso_ratio<M: Metric>(mode: Mode, space: &M, seq: &[M::Point], duv: &Rational) -> Option<Rational> {
    (mode == Mode::Iso).then(|| chain_lengths(space, seq).iter().sum::<Rational>() / duv)
}

fn iso_b<M: Metric>(mode: Mode, space: &M, seq: &[M::Point], partition: &Partition) -> Result<Option<Rational>> {
    if mode != Mode::Iso {
        return Ok(None);
    }
    Ok(Some(b_equivalence_ratio(partition, &partition_of(space, seq)?)?))
}

/// One checked inequality of a trace.
#[derive(Clone, Debug, Serialize)]
pub struct CertLine {
    pub check: String,
    pub step: usize,
    pub value: Scalar,
    pub bound: Scalar,
    pub pass: bool,
    /// Failures of flagged lines are reported but do not fail the trace.
    pub flagged_only: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct TraceCertificate {
    pub ell: Rational,
    pub c: Rational,
    pub duv: Rational,
    pub lines: Vec<CertLine>,
    pub pass: bool,
    pub flags: usize,
}

impl TraceCertificate {
    pub fn lines_for(&self, check: &str) -> Vec<&CertLine> {
        self.lines.iter().filter(|l| l.check == check).collect()
    }
}

fn flag(b: bool) -> Scalar {
    Scalar::Exact(Rational::int(b as i64))
}

/// Re-checks a trace from its step functions alone: nesting, the
/// martingale identity, boundedness, the even-step divergence bound and the
/// contraction inequality for odd steps.
pub fn certify_trace(trace: &MartingaleTrace) -> Result<TraceCertificate> {
    let tol = trace.tolerance;
    let fs: Vec<&StepFunction> = trace.steps.iter().map(|s| &s.function).collect();
    let mut lines = Vec::new();
    let mut push = |check: &str, step: usize, value: Scalar, bound: Scalar, pass: bool, flagged_only: bool| {
        lines.push(CertLine {
            check: check.to_string(),
            step,
            value,
            bound,
            pass,
            flagged_only,
        })
    };
    for k in 1..fs.len() {
        let nested = fs[k - 1].partition().is_refined_by(fs[k].partition());
        push("nested partitions", k, flag(nested), flag(true), nested, false);
        if nested {
            let e = conditional_expectation(fs[k], fs[k - 1].partition())?;
            let gap = l1_distance(&e, fs[k - 1])?;
            let ok = gap.le(&Scalar::zero(), tol);
            push("conditional expectation", k, gap, Scalar::zero(), ok, false);
        }
    }
    for (k, (f, step)) in fs.iter().zip(&trace.steps).enumerate() {
        let sup = sup_norm(f)?;
        match trace.mode {
            Mode::Geodesic => {
                let ok = sup.le(&Scalar::Exact(Rational::one()), tol);
                push("sup norm", k, sup, Scalar::Exact(Rational::one()), ok, false);
            }
            Mode::Iso => {
                let b = step.b_ratio.clone().unwrap_or_else(Rational::one);
                let cc = step.chain_ratio.clone().unwrap_or_else(Rational::one);
                let bound = Scalar::Exact(b * cc * &trace.duv);
                let ok = sup.le(&bound, tol);
                push("sup norm", k, sup, bound, ok, true);
            }
        }
    }
    let scale = match trace.mode {
        Mode::Geodesic => Rational::one(),
        Mode::Iso => trace.duv.clone(),
    };
    let div_bound = Scalar::Exact(&trace.ell * &trace.c * scale / Rational::int(4));
    let mut k = 2;
    while k < fs.len() {
        let d = l1_distance(fs[k], fs[k - 1])?;
        let ok = d.ge(&div_bound, tol);
        push("even difference", k, d.clone(), div_bound.clone(), ok, false);
        if k + 1 < fs.len() {
            let wide = l1_distance(fs[k + 1], fs[k - 1])?;
            let ok = wide.ge(&d, tol);
            push("contraction", k + 1, wide, d, ok, false);
        }
        k += 2;
    }
    for step in &trace.steps {
        for ch in &step.choices {
            let best = if ch.chosen == Branch::Z { &ch.lhs_z } else { &ch.lhs_z_tilde };
            push("branch dichotomy", step.index, best.clone(), ch.bound.clone(), ch.pass, false);
        }
    }
    let pass = lines.iter().all(|l| l.pass || l.flagged_only);
    let flags = lines.iter().filter(|l| !l.pass && l.flagged_only).count();
    Ok(TraceCertificate {
        ell: trace.ell.clone(),
        c: trace.c.clone(),
        duv: trace.duv.clone(),
        lines,
        pass,
        flags,
    })
}
