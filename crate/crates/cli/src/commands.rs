use std::path::Path;
use std::sync::Arc;

use anyhow::{anyhow, Context, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use rnpcert::acceptance::{self, DETERMINISM, IN_PROCESS};
use rnpcert::embeddings::{
    distortion, dyadic_l1_tree, edge_correspondence, stegall_diamond_embedding, tree_to_diamond_partial_embedding,
    Embedding, GraphEmbedding, LaaksoEmbedding, PairScope, PairSelection,
};
use rnpcert::generators::diamond::{BOTTOM, TOP};
use rnpcert::generators::{diamond, laakso, laakso2, DiamondGraph, LaaksoFamily, LaaksoGraph, LaaksoPoint};
use rnpcert::geodesics::{
    b_equivalence_ratio, diamond_thick_witness, enumerate_geodesics, is_c_geodesic, laakso_thick_witness,
    partition_of, random_geodesic, refine_partition, verify_iso_witness, verify_thick_witness, DiamondOracle,
    IsoWitness, LaaksoOracle, Report, ThickOracle, ThickWitness,
};
use rnpcert::graph::GraphDoc;
use rnpcert::martingale::{certify_trace, extract_martingale, ExtractConfig, MartingaleTrace, Mode, PointMap};
use rnpcert::reflexivity::{basic_constant, basic_constant_by_vertices, forward_embedding_check, ReflexivityWitness};
use rnpcert::space::SpaceDoc;
use rnpcert::{shortest_path_metric, Error, FiniteMetricSpace, GraphMetric, Metric, MetricGraph, Norm, Rational, Scalar};

use crate::files::{self, emit, parse_rational, read_json, schema, GraphFile, TreeFile};
use crate::{
    Cli, Command, Construction, Family, Global, MartingaleAction, ModeArg, OracleKind, ReflexivityAction, SpaceArgs,
    WitnessKind,
};

/// What a successful run certified.
pub struct Outcome {
    pub pass: bool,
}

impl Outcome {
    pub fn code(&self) -> u8 {
        if self.pass {
            0
        } else {
            1
        }
    }
}

const PASS: Outcome = Outcome { pass: true };

/// Exit status for an error: 2 for malformed input, 3 for a resource cap,
/// 1 for anything that stops a certificate from being produced.
pub fn exit_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<Error>() {
        Some(Error::Resource { .. }) => 3,
        Some(
            Error::Schema(_)
            | Error::InvalidGraph(_)
            | Error::InvalidPoint(_)
            | Error::Dimension { .. }
            | Error::Disconnected { .. },
        ) => 2,
        _ if e.downcast_ref::<serde_json::Error>().is_some() => 2,
        _ => 1,
    }
}

pub fn run(cli: &Cli) -> Result<Outcome> {
    let g = &cli.global;
    match &cli.command {
        Command::Generate { family, level } => generate(g, *family, *level),
        Command::Geodesics {
            space,
            from,
            to,
            limit,
            random,
        } => geodesics(g, space, from, to, *limit, *random),
        Command::Partition { space, points, parent, c } => partition(g, space, points, parent.as_deref(), c),
        Command::Certify {
            kind,
            space,
            u0,
            v0,
            c,
            refine,
            threshold,
            witness,
        } => {
            let req = CertifyRequest {
                kind: *kind,
                u0: u0.as_deref(),
                v0: v0.as_deref(),
                c: c.as_deref().map(|s| parse_rational("c", s)).transpose()?,
                refine: *refine,
                threshold: parse_rational("threshold", threshold)?,
                witness: witness.as_deref(),
            };
            certify(g, space, &req)
        }
        Command::Embed {
            construction,
            level,
            tree,
        } => embed(g, *construction, *level, tree.as_deref()),
        Command::Distortion {
            embedding,
            space,
            table,
            active,
        } => distortion_cmd(g, embedding, space, table.as_deref(), *active),
        Command::Martingale {
            action:
                MartingaleAction::Extract {
                    embedding,
                    oracle,
                    steps,
                    mode,
                    refine,
                    threshold,
                    lower,
                    upper,
                },
        } => {
            let req = ExtractRequest {
                oracle: *oracle,
                steps: *steps,
                mode: match mode {
                    ModeArg::Geodesic => Mode::Geodesic,
                    ModeArg::Iso => Mode::Iso,
                },
                refine: *refine,
                threshold: parse_rational("threshold", threshold)?,
                lower: lower.as_deref().map(|s| parse_rational("lower", s)).transpose()?,
                upper: upper.as_deref().map(|s| parse_rational("upper", s)).transpose()?,
            };
            extract(g, embedding, &req)
        }
        Command::Reflexivity {
            action:
                ReflexivityAction::Check {
                    witness,
                    n,
                    delta,
                    samples,
                },
        } => reflexivity(g, witness.as_deref(), *n, &parse_rational("delta", delta)?, *samples),
        Command::Selftest { criteria } => selftest(g, criteria),
    }
}

fn family_name(f: Family) -> &'static str {
    match f {
        Family::Diamond => "diamond",
        Family::Laakso2 => "laakso2",
    }
}

enum Space {
    Diamond(DiamondGraph),
    Laakso(LaaksoGraph),
    Plain(GraphMetric),
}

impl Space {
    fn metric(&self) -> &GraphMetric {
        match self {
            Space::Diamond(d) => d.metric(),
            Space::Laakso(l) => l.metric(),
            Space::Plain(m) => m,
        }
    }

    fn graph(&self) -> &MetricGraph {
        self.metric().graph()
    }

    fn generated(family: &str, level: u32, cap: u128) -> Result<Space> {
        Ok(match family {
            "diamond" => Space::Diamond(diamond(level, cap)?),
            "laakso2" => Space::Laakso(laakso2(level, cap)?),
            other => return Err(Error::Schema(format!("unknown family {other:?}")).into()),
        })
    }

    fn load(args: &SpaceArgs, cap: u128) -> Result<Space> {
        if let Some(n) = args.diamond {
            return Ok(Space::Diamond(diamond(n, cap)?));
        }
        if let Some(i) = args.laakso {
            return Ok(Space::Laakso(laakso2(i, cap)?));
        }
        let Some(path) = &args.graph else {
            return Err(Error::Schema("give one of --graph, --diamond, --laakso".into()).into());
        };
        let file: GraphFile = read_json(path)?;
        let doc = GraphDoc {
            vertices: file.vertices,
            edges: file.edges,
        };
        match (&file.family, file.level) {
            (Some(f), Some(level)) => {
                let space = Space::generated(f, level, cap)?;
                if space.graph().to_doc() != doc {
                    return Err(schema(path, format!("graph does not match {f} level {level}")));
                }
                Ok(space)
            }
            (None, None) => {
                let g = MetricGraph::from_doc(&doc).map_err(|e| schema(path, e))?;
                Ok(Space::Plain(GraphMetric::new(Arc::new(g))))
            }
            _ => Err(schema(path, "\"family\" and \"level\" go together")),
        }
    }
}

fn generate(g: &Global, family: Family, level: u32) -> Result<Outcome> {
    let space = Space::generated(family_name(family), level, g.cap)?;
    let doc = space.graph().to_doc();
    let rows = doc
        .edges
        .iter()
        .map(|e| vec![e.u.clone(), e.v.clone(), e.len.to_string()])
        .collect();
    let file = GraphFile {
        family: Some(family_name(family).into()),
        level: Some(level),
        vertices: doc.vertices,
        edges: doc.edges,
    };
    emit(g, &file, Some((&["u", "v", "len"], rows)))?;
    Ok(PASS)
}

fn vertex(graph: &MetricGraph, id: &str) -> Result<usize> {
    Ok(graph.vertex(id)?)
}

fn geodesics(g: &Global, args: &SpaceArgs, from: &str, to: &str, limit: usize, random: Option<usize>) -> Result<Outcome> {
    let space = Space::load(args, g.cap)?;
    let m = space.metric();
    let graph = m.graph();
    let (x, y) = (vertex(graph, from)?, vertex(graph, to)?);
    let paths = match random {
        Some(k) => {
            let mut rng = ChaCha8Rng::seed_from_u64(g.seed);
            (0..k).map(|_| random_geodesic(m, x, y, &mut rng)).collect::<Result<Vec<_>, _>>()?
        }
        None => enumerate_geodesics(m, x, y, limit)?,
    };
    let named: Vec<Vec<&str>> = paths
        .iter()
        .map(|p| p.vertices.iter().map(|&v| graph.id(v)).collect())
        .collect();
    let rows = named.iter().enumerate().map(|(i, p)| vec![i.to_string(), p.join(" ")]).collect();
    let doc = json!({
        "from": from,
        "to": to,
        "length": m.vertex_distance(x, y),
        "count": paths.len(),
        "geodesics": named,
        "edges": paths.iter().map(|p| &p.edges).collect::<Vec<_>>(),
    });
    emit(g, &doc, Some((&["index", "path"], rows)))?;
    Ok(PASS)
}

fn parse_chain(graph: &MetricGraph, s: &str) -> Result<Vec<rnpcert::GraphPoint>> {
    s.split(',')
        .map(|p| graph.parse_point(p.trim()).map_err(Into::into))
        .collect()
}

fn partition(g: &Global, args: &SpaceArgs, points: &str, parent: Option<&str>, c: &str) -> Result<Outcome> {
    let space = Space::load(args, g.cap)?;
    let m = space.metric();
    let seq = parse_chain(m.graph(), points)?;
    let c = parse_rational("c", c)?;
    let check = is_c_geodesic(m, &seq, &c)?;
    let direct = partition_of(m, &seq)?;
    let mut doc = json!({
        "points": seq.iter().map(|p| m.describe(p)).collect::<Vec<_>>(),
        "c_geodesic": check,
        "partition": direct,
    });
    if let Some(parent) = parent {
        let base = parse_chain(m.graph(), parent)?;
        let refined = refine_partition(m, &partition_of(m, &base)?, &base, &seq)?;
        doc["refined"] = json!(refined);
        doc["b_ratio"] = json!(b_equivalence_ratio(&refined, &direct)?);
    }
    let rows = (0..direct.interval_count())
        .map(|i| {
            let (a, b) = direct.interval(i);
            vec![i.to_string(), a.to_string(), b.to_string()]
        })
        .collect();
    emit(g, &doc, Some((&["interval", "left", "right"], rows)))?;
    Ok(Outcome { pass: check.holds })
}

struct CertifyRequest<'a> {
    kind: WitnessKind,
    u0: Option<&'a str>,
    v0: Option<&'a str>,
    c: Option<Rational>,
    refine: u32,
    threshold: Rational,
    witness: Option<&'a Path>,
}

/// A thick witness with points written out.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ThickWitnessFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    u: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    v: Option<String>,
    u0: String,
    v0: String,
    w: Vec<String>,
    z: Vec<String>,
    z_tilde: Vec<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct IsoWitnessFile {
    base: Vec<String>,
    z: Vec<String>,
    z_tilde: Vec<String>,
    constant: Rational,
}

/// Reads a witness either bare or under a `"witness"` key, as `certify`
/// writes it.
fn read_witness<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let v: Value = read_json(path)?;
    let inner = match v {
        Value::Object(mut m) if m.contains_key("witness") => m.remove("witness").expect("checked"),
        other => other,
    };
    serde_json::from_value(inner).map_err(|e| schema(path, e))
}

fn parse_all<P>(parse: &dyn Fn(&str) -> Result<P>, v: &[String]) -> Result<Vec<P>> {
    v.iter().map(|s| parse(s)).collect()
}

type BuildWitness<'a, P> = &'a dyn Fn(&P, &P) -> Result<ThickWitness<P>>;

fn certify_in<M: Metric>(
    metric: &M,
    parse: &dyn Fn(&str) -> Result<M::Point>,
    ends: Option<(M::Point, M::Point)>,
    build: BuildWitness<'_, M::Point>,
    req: &CertifyRequest<'_>,
    c: &Rational,
) -> Result<(Value, Report)> {
    let show = |ps: &[M::Point]| ps.iter().map(|p| metric.describe(p)).collect::<Vec<_>>();
    if let (WitnessKind::Iso, Some(path)) = (req.kind, req.witness) {
        let f: IsoWitnessFile = read_witness(path)?;
        let w = IsoWitness {
            base: parse_all(parse, &f.base)?,
            z: parse_all(parse, &f.z)?,
            z_tilde: parse_all(parse, &f.z_tilde)?,
            constant: f.constant,
        };
        let report = verify_iso_witness(metric, &w, c);
        return Ok((serde_json::to_value(&IsoWitnessFile { base: show(&w.base), z: show(&w.z), z_tilde: show(&w.z_tilde), constant: w.constant })?, report));
    }
    let (witness, u, v) = match req.witness {
        Some(path) => {
            let f: ThickWitnessFile = read_witness(path)?;
            let (u, v) = match (&f.u, &f.v, ends) {
                (Some(u), Some(v), _) => (parse(u)?, parse(v)?),
                (None, None, Some(ends)) => ends,
                _ => return Err(schema(path, "the witness needs \"u\" and \"v\" on this graph")),
            };
            let w = ThickWitness {
                u0: parse(&f.u0)?,
                v0: parse(&f.v0)?,
                w: parse_all(parse, &f.w)?,
                z: parse_all(parse, &f.z)?,
                z_tilde: parse_all(parse, &f.z_tilde)?,
            };
            (w, u, v)
        }
        None => {
            let Some((u, v)) = ends else {
                return Err(Error::Schema("a plain graph needs --witness".into()).into());
            };
            let u0 = req.u0.map(parse).transpose()?.unwrap_or_else(|| u.clone());
            let v0 = req.v0.map(parse).transpose()?.unwrap_or_else(|| v.clone());
            (build(&u0, &v0)?, u, v)
        }
    };
    let report = match req.kind {
        WitnessKind::Thick => verify_thick_witness(metric, &u, &v, &witness, c),
        WitnessKind::Iso => verify_iso_witness(metric, &witness.to_iso(Rational::one()), c),
    };
    let doc = ThickWitnessFile {
        u: Some(metric.describe(&u)),
        v: Some(metric.describe(&v)),
        u0: metric.describe(&witness.u0),
        v0: metric.describe(&witness.v0),
        w: show(&witness.w),
        z: show(&witness.z),
        z_tilde: show(&witness.z_tilde),
    };
    Ok((serde_json::to_value(&doc)?, report))
}

fn parse_laakso(family: &LaaksoFamily, default_level: u32, s: &str) -> Result<LaaksoPoint> {
    let (level, rest) = match s.strip_prefix('X').and_then(|r| r.split_once(':')) {
        Some((l, rest)) => (
            l.parse::<u32>()
                .map_err(|_| Error::InvalidPoint(format!("bad level in {s:?}")))?,
            rest,
        ),
        None => (default_level, s),
    };
    let g = family.level(level)?;
    let point = g.graph().parse_point(rest)?;
    Ok(LaaksoPoint { level, point }.canonical())
}

fn certify(g: &Global, args: &SpaceArgs, req: &CertifyRequest<'_>) -> Result<Outcome> {
    let space = Space::load(args, g.cap)?;
    let (witness, report, c, name) = match &space {
        Space::Diamond(d) => {
            let m = d.metric();
            let c = req.c.clone().unwrap_or_else(Rational::one);
            let parse = |s: &str| -> Result<rnpcert::GraphPoint> { Ok(m.graph().parse_point(s)?) };
            let build = |a: &rnpcert::GraphPoint, b: &rnpcert::GraphPoint| -> Result<ThickWitness<rnpcert::GraphPoint>> {
                let (rnpcert::GraphPoint::Vertex(a), rnpcert::GraphPoint::Vertex(b)) = (a, b) else {
                    return Err(Error::InvalidPoint("diamond witnesses join vertices".into()).into());
                };
                Ok(diamond_thick_witness(d, *a, *b, req.refine)?)
            };
            let ends = (d.point(BOTTOM), d.point(TOP));
            let (w, r) = certify_in(m, &parse, Some(ends), &build, req, &c)?;
            (w, r, c, format!("diamond {}", d.level()))
        }
        Space::Laakso(l) => {
            let family = LaaksoFamily::new(g.cap);
            let level = l.level();
            let c = req.c.clone().unwrap_or_else(|| req.threshold.clone());
            let parse = |s: &str| parse_laakso(&family, level, s);
            let build = |a: &LaaksoPoint, b: &LaaksoPoint| -> Result<ThickWitness<LaaksoPoint>> {
                Ok(laakso_thick_witness(&family, a, b, &req.threshold)?.witness)
            };
            let ends = (LaaksoPoint::vertex(0, laakso::U), LaaksoPoint::vertex(0, laakso::V));
            let (w, r) = certify_in(&family, &parse, Some(ends), &build, req, &c)?;
            (w, r, c, format!("laakso2 {level}"))
        }
        Space::Plain(m) => {
            let c = req.c.clone().unwrap_or_else(Rational::one);
            let parse = |s: &str| -> Result<rnpcert::GraphPoint> { Ok(m.graph().parse_point(s)?) };
            let build = |_: &rnpcert::GraphPoint, _: &rnpcert::GraphPoint| -> Result<ThickWitness<rnpcert::GraphPoint>> {
                Err(Error::Schema("a plain graph needs --witness".into()).into())
            };
            let (w, r) = certify_in(m, &parse, None, &build, req, &c)?;
            (w, r, c, "graph".to_string())
        }
    };
    let doc = json!({
        "kind": match req.kind { WitnessKind::Thick => "thick", WitnessKind::Iso => "iso" },
        "space": name,
        "c": c,
        "witness": witness,
        "report": report,
        "pass": report.pass,
    });
    let rows = report
        .clauses
        .iter()
        .map(|cl| {
            let values: Vec<String> = cl.values.iter().map(|(k, v)| format!("{k}={v}")).collect();
            vec![cl.clause.clone(), cl.pass.to_string(), values.join("; ")]
        })
        .collect();
    emit(g, &doc, Some((&["clause", "pass", "values"], rows)))?;
    Ok(Outcome { pass: report.pass })
}

fn embed(g: &Global, construction: Construction, level: u32, tree: Option<&Path>) -> Result<Outcome> {
    let d = diamond(level, g.cap)?;
    let tree_file: Option<TreeFile> = tree.map(read_json).transpose()?;
    let (e, info) = match construction {
        Construction::Stegall => {
            let sys = match (&tree_file, tree) {
                (Some(t), Some(p)) => t.system(p)?,
                _ => dyadic_l1_tree(level)?,
            };
            let e = stegall_diamond_embedding(&sys, &d)?;
            let mismatches = edge_correspondence(&d, &e, sys.tree.vectors());
            let info = json!({
                "kind": "stegall",
                "epsilon": sys.epsilon,
                "tree depth": sys.depth(),
                "edge mismatches": mismatches,
            });
            (e, info)
        }
        Construction::FromTree => {
            let t = match &tree_file {
                Some(t) => t.tree()?,
                None => dyadic_l1_tree(level)?.tree,
            };
            let fe = tree_to_diamond_partial_embedding(&t, &d)?;
            let mut info = serde_json::to_value(&fe)?;
            info["kind"] = json!("from-tree");
            info["active pairs"] = json!(fe.active.len());
            (fe.embedding, info)
        }
    };
    let mut doc = serde_json::to_value(e.to_doc())?;
    doc["construction"] = info;
    emit(g, &doc, None)?;
    Ok(PASS)
}

fn distortion_cmd(g: &Global, path: &Path, args: &SpaceArgs, table: Option<&Path>, active: bool) -> Result<Outcome> {
    let e = files::read_embedding(path)?;
    let (space, diamond_graph): (FiniteMetricSpace, Option<DiamondGraph>) = match table {
        Some(t) => {
            let doc: SpaceDoc = read_json(t)?;
            (FiniteMetricSpace::from_doc(doc).map_err(|err| schema(t, err))?, None)
        }
        None => {
            let s = if args.graph.is_none() && args.diamond.is_none() && args.laakso.is_none() {
                space_of_embedding(&e, g.cap)?
            } else {
                Space::load(args, g.cap)?
            };
            let fm = shortest_path_metric(s.graph());
            match s {
                Space::Diamond(d) => (fm, Some(d)),
                _ => (fm, None),
            }
        }
    };
    let listed: Vec<(usize, usize)>;
    let pairs = if active {
        let d = diamond_graph
            .as_ref()
            .ok_or_else(|| Error::Schema("--active needs a diamond graph".into()))?;
        listed = d.active_pairs(true).iter().collect();
        PairSelection::Listed(&listed)
    } else {
        PairSelection::All
    };
    let report = distortion(&e, &space, pairs)?;
    let scope = if active { PairScope::Active } else { PairScope::All };
    // A certificate over all pairs also covers the active ones.
    let checked = e
        .certified()
        .filter(|c| c.pairs == scope || c.pairs == PairScope::All)
        .map(|c| {
            let lower_ok = report.lower.ge(&Scalar::Exact(c.lower.clone()), g.tolerance);
            let upper_ok = report.upper.le(&Scalar::Exact(c.upper.clone()), g.tolerance);
            json!({ "lower": c.lower, "upper": c.upper, "lower holds": lower_ok, "upper holds": upper_ok })
        });
    let pass = checked
        .as_ref()
        .is_none_or(|c| c["lower holds"] == json!(true) && c["upper holds"] == json!(true));
    let doc = json!({
        "distortion": report,
        "scope": scope,
        "certificate": checked,
        "pass": pass,
    });
    emit(g, &doc, None)?;
    Ok(Outcome { pass })
}

/// The space an embedding file names, as `"diamond m"` or `"laakso2 i"`.
fn space_of_embedding(e: &Embedding, cap: u128) -> Result<Space> {
    let name = e
        .space
        .as_deref()
        .ok_or_else(|| Error::Schema("the embedding does not name its space; pass --graph, --diamond or --laakso".into()))?;
    let (family, level) = name
        .split_once(' ')
        .and_then(|(f, l)| Some((f, l.parse::<u32>().ok()?)))
        .ok_or_else(|| Error::Schema(format!("unrecognized space {name:?}")))?;
    Space::generated(family, level, cap)
}

struct ExtractRequest {
    oracle: OracleKind,
    steps: usize,
    mode: Mode,
    refine: u32,
    threshold: Rational,
    lower: Option<Rational>,
    upper: Option<Rational>,
}

fn run_extraction<O: ThickOracle, F: PointMap<<O::Space as Metric>::Point>>(
    oracle: &O,
    map: &F,
    config: &ExtractConfig,
) -> Result<MartingaleTrace> {
    Ok(extract_martingale(oracle, map, config)?)
}

fn extract(g: &Global, path: &Path, req: &ExtractRequest) -> Result<Outcome> {
    let e = files::read_embedding(path)?;
    let cert = e.certified();
    let lower = req
        .lower
        .clone()
        .or_else(|| cert.map(|c| c.lower.clone()))
        .ok_or_else(|| Error::Schema("no certified lower constant; pass --lower".into()))?;
    let upper = req
        .upper
        .clone()
        .or_else(|| cert.map(|c| c.upper.clone()))
        .ok_or_else(|| Error::Schema("no certified upper constant; pass --upper".into()))?;
    let mut config = ExtractConfig::new(req.steps, req.mode, lower, upper);
    config.tolerance = g.tolerance;
    let space = space_of_embedding(&e, g.cap)?;
    let trace = match (req.oracle, &space) {
        (OracleKind::Diamond, Space::Diamond(d)) => {
            let map = GraphEmbedding::new(&e, d.graph())?;
            run_extraction(&DiamondOracle { graph: d, refine: req.refine }, &map, &config)?
        }
        (OracleKind::Laakso, Space::Laakso(l)) => {
            let family = Arc::new(LaaksoFamily::new(g.cap));
            let map = LaaksoEmbedding::new(&e, l)?;
            let oracle = LaaksoOracle {
                family,
                threshold: req.threshold.clone(),
            };
            run_extraction(&oracle, &map, &config)?
        }
        _ => {
            return Err(Error::Schema(format!(
                "the {:?} oracle does not apply to {}",
                req.oracle,
                e.space.as_deref().unwrap_or("this space")
            ))
            .into())
        }
    };
    let certificate = certify_trace(&trace)?;
    let mut rows = Vec::new();
    for (k, step) in trace.steps.iter().enumerate() {
        let f = &step.function;
        for i in 0..f.partition().interval_count() {
            let (a, b) = f.partition().interval(i);
            let value: Vec<String> = f.values()[i].iter().map(ToString::to_string).collect();
            rows.push(vec![k.to_string(), i.to_string(), a.to_string(), b.to_string(), value.join(" ")]);
        }
    }
    let doc = json!({
        "trace": trace,
        "certificate": certificate,
        "pass": certificate.pass,
    });
    emit(g, &doc, Some((&["step", "interval", "left", "right", "value"], rows)))?;
    Ok(Outcome { pass: certificate.pass })
}

fn reflexivity(g: &Global, path: Option<&Path>, n: usize, delta: &Rational, samples: usize) -> Result<Outcome> {
    let mut w: ReflexivityWitness = match path {
        Some(p) => read_json(p)?,
        None => ReflexivityWitness::prefix_vectors(n),
    };
    w.verify()?;
    let norm = w.norm()?;
    let square = w.vectors.iter().all(|v| v.len() == w.vectors.len());
    let (b, method) = match (&w.basic_constant, &norm) {
        (Some(b), _) => (b.clone(), "given"),
        (None, Norm::Linf) if square && w.vectors.len() <= 24 => (basic_constant_by_vertices(&w.vectors)?, "vertices"),
        (None, _) => {
            let est = basic_constant(&w.vectors, &norm, 1e-6)?;
            let b = Rational::from_f64(est.estimate).ok_or_else(|| anyhow!("basic constant estimate is not finite"))?;
            (b, "linear programs")
        }
    };
    w.basic_constant = Some(b.clone());
    let report = forward_embedding_check(&w, delta, samples, g.seed, &[]).context("forward embedding check")?;
    let doc = json!({
        "n": w.vectors.len(),
        "theta": w.theta,
        "delta": delta,
        "basic_constant": b,
        "basic_constant_method": method,
        "forward": report,
        "pass": report.pass,
    });
    emit(g, &doc, None)?;
    Ok(Outcome { pass: report.pass })
}

fn selftest(g: &Global, criteria: &[u32]) -> Result<Outcome> {
    let ids: Vec<u32> = if criteria.is_empty() { IN_PROCESS.to_vec() } else { criteria.to_vec() };
    if ids.contains(&DETERMINISM) {
        return Err(Error::Schema(format!(
            "criterion {DETERMINISM} compares two selftest runs; run selftest twice and compare the outputs"
        ))
        .into());
    }
    if let Some(bad) = ids.iter().find(|id| !IN_PROCESS.contains(id)) {
        return Err(Error::Schema(format!("no criterion {bad}")).into());
    }
    let (report, times) = acceptance::run_criteria(&ids, g.seed)?;
    for (c, t) in report.criteria.iter().zip(&times) {
        eprintln!(
            "criterion {} ({}): {} in {:.3} s",
            c.id,
            c.name,
            if c.pass { "pass" } else { "FAIL" },
            t.as_secs_f64()
        );
    }
    let rows = report
        .criteria
        .iter()
        .map(|c| vec![c.id.to_string(), c.name.to_string(), c.pass.to_string(), c.failure_count.to_string()])
        .collect();
    emit(g, &report, Some((&["criterion", "name", "pass", "failures"], rows)))?;
    Ok(Outcome { pass: report.pass })
}
