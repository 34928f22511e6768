//! Input parsing and output writing. Every input problem surfaces as a
//! schema error naming the file, so that it maps to exit status 2.

use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use rnpcert::embeddings::{DeltaTree, Embedding, EmbeddingDoc, SeparatedTreeSystem};
use rnpcert::graph::EdgeDoc;
use rnpcert::{Error, Norm, Rational};

use crate::{Format, Global};

/// Keys added to every output document and ignored when it is read back.
const ENVELOPE: [&str; 3] = ["seed", "construction", "report"];

pub fn schema(path: &Path, msg: impl std::fmt::Display) -> anyhow::Error {
    Error::Schema(format!("{}: {msg}", path.display())).into()
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| schema(path, e))?;
    let mut value: Value = serde_json::from_str(&text).map_err(|e| schema(path, e))?;
    if let Value::Object(map) = &mut value {
        for key in ENVELOPE {
            map.remove(key);
        }
    }
    serde_json::from_value(value).map_err(|e| schema(path, e))
}

/// A graph as written by `generate`. When `family` and `level` are present
/// the graph is regenerated and must match the file.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level: Option<u32>,
    pub vertices: Vec<String>,
    pub edges: Vec<EdgeDoc>,
}

/// `{"norm", "weights"?, "vectors", "functionals"?, "epsilon"?}`; the last
/// two make it a separated system.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreeFile {
    pub norm: String,
    #[serde(default)]
    pub weights: Option<Vec<Rational>>,
    pub vectors: Vec<Vec<Rational>>,
    #[serde(default)]
    pub functionals: Option<Vec<Vec<Rational>>>,
    #[serde(default)]
    pub epsilon: Option<Rational>,
}

impl TreeFile {
    pub fn tree(&self) -> Result<DeltaTree> {
        let norm = Norm::from_tag(&self.norm, self.weights.clone())?;
        Ok(DeltaTree::new(self.vectors.clone(), norm)?)
    }

    pub fn system(&self, path: &Path) -> Result<SeparatedTreeSystem> {
        let (Some(f), Some(eps)) = (&self.functionals, &self.epsilon) else {
            return Err(schema(path, "a separated tree needs \"functionals\" and \"epsilon\""));
        };
        Ok(SeparatedTreeSystem::new(self.tree()?, f.clone(), eps.clone())?)
    }
}

pub fn read_embedding(path: &Path) -> Result<Embedding> {
    let doc: EmbeddingDoc = read_json(path)?;
    Embedding::from_doc(doc).with_context(|| format!("loading {}", path.display()))
}

pub fn parse_rational(what: &str, s: &str) -> Result<Rational> {
    s.parse::<Rational>()
        .map_err(|_| Error::Schema(format!("--{what}: not a rational: {s:?}")).into())
}

fn sink(global: &Global) -> Result<Box<dyn Write>> {
    Ok(match &global.out {
        Some(p) => Box::new(fs::File::create(p).with_context(|| format!("creating {}", p.display()))?),
        None => Box::new(std::io::stdout().lock()),
    })
}

/// Writes `doc` as JSON with the seed added at the top level.
pub fn emit_json(global: &Global, doc: &impl Serialize) -> Result<()> {
    let mut value = serde_json::to_value(doc)?;
    if let Value::Object(map) = &mut value {
        map.insert("seed".into(), Value::from(global.seed));
    }
    let mut out = sink(global)?;
    serde_json::to_writer_pretty(&mut out, &value)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

/// Writes a table, with the seed on a leading comment line.
pub fn emit_csv(global: &Global, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut out = sink(global)?;
    writeln!(out, "# seed {}", global.seed)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn emit(global: &Global, doc: &impl Serialize, table: Option<(&[&str], Vec<Vec<String>>)>) -> Result<()> {
    match (global.format, table) {
        (Format::Json, _) => emit_json(global, doc),
        (Format::Csv, Some((header, rows))) => emit_csv(global, header, &rows),
        (Format::Csv, None) => Err(Error::Schema("this command has no CSV form".into()).into()),
    }
}
