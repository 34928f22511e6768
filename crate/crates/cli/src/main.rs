mod commands;
mod files;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rnpcert::generators::DEFAULT_VERTEX_CAP;
use rnpcert::norm::DEFAULT_TOLERANCE;

/// Exact certificates for diamond and Laakso graph constructions.
#[derive(Parser, Debug)]
#[command(name = "rnpcert", version)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Seed for every random choice; recorded in the output.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Largest vertex count any generated graph may have.
    #[arg(long, global = true, default_value_t = DEFAULT_VERTEX_CAP, value_parser = positive_cap)]
    pub cap: u128,

    /// Slack allowed in comparisons involving the Euclidean norm or LPs.
    #[arg(long, global = true, default_value_t = DEFAULT_TOLERANCE, value_parser = tolerance)]
    pub tolerance: f64,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

fn positive_cap(s: &str) -> Result<u128, String> {
    match s.parse::<u128>() {
        Ok(0) => Err("the cap must be positive".into()),
        Ok(c) => Ok(c),
        Err(e) => Err(e.to_string()),
    }
}

fn tolerance(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(t) if t >= 0.0 && t.is_finite() => Ok(t),
        Ok(_) => Err("the tolerance must be a finite number ≥ 0".into()),
        Err(e) => Err(e.to_string()),
    }
}

/// Where a command gets its graph: a file, or a generator level.
#[derive(Args, Debug, Clone)]
pub struct SpaceArgs {
    /// Graph file as written by `generate`.
    #[arg(long, conflicts_with_all = ["diamond", "laakso"])]
    pub graph: Option<PathBuf>,

    /// Use the diamond graph of this level.
    #[arg(long, conflicts_with = "laakso")]
    pub diamond: Option<u32>,

    /// Use the Laakso graph of this level.
    #[arg(long)]
    pub laakso: Option<u32>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Build a diamond or Laakso graph.
    Generate {
        #[arg(value_enum)]
        family: Family,
        #[arg(long)]
        level: u32,
    },
    /// List geodesics between two vertices.
    Geodesics {
        #[command(flatten)]
        space: SpaceArgs,
        #[arg(long)]
        from: String,
        #[arg(long)]
        to: String,
        /// Enumerate at most this many, in edge order.
        #[arg(long, default_value_t = 100)]
        limit: usize,
        /// Draw this many seeded random geodesics instead of enumerating.
        #[arg(long)]
        random: Option<usize>,
    },
    /// Partition of [0, 1] induced by a chain of points, optionally refined
    /// from a parent chain.
    Partition {
        #[command(flatten)]
        space: SpaceArgs,
        /// Comma-separated points: vertex ids or `edge:offset`.
        #[arg(long)]
        points: String,
        /// A sub-chain whose partition is refined along `--points`.
        #[arg(long)]
        parent: Option<String>,
        /// Report whether the chain is a C-geodesic for this C.
        #[arg(long, default_value = "1")]
        c: String,
    },
    /// Build and check fork witnesses.
    Certify {
        #[arg(value_enum)]
        kind: WitnessKind,
        #[command(flatten)]
        space: SpaceArgs,
        /// First point of the pair; defaults to the bottom endpoint.
        #[arg(long)]
        u0: Option<String>,
        /// Second point of the pair; defaults to the top endpoint.
        #[arg(long)]
        v0: Option<String>,
        /// Width constant to check against.
        #[arg(long)]
        c: Option<String>,
        /// Extra diamond levels between the pair and its fork points.
        #[arg(long, default_value_t = 0)]
        refine: u32,
        /// Laakso trisection threshold.
        #[arg(long, default_value = "1/2")]
        threshold: String,
        /// Check this witness file instead of building one.
        #[arg(long)]
        witness: Option<PathBuf>,
    },
    /// Build an embedding of a diamond graph.
    Embed {
        #[arg(value_enum)]
        construction: Construction,
        #[arg(long)]
        level: u32,
        /// Tree file `{"norm", "weights"?, "vectors"}`; defaults to the dyadic ℓ₁ tree.
        #[arg(long)]
        tree: Option<PathBuf>,
    },
    /// Lipschitz constants of an embedding over all or active pairs.
    Distortion {
        #[arg(long)]
        embedding: PathBuf,
        #[command(flatten)]
        space: SpaceArgs,
        /// Distance table file instead of a graph.
        #[arg(long, conflicts_with_all = ["graph", "diamond", "laakso"])]
        table: Option<PathBuf>,
        /// Only the active pairs of the diamond graph.
        #[arg(long)]
        active: bool,
    },
    /// Martingale extraction from an embedding.
    Martingale {
        #[command(subcommand)]
        action: MartingaleAction,
    },
    /// Summing-norm embedding checks.
    Reflexivity {
        #[command(subcommand)]
        action: ReflexivityAction,
    },
    /// Run the acceptance suite.
    Selftest {
        /// Comma-separated criterion numbers; defaults to all that run in-process.
        #[arg(long, value_delimiter = ',')]
        criteria: Vec<u32>,
    },
}

#[derive(Subcommand, Debug)]
pub enum MartingaleAction {
    Extract {
        #[arg(long)]
        embedding: PathBuf,
        #[arg(long, value_enum)]
        oracle: OracleKind,
        #[arg(long)]
        steps: usize,
        #[arg(long, value_enum, default_value_t = ModeArg::Geodesic)]
        mode: ModeArg,
        #[arg(long, default_value_t = 0)]
        refine: u32,
        #[arg(long, default_value = "1/2")]
        threshold: String,
        /// Lower constant to use instead of the embedding's certificate.
        #[arg(long)]
        lower: Option<String>,
        /// Upper constant to use instead of the embedding's certificate.
        #[arg(long)]
        upper: Option<String>,
    },
}

#[derive(Subcommand, Debug)]
pub enum ReflexivityAction {
    Check {
        /// Witness file; defaults to the prefix vectors of `--n`.
        #[arg(long)]
        witness: Option<PathBuf>,
        #[arg(long, default_value_t = 16)]
        n: usize,
        #[arg(long, default_value = "2")]
        delta: String,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Family {
    Diamond,
    Laakso2,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum WitnessKind {
    Thick,
    Iso,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Construction {
    Stegall,
    FromTree,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OracleKind {
    Diamond,
    Laakso,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Geodesic,
    Iso,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = std::time::Instant::now();
    let status = match commands::run(&cli) {
        Ok(outcome) => outcome.code(),
        Err(e) => {
            eprintln!("error: {e:#}");
            commands::exit_code(&e)
        }
    };
    eprintln!("runtime: {:.3} s", start.elapsed().as_secs_f64());
    ExitCode::from(status)
}
