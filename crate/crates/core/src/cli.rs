//! Command-line front end.

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::flow::{self, FlowVerdict, MinimalLeaf};
use crate::foliation::{
    adaptedness, leaf_mean_curvature, normal_jacobi, shape_operator, AdaptednessReport, BlockOperatorExport,
    FoliationConfig, Geometry, MeanCurvature,
};
use crate::lie_oracle::{adapted, ModelId};
use crate::root_data::{CoefficientRecord, RootDatum};
use crate::verify;

#[derive(Debug, Parser)]
#[command(name = "isoflow", version, about = "Solvable-group foliations on non-compact symmetric spaces")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Root datum, block structure and mean curvature coefficients.
    Describe(RunArgs),
    /// Shape and normal Jacobi operators and their commutators.
    Adaptedness(RunArgs),
    /// Mean curvature flow on the section.
    Flow(RunArgs),
    /// Closed forms against the matrix-model oracle; exit 1 on any failure.
    Verify(RunArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Matrix model: sl2r, sl3r, su21, su31.
    #[arg(long, default_value = "su21")]
    pub model: String,
    /// Root datum JSON; runs from root data alone (results unverified).
    #[arg(long, conflicts_with = "config")]
    pub datum: Option<PathBuf>,
    /// Full configuration JSON.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Dimension of b.
    #[arg(long = "b-dim", default_value_t = 0)]
    pub b_dim: usize,
    /// Number of chosen roots.
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    /// Offset of the leaf along xi^1 (t2..t4 for further chosen roots).
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub t1: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub t2: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub t3: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub t4: f64,
    /// Index of xi^i inside its root space, one per chosen root.
    #[arg(long, value_delimiter = ',')]
    pub xi: Vec<usize>,
    /// Final flow time.
    #[arg(long, default_value_t = flow::DEFAULT_HORIZON)]
    pub horizon: f64,
    /// RK4 step size.
    #[arg(long, default_value_t = flow::DEFAULT_STEP)]
    pub step: f64,
    /// Record a flow sample every this many steps.
    #[arg(long = "record-every", default_value_t = 100)]
    pub record_every: usize,
    /// Write output here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Output format; flow defaults to csv, the rest to json.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

impl RunArgs {
    fn offsets(&self) -> Result<Vec<f64>> {
        if self.k > 4 {
            return Err(Error::Config("at most four offsets can be given on the command line".into()));
        }
        Ok([self.t1, self.t2, self.t3, self.t4][..self.k].to_vec())
    }

    /// Build the configuration from `--config`, `--datum` or `--model`.
    pub fn foliation(&self) -> Result<FoliationConfig> {
        if let Some(path) = &self.config {
            return FoliationConfig::from_json(&fs::read_to_string(path)?);
        }
        let offsets = self.offsets()?;
        if let Some(path) = &self.datum {
            let datum = RootDatum::from_json(&fs::read_to_string(path)?)?;
            return FoliationConfig::canonical(datum, None, self.k, self.b_dim, offsets, self.xi.clone());
        }
        let id: ModelId = self.model.parse()?;
        let m = adapted(id)?;
        FoliationConfig::canonical(m.datum().clone(), Some(m), self.k, self.b_dim, offsets, self.xi.clone())
    }
}

/// What a command produced.
pub struct Outcome {
    pub output: String,
    pub exit: i32,
    /// Diagnostics for stderr.
    pub notes: Vec<String>,
}

#[derive(Serialize)]
struct RootEntry {
    index: usize,
    root: Vec<f64>,
    norm: f64,
    mult: usize,
    double_mult: usize,
    simple: bool,
}

#[derive(Serialize)]
struct BlockEntry {
    label: String,
    dim: usize,
}

#[derive(Serialize)]
struct Description {
    model: Option<String>,
    verified: bool,
    rank: usize,
    roots: Vec<RootEntry>,
    chosen_roots: Vec<usize>,
    b_basis: Vec<Vec<f64>>,
    offsets: Vec<f64>,
    blocks: Vec<BlockEntry>,
    coefficients: CoefficientRecord,
    mean_curvature: MeanCurvature,
}

#[derive(Serialize)]
struct AdaptednessOutput {
    report: AdaptednessReport,
    operators: Vec<BlockOperatorExport>,
}

#[derive(Serialize)]
struct FlowOutput {
    verdict: FlowVerdict,
    minimal_leaf: Option<MinimalLeaf>,
    trajectory: flow::FlowTrajectory,
}

fn json<T: Serialize>(v: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

fn describe(cfg: &FoliationConfig) -> Result<String> {
    let d = cfg.datum();
    let geo = Geometry::build(cfg)?;
    json(&Description {
        model: cfg.model().map(|m| m.model().id().to_string()),
        verified: cfg.is_verified(),
        rank: d.rank,
        roots: (0..d.len())
            .map(|i| RootEntry {
                index: i,
                root: d.roots[i].clone(),
                norm: d.norm(i),
                mult: d.mult[i],
                double_mult: d.double_mult[i],
                simple: d.is_simple(i),
            })
            .collect(),
        chosen_roots: cfg.set().indices.clone(),
        b_basis: cfg.b_basis().to_vec(),
        offsets: cfg.offsets().to_vec(),
        blocks: geo.blocks.iter().map(|b| BlockEntry { label: b.kind.label(), dim: b.dim }).collect(),
        coefficients: cfg.coefficients()?,
        mean_curvature: leaf_mean_curvature(cfg)?,
    })
}

fn adaptedness_output(cfg: &FoliationConfig) -> Result<String> {
    let mut operators = Vec::new();
    for n in cfg.normal_generators() {
        operators.push(shape_operator(cfg, &n)?.export());
        operators.push(normal_jacobi(cfg, &n)?.export());
    }
    json(&AdaptednessOutput { report: adaptedness(cfg)?, operators })
}

fn flow_output(cfg: &FoliationConfig, args: &RunArgs, format: Format) -> Result<String> {
    let coeffs = cfg.coefficients()?;
    let mut u0 = vec![0.0; cfg.m0()];
    u0.extend_from_slice(cfg.offsets());
    let trajectory = flow::integrate(&coeffs, &u0, args.horizon, args.step, args.record_every)?;
    match format {
        Format::Csv => Ok(trajectory.to_csv()),
        Format::Json => json(&FlowOutput {
            verdict: flow::classify(cfg)?,
            minimal_leaf: flow::find_minimal_leaf(&coeffs),
            trajectory,
        }),
    }
}

/// Run one command without touching stdout.
pub fn run(cli: &Cli) -> Result<Outcome> {
    let (args, default_format) = match &cli.command {
        Command::Flow(a) => (a, Format::Csv),
        Command::Describe(a) | Command::Adaptedness(a) | Command::Verify(a) => (a, Format::Json),
    };
    let format = args.format.unwrap_or(default_format);
    if format == Format::Csv && !matches!(cli.command, Command::Flow(_)) {
        return Err(Error::Config("csv output is only available for flow".into()));
    }
    let cfg = args.foliation()?;
    let mut notes = Vec::new();
    if !cfg.is_verified() {
        notes.push("root data without a matrix model: results are unverified".to_string());
    }
    let (output, exit) = match &cli.command {
        Command::Describe(_) => (describe(&cfg)?, 0),
        Command::Adaptedness(_) => (adaptedness_output(&cfg)?, 0),
        Command::Flow(_) => (flow_output(&cfg, args, format)?, 0),
        Command::Verify(_) => {
            let rep = verify::run_suite(&cfg)?;
            let failing = rep.failing();
            if !failing.is_empty() {
                notes.push(format!("failing checks: {}", failing.join(", ")));
            }
            (json(&rep)?, if rep.pass { 0 } else { 1 })
        }
    };
    Ok(Outcome { output, exit, notes })
}

/// Exit code for an error: 2 for usage and input problems, 1 otherwise.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::UnknownModel(_) | Error::Parse(_) | Error::Io(_) | Error::Domain(_) => 2,
        Error::DimensionMismatch { .. } | Error::UnsupportedArgument(_) => 2,
        Error::Model(_) | Error::Decomposition(_) | Error::Integration { .. } => 1,
    }
}

/// Parse arguments, run, write output; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let out_path = match &cli.command {
        Command::Describe(a) | Command::Adaptedness(a) | Command::Flow(a) | Command::Verify(a) => a.out.clone(),
    };
    match run(&cli) {
        Ok(o) => {
            for n in &o.notes {
                eprintln!("note: {n}");
            }
            let written = match out_path {
                Some(p) => fs::write(&p, &o.output),
                None => std::io::stdout().write_all(o.output.as_bytes()),
            };
            if let Err(e) = written {
                eprintln!("error: {e}");
                return 2;
            }
            o.exit
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
