use std::collections::HashSet;
use std::ffi::OsString;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use edgeboost::{Error, Target};

#[derive(Debug, Parser)]
#[command(name = "edgeboost", version, about = "Train, export and check PV inverter power models")]
pub struct Cli {
    /// Seed for data synthesis and the train/test split.
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,

    /// key=value file supplying defaults; flags given on the command line win.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic inverter CSV.
    Synth(SynthArgs),
    /// Train a model on the 8:2 split of a CSV and write the artifact.
    Train(TrainArgs),
    /// Score an artifact against a CSV.
    Eval(EvalArgs),
    /// Predict from an artifact.
    Infer(InferArgs),
    /// Validate an artifact and rewrite it in canonical form.
    Export(ExportArgs),
    /// Compare float64 and float32 predictions.
    Parity(ParityArgs),
    /// Time single-sample float32 inference.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub days: u32,
    /// Rated capacity in kW.
    #[arg(long, default_value_t = 10.0)]
    pub capacity: f64,
    #[arg(long, value_name = "PATH")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// Telemetry CSV.
    #[arg(long, value_name = "PATH")]
    pub data: PathBuf,
    /// Rated capacity in kW.
    #[arg(long)]
    pub capacity: f64,
    #[arg(long, default_value_t = 1)]
    pub inverter_id: u8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TargetArg {
    Active,
    Reactive,
}

impl From<TargetArg> for Target {
    fn from(t: TargetArg) -> Self {
        match t {
            TargetArg::Active => Target::Active,
            TargetArg::Reactive => Target::Reactive,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Baseline {
    Ols,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, value_enum)]
    pub target: TargetArg,
    #[arg(long, value_name = "PATH")]
    pub model_out: PathBuf,
    #[arg(long, default_value_t = 100)]
    pub num_trees: usize,
    #[arg(long, default_value_t = 6)]
    pub max_depth: usize,
    #[arg(long, default_value_t = 0.3)]
    pub learning_rate: f64,
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    #[arg(long, default_value_t = 0.0)]
    pub gamma: f64,
    #[arg(long, default_value_t = 1.0)]
    pub min_child_weight: f64,
    #[arg(long, default_value_t = 0.8)]
    pub train_fraction: f64,
    /// Also fit and report a linear baseline.
    #[arg(long, value_enum)]
    pub baseline: Option<Baseline>,
    /// Report MAPE as (1 - sqrt(mean((y - yhat)^2 / capacity))) * 100.
    #[arg(long)]
    pub mape_literal: bool,
    /// Recorded in the artifact; defaults to the newest training timestamp.
    #[arg(long)]
    pub created_at: Option<String>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long, value_name = "PATH")]
    pub model: PathBuf,
    #[arg(long, value_name = "PATH")]
    pub data: PathBuf,
    /// Score every cleaned row instead of the held-out share.
    #[arg(long)]
    pub all: bool,
    #[arg(long, default_value_t = 0.8)]
    pub train_fraction: f64,
    #[arg(long)]
    pub mape_literal: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Precision {
    F64,
    F32,
}

#[derive(Debug, Args)]
pub struct InferArgs {
    #[arg(long, value_name = "PATH")]
    pub model: PathBuf,
    /// One input as comma-separated values.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "input_csv", required_unless_present = "input_csv")]
    pub input: Option<String>,
    /// CSV with one input per row; a non-numeric first row is treated as a header.
    #[arg(long, value_name = "PATH")]
    pub input_csv: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Precision::F64)]
    pub precision: Precision,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    #[arg(long, value_name = "PATH")]
    pub model: PathBuf,
    #[arg(long, value_name = "PATH")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalRows {
    /// Model artifacts; repeat for several.
    #[arg(long = "model", value_name = "PATH", required = true)]
    pub models: Vec<PathBuf>,
    /// Telemetry CSVs, one per model, or one shared by all.
    #[arg(long = "data", value_name = "PATH", required = true)]
    pub data: Vec<PathBuf>,
    /// Use every cleaned row instead of the held-out share.
    #[arg(long)]
    pub all: bool,
    #[arg(long, default_value_t = 0.8)]
    pub train_fraction: f64,
}

#[derive(Debug, Args)]
pub struct ParityArgs {
    #[command(flatten)]
    pub rows: EvalRows,
    /// Floor on the relative-error denominator.
    #[arg(long, default_value_t = edgeboost::edge_runtime::DEFAULT_PARITY_EPS)]
    pub eps: f64,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub rows: EvalRows,
    #[arg(long, default_value_t = 20)]
    pub reps: usize,
}

/// Parses `key=value` lines; `#` starts a comment.
pub fn read_config(path: &Path) -> anyhow::Result<Vec<(String, String)>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            bail!(Error::InvalidArgument(format!(
                "{}:{}: expected key=value, got `{line}`",
                path.display(),
                n + 1
            )));
        };
        out.push((k.trim().replace('_', "-"), v.trim().to_string()));
    }
    Ok(out)
}

/// Position of the subcommand name in `argv`, skipping global flags.
fn subcommand_index(argv: &[OsString]) -> Option<usize> {
    let mut i = 1;
    while i < argv.len() {
        let a = argv[i].to_string_lossy();
        if a == "--seed" || a == "--config" {
            i += 2;
        } else if a.starts_with('-') {
            i += 1;
        } else {
            return Some(i);
        }
    }
    None
}

fn config_path(argv: &[OsString]) -> Option<PathBuf> {
    let mut it = argv.iter().map(|a| a.to_string_lossy().into_owned());
    while let Some(a) = it.next() {
        if a == "--config" {
            return it.next().map(PathBuf::from);
        }
        if let Some(p) = a.strip_prefix("--config=") {
            return Some(PathBuf::from(p));
        }
    }
    None
}

/// Inserts config entries as flags right after the subcommand, for keys the
/// subcommand accepts and the command line does not already set.
pub fn merge_config(argv: Vec<OsString>) -> anyhow::Result<Vec<OsString>> {
    let Some(path) = config_path(&argv) else {
        return Ok(argv);
    };
    let entries = read_config(&path)?;
    let Some(at) = subcommand_index(&argv) else {
        return Ok(argv);
    };
    let cmd = Cli::command();
    let name = argv[at].to_string_lossy().into_owned();
    let Some(sub) = cmd.find_subcommand(&name) else {
        return Ok(argv);
    };
    let own: HashSet<String> = sub.get_arguments().filter_map(|a| a.get_long()).map(str::to_string).collect();
    let known: HashSet<String> = cmd
        .get_subcommands()
        .flat_map(|s| s.get_arguments().filter_map(|a| a.get_long()).map(str::to_string))
        .chain(["seed".to_string()])
        .collect();
    let given: HashSet<String> = argv
        .iter()
        .filter_map(|a| a.to_str()?.strip_prefix("--").map(|s| s.split('=').next().unwrap_or(s).to_string()))
        .collect();

    let mut injected = Vec::new();
    for (key, value) in entries {
        if !known.contains(&key) {
            bail!(Error::InvalidArgument(format!("unknown config key `{key}` in {}", path.display())));
        }
        if !(own.contains(&key) || key == "seed") || given.contains(&key) {
            continue;
        }
        match value.as_str() {
            "true" => injected.push(OsString::from(format!("--{key}"))),
            "false" => {}
            _ => {
                injected.push(OsString::from(format!("--{key}")));
                injected.push(OsString::from(value));
            }
        }
    }
    let mut out = argv;
    out.splice(at + 1..at + 1, injected);
    Ok(out)
}
