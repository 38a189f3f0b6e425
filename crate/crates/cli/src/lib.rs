//! Command-line front end for training minimum pure decision trees.

mod commands;
mod train;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use mpdt_core::{BinDataset, Error, RawDataset};
use serde::{Deserialize, Serialize};

pub use commands::{cmd_encode, cmd_evaluate, cmd_export, cmd_maxsat, cmd_oracle, cmd_preprocess, cmd_sat};
pub use train::{cmd_train, RunManifest, TrainReport};

#[derive(Debug, Parser)]
#[command(name = "mpdt", version, about = "Minimum pure decision trees via Partial MaxSAT")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Discretize and binarize a CSV file.
    Preprocess(PreprocessArgs),
    /// Write the MaxSAT instance of a dataset as WCNF plus a variable map.
    Encode(EncodeArgs),
    /// Train, select and evaluate a minimum pure decision tree.
    Train(TrainArgs),
    /// Score a trained model.
    Evaluate(EvaluateArgs),
    /// Render a model as Graphviz or JSON.
    Export(ExportArgs),
    /// Solve a DIMACS CNF file.
    Sat(FileArgs),
    /// Solve a WCNF file with the linear search.
    Maxsat(FileArgs),
    /// Exhaustive minimum tree search (small inputs only).
    #[command(hide = true)]
    Oracle(DataArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConflictPolicy {
    /// Refuse inseparable data.
    Error,
    /// Keep the majority label of each conflicting group.
    Majority,
}

/// Where the data comes from and how it is binarized.
#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct DataArgs {
    /// CSV file with a header row, or a `.bin` file written by `preprocess`.
    pub input: PathBuf,
    /// Name of the label column (CSV input only).
    #[arg(long, default_value = "target")]
    pub label: String,
    /// Equal-width bins for continuous columns.
    #[arg(long, default_value_t = 8)]
    pub bins: usize,
    #[arg(long, value_enum, default_value_t = ConflictPolicy::Error)]
    pub resolve_conflicts: ConflictPolicy,
}

#[derive(Debug, Args)]
pub struct PreprocessArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Output file (one line per example: bits then class).
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EncodeArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Node upper bound (odd) or `auto` for the greedy tree size.
    #[arg(long, default_value = "auto")]
    pub ub: String,
    #[arg(long, default_value_t = 3)]
    pub lb: usize,
    /// WCNF output; the variable map goes next to it as `<stem>.layout.json`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct TrainArgs {
    /// CSV file with a header row, or a `.bin` file written by `preprocess`.
    #[arg(required_unless_present = "from_manifest")]
    pub input: Option<PathBuf>,
    /// Name of the label column (CSV input only).
    #[arg(long, default_value = "target")]
    pub label: String,
    /// Equal-width bins for continuous columns.
    #[arg(long, default_value_t = 8)]
    pub bins: usize,
    #[arg(long, value_enum, default_value_t = ConflictPolicy::Error)]
    pub resolve_conflicts: ConflictPolicy,
    /// Train, selection and test fractions.
    #[arg(long, default_value = "0.64,0.16,0.20", value_parser = parse_split)]
    pub split: SplitFracs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Optimal trees to enumerate.
    #[arg(long, default_value_t = 100)]
    pub k: usize,
    /// Selection-accuracy slack.
    #[arg(long, default_value_t = 0.0)]
    pub delta: f64,
    #[arg(long, default_value_t = 3)]
    pub lb: usize,
    /// Wall-clock budget in seconds for the whole optimization.
    #[arg(long, env = "MPDT_TIMEOUT")]
    pub timeout: Option<f64>,
    /// Selection/test re-splits for the averaged test accuracy (0 = off).
    #[arg(long, default_value_t = 50)]
    pub resplits: usize,
    /// Keep diverse trees found before a timeout even if not proven optimal.
    #[arg(long)]
    pub accept_suboptimal_diverse: bool,
    /// Write the greedy tree as the model when no optimal model is found in time.
    #[arg(long)]
    pub fallback_greedy: bool,
    /// Threads for the re-split evaluation.
    #[arg(long, default_value_t = 1)]
    #[serde(skip, default = "one")]
    pub jobs: usize,
    /// Output directory.
    #[arg(long, default_value = "mpdt-out")]
    #[serde(skip, default)]
    pub out: PathBuf,
    /// Rerun with the configuration recorded in a manifest.
    #[arg(long)]
    #[serde(skip, default)]
    pub from_manifest: Option<PathBuf>,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitFracs(pub [f64; 3]);

fn parse_split(s: &str) -> Result<SplitFracs, String> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("bad fraction `{p}`: {e}")))
        .collect::<Result<_, _>>()?;
    let arr: [f64; 3] = parts.try_into().map_err(|_| "expected three comma-separated fractions".to_string())?;
    Ok(SplitFracs(arr))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Part {
    All,
    Train,
    Selection,
    Test,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long)]
    pub model: PathBuf,
    /// Which part of the split to score.
    #[arg(long, value_enum, default_value_t = Part::All)]
    pub part: Part,
    #[arg(long, default_value = "0.64,0.16,0.20", value_parser = parse_split)]
    pub split: SplitFracs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Re-split selection and test this many times, choosing among the trees
    /// in `--solutions` on each selection part.
    #[arg(long)]
    pub resplits: Option<usize>,
    /// `solutions.json` written by `train` (defaults to the model's directory).
    #[arg(long)]
    pub solutions: Option<PathBuf>,
    #[arg(long, default_value_t = 0.0)]
    pub delta: f64,
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExportFormat {
    Dot,
    Json,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, value_enum, default_value_t = ExportFormat::Dot)]
    pub format: ExportFormat,
    #[arg(long)]
    pub out: PathBuf,
    /// Dataset used to name features and classes.
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long, default_value = "target")]
    pub label: String,
    #[arg(long, default_value_t = 8)]
    pub bins: usize,
}

#[derive(Debug, Args)]
pub struct FileArgs {
    pub input: PathBuf,
    /// Wall-clock budget in seconds.
    #[arg(long, env = "MPDT_TIMEOUT")]
    pub timeout: Option<f64>,
}

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const CONFIG: i32 = 1;
    pub const INSEPARABLE: i32 = 2;
    pub const TIMEOUT: i32 = 3;
}

/// Exit code for an error raised anywhere in a command.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    match err.downcast_ref::<Error>() {
        Some(Error::Inseparable(_)) => exit::INSEPARABLE,
        Some(Error::Timeout) => exit::TIMEOUT,
        _ => exit::CONFIG,
    }
}

pub fn run(cli: Cli) -> anyhow::Result<i32> {
    match cli.command {
        Command::Preprocess(a) => cmd_preprocess(&a),
        Command::Encode(a) => cmd_encode(&a),
        Command::Train(a) => cmd_train(&a),
        Command::Evaluate(a) => cmd_evaluate(&a),
        Command::Export(a) => cmd_export(&a),
        Command::Sat(a) => cmd_sat(&a),
        Command::Maxsat(a) => cmd_maxsat(&a),
        Command::Oracle(a) => cmd_oracle(&a),
    }
}

/// Loads and binarizes `args.input`, applying the conflict policy.
pub fn load_dataset(args: &DataArgs) -> Result<BinDataset, Error> {
    let ds = read_binarized(&args.input, &args.label, args.bins)?;
    let conflicts = ds.check_separability();
    if conflicts.is_empty() {
        return Ok(ds);
    }
    match args.resolve_conflicts {
        ConflictPolicy::Error => Err(Error::Inseparable(conflicts)),
        ConflictPolicy::Majority => {
            let out = ds.resolve_conflicts_majority();
            log::warn!("dropped {} minority-label rows from conflicting groups", ds.len() - out.len());
            Ok(out)
        }
    }
}

/// Binarized rows of a CSV or `.bin` file, without conflict handling.
pub fn read_binarized(path: &Path, label: &str, bins: usize) -> Result<BinDataset, Error> {
    if path.extension().is_some_and(|e| e == "bin") {
        BinDataset::read_bin_file(path)
    } else {
        RawDataset::load_csv(path, label)?.discretize(bins)?.binarize()
    }
}

/// Writes `contents` to `path` through a temporary file and a rename.
pub fn write_atomic(path: &Path, contents: &[u8]) -> std::io::Result<()> {
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, contents)?;
    std::fs::rename(tmp, path)
}
