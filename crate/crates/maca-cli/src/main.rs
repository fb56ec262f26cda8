//! `maca` - train, apply and inspect attractor-basin CA classifiers.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use maca_core::ca::BoundaryMode;
use maca_core::error::Error;
use maca_core::pipeline::StructureCodeTable;

#[derive(Parser)]
#[command(
    name = "maca",
    version,
    about = "Multiple-attractor cellular automata pattern classifier",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a classifier tree from a dataset manifest
    Train(TrainArgs),
    /// Classify every pattern of a dataset with a trained model
    Predict(PredictArgs),
    /// Score a trained model against labeled data
    Evaluate(EvaluateArgs),
    /// Enumerate the attractor basins of a rule vector
    Basins(BasinsArgs),
    /// Trace GA entropy and mutual-information diagnostics per CA size
    Diagnose(DiagnoseArgs),
    /// Predict protein secondary structure by filter identification
    PredictStructure(PredictStructureArgs),
    /// Encode a dataset into labeled bit patterns
    Encode(EncodeArgs),
}

#[derive(Args, Clone)]
struct DataOpts {
    /// Dataset manifest (JSON)
    #[arg(long)]
    manifest: PathBuf,
    /// Window length in bases or residues
    #[arg(long, default_value_t = 12)]
    window: usize,
    /// Window stride
    #[arg(long, default_value_t = 1)]
    stride: usize,
    /// Bits per residue for the structure-task quantizer
    #[arg(long, default_value_t = 2)]
    quant_bits: u32,
}

#[derive(Args, Clone)]
struct GaOpts {
    /// GA population size
    #[arg(long, default_value_t = 50)]
    pop_size: usize,
    /// Maximum GA generations per tree node
    #[arg(long, default_value_t = 100)]
    generations: usize,
    /// Per-bit mutation probability
    #[arg(long, default_value_t = 0.02)]
    mutation_rate: f64,
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    data: DataOpts,
    #[command(flatten)]
    ga: GaOpts,
    /// RNG seed for the whole run
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory
    #[arg(long, default_value = "maca-out")]
    out_dir: PathBuf,
    /// Maximum tree depth before majority leaves are emitted
    #[arg(long, default_value_t = 6)]
    max_depth: usize,
    /// Boundary handling of the automata
    #[arg(long, default_value_t = BoundaryMode::Null)]
    boundary: BoundaryMode,
    /// Insert the all-204 identity vector into each initial population
    #[arg(long, default_value_t = false)]
    seed_identity: bool,
}

#[derive(Args)]
struct PredictArgs {
    /// Trained model file
    #[arg(long)]
    model: PathBuf,
    #[command(flatten)]
    data: DataOpts,
    /// Output directory
    #[arg(long, default_value = "maca-out")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Trained model file
    #[arg(long)]
    model: PathBuf,
    #[command(flatten)]
    data: DataOpts,
    /// Output directory
    #[arg(long, default_value = "maca-out")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct BasinsArgs {
    /// Cell count (exhaustive enumeration, n <= 20)
    #[arg(long)]
    n: usize,
    /// Uniform rule number applied to every cell
    #[arg(long, conflicts_with = "rules")]
    rule: Option<u8>,
    /// Comma-separated per-cell rule numbers
    #[arg(long)]
    rules: Option<String>,
    /// Boundary handling of the automata
    #[arg(long, default_value_t = BoundaryMode::Null)]
    boundary: BoundaryMode,
    /// Output directory
    #[arg(long, default_value = "maca-out")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct DiagnoseArgs {
    #[command(flatten)]
    ga: GaOpts,
    /// RNG seed for the whole run
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Patterns in each synthetic training set
    #[arg(long, default_value_t = 200)]
    patterns: usize,
    /// Output directory
    #[arg(long, default_value = "maca-out")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct PredictStructureArgs {
    /// Base protein FASTA (first record is used)
    #[arg(long)]
    base: PathBuf,
    /// Base structure FASTA of H/E/C strings, aligned with --base
    #[arg(long)]
    base_structure: PathBuf,
    /// Target protein FASTA
    #[arg(long)]
    target: PathBuf,
    /// Filter length for the deconvolution
    #[arg(long, default_value_t = 5)]
    filter_len: usize,
    /// Structure code table
    #[arg(long, value_enum, default_value_t = CodeTable::T200_600_800)]
    code_table: CodeTable,
    /// Also dump the numeric response per target as CSV
    #[arg(long, default_value_t = false)]
    dump_signal: bool,
    /// Output directory
    #[arg(long, default_value = "maca-out")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct EncodeArgs {
    #[command(flatten)]
    data: DataOpts,
    /// Output directory
    #[arg(long, default_value = "maca-out")]
    out_dir: PathBuf,
}

/// Structure code table selection.
#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CodeTable {
    #[value(name = "200-600-800")]
    T200_600_800,
    #[value(name = "300-700-900")]
    T300_700_900,
}

impl CodeTable {
    fn table(self) -> StructureCodeTable {
        match self {
            CodeTable::T200_600_800 => StructureCodeTable::PRIMARY,
            CodeTable::T300_700_900 => StructureCodeTable::ALTERNATE,
        }
    }

    fn label(self) -> &'static str {
        match self {
            CodeTable::T200_600_800 => "200-600-800",
            CodeTable::T300_700_900 => "300-700-900",
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Train(args) => commands::train(args),
        Command::Predict(args) => commands::predict(args),
        Command::Evaluate(args) => commands::evaluate(args),
        Command::Basins(args) => commands::basins(args),
        Command::Diagnose(args) => commands::diagnose(args),
        Command::PredictStructure(args) => commands::predict_structure(args),
        Command::Encode(args) => commands::encode(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}

/// 2 for bad parameters, 4 for capacity limits, 3 for everything else
/// (data, format, I/O).
fn exit_code(err: &Error) -> u8 {
    match err {
        Error::InvalidParameter(_) => 2,
        Error::CapacityExceeded { .. } => 4,
        _ => 3,
    }
}
