use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;

/// Build, measure, and verify compressed forward indexes of sparse vectors.
#[derive(Parser, Debug)]
#[command(name = "sparsefwd", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a synthetic dataset (and optionally matching queries).
    Gen(GenArgs),
    /// Convert JSON lines with "coords" and "values" arrays to a dataset file.
    Convert(ConvertArgs),
    /// Compute a component permutation by recursive graph bisection.
    Reorder(ReorderArgs),
    /// Encode a dataset into an index file.
    Build(BuildArgs),
    /// Report bits per component for one or more indexes.
    Stats(StatsArgs),
    /// Time full scans of every query against an index.
    Scan(ScanArgs),
    /// Write the top-k documents of every query to a run file.
    Topk(TopkArgs),
    /// Run the self-checks on a dataset and, optionally, its files.
    Verify(VerifyArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum PresetArg {
    SpladeLike,
    LilsrLike,
    Custom,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum NnzDistArg {
    Constant,
    Poisson,
    Lognormal,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum IdDistArg {
    Uniform,
    Zipf,
    TwoCluster,
}

#[derive(Args, Debug)]
struct GenArgs {
    #[arg(long, value_enum, default_value = "splade-like")]
    preset: PresetArg,
    #[arg(long, default_value_t = 10_000)]
    docs: usize,
    /// Defaults to the preset's vocabulary size.
    #[arg(long)]
    dim: Option<u32>,
    /// Defaults to the preset's document mean.
    #[arg(long)]
    nnz_mean: Option<f64>,
    #[arg(long, value_enum)]
    nnz_dist: Option<NnzDistArg>,
    #[arg(long, value_enum)]
    id_dist: Option<IdDistArg>,
    #[arg(long, default_value_t = sparsefwd_core::synth::DEFAULT_ZIPF_EXPONENT)]
    zipf_s: f64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(short, long)]
    output: PathBuf,
    /// Also write this many queries drawn over the same vocabulary.
    #[arg(long, requires = "queries_output")]
    queries: Option<usize>,
    #[arg(long, requires = "queries")]
    queries_output: Option<PathBuf>,
    /// Mean nonzeros per query; defaults to the preset's query mean.
    #[arg(long)]
    query_nnz_mean: Option<f64>,
}

#[derive(Args, Debug)]
struct ConvertArgs {
    #[arg(short, long)]
    input: PathBuf,
    #[arg(long)]
    dim: u32,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args, Debug)]
struct ReorderArgs {
    #[arg(short, long)]
    input: PathBuf,
    #[arg(long, default_value_t = 20)]
    iters: usize,
    #[arg(long, default_value_t = 32)]
    min_part: usize,
    /// Defaults to ⌈log₂ distinct components⌉.
    #[arg(long)]
    max_depth: Option<usize>,
    /// Shuffle partitions with the seed instead of splitting by degree.
    #[arg(long)]
    shuffle: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ValuesArg {
    F32,
    F16,
    Fixedu8,
}

#[derive(Args, Debug)]
struct BuildArgs {
    #[arg(short, long)]
    input: PathBuf,
    /// raw, vbyte, gamma, delta, zeta, svb, or dotvbyte.
    #[arg(long)]
    codec: String,
    #[arg(long, value_enum, default_value = "f32")]
    values: ValuesArg,
    /// Fixed-point fraction bits; chosen from the largest value when absent.
    #[arg(long)]
    frac_bits: Option<u8>,
    #[arg(long)]
    zeta_k: Option<u8>,
    #[arg(long)]
    permutation: Option<PathBuf>,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args, Debug)]
struct StatsArgs {
    #[arg(short, long, required = true, num_args = 1..)]
    input: Vec<PathBuf>,
    /// Marks the indexes as reordered by this permutation (checked against
    /// their dimension).
    #[arg(long)]
    permutation: Option<PathBuf>,
    #[arg(long)]
    json: bool,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum KernelArg {
    Auto,
    Scalar,
    Ssse3,
    Avx2,
}

#[derive(Args, Debug)]
struct ScanArgs {
    #[arg(short, long)]
    input: PathBuf,
    #[arg(short, long)]
    queries: PathBuf,
    #[arg(long, default_value_t = 10)]
    k: usize,
    #[arg(long, default_value_t = 3)]
    runs: usize,
    #[arg(long, default_value_t = 1)]
    warmup: usize,
    #[arg(long, value_enum, default_value = "auto")]
    kernel: KernelArg,
    /// Permutation the index was built with; applied to every query.
    #[arg(long)]
    permutation: Option<PathBuf>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct TopkArgs {
    #[arg(short, long)]
    input: PathBuf,
    #[arg(short, long)]
    queries: PathBuf,
    #[arg(long, default_value_t = 10)]
    k: usize,
    #[arg(long)]
    permutation: Option<PathBuf>,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(short, long)]
    input: PathBuf,
    /// Comma-separated codecs; zeta accepts a k suffix, e.g. zeta3.
    #[arg(long, value_delimiter = ',')]
    codecs: Option<Vec<String>>,
    /// An index file expected to hold this dataset.
    #[arg(long)]
    index: Option<PathBuf>,
    /// The permutation the index was built with.
    #[arg(long)]
    permutation: Option<PathBuf>,
    #[arg(long, default_value_t = 1000)]
    pairs: usize,
    #[arg(long)]
    no_rgb: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    json: bool,
}

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Validation(String),
    Verification(String),
}

impl From<sparsefwd_core::Error> for Failure {
    fn from(e: sparsefwd_core::Error) -> Self {
        Failure::Validation(e.to_string())
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Validation(_) => 2,
            Failure::Verification(_) => 3,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Gen(a) => commands::gen(a),
        Command::Convert(a) => commands::convert(a),
        Command::Reorder(a) => commands::reorder(a),
        Command::Build(a) => commands::build(a),
        Command::Stats(a) => commands::stats(a),
        Command::Scan(a) => commands::scan(a),
        Command::Topk(a) => commands::topk(a),
        Command::Verify(a) => commands::verify(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Usage(m) => eprintln!("usage error: {m}"),
                Failure::Validation(m) => eprintln!("error: {m}"),
                Failure::Verification(m) => eprintln!("verification failed: {m}"),
            }
            ExitCode::from(f.exit_code())
        }
    }
}
