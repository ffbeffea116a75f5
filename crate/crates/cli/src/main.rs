//! `charprobe`: every pipeline stage as a subcommand.
//!
//! Exit status is 0 on success, 1 for usage errors (bad or missing flags,
//! including a missing `--seed`) and 2 for data errors (unreadable or
//! malformed inputs, empty probe sets, failed checks).

mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "charprobe", version, about = "Character probes for subword token embeddings")]
pub struct Cli {
    /// Global seed for every random stream. Required.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train a byte-level-style BPE tokenizer on a corpus.
    TrainBpe(TrainBpeArgs),
    /// Write the controlled 1-3 letter tokenizer with a seeded merge order.
    BuildControlled(OutArgs),
    /// Tokenize a corpus into token-id documents.
    Tokenize(TokenizeArgs),
    /// Apply a corpus or token-level transformation.
    Transform(TransformArgs),
    /// Build length-matched probing datasets.
    ProbeData(ProbeDataArgs),
    /// Train skip-gram embeddings over a tokenized corpus.
    TrainEmb(TrainEmbArgs),
    /// Import word2vec-style text embeddings into the binary matrix format.
    ImportEmb(ImportEmbArgs),
    /// Train and/or evaluate character probes.
    Probe(ProbeArgs),
    /// Count boundary character pairs and correlate them with merge strength.
    AnalyzeBoundaries(AnalyzeArgs),
    /// Check the segmentation conditions over random controlled tables.
    VerifyConditions(VerifyArgs),
    /// Summarize probe reports from several runs.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct OutArgs {
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TrainBpeArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub vocab_size: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TokenizerKind {
    Bpe,
    Controlled,
    Tcs,
    Word,
}

#[derive(Debug, Args)]
pub struct TokenizeArgs {
    #[arg(long, value_enum)]
    pub tokenizer: TokenizerKind,
    #[arg(long)]
    pub corpus: PathBuf,
    /// Directory with vocab.txt and merges.txt (bpe and controlled).
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Lowercase and reduce each document to letter words first.
    #[arg(long)]
    pub normalize: bool,
    /// Keep only the most frequent word types (word tokenizer).
    #[arg(long)]
    pub max_vocab: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TransformKind {
    Charpert,
    Wordsub,
    Toksub,
    Stem,
    Lemma,
}

#[derive(Debug, Args)]
pub struct TransformArgs {
    #[arg(long, value_enum)]
    pub kind: TransformKind,
    /// Input corpus (all kinds except toksub).
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Input tokenized directory (toksub).
    #[arg(long)]
    pub tokenized: Option<PathBuf>,
    /// Lemma table, tab-separated `form<TAB>lemma` (lemma; default built in).
    #[arg(long)]
    pub lemmas: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ProbeDataArgs {
    /// Tokenized directory; its vocabulary supplies the candidate tokens.
    #[arg(long)]
    pub tokenized: PathBuf,
    /// Target letter a..z, or `all`.
    #[arg(long = "char")]
    pub target: String,
    #[arg(long, default_value = "matched")]
    pub mode: String,
    /// Drop tokens seen fewer times than this in the corpus.
    #[arg(long, default_value_t = 0)]
    pub min_count: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TrainEmbArgs {
    #[arg(long)]
    pub tokenized: PathBuf,
    #[arg(long, default_value_t = 128)]
    pub dim: usize,
    #[arg(long, default_value_t = 5)]
    pub window: usize,
    #[arg(long, default_value_t = 5)]
    pub negatives: usize,
    #[arg(long, default_value_t = 5)]
    pub epochs: usize,
    #[arg(long, default_value_t = 0.025)]
    pub learning_rate: f32,
    #[arg(long, default_value_t = 1e-3)]
    pub subsample: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ImportEmbArgs {
    /// Text file: optional `count dim` header, then `token v1 v2 ...` lines.
    #[arg(long)]
    pub text: PathBuf,
    #[arg(long)]
    pub vocab: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Side {
    Prev,
    Next,
}

#[derive(Debug, Args)]
pub struct ProbeArgs {
    #[arg(long)]
    pub embeddings: PathBuf,
    /// Vocabulary the embeddings were trained on; checked against the matrix.
    #[arg(long)]
    pub vocab: PathBuf,
    /// Directory written by `probe-data`.
    #[arg(long)]
    pub data: PathBuf,
    /// Only train, writing checkpoints.
    #[arg(long)]
    pub train: bool,
    /// Only evaluate checkpoints from `--models`.
    #[arg(long)]
    pub eval: bool,
    /// Checkpoint directory for `--eval` (default: `<out>/models`).
    #[arg(long)]
    pub models: Option<PathBuf>,
    /// Also report accuracy per length bucket.
    #[arg(long)]
    pub buckets: bool,
    /// Also run one probe per positional group (controlled vocabularies).
    #[arg(long)]
    pub six_group: bool,
    /// Also run context-grouped cross-validation.
    #[arg(long, value_enum)]
    pub context_folds: Option<Side>,
    #[arg(long, default_value_t = 5)]
    pub folds: usize,
    #[arg(long, default_value_t = 0.2)]
    pub test_fraction: f64,
    #[arg(long, default_value_t = 3)]
    pub epochs: usize,
    #[arg(long, default_value_t = 64)]
    pub batch_size: usize,
    #[arg(long, default_value_t = 256)]
    pub h1: usize,
    #[arg(long, default_value_t = 128)]
    pub h2: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[arg(long)]
    pub tokenized: PathBuf,
    #[arg(long)]
    pub merges: PathBuf,
    /// Count adjacencies across word boundaries too.
    #[arg(long)]
    pub cross_word: bool,
    #[arg(long, default_value_t = 999)]
    pub permutations: usize,
    /// Also write scatter.svg.
    #[arg(long)]
    pub svg: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 4)]
    pub alphabet: usize,
    #[arg(long, default_value_t = 100_000)]
    pub trials: u64,
    /// Also write conditions.csv and a manifest here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// `label=DIR` pairs, each DIR holding a probe report.csv.
    #[arg(long = "input", required = true)]
    pub inputs: Vec<String>,
    #[arg(long)]
    pub out: PathBuf,
}

/// Failure classes, mapped to exit codes.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Data(String),
}

impl From<charprobe::Error> for Failure {
    fn from(e: charprobe::Error) -> Self {
        Failure::Data(e.to_string())
    }
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(value) = std::env::var("CHARPROBE_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::Usage(format!("CHARPROBE_THREADS must be a positive integer, got {value:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Usage(format!("thread pool: {e}")))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = configure_threads().and_then(|()| match cli.seed {
        Some(seed) => commands::run(cli.command, seed),
        None => Err(Failure::Usage("--seed is required".into())),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Data(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
