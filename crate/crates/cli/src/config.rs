//! Command-line flags, the optional `key = value` config file, and their
//! merge into a resolved [`RunConfig`]. Precedence: flags, then config file,
//! then built-in defaults.

use std::fs;
use std::path::{Path, PathBuf};

use callcost::bench::{
    RepetitionOrder, ScalingSchedule, DEFAULT_FACTORS, DEFAULT_REPS, DEFAULT_WARMUP,
};
use callcost::corpus::{SyntheticCorpus, TokenFilterConfig, DEFAULT_MIN_LEN};
use callcost::kernels::Model;
use callcost::report::TimeUnit;
use callcost::weighting::{Bm25Params, DEFAULT_B, DEFAULT_K1, DEFAULT_PAD};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const DEFAULT_DOCS: u32 = 4573;
pub const DEFAULT_VOCAB: u32 = 21624;
pub const DEFAULT_MEAN_DL: u32 = 100;
pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_OUT_DIR: &str = "results";

#[derive(Debug, Parser)]
#[command(
    name = "callcost",
    version,
    about = "Inline code vs. function call overhead on term-weighting workloads"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build an index from text files or a synthetic corpus and save it.
    Ingest(IngestArgs),
    /// Compare inline and call kernels for each selected model.
    Run(BenchArgs),
    /// Repeat the comparison on replicated indexes and fit time vs. size.
    Scale(BenchArgs),
    /// Re-render tables from a raw results CSV without measuring.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Args)]
#[group(id = "source", multiple = false)]
pub struct SourceArgs {
    /// Saved index file (JSON).
    #[arg(long, group = "source")]
    pub index: Option<PathBuf>,
    /// Directory of *.txt files or a JSON-lines file of {"id", "text"} records.
    #[arg(long, group = "source")]
    pub corpus: Option<PathBuf>,
    /// Generate a Zipf-distributed corpus (the default when no source is given).
    #[arg(long, group = "source")]
    pub synthetic: bool,
}

#[derive(Debug, Clone, Args)]
pub struct CorpusArgs {
    #[arg(long)]
    pub docs: Option<u32>,
    #[arg(long)]
    pub vocab: Option<u32>,
    #[arg(long)]
    pub mean_dl: Option<u32>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Minimum token length kept by the tokenizer.
    #[arg(long)]
    pub min_len: Option<usize>,
    /// Keep stopwords.
    #[arg(long)]
    pub no_stopwords: bool,
    /// Optional `key = value` configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[command(flatten)]
    pub corpus: CorpusArgs,
    /// Where to write the index file.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OrderArg {
    Blocked,
    Alternating,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScheduleArg {
    Interleaved,
    Sequential,
}

impl From<ScheduleArg> for ScalingSchedule {
    fn from(arg: ScheduleArg) -> Self {
        match arg {
            ScheduleArg::Interleaved => ScalingSchedule::Interleaved,
            ScheduleArg::Sequential => ScalingSchedule::Sequential,
        }
    }
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[command(flatten)]
    pub corpus: CorpusArgs,
    /// Comma-separated subset of tfidf, bm25, bm25mod.
    #[arg(long, value_delimiter = ',')]
    pub models: Option<Vec<Model>>,
    #[arg(long)]
    pub reps: Option<u32>,
    #[arg(long)]
    pub warmup: Option<u32>,
    /// Comma-separated replication factors (scale only).
    #[arg(long, value_delimiter = ',')]
    pub factors: Option<Vec<u32>>,
    #[arg(long)]
    pub k1: Option<f64>,
    #[arg(long)]
    pub b: Option<f64>,
    #[arg(long)]
    pub pad: Option<f64>,
    #[arg(long)]
    pub unit: Option<TimeUnit>,
    #[arg(long, value_enum)]
    pub order: Option<OrderArg>,
    /// How scale visits the replicated sizes (scale only).
    #[arg(long, value_enum)]
    pub schedule: Option<ScheduleArg>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Do not mirror the report on stdout.
    #[arg(long)]
    pub quiet: bool,
    /// Record a justification for accepting non-positive call overheads.
    #[arg(long, value_name = "REASON")]
    pub waive_ordering: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Md,
    Csv,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Raw results CSV written by `run` or `scale`.
    #[arg(long)]
    pub raw: PathBuf,
    #[arg(long, value_enum, default_value = "md")]
    pub format: ReportFormat,
    #[arg(long, default_value = "us")]
    pub unit: TimeUnit,
    /// Write to a file instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Values accepted in a `--config` file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub docs: Option<u32>,
    pub vocab: Option<u32>,
    pub mean_dl: Option<u32>,
    pub seed: Option<u64>,
    pub min_len: Option<usize>,
    pub stopwords: Option<bool>,
    pub models: Option<String>,
    pub reps: Option<u32>,
    pub warmup: Option<u32>,
    pub factors: Option<Vec<u32>>,
    pub k1: Option<f64>,
    pub b: Option<f64>,
    pub pad: Option<f64>,
    pub unit: Option<String>,
    pub order: Option<String>,
    pub schedule: Option<String>,
    pub out_dir: Option<PathBuf>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Source {
    Index { path: PathBuf },
    Corpus { path: PathBuf },
    Synthetic(SyntheticCorpus),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TokenizerConfig {
    pub min_len: usize,
    pub stopwords: bool,
}

impl TokenizerConfig {
    pub fn filter(&self) -> TokenFilterConfig {
        if self.stopwords {
            TokenFilterConfig {
                min_len: self.min_len,
                ..TokenFilterConfig::default()
            }
        } else {
            TokenFilterConfig::without_stopwords(self.min_len)
        }
    }
}

/// Fully resolved configuration of one invocation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub source: Source,
    pub tokenizer: TokenizerConfig,
    pub seed: u64,
    pub models: Vec<Model>,
    pub reps: u32,
    pub warmup: u32,
    pub factors: Vec<u32>,
    pub params: Bm25Params,
    pub pad: f64,
    pub unit: TimeUnit,
    pub order: RepetitionOrder,
    pub schedule: ScalingSchedule,
    pub out_dir: PathBuf,
}

fn parse_order(s: &str) -> Result<RepetitionOrder, CliError> {
    match s {
        "blocked" => Ok(RepetitionOrder::Blocked),
        "alternating" => Ok(RepetitionOrder::Alternating),
        other => Err(CliError::Config(format!(
            "unknown order {other:?} (expected blocked or alternating)"
        ))),
    }
}

fn parse_schedule(s: &str) -> Result<ScalingSchedule, CliError> {
    match s {
        "interleaved" => Ok(ScalingSchedule::Interleaved),
        "sequential" => Ok(ScalingSchedule::Sequential),
        other => Err(CliError::Config(format!(
            "unknown schedule {other:?} (expected interleaved or sequential)"
        ))),
    }
}

fn parse_models(s: &str) -> Result<Vec<Model>, CliError> {
    s.split(',')
        .map(|m| m.parse().map_err(CliError::Config))
        .collect()
}

pub fn resolve_source(
    source: &SourceArgs,
    corpus: &CorpusArgs,
    file: &FileConfig,
) -> Result<(Source, u64), CliError> {
    let seed = corpus.seed.or(file.seed).unwrap_or(DEFAULT_SEED);
    let synthetic_flags =
        corpus.docs.is_some() || corpus.vocab.is_some() || corpus.mean_dl.is_some();
    let resolved = match (&source.index, &source.corpus) {
        (Some(_), _) | (_, Some(_)) if synthetic_flags => {
            return Err(CliError::Config(
                "--docs/--vocab/--mean-dl only apply to synthetic corpora".into(),
            ))
        }
        (Some(path), None) => Source::Index { path: path.clone() },
        (None, Some(path)) => Source::Corpus { path: path.clone() },
        (None, None) => Source::Synthetic(SyntheticCorpus {
            num_docs: corpus.docs.or(file.docs).unwrap_or(DEFAULT_DOCS),
            vocab_size: corpus.vocab.or(file.vocab).unwrap_or(DEFAULT_VOCAB),
            mean_dl: corpus.mean_dl.or(file.mean_dl).unwrap_or(DEFAULT_MEAN_DL),
            seed,
        }),
        (Some(_), Some(_)) => return Err(CliError::Config("--index and --corpus conflict".into())),
    };
    Ok((resolved, seed))
}

pub fn resolve_tokenizer(corpus: &CorpusArgs, file: &FileConfig) -> TokenizerConfig {
    TokenizerConfig {
        min_len: corpus.min_len.or(file.min_len).unwrap_or(DEFAULT_MIN_LEN),
        stopwords: !corpus.no_stopwords && file.stopwords.unwrap_or(true),
    }
}

impl RunConfig {
    pub fn resolve(args: &BenchArgs, scaling: bool) -> Result<Self, CliError> {
        let file = match &args.corpus.config {
            Some(path) => FileConfig::load(path)?,
            None => FileConfig::default(),
        };
        let (source, seed) = resolve_source(&args.source, &args.corpus, &file)?;

        let default_models = if scaling {
            vec![Model::Tfidf]
        } else {
            Model::ALL.to_vec()
        };
        let models = match (&args.models, &file.models) {
            (Some(m), _) => m.clone(),
            (None, Some(s)) => parse_models(s)?,
            (None, None) => default_models,
        };
        let mut models_dedup = Vec::with_capacity(models.len());
        for m in models {
            if !models_dedup.contains(&m) {
                models_dedup.push(m);
            }
        }
        if models_dedup.is_empty() {
            return Err(CliError::Config("at least one model is required".into()));
        }

        let unit = match (args.unit, &file.unit) {
            (Some(u), _) => u,
            (None, Some(s)) => s.parse().map_err(CliError::Config)?,
            (None, None) => TimeUnit::Us,
        };
        let order = match (args.order, &file.order) {
            (Some(OrderArg::Blocked), _) => RepetitionOrder::Blocked,
            (Some(OrderArg::Alternating), _) => RepetitionOrder::Alternating,
            (None, Some(s)) => parse_order(s)?,
            (None, None) => RepetitionOrder::Blocked,
        };
        let schedule = match (args.schedule, &file.schedule) {
            (Some(arg), _) => arg.into(),
            (None, Some(s)) => parse_schedule(s)?,
            (None, None) => ScalingSchedule::default(),
        };

        let params = Bm25Params::new(
            args.k1.or(file.k1).unwrap_or(DEFAULT_K1),
            args.b.or(file.b).unwrap_or(DEFAULT_B),
        )
        .map_err(|e| CliError::Config(e.to_string()))?;
        let pad = args.pad.or(file.pad).unwrap_or(DEFAULT_PAD);
        if pad == 0.0 || !pad.is_finite() {
            return Err(CliError::Config(format!(
                "pad must be non-zero and finite, got {pad}"
            )));
        }

        let reps = args.reps.or(file.reps).unwrap_or(DEFAULT_REPS);
        if reps == 0 {
            return Err(CliError::Config("--reps must be at least 1".into()));
        }
        let factors = args
            .factors
            .clone()
            .or_else(|| file.factors.clone())
            .unwrap_or_else(|| DEFAULT_FACTORS.to_vec());
        if factors.is_empty() || factors.contains(&0) {
            return Err(CliError::Config(
                "replication factors must be a non-empty list of positive integers".into(),
            ));
        }

        Ok(Self {
            source,
            tokenizer: resolve_tokenizer(&args.corpus, &file),
            seed,
            models: models_dedup,
            reps,
            warmup: args.warmup.or(file.warmup).unwrap_or(DEFAULT_WARMUP),
            factors,
            params,
            pad,
            unit,
            order,
            schedule,
            out_dir: args
                .out_dir
                .clone()
                .or_else(|| file.out_dir.clone())
                .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR)),
        })
    }
}
