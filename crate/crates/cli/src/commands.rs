use std::fs::{self, File};
use std::io::{self, BufWriter, IsTerminal, Write};
use std::path::Path;

use callcost::bench::{self, BenchError, BenchSettings, ComparisonResult, ScalingReport};
use callcost::corpus::{self, CorpusError, CorpusStats, InvertedIndex};
use callcost::kernels::{KernelError, KernelPlan};
use callcost::report::{self, ReportDocument, ReportError, SummaryRow};

use crate::config::{
    resolve_source, resolve_tokenizer, BenchArgs, FileConfig, IngestArgs, ReportArgs, ReportFormat,
    RunConfig, Source,
};
use crate::metadata::{IndexSummary, Metadata, ResultRecord};
use crate::CliError;

pub const REPORT_TITLE: &str = "Subroutine call overhead";

fn color_enabled() -> bool {
    std::env::var_os("CALLCOST_NO_COLOR").is_none() && io::stderr().is_terminal()
}

/// Progress line on stderr, bold when styling is allowed.
pub fn status(msg: &str) {
    if color_enabled() {
        eprintln!("\x1b[1m{msg}\x1b[0m");
    } else {
        eprintln!("{msg}");
    }
}

pub fn warn(msg: &str) {
    if color_enabled() {
        eprintln!("\x1b[33mwarning:\x1b[0m {msg}");
    } else {
        eprintln!("warning: {msg}");
    }
}

impl From<CorpusError> for CliError {
    fn from(e: CorpusError) -> Self {
        match e {
            CorpusError::InvalidParameter(_) | CorpusError::ZeroReplication => {
                CliError::Config(e.to_string())
            }
            other => CliError::Io(other.to_string()),
        }
    }
}

impl From<BenchError> for CliError {
    fn from(e: BenchError) -> Self {
        match e {
            BenchError::Kernel(KernelError::Equivalence { .. }) => {
                CliError::Equivalence(e.to_string())
            }
            BenchError::Corpus(c) => c.into(),
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<KernelError> for CliError {
    fn from(e: KernelError) -> Self {
        BenchError::from(e).into()
    }
}

impl From<ReportError> for CliError {
    fn from(e: ReportError) -> Self {
        match e {
            ReportError::Bench(b) => b.into(),
            ReportError::Raw { .. } | ReportError::Csv(_) | ReportError::Io(_) => {
                CliError::Io(e.to_string())
            }
            other => CliError::Config(other.to_string()),
        }
    }
}

fn io_error(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
    move |e| CliError::Io(format!("{}: {e}", path.display()))
}

fn load_source(
    source: &Source,
    tokenizer: &crate::config::TokenizerConfig,
) -> Result<(InvertedIndex, CorpusStats), CliError> {
    match source {
        Source::Index { path } => Ok(corpus::load_index(path)?),
        Source::Corpus { path } => {
            let docs = corpus::load_corpus(path, &tokenizer.filter())?;
            Ok(corpus::build_index(&docs)?)
        }
        Source::Synthetic(spec) => {
            let docs = spec.generate()?;
            Ok(corpus::build_index(&docs)?)
        }
    }
}

pub fn ingest(args: &IngestArgs) -> Result<(), CliError> {
    if args.source.index.is_some() {
        return Err(CliError::Config(
            "ingest reads --corpus or --synthetic, not --index".into(),
        ));
    }
    let file = match &args.corpus.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let (source, _) = resolve_source(&args.source, &args.corpus, &file)?;
    let tokenizer = resolve_tokenizer(&args.corpus, &file);
    let (index, stats) = load_source(&source, &tokenizer)?;
    corpus::save_index(&index, &stats, &args.out)?;
    status(&format!(
        "wrote {} ({} entries, {} postings, d = {}, avdl = {:.4})",
        args.out.display(),
        index.len(),
        index.total_postings(),
        stats.d(),
        stats.avdl()
    ));
    Ok(())
}

fn settings(cfg: &RunConfig) -> BenchSettings {
    BenchSettings {
        params: cfg.params,
        pad: cfg.pad,
        reps: cfg.reps,
        warmup: cfg.warmup,
        order: cfg.order,
    }
}

fn write_file(
    path: &Path,
    f: impl FnOnce(&mut BufWriter<File>) -> Result<(), CliError>,
) -> Result<(), CliError> {
    let mut out = BufWriter::new(File::create(path).map_err(io_error(path))?);
    f(&mut out)?;
    out.flush().map_err(io_error(path))
}

fn write_outputs(
    cfg: &RunConfig,
    results: &[(u32, ComparisonResult)],
    summary: &[SummaryRow],
    markdown: &str,
    metadata: &Metadata,
) -> Result<(), CliError> {
    fs::create_dir_all(&cfg.out_dir).map_err(io_error(&cfg.out_dir))?;
    let raw = cfg.out_dir.join("raw.csv");
    write_file(&raw, |w| Ok(report::write_raw_csv(w, results)?))?;
    let summary_path = cfg.out_dir.join("summary.csv");
    write_file(&summary_path, |w| {
        Ok(report::write_summary_csv(w, summary)?)
    })?;
    let md = cfg.out_dir.join("report.md");
    fs::write(&md, markdown).map_err(io_error(&md))?;
    let meta = cfg.out_dir.join("metadata.json");
    write_file(&meta, |w| {
        serde_json::to_writer_pretty(&mut *w, metadata).map_err(|e| CliError::Io(e.to_string()))?;
        w.write_all(b"\n").map_err(io_error(&meta))
    })?;
    Ok(())
}

fn check_ordering(
    metadata: &mut Metadata,
    results: &[(u32, ComparisonResult)],
    waiver: Option<&str>,
) {
    metadata.record_ordering(results, waiver);
    for (factor, r) in results.iter().filter(|(_, r)| !r.call_is_slower()) {
        warn(&format!(
            "{} at factor {factor}: call mean {:.0} ns does not exceed inline mean {:.0} ns{}",
            r.model,
            r.call.mean_ns,
            r.inline.mean_ns,
            if waiver.is_some() { " (waived)" } else { "" }
        ));
    }
}

pub fn run(args: &BenchArgs) -> Result<(), CliError> {
    let cfg = RunConfig::resolve(args, false)?;
    let (index, stats) = load_source(&cfg.source, &cfg.tokenizer)?;
    let plan = KernelPlan::prepare(&index, &stats)?;
    let settings = settings(&cfg);
    let mut metadata = Metadata::new("run", &cfg, IndexSummary::new(&index, &stats));

    let mut results = Vec::with_capacity(cfg.models.len());
    for &model in &cfg.models {
        status(&format!(
            "{model}: {} postings, {} reps",
            plan.posting_count(),
            cfg.reps
        ));
        let result = bench::run_comparison(model, &plan, &settings)?;
        results.push((1, result));
    }

    let summary: Vec<_> = results
        .iter()
        .map(|(factor, r)| SummaryRow::new(*factor, index.len() as u64, r))
        .collect();
    metadata.results = results
        .iter()
        .map(|(factor, r)| ResultRecord::new(*factor, index.len() as u64, r))
        .collect();
    check_ordering(&mut metadata, &results, args.waive_ordering.as_deref());

    let markdown = ReportDocument::from_comparisons(REPORT_TITLE, &results, cfg.unit).to_markdown();
    write_outputs(&cfg, &results, &summary, &markdown, &metadata)?;
    if !args.quiet {
        print!("{markdown}");
    }
    status(&format!("results in {}", cfg.out_dir.display()));
    Ok(())
}

pub fn scale(args: &BenchArgs) -> Result<(), CliError> {
    let cfg = RunConfig::resolve(args, true)?;
    let (index, stats) = load_source(&cfg.source, &cfg.tokenizer)?;
    let settings = settings(&cfg);
    let mut metadata = Metadata::new("scale", &cfg, IndexSummary::new(&index, &stats));

    let mut reports: Vec<ScalingReport> = Vec::new();
    for &model in &cfg.models {
        status(&format!(
            "{model}: factors {:?}, {} reps",
            cfg.factors, cfg.reps
        ));
        match bench::run_scaling_with(model, &index, &stats, &settings, &cfg.factors, cfg.schedule)
        {
            Ok(report) => reports.push(report),
            Err(err) => {
                let partial: Vec<_> = reports
                    .iter()
                    .flat_map(|r| r.rows.iter())
                    .chain(err.partial.iter())
                    .map(|row| (row.factor, row.comparison.clone()))
                    .collect();
                if !partial.is_empty() {
                    fs::create_dir_all(&cfg.out_dir).map_err(io_error(&cfg.out_dir))?;
                    let path = cfg.out_dir.join("raw.partial.csv");
                    write_file(&path, |w| Ok(report::write_raw_csv(w, &partial)?))?;
                    warn(&format!(
                        "partial results ({} comparisons) saved to {}",
                        partial.len(),
                        path.display()
                    ));
                }
                let message = err.to_string();
                return Err(match err.source {
                    BenchError::Kernel(KernelError::Equivalence { .. }) => {
                        CliError::Equivalence(message)
                    }
                    other => match CliError::from(other) {
                        CliError::Io(_) => CliError::Io(message),
                        CliError::Equivalence(_) => CliError::Equivalence(message),
                        _ => CliError::Config(message),
                    },
                });
            }
        }
    }

    let results: Vec<(u32, ComparisonResult)> = reports
        .iter()
        .flat_map(|r| {
            r.rows
                .iter()
                .map(|row| (row.factor, row.comparison.clone()))
        })
        .collect();
    let summary: Vec<_> = reports
        .iter()
        .flat_map(|r| {
            r.rows
                .iter()
                .map(|row| SummaryRow::new(row.factor, row.element_count, &row.comparison))
        })
        .collect();
    metadata.results = reports
        .iter()
        .flat_map(|r| {
            r.rows
                .iter()
                .map(|row| ResultRecord::new(row.factor, row.element_count, &row.comparison))
        })
        .collect();
    metadata.record_scaling(&reports);
    check_ordering(&mut metadata, &results, args.waive_ordering.as_deref());
    for r in &reports {
        for w in &r.warnings {
            warn(w);
        }
    }

    let mut doc = ReportDocument::from_comparisons(REPORT_TITLE, &results, cfg.unit);
    for r in &reports {
        doc = doc.with_scaling(r);
    }
    let markdown = doc.to_markdown();
    write_outputs(&cfg, &results, &summary, &markdown, &metadata)?;
    for r in &reports {
        let name = if reports.len() == 1 {
            "plot.csv".to_string()
        } else {
            format!("plot_{}.csv", r.model)
        };
        let path = cfg.out_dir.join(name);
        report::emit_plot_data(&report::plot_points(r, cfg.unit), &path)?;
    }
    if !args.quiet {
        print!("{markdown}");
    }
    status(&format!("results in {}", cfg.out_dir.display()));
    Ok(())
}

/// Renders a raw results file. Pure function of the file contents.
pub fn render_raw(args: &ReportArgs) -> Result<String, CliError> {
    let file = File::open(&args.raw).map_err(io_error(&args.raw))?;
    let records = report::read_raw_csv(file)?;
    let results = report::comparisons_from_raw(&records)?;
    let doc = ReportDocument::from_comparisons(REPORT_TITLE, &results, args.unit);
    Ok(match args.format {
        ReportFormat::Md => doc.to_markdown(),
        ReportFormat::Csv => doc.to_csv(),
    })
}

pub fn report(args: &ReportArgs) -> Result<(), CliError> {
    let text = render_raw(args)?;
    match &args.out {
        Some(path) => fs::write(path, text).map_err(io_error(path)),
        None => {
            let mut stdout = io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::Io(e.to_string()))
        }
    }
}
