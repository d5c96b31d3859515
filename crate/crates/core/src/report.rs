//! Human-readable tables and machine-readable result files.
//!
//! Times render with four decimals in the chosen unit; overheads with two
//! decimals followed by `" %"`. Markdown and CSV renderings of a table share
//! the same cell strings.

use std::fmt::{self, Write as _};
use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::Path;
use std::str::FromStr;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::bench::{
    linear_fit, BenchError, ComparisonResult, FitError, FitStatus, Measurement, ScalingFit,
    ScalingReport,
};
use crate::kernels::{Form, KernelId, Model};

pub const RAW_HEADER: [&str; 6] = [
    "model",
    "form",
    "repetition",
    "time_ns",
    "weight_count",
    "factor",
];
pub const SUMMARY_HEADER: [&str; 7] = [
    "model",
    "factor",
    "element_count",
    "inline_mean_ns",
    "call_mean_ns",
    "overhead_pct",
    "per_call_ns",
];
pub const PLOT_HEADER: [&str; 3] = ["element_count", "inline_mean", "call_mean"];

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
    #[error("raw results line {line}: {message}")]
    Raw { line: u64, message: String },
    #[error("plot data needs at least one point")]
    EmptySeries,
    #[error(transparent)]
    Bench(#[from] BenchError),
    #[error(transparent)]
    Fit(#[from] FitError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TimeUnit {
    Ns,
    #[default]
    Us,
    Ms,
}

impl TimeUnit {
    pub fn from_ns(self, ns: f64) -> f64 {
        match self {
            TimeUnit::Ns => ns,
            TimeUnit::Us => ns / 1e3,
            TimeUnit::Ms => ns / 1e6,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            TimeUnit::Ns => "ns",
            TimeUnit::Us => "us",
            TimeUnit::Ms => "ms",
        }
    }

    pub fn long_name(self) -> &'static str {
        match self {
            TimeUnit::Ns => "nanoseconds",
            TimeUnit::Us => "microseconds",
            TimeUnit::Ms => "milliseconds",
        }
    }
}

impl fmt::Display for TimeUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

impl FromStr for TimeUnit {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ns" => Ok(TimeUnit::Ns),
            "us" | "µs" => Ok(TimeUnit::Us),
            "ms" => Ok(TimeUnit::Ms),
            other => Err(format!("unknown unit {other:?} (expected ns, us or ms)")),
        }
    }
}

pub fn format_time(value: f64) -> String {
    format!("{value:.4}")
}

pub fn format_overhead(pct: f64) -> String {
    format!("{pct:.2} %")
}

/// A rendered table: header plus rows of pre-formatted cells.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Table {
    pub title: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn to_markdown(&self) -> String {
        let mut out = String::new();
        let line = |cells: &[String]| format!("| {} |\n", cells.join(" | "));
        out.push_str(&line(&self.header));
        out.push_str(&line(&vec!["---".to_string(); self.header.len()]));
        for row in &self.rows {
            out.push_str(&line(row));
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        // Writing to a Vec cannot fail.
        w.write_record(&self.header).expect("in-memory CSV");
        for row in &self.rows {
            w.write_record(row).expect("in-memory CSV");
        }
        String::from_utf8(w.into_inner().expect("in-memory CSV")).expect("CSV output is UTF-8")
    }
}

/// Two rows (inline / call): one column per repetition, the average, and
/// the overhead on the call row.
pub fn render_comparison_table(result: &ComparisonResult, unit: TimeUnit) -> Table {
    let reps = result.inline.times_ns.len().max(result.call.times_ns.len());
    let mut header = vec![result.model.title().to_string()];
    header.extend((1..=reps).map(|i| format!("Repetition {i}")));
    header.push("Average".into());
    header.push("Overhead".into());

    let row = |label: &str, m: &Measurement, overhead: String| {
        let mut cells = vec![label.to_string()];
        cells.extend(
            m.times_ns
                .iter()
                .map(|&t| format_time(unit.from_ns(t as f64))),
        );
        cells.resize(reps + 1, String::new());
        cells.push(format_time(unit.from_ns(m.mean_ns)));
        cells.push(overhead);
        cells
    };

    Table {
        title: format!("{}: inline code vs. function call", result.model.title()),
        header,
        rows: vec![
            row("Inline code", &result.inline, String::new()),
            row(
                "Function call",
                &result.call,
                format_overhead(result.overhead_pct),
            ),
        ],
    }
}

/// Per-model call-cost diagnostic: extra time per weight computation.
pub fn render_call_cost_table(results: &[(u32, ComparisonResult)]) -> Table {
    Table {
        title: "Per-call cost".into(),
        header: vec![
            "Model".into(),
            "Factor".into(),
            "Weights".into(),
            "Overhead".into(),
            "Per call (ns)".into(),
        ],
        rows: results
            .iter()
            .map(|(factor, r)| {
                vec![
                    r.model.title().to_string(),
                    factor.to_string(),
                    r.weight_count.to_string(),
                    format_overhead(r.overhead_pct),
                    format_time(r.per_call_ns),
                ]
            })
            .collect(),
    }
}

fn section_title(model: Model, factor: u32) -> String {
    if factor == 1 {
        model.title().to_string()
    } else {
        format!("{}, {factor} copies of the index", model.title())
    }
}

/// A titled collection of tables plus optional plot series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub title: String,
    pub unit: TimeUnit,
    pub tables: Vec<Table>,
    pub plot_series: Vec<(String, Vec<(f64, f64)>)>,
}

impl ReportDocument {
    /// One comparison table per (factor, result), then the per-call table.
    pub fn from_comparisons(
        title: &str,
        results: &[(u32, ComparisonResult)],
        unit: TimeUnit,
    ) -> Self {
        let mut tables: Vec<Table> = results
            .iter()
            .map(|(factor, r)| {
                let mut t = render_comparison_table(r, unit);
                t.title = section_title(r.model, *factor);
                t
            })
            .collect();
        tables.push(render_call_cost_table(results));
        Self {
            title: title.to_string(),
            unit,
            tables,
            plot_series: Vec::new(),
        }
    }

    pub fn with_scaling(mut self, report: &ScalingReport) -> Self {
        for form in Form::ALL {
            let points = report
                .points(form)
                .into_iter()
                .map(|(x, y)| (x, self.unit.from_ns(y)))
                .collect();
            self.plot_series
                .push((format!("{} {form}", report.model), points));
        }
        self
    }

    pub fn to_markdown(&self) -> String {
        let mut out = format!(
            "# {}\n\nExecution time in {}.\n",
            self.title,
            self.unit.long_name()
        );
        for table in &self.tables {
            let _ = write!(out, "\n## {}\n\n{}", table.title, table.to_markdown());
        }
        for (label, points) in &self.plot_series {
            let _ = write!(
                out,
                "\n## Scaling: {label}\n\n| Elements | Mean ({}) |\n| --- | --- |\n",
                self.unit
            );
            for (x, y) in points {
                let _ = writeln!(out, "| {x} | {} |", format_time(*y));
            }
            if let Ok(fit) = linear_fit(points) {
                let _ = writeln!(out, "\n{}", describe_fit(&fit));
            }
        }
        out
    }

    /// Every table as CSV, each prefixed by a `# title` comment line.
    pub fn to_csv(&self) -> String {
        self.tables
            .iter()
            .map(|t| format!("# {}\n{}", t.title, t.to_csv()))
            .collect::<Vec<_>>()
            .join("\n")
    }
}

fn describe_fit(fit: &ScalingFit) -> String {
    let status = match fit.status {
        FitStatus::Ok => "ok",
        FitStatus::Constant => "constant",
        FitStatus::Degenerate => "degenerate",
    };
    format!(
        "slope={:e} intercept={:e} r2={:.6} status={status}",
        fit.slope, fit.intercept, fit.r2
    )
}

/// One line of the raw results file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawRecord {
    pub model: Model,
    pub form: Form,
    pub repetition: u32,
    pub time_ns: u64,
    pub weight_count: u64,
    pub factor: u32,
}

pub fn raw_records(results: &[(u32, ComparisonResult)]) -> Vec<RawRecord> {
    let mut out = Vec::new();
    for (factor, r) in results {
        for m in [&r.inline, &r.call] {
            for (i, &t) in m.times_ns.iter().enumerate() {
                out.push(RawRecord {
                    model: r.model,
                    form: m.kernel.form,
                    repetition: i as u32 + 1,
                    time_ns: t,
                    weight_count: r.weight_count,
                    factor: *factor,
                });
            }
        }
    }
    out
}

pub fn write_raw_csv<W: Write>(
    writer: W,
    results: &[(u32, ComparisonResult)],
) -> Result<(), ReportError> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(writer);
    w.write_record(RAW_HEADER)?;
    for rec in raw_records(results) {
        w.serialize(rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_raw_csv<R: Read>(reader: R) -> Result<Vec<RawRecord>, ReportError> {
    let mut r = csv::Reader::from_reader(reader);
    let header = r.headers()?.clone();
    if header.iter().ne(RAW_HEADER) {
        return Err(ReportError::Raw {
            line: 1,
            message: format!(
                "expected header {:?}, found {:?}",
                RAW_HEADER.join(","),
                header.iter().collect::<Vec<_>>().join(",")
            ),
        });
    }
    let mut out = Vec::new();
    for rec in r.deserialize() {
        out.push(rec?);
    }
    Ok(out)
}

/// Regroups raw records into comparisons, keyed by (factor, model) in order
/// of first appearance. Repetitions are ordered by their repetition number.
pub fn comparisons_from_raw(
    records: &[RawRecord],
) -> Result<Vec<(u32, ComparisonResult)>, ReportError> {
    type Group = (u64, IndexMap<Form, Vec<(u32, u64)>>);
    let mut groups: IndexMap<(u32, Model), Group> = IndexMap::new();
    for (i, rec) in records.iter().enumerate() {
        let line = i as u64 + 2;
        let group = groups
            .entry((rec.factor, rec.model))
            .or_insert_with(|| (rec.weight_count, IndexMap::new()));
        if group.0 != rec.weight_count {
            return Err(ReportError::Raw {
                line,
                message: format!(
                    "weight_count {} differs from {} earlier in the group",
                    rec.weight_count, group.0
                ),
            });
        }
        let reps = group.1.entry(rec.form).or_default();
        if reps.iter().any(|&(r, _)| r == rec.repetition) {
            return Err(ReportError::Raw {
                line,
                message: format!(
                    "repetition {} of {}/{} repeated",
                    rec.repetition, rec.model, rec.form
                ),
            });
        }
        reps.push((rec.repetition, rec.time_ns));
    }

    let mut out = Vec::with_capacity(groups.len());
    for ((factor, model), (weight_count, forms)) in groups {
        let measurement = |form: Form| -> Result<Measurement, ReportError> {
            let mut reps = forms.get(&form).cloned().unwrap_or_default();
            if reps.is_empty() {
                return Err(ReportError::Raw {
                    line: 0,
                    message: format!("{model} at factor {factor} has no {form} timings"),
                });
            }
            reps.sort_unstable();
            Ok(Measurement::new(
                KernelId::new(model, form),
                reps.into_iter().map(|(_, t)| t).collect(),
            )?)
        };
        let result = ComparisonResult::from_measurements(
            model,
            measurement(Form::Inline)?,
            measurement(Form::Call)?,
            weight_count,
        )?;
        out.push((factor, result));
    }
    Ok(out)
}

/// One line of the summary file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub model: Model,
    pub factor: u32,
    pub element_count: u64,
    pub inline_mean_ns: f64,
    pub call_mean_ns: f64,
    pub overhead_pct: f64,
    pub per_call_ns: f64,
}

impl SummaryRow {
    pub fn new(factor: u32, element_count: u64, r: &ComparisonResult) -> Self {
        Self {
            model: r.model,
            factor,
            element_count,
            inline_mean_ns: r.inline.mean_ns,
            call_mean_ns: r.call.mean_ns,
            overhead_pct: r.overhead_pct,
            per_call_ns: r.per_call_ns,
        }
    }
}

pub fn write_summary_csv<W: Write>(writer: W, rows: &[SummaryRow]) -> Result<(), ReportError> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(writer);
    w.write_record(SUMMARY_HEADER)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

/// One x position of the scaling plot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlotPoint {
    pub element_count: u64,
    pub inline_mean: f64,
    pub call_mean: f64,
}

pub fn plot_points(report: &ScalingReport, unit: TimeUnit) -> Vec<PlotPoint> {
    report
        .rows
        .iter()
        .map(|r| PlotPoint {
            element_count: r.element_count,
            inline_mean: unit.from_ns(r.comparison.inline.mean_ns),
            call_mean: unit.from_ns(r.comparison.call.mean_ns),
        })
        .collect()
}

/// CSV sorted by element count, followed by `#fit` comment lines holding
/// the least-squares line of each series.
pub fn render_plot_data(points: &[PlotPoint]) -> Result<String, ReportError> {
    if points.is_empty() {
        return Err(ReportError::EmptySeries);
    }
    let mut sorted = points.to_vec();
    sorted.sort_by_key(|p| p.element_count);

    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(PLOT_HEADER)?;
    for p in &sorted {
        w.write_record([
            p.element_count.to_string(),
            p.inline_mean.to_string(),
            p.call_mean.to_string(),
        ])?;
    }
    let mut out = String::from_utf8(w.into_inner().map_err(|e| e.into_error())?)
        .expect("CSV output is UTF-8");

    for (label, series) in [
        (
            "inline",
            sorted
                .iter()
                .map(|p| (p.element_count as f64, p.inline_mean))
                .collect::<Vec<_>>(),
        ),
        (
            "call",
            sorted
                .iter()
                .map(|p| (p.element_count as f64, p.call_mean))
                .collect(),
        ),
    ] {
        let fit = match linear_fit(&series) {
            Ok(fit) => fit,
            Err(FitError::Degenerate | FitError::TooFewPoints(_)) => {
                ScalingFit::degenerate(&series)
            }
            Err(e) => return Err(e.into()),
        };
        let _ = writeln!(out, "#fit {label} {}", describe_fit(&fit));
    }
    Ok(out)
}

pub fn emit_plot_data(points: &[PlotPoint], path: impl AsRef<Path>) -> Result<(), ReportError> {
    let text = render_plot_data(points)?;
    let mut out = BufWriter::new(File::create(path)?);
    out.write_all(text.as_bytes())?;
    out.flush()?;
    Ok(())
}
