//! Measurement kernels.
//!
//! Every weighting model has two kernels that traverse the same postings in
//! the same order and evaluate the same expression:
//!
//! * the *inline* form writes the arithmetic directly in the loop body;
//! * the *call* form invokes a routine marked `#[inline(never)]`.
//!
//! Both forms read the document length from a lookup table per posting
//! (BM25 models only) and fold every weight into one checksum that is
//! returned to the caller. Parameters (`d`, `k1`, `b`, `pad`) enter each kernel
//! through [`black_box`] so the optimizer sees them as unknown runtime
//! values and cannot specialize the call-form routines on constants.
//!
//! To confirm the call boundary survives in a given build, disassemble the
//! binary and look for calls to `calculate_document_weight*` inside the
//! `*_call` kernels (see the README).

use std::collections::HashMap;
use std::fmt;
use std::hint::black_box;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::{CorpusStats, InvertedIndex};
use crate::weighting::{Bm25Params, WeightError};

/// Maximum relative checksum difference tolerated between two kernels that
/// compute the same workload.
pub const EQUIVALENCE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Tfidf,
    Bm25,
    #[serde(rename = "bm25mod")]
    Bm25Modified,
}

impl Model {
    pub const ALL: [Model; 3] = [Model::Tfidf, Model::Bm25, Model::Bm25Modified];

    pub fn name(self) -> &'static str {
        match self {
            Model::Tfidf => "tfidf",
            Model::Bm25 => "bm25",
            Model::Bm25Modified => "bm25mod",
        }
    }

    /// Heading used in rendered tables.
    pub fn title(self) -> &'static str {
        match self {
            Model::Tfidf => "Basic tf-idf",
            Model::Bm25 => "BM 25",
            Model::Bm25Modified => "Modified BM 25",
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Model {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "tfidf" | "tf-idf" => Ok(Model::Tfidf),
            "bm25" => Ok(Model::Bm25),
            "bm25mod" | "bm25-modified" | "bm25_modified" => Ok(Model::Bm25Modified),
            other => Err(format!(
                "unknown model {other:?} (expected tfidf, bm25 or bm25mod)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Form {
    Inline,
    Call,
}

impl Form {
    pub const ALL: [Form; 2] = [Form::Inline, Form::Call];

    pub fn name(self) -> &'static str {
        match self {
            Form::Inline => "inline",
            Form::Call => "call",
        }
    }
}

impl fmt::Display for Form {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Form {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inline" => Ok(Form::Inline),
            "call" => Ok(Form::Call),
            other => Err(format!("unknown form {other:?} (expected inline or call)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct KernelId {
    pub model: Model,
    pub form: Form,
}

impl KernelId {
    pub const fn new(model: Model, form: Form) -> Self {
        Self { model, form }
    }

    pub fn all() -> impl Iterator<Item = KernelId> {
        Model::ALL.into_iter().flat_map(|model| {
            Form::ALL
                .into_iter()
                .map(move |form| KernelId { model, form })
        })
    }
}

impl fmt::Display for KernelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.model, self.form)
    }
}

/// Sum of all computed weights and the number of weights computed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelOutcome {
    pub checksum: f64,
    pub weight_count: u64,
}

impl KernelOutcome {
    /// Passes the outcome through an optimization barrier.
    pub fn consume(self) {
        black_box(self);
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum KernelError {
    #[error("cannot run a kernel over an empty index")]
    EmptyIndex,
    #[error("entry {word:?} references document {doc:?} which has no length")]
    UnknownDocument { word: String, doc: String },
    #[error("document {doc:?} has zero length")]
    EmptyDocument { doc: String },
    #[error("entry {word:?} has df = {df} above the document count {d}")]
    DfExceedsDocCount { word: String, df: u32, d: u32 },
    #[error(transparent)]
    Weight(#[from] WeightError),
    #[error(
        "{model}: inline and call kernels disagree (inline {inline_count} weights, checksum {inline_checksum}; \
         call {call_count} weights, checksum {call_checksum}; relative difference {relative_diff:e})"
    )]
    Equivalence {
        model: Model,
        inline_checksum: f64,
        call_checksum: f64,
        inline_count: u64,
        call_count: u64,
        relative_diff: f64,
    },
}

#[derive(Debug, Clone, Copy)]
struct Posting {
    tf: u32,
    df: u32,
    doc: u32,
}

/// The postings of an index flattened in traversal order, with every
/// document reference resolved to a slot of the length table. Preparing a
/// plan performs all validation, so running one cannot fail.
#[derive(Debug, Clone)]
pub struct KernelPlan {
    postings: Vec<Posting>,
    doc_lengths: Vec<f64>,
    d: f64,
    avdl: f64,
    entry_count: usize,
}

impl KernelPlan {
    pub fn prepare(index: &InvertedIndex, stats: &CorpusStats) -> Result<Self, KernelError> {
        if index.is_empty() {
            return Err(KernelError::EmptyIndex);
        }
        let mut slots: HashMap<&str, u32> = HashMap::with_capacity(stats.doc_lengths().len());
        let mut doc_lengths = Vec::with_capacity(stats.doc_lengths().len());
        for (doc, &dl) in stats.doc_lengths() {
            slots.insert(doc.as_str(), doc_lengths.len() as u32);
            doc_lengths.push(f64::from(dl));
        }

        let d = stats.d();
        let mut postings = Vec::with_capacity(index.total_postings() as usize);
        for (word, entry) in index.iter() {
            if entry.df() > d {
                return Err(KernelError::DfExceedsDocCount {
                    word: word.to_owned(),
                    df: entry.df(),
                    d,
                });
            }
            for (doc, tf) in entry.postings() {
                let slot =
                    *slots
                        .get(doc.as_str())
                        .ok_or_else(|| KernelError::UnknownDocument {
                            word: word.to_owned(),
                            doc: doc.to_string(),
                        })?;
                if doc_lengths[slot as usize] == 0.0 {
                    return Err(KernelError::EmptyDocument {
                        doc: doc.to_string(),
                    });
                }
                postings.push(Posting {
                    tf: *tf,
                    df: entry.df(),
                    doc: slot,
                });
            }
        }

        Ok(Self {
            postings,
            doc_lengths,
            d: f64::from(d),
            avdl: stats.avdl(),
            entry_count: index.len(),
        })
    }

    /// Number of index entries (words) covered by the plan.
    pub fn entry_count(&self) -> usize {
        self.entry_count
    }

    pub fn posting_count(&self) -> u64 {
        self.postings.len() as u64
    }

    /// Runs one kernel over the whole plan.
    pub fn run(&self, id: KernelId, params: &Bm25Params, pad: f64) -> KernelOutcome {
        let d = black_box(self.d);
        let avdl = black_box(self.avdl);
        let k1 = black_box(params.k1);
        let b = black_box(params.b);
        let pad = black_box(pad);
        match (id.model, id.form) {
            (Model::Tfidf, Form::Inline) => tfidf_inline(self, d),
            (Model::Tfidf, Form::Call) => tfidf_call(self, d),
            (Model::Bm25, Form::Inline) => bm25_inline(self, d, avdl, k1, b),
            (Model::Bm25, Form::Call) => bm25_call(self, d, avdl, k1, b),
            (Model::Bm25Modified, Form::Inline) => bm25_modified_inline(self, d, avdl, k1, b, pad),
            (Model::Bm25Modified, Form::Call) => bm25_modified_call(self, d, avdl, k1, b, pad),
        }
    }
}

/// Validates inputs, builds a plan, and runs one kernel.
pub fn run_kernel(
    id: KernelId,
    index: &InvertedIndex,
    stats: &CorpusStats,
    params: &Bm25Params,
    pad: f64,
) -> Result<KernelOutcome, KernelError> {
    check_params(params, pad)?;
    let plan = KernelPlan::prepare(index, stats)?;
    Ok(plan.run(id, params, pad))
}

pub(crate) fn check_params(params: &Bm25Params, pad: f64) -> Result<(), KernelError> {
    params.validate()?;
    if pad == 0.0 || !pad.is_finite() {
        return Err(WeightError::InvalidPad(pad).into());
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub model: Model,
    pub inline: KernelOutcome,
    pub call: KernelOutcome,
    pub relative_diff: f64,
}

pub fn relative_diff(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Runs both forms of `model` once, untimed, and checks they computed the
/// same workload.
pub fn kernel_pair_equivalence(
    model: Model,
    plan: &KernelPlan,
    params: &Bm25Params,
    pad: f64,
) -> Result<EquivalenceReport, KernelError> {
    check_params(params, pad)?;
    let inline = plan.run(KernelId::new(model, Form::Inline), params, pad);
    let call = plan.run(KernelId::new(model, Form::Call), params, pad);
    let diff = relative_diff(inline.checksum, call.checksum);
    let agrees = inline.weight_count == call.weight_count
        && inline.weight_count == plan.posting_count()
        && inline.checksum.is_finite()
        && call.checksum.is_finite()
        && diff <= EQUIVALENCE_TOLERANCE;
    if !agrees {
        return Err(KernelError::Equivalence {
            model,
            inline_checksum: inline.checksum,
            call_checksum: call.checksum,
            inline_count: inline.weight_count,
            call_count: call.weight_count,
            relative_diff: diff,
        });
    }
    Ok(EquivalenceReport {
        model,
        inline,
        call,
        relative_diff: diff,
    })
}

// Call-form routines. These must stay out of line.

#[inline(never)]
pub fn calculate_document_weight(tf: f64, df: f64, d: f64) -> f64 {
    (1.0 + tf.ln()) * (d / df + 1.0).ln()
}

#[inline(never)]
#[allow(clippy::too_many_arguments)]
pub fn calculate_document_weight_bm25(
    tf: f64,
    df: f64,
    d: f64,
    dl: f64,
    avdl: f64,
    k1: f64,
    b: f64,
) -> f64 {
    let mul = ((k1 + 1.0) * tf) / (k1 * (1.0 - b + b * (dl / avdl)) + tf);
    let idf = (1.0 + (d / df)).ln();
    mul * idf
}

#[inline(never)]
#[allow(clippy::too_many_arguments)]
pub fn calculate_document_weight_bm25_modified(
    tf: f64,
    df: f64,
    d: f64,
    dl: f64,
    avdl: f64,
    k1: f64,
    b: f64,
    pad: f64,
) -> f64 {
    let mul = ((k1 + 1.0) * tf) / (k1 * (1.0 - b + b * (dl / avdl)) + tf);
    let idf = (1.0 + (d / df)).ln();
    ((mul * pad) / pad) * ((idf * pad) / pad)
}

// Traversals.

#[inline(never)]
fn tfidf_inline(plan: &KernelPlan, d: f64) -> KernelOutcome {
    let mut checksum = 0.0;
    let mut weight_count = 0u64;
    for p in &plan.postings {
        let tf = f64::from(p.tf);
        let df = f64::from(p.df);
        let w = (1.0 + tf.ln()) * (d / df + 1.0).ln();
        checksum += w;
        weight_count += 1;
    }
    KernelOutcome {
        checksum,
        weight_count,
    }
}

#[inline(never)]
fn tfidf_call(plan: &KernelPlan, d: f64) -> KernelOutcome {
    let mut checksum = 0.0;
    let mut weight_count = 0u64;
    for p in &plan.postings {
        let tf = f64::from(p.tf);
        let df = f64::from(p.df);
        let w = calculate_document_weight(tf, df, d);
        checksum += w;
        weight_count += 1;
    }
    KernelOutcome {
        checksum,
        weight_count,
    }
}

#[inline(never)]
fn bm25_inline(plan: &KernelPlan, d: f64, avdl: f64, k1: f64, b: f64) -> KernelOutcome {
    let mut checksum = 0.0;
    let mut weight_count = 0u64;
    for p in &plan.postings {
        let tf = f64::from(p.tf);
        let df = f64::from(p.df);
        let dl = plan.doc_lengths[p.doc as usize];
        let mul = ((k1 + 1.0) * tf) / (k1 * (1.0 - b + b * (dl / avdl)) + tf);
        let idf = (1.0 + (d / df)).ln();
        let w = mul * idf;
        checksum += w;
        weight_count += 1;
    }
    KernelOutcome {
        checksum,
        weight_count,
    }
}

#[inline(never)]
fn bm25_call(plan: &KernelPlan, d: f64, avdl: f64, k1: f64, b: f64) -> KernelOutcome {
    let mut checksum = 0.0;
    let mut weight_count = 0u64;
    for p in &plan.postings {
        let tf = f64::from(p.tf);
        let df = f64::from(p.df);
        let dl = plan.doc_lengths[p.doc as usize];
        let w = calculate_document_weight_bm25(tf, df, d, dl, avdl, k1, b);
        checksum += w;
        weight_count += 1;
    }
    KernelOutcome {
        checksum,
        weight_count,
    }
}

#[inline(never)]
fn bm25_modified_inline(
    plan: &KernelPlan,
    d: f64,
    avdl: f64,
    k1: f64,
    b: f64,
    pad: f64,
) -> KernelOutcome {
    let mut checksum = 0.0;
    let mut weight_count = 0u64;
    for p in &plan.postings {
        let tf = f64::from(p.tf);
        let df = f64::from(p.df);
        let dl = plan.doc_lengths[p.doc as usize];
        let mul = ((k1 + 1.0) * tf) / (k1 * (1.0 - b + b * (dl / avdl)) + tf);
        let idf = (1.0 + (d / df)).ln();
        let w = ((mul * pad) / pad) * ((idf * pad) / pad);
        checksum += w;
        weight_count += 1;
    }
    KernelOutcome {
        checksum,
        weight_count,
    }
}

#[inline(never)]
fn bm25_modified_call(
    plan: &KernelPlan,
    d: f64,
    avdl: f64,
    k1: f64,
    b: f64,
    pad: f64,
) -> KernelOutcome {
    let mut checksum = 0.0;
    let mut weight_count = 0u64;
    for p in &plan.postings {
        let tf = f64::from(p.tf);
        let df = f64::from(p.df);
        let dl = plan.doc_lengths[p.doc as usize];
        let w = calculate_document_weight_bm25_modified(tf, df, d, dl, avdl, k1, b, pad);
        checksum += w;
        weight_count += 1;
    }
    KernelOutcome {
        checksum,
        weight_count,
    }
}
