//! Measures what it costs to move arithmetic behind a function call.
//!
//! The workload is the term-weighting pass of a full-text search engine:
//! every posting of an inverted index gets a tf-idf, BM25, or padded BM25
//! weight. Each model has an *inline* kernel and a *call* kernel that do the
//! same arithmetic; [`bench`] times both and reports the overhead, and
//! [`bench::run_scaling`] repeats the comparison on replicated indexes to
//! check that time grows linearly with the index size.

pub mod bench;
pub mod corpus;
pub mod kernels;
pub mod report;
pub mod weighting;

pub use bench::{
    compare, linear_fit, overhead_pct, run_comparison, run_scaling, BenchError, BenchSettings,
    ComparisonResult, Measurement, RepetitionOrder, ScalingFit, ScalingReport,
};
pub use corpus::{
    build_index, replicate_index, CorpusError, CorpusStats, Document, InvertedIndex, PostingEntry,
};
pub use kernels::{
    kernel_pair_equivalence, run_kernel, Form, KernelId, KernelOutcome, KernelPlan, Model,
};
pub use weighting::{bm25_modified_weight, bm25_weight, tfidf_weight, Bm25Params, WeightInputs};
