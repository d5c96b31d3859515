//! Document ingestion, tokenization, and the inverted index.

mod index;
mod io;
mod synthetic;
mod tokenize;

use std::path::PathBuf;

pub use index::{
    build_index, replicate_index, CorpusStats, DocId, Document, InvertedIndex, PostingEntry,
    REPLICA_SEPARATOR,
};
pub use io::{
    load_corpus, load_corpus_dir, load_corpus_jsonl, load_index, read_index, save_index,
    write_index, INDEX_FORMAT_VERSION,
};
pub use synthetic::{generate_synthetic_corpus, vocabulary, SyntheticCorpus, ZIPF_EXPONENT};
pub use tokenize::{default_stopwords, tokenize, TokenFilterConfig, DEFAULT_MIN_LEN};

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("document collection is empty")]
    EmptyCollection,
    #[error("inverted index has no entries")]
    EmptyIndex,
    #[error("duplicate document id {0:?}")]
    DuplicateDocId(String),
    #[error("duplicate index entry {0:?}")]
    DuplicateWord(String),
    #[error("entry {word:?} has no postings")]
    EmptyPostings { word: String },
    #[error("entry {word:?} declares df = {df} but has {postings} postings")]
    DfMismatch {
        word: String,
        df: u32,
        postings: usize,
    },
    #[error("entry {word:?} has tf = 0 for document {doc:?}")]
    ZeroTf { word: String, doc: String },
    #[error("entry {word:?} lists document {doc:?} twice")]
    DuplicatePosting { word: String, doc: String },
    #[error("entry {word:?} references document {doc:?} which has no length")]
    UnknownDocument { word: String, doc: String },
    #[error("inconsistent corpus statistics: {0}")]
    InconsistentStats(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("replication factor must be at least 1")]
    ZeroReplication,
    #[error("replicated key {0:?} collides with an existing entry")]
    ReplicaKeyCollision(String),
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unsupported index file version {found} (expected {expected})")]
    UnsupportedVersion { found: u32, expected: u32 },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}
