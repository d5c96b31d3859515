use std::borrow::Borrow;
use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

use indexmap::map::Entry;
use indexmap::IndexMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::tokenize::{tokenize, TokenFilterConfig};
use super::CorpusError;

/// Separator between a word and its replica number in replicated indexes.
/// Tokenized words are alphanumeric, so it cannot appear in a real key.
pub const REPLICA_SEPARATOR: char = '#';

/// Document identifier. Cheap to clone; replicated postings share the
/// same allocation.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DocId(Arc<str>);

impl DocId {
    pub fn new(id: impl AsRef<str>) -> Self {
        Self(Arc::from(id.as_ref()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for DocId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(&*self.0, f)
    }
}

impl fmt::Display for DocId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl Borrow<str> for DocId {
    fn borrow(&self) -> &str {
        &self.0
    }
}

impl From<&str> for DocId {
    fn from(s: &str) -> Self {
        Self::new(s)
    }
}

impl From<String> for DocId {
    fn from(s: String) -> Self {
        Self(Arc::from(s))
    }
}

impl Serialize for DocId {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for DocId {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        String::deserialize(deserializer).map(DocId::from)
    }
}

/// A tokenized document. `dl` is always `tokens.len()`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    id: DocId,
    tokens: Vec<String>,
}

impl Document {
    pub fn new(id: impl Into<DocId>, tokens: Vec<String>) -> Self {
        Self {
            id: id.into(),
            tokens,
        }
    }

    pub fn from_text(id: impl Into<DocId>, text: &str, filter: &TokenFilterConfig) -> Self {
        Self::new(id, tokenize(text, filter))
    }

    pub fn id(&self) -> &DocId {
        &self.id
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    /// Number of meaningful words.
    pub fn dl(&self) -> u32 {
        self.tokens.len() as u32
    }
}

/// Document frequency plus the per-document term frequencies of one word.
///
/// Postings keep insertion order and never repeat a document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PostingEntry {
    df: u32,
    postings: Vec<(DocId, u32)>,
}

impl PostingEntry {
    /// Builds an entry whose df is the number of postings.
    pub fn new(word: &str, postings: Vec<(DocId, u32)>) -> Result<Self, CorpusError> {
        let df = postings.len() as u32;
        Self::with_df(word, df, postings)
    }

    /// Builds an entry from an externally supplied df, checking it against
    /// the postings.
    pub fn with_df(word: &str, df: u32, postings: Vec<(DocId, u32)>) -> Result<Self, CorpusError> {
        if postings.is_empty() {
            return Err(CorpusError::EmptyPostings {
                word: word.to_owned(),
            });
        }
        if df as usize != postings.len() {
            return Err(CorpusError::DfMismatch {
                word: word.to_owned(),
                df,
                postings: postings.len(),
            });
        }
        let mut seen = HashSet::with_capacity(postings.len());
        for (doc, tf) in &postings {
            if *tf == 0 {
                return Err(CorpusError::ZeroTf {
                    word: word.to_owned(),
                    doc: doc.to_string(),
                });
            }
            if !seen.insert(doc.as_str()) {
                return Err(CorpusError::DuplicatePosting {
                    word: word.to_owned(),
                    doc: doc.to_string(),
                });
            }
        }
        Ok(Self { df, postings })
    }

    pub fn df(&self) -> u32 {
        self.df
    }

    pub fn postings(&self) -> &[(DocId, u32)] {
        &self.postings
    }

    /// Term frequency of this word in `doc`, if it occurs there.
    pub fn tf(&self, doc: &str) -> Option<u32> {
        self.postings
            .iter()
            .find(|(id, _)| id.as_str() == doc)
            .map(|&(_, tf)| tf)
    }
}

/// word -> (df, docId -> tf), iterated in first-occurrence order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InvertedIndex {
    entries: IndexMap<String, PostingEntry>,
}

impl InvertedIndex {
    pub fn from_entries<I>(entries: I) -> Result<Self, CorpusError>
    where
        I: IntoIterator<Item = (String, PostingEntry)>,
    {
        let mut map = IndexMap::new();
        for (word, entry) in entries {
            match map.entry(word) {
                Entry::Occupied(o) => return Err(CorpusError::DuplicateWord(o.key().clone())),
                Entry::Vacant(v) => {
                    v.insert(entry);
                }
            }
        }
        if map.is_empty() {
            return Err(CorpusError::EmptyIndex);
        }
        Ok(Self { entries: map })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, word: &str) -> Option<&PostingEntry> {
        self.entries.get(word)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &PostingEntry)> {
        self.entries.iter().map(|(w, e)| (w.as_str(), e))
    }

    pub fn total_postings(&self) -> u64 {
        self.entries.values().map(|e| e.postings.len() as u64).sum()
    }

    /// Sum of every tf in the index.
    pub fn total_occurrences(&self) -> u64 {
        self.entries
            .values()
            .flat_map(|e| e.postings.iter())
            .map(|&(_, tf)| u64::from(tf))
            .sum()
    }
}

/// Collection-level statistics used by the weighting models.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusStats {
    d: u32,
    avdl: f64,
    doc_lengths: IndexMap<DocId, u32>,
}

impl CorpusStats {
    /// Derives d and avdl from per-document lengths.
    pub fn from_doc_lengths(doc_lengths: IndexMap<DocId, u32>) -> Result<Self, CorpusError> {
        if doc_lengths.is_empty() {
            return Err(CorpusError::EmptyCollection);
        }
        let total: u64 = doc_lengths.values().map(|&dl| u64::from(dl)).sum();
        if total == 0 {
            return Err(CorpusError::InconsistentStats(
                "every document is empty; avdl would be zero".into(),
            ));
        }
        let d = doc_lengths.len() as u32;
        Ok(Self {
            d,
            avdl: total as f64 / f64::from(d),
            doc_lengths,
        })
    }

    /// Accepts stored values after checking them against `doc_lengths`.
    pub fn with_declared(
        d: u32,
        avdl: f64,
        doc_lengths: IndexMap<DocId, u32>,
    ) -> Result<Self, CorpusError> {
        let derived = Self::from_doc_lengths(doc_lengths)?;
        if derived.d != d {
            return Err(CorpusError::InconsistentStats(format!(
                "d = {d} but {} document lengths are listed",
                derived.d
            )));
        }
        if !avdl.is_finite() || ((avdl - derived.avdl) / derived.avdl).abs() > 1e-12 {
            return Err(CorpusError::InconsistentStats(format!(
                "avdl = {avdl} but document lengths average {}",
                derived.avdl
            )));
        }
        Ok(Self { avdl, ..derived })
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn avdl(&self) -> f64 {
        self.avdl
    }

    pub fn doc_lengths(&self) -> &IndexMap<DocId, u32> {
        &self.doc_lengths
    }

    pub fn dl(&self, doc: &str) -> Option<u32> {
        self.doc_lengths.get(doc).copied()
    }
}

/// Builds the inverted index and collection statistics.
pub fn build_index(docs: &[Document]) -> Result<(InvertedIndex, CorpusStats), CorpusError> {
    if docs.is_empty() {
        return Err(CorpusError::EmptyCollection);
    }
    let mut doc_lengths = IndexMap::with_capacity(docs.len());
    for doc in docs {
        if doc_lengths.insert(doc.id.clone(), doc.dl()).is_some() {
            return Err(CorpusError::DuplicateDocId(doc.id.to_string()));
        }
    }

    let mut entries: IndexMap<String, Vec<(DocId, u32)>> = IndexMap::new();
    for doc in docs {
        // Per-document counts, kept in first-occurrence order.
        let mut counts: IndexMap<&str, u32> = IndexMap::new();
        for token in &doc.tokens {
            *counts.entry(token.as_str()).or_insert(0) += 1;
        }
        for (word, tf) in counts {
            match entries.get_mut(word) {
                Some(postings) => postings.push((doc.id.clone(), tf)),
                None => {
                    entries.insert(word.to_owned(), vec![(doc.id.clone(), tf)]);
                }
            }
        }
    }

    let index = InvertedIndex::from_entries(entries.into_iter().map(|(word, postings)| {
        let df = postings.len() as u32;
        (word, PostingEntry { df, postings })
    }))?;
    let stats = CorpusStats::from_doc_lengths(doc_lengths)?;
    Ok((index, stats))
}

/// Concatenates `n` copies of the index. Copy `k >= 2` renames every word to
/// `word#k` so no entries collapse; postings are copied unchanged.
pub fn replicate_index(index: &InvertedIndex, n: u32) -> Result<InvertedIndex, CorpusError> {
    if n == 0 {
        return Err(CorpusError::ZeroReplication);
    }
    let mut entries = IndexMap::with_capacity(index.len() * n as usize);
    for replica in 1..=n {
        for (word, entry) in &index.entries {
            let key = if replica == 1 {
                word.clone()
            } else {
                format!("{word}{REPLICA_SEPARATOR}{replica}")
            };
            match entries.entry(key) {
                Entry::Occupied(o) => {
                    return Err(CorpusError::ReplicaKeyCollision(o.key().clone()))
                }
                Entry::Vacant(v) => {
                    v.insert(entry.clone());
                }
            }
        }
    }
    Ok(InvertedIndex { entries })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(id: &str, words: &[&str]) -> Document {
        Document::new(id, words.iter().map(|w| w.to_string()).collect())
    }

    fn rocket_docs() -> Vec<Document> {
        let mut docs = vec![];
        for (id, n) in [("doc_11", 7), ("doc_15", 2), ("doc_67", 4)] {
            let mut words = vec!["rocket"; n];
            words.push("launch");
            docs.push(doc(id, &words));
        }
        docs
    }

    #[test]
    fn rocket_example() {
        let (index, stats) = build_index(&rocket_docs()).unwrap();
        let rocket = index.get("rocket").unwrap();
        assert_eq!(rocket.df(), 3);
        assert_eq!(rocket.tf("doc_11"), Some(7));
        assert_eq!(rocket.tf("doc_15"), Some(2));
        assert_eq!(rocket.tf("doc_67"), Some(4));
        assert_eq!(stats.d(), 3);
        assert_eq!(stats.dl("doc_11"), Some(8));
        assert!((stats.avdl() - 16.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn single_document() {
        let (index, stats) = build_index(&[doc("doc", &["alpha", "alpha"])]).unwrap();
        assert_eq!(index.len(), 1);
        let alpha = index.get("alpha").unwrap();
        assert_eq!(alpha.df(), 1);
        assert_eq!(alpha.postings(), &[(DocId::new("doc"), 2)]);
        assert_eq!(stats.d(), 1);
        assert_eq!(stats.avdl(), 2.0);
    }

    #[test]
    fn df_counts_documents() {
        let (index, _) = build_index(&[doc("a", &["beta"]), doc("b", &["beta"])]).unwrap();
        assert_eq!(index.get("beta").unwrap().df(), 2);
    }

    #[test]
    fn first_occurrence_order() {
        let docs = [doc("a", &["gamma", "alpha"]), doc("b", &["beta", "alpha"])];
        let (index, _) = build_index(&docs).unwrap();
        let words: Vec<_> = index.iter().map(|(w, _)| w).collect();
        assert_eq!(words, ["gamma", "alpha", "beta"]);
    }

    #[test]
    fn rejects_duplicate_ids_and_empty_input() {
        let err = build_index(&[doc("a", &["x1x"]), doc("a", &["y1y"])]).unwrap_err();
        assert!(matches!(err, CorpusError::DuplicateDocId(ref id) if id == "a"));
        assert!(matches!(
            build_index(&[]),
            Err(CorpusError::EmptyCollection)
        ));
        assert!(matches!(
            build_index(&[doc("a", &[])]),
            Err(CorpusError::EmptyIndex)
        ));
    }

    #[test]
    fn entry_invariants_enforced() {
        let p = vec![(DocId::new("a"), 1), (DocId::new("b"), 2)];
        assert!(matches!(
            PostingEntry::with_df("w", 3, p.clone()),
            Err(CorpusError::DfMismatch {
                df: 3,
                postings: 2,
                ..
            })
        ));
        assert!(matches!(
            PostingEntry::new("w", vec![(DocId::new("a"), 0)]),
            Err(CorpusError::ZeroTf { .. })
        ));
        assert!(matches!(
            PostingEntry::new("w", vec![(DocId::new("a"), 1), (DocId::new("a"), 1)]),
            Err(CorpusError::DuplicatePosting { .. })
        ));
        assert!(matches!(
            PostingEntry::new("w", vec![]),
            Err(CorpusError::EmptyPostings { .. })
        ));
        assert_eq!(PostingEntry::new("w", p).unwrap().df(), 2);
    }

    #[test]
    fn declared_stats_checked() {
        let lengths: IndexMap<DocId, u32> = [(DocId::new("a"), 3), (DocId::new("b"), 5)]
            .into_iter()
            .collect();
        assert!(CorpusStats::with_declared(2, 4.0, lengths.clone()).is_ok());
        assert!(CorpusStats::with_declared(3, 4.0, lengths.clone()).is_err());
        assert!(CorpusStats::with_declared(2, 4.5, lengths).is_err());
    }

    #[test]
    fn replication_counts() {
        let (index, _) = build_index(&rocket_docs()).unwrap();
        let once = replicate_index(&index, 1).unwrap();
        assert_eq!(once, index);

        let five = replicate_index(&index, 5).unwrap();
        assert_eq!(five.len(), 5 * index.len());
        assert_eq!(five.total_postings(), 5 * index.total_postings());
        let copy = five.get("rocket#5").unwrap();
        assert_eq!(copy, index.get("rocket").unwrap());
        assert!(matches!(
            replicate_index(&index, 0),
            Err(CorpusError::ZeroReplication)
        ));
    }

    #[test]
    fn replication_collision_detected() {
        let entry = PostingEntry::new("w", vec![(DocId::new("a"), 1)]).unwrap();
        let index = InvertedIndex::from_entries([
            ("w".to_string(), entry.clone()),
            ("w#2".to_string(), entry),
        ])
        .unwrap();
        assert!(matches!(
            replicate_index(&index, 2),
            Err(CorpusError::ReplicaKeyCollision(ref k)) if k == "w#2"
        ));
    }
}
