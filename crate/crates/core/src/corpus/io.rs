use std::fmt;
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use indexmap::IndexMap;
use serde::de::{MapAccess, Visitor};
use serde::{Deserialize, Deserializer, Serialize};

use super::index::{CorpusStats, DocId, Document, InvertedIndex, PostingEntry};
use super::tokenize::TokenFilterConfig;
use super::CorpusError;

pub const INDEX_FORMAT_VERSION: u32 = 1;

/// One `[word, df, postings]` triple as written to disk.
type EntryOut<'a> = (&'a str, u32, &'a [(DocId, u32)]);
type EntryIn = (String, u32, Vec<(DocId, u32)>);

#[derive(Serialize)]
struct IndexFileOut<'a> {
    version: u32,
    d: u32,
    avdl: f64,
    doc_lengths: &'a IndexMap<DocId, u32>,
    entries: Vec<EntryOut<'a>>,
}

#[derive(Deserialize)]
struct VersionProbe {
    version: u32,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct IndexFileIn {
    #[allow(dead_code)]
    version: u32,
    d: u32,
    avdl: f64,
    doc_lengths: StrictMap,
    entries: Vec<EntryIn>,
}

/// JSON object that refuses repeated keys.
struct StrictMap(IndexMap<DocId, u32>);

impl<'de> Deserialize<'de> for StrictMap {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct StrictVisitor;

        impl<'de> Visitor<'de> for StrictVisitor {
            type Value = StrictMap;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("an object mapping document ids to lengths")
            }

            fn visit_map<A: MapAccess<'de>>(self, mut access: A) -> Result<StrictMap, A::Error> {
                let mut map = IndexMap::with_capacity(access.size_hint().unwrap_or(0));
                while let Some((key, value)) = access.next_entry::<DocId, u32>()? {
                    if map.contains_key(&key) {
                        return Err(serde::de::Error::custom(format!(
                            "duplicate document id {key:?}"
                        )));
                    }
                    map.insert(key, value);
                }
                Ok(StrictMap(map))
            }
        }

        deserializer.deserialize_map(StrictVisitor)
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CorpusError + '_ {
    move |source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn parse_err(e: serde_json::Error) -> CorpusError {
    CorpusError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    }
}

pub fn write_index<W: Write>(
    writer: W,
    index: &InvertedIndex,
    stats: &CorpusStats,
) -> std::io::Result<()> {
    let file = IndexFileOut {
        version: INDEX_FORMAT_VERSION,
        d: stats.d(),
        avdl: stats.avdl(),
        doc_lengths: stats.doc_lengths(),
        entries: index
            .iter()
            .map(|(w, e)| (w, e.df(), e.postings()))
            .collect(),
    };
    serde_json::to_writer(writer, &file).map_err(Into::into)
}

pub fn save_index(
    index: &InvertedIndex,
    stats: &CorpusStats,
    path: impl AsRef<Path>,
) -> Result<(), CorpusError> {
    let path = path.as_ref();
    let mut out = BufWriter::new(File::create(path).map_err(io_err(path))?);
    write_index(&mut out, index, stats).map_err(io_err(path))?;
    out.write_all(b"\n").map_err(io_err(path))?;
    out.flush().map_err(io_err(path))
}

/// Parses and validates an index file's contents.
pub fn read_index(text: &str) -> Result<(InvertedIndex, CorpusStats), CorpusError> {
    let probe: VersionProbe = serde_json::from_str(text).map_err(parse_err)?;
    if probe.version != INDEX_FORMAT_VERSION {
        return Err(CorpusError::UnsupportedVersion {
            found: probe.version,
            expected: INDEX_FORMAT_VERSION,
        });
    }
    let raw: IndexFileIn = serde_json::from_str(text).map_err(parse_err)?;
    let stats = CorpusStats::with_declared(raw.d, raw.avdl, raw.doc_lengths.0)?;
    let mut entries = Vec::with_capacity(raw.entries.len());
    for (word, df, postings) in raw.entries {
        let entry = PostingEntry::with_df(&word, df, postings)?;
        if let Some((doc, _)) = entry
            .postings()
            .iter()
            .find(|(doc, _)| stats.dl(doc.as_str()).is_none())
        {
            return Err(CorpusError::UnknownDocument {
                word,
                doc: doc.to_string(),
            });
        }
        entries.push((word, entry));
    }
    let index = InvertedIndex::from_entries(entries)?;
    Ok((index, stats))
}

pub fn load_index(path: impl AsRef<Path>) -> Result<(InvertedIndex, CorpusStats), CorpusError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    read_index(&text)
}

#[derive(Deserialize)]
struct JsonlRecord {
    id: String,
    text: String,
}

/// Reads a corpus from a directory of `*.txt` files (document id = file stem,
/// sorted by file name) or from a JSON-lines file of `{"id", "text"}` objects.
pub fn load_corpus(
    path: impl AsRef<Path>,
    filter: &TokenFilterConfig,
) -> Result<Vec<Document>, CorpusError> {
    let path = path.as_ref();
    if path.is_dir() {
        load_corpus_dir(path, filter)
    } else {
        load_corpus_jsonl(path, filter)
    }
}

pub fn load_corpus_dir(
    dir: &Path,
    filter: &TokenFilterConfig,
) -> Result<Vec<Document>, CorpusError> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(io_err(dir))?
        .map(|entry| entry.map(|e| e.path()).map_err(io_err(dir)))
        .collect::<Result<_, _>>()?;
    files.retain(|p| p.is_file() && p.extension().is_some_and(|ext| ext == "txt"));
    files.sort();

    files
        .iter()
        .map(|file| {
            let text = fs::read_to_string(file).map_err(io_err(file))?;
            let stem = file.file_stem().unwrap_or_default().to_string_lossy();
            Ok(Document::from_text(stem.as_ref(), &text, filter))
        })
        .collect()
}

pub fn load_corpus_jsonl(
    path: &Path,
    filter: &TokenFilterConfig,
) -> Result<Vec<Document>, CorpusError> {
    let reader = BufReader::new(File::open(path).map_err(io_err(path))?);
    let mut docs = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        if line.trim().is_empty() {
            continue;
        }
        let record: JsonlRecord = serde_json::from_str(&line).map_err(|e| CorpusError::Parse {
            line: lineno + 1,
            column: e.column(),
            message: e.to_string(),
        })?;
        docs.push(Document::from_text(record.id, &record.text, filter));
    }
    Ok(docs)
}
