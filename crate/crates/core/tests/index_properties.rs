use std::collections::{BTreeMap, HashMap};

use callcost::corpus::{
    generate_synthetic_corpus, load_index, read_index, save_index, write_index, Document,
};
use callcost::{build_index, replicate_index};
use proptest::prelude::*;

/// Straight nested-loop count: word -> doc -> occurrences.
fn brute_force(docs: &[Document]) -> BTreeMap<String, BTreeMap<String, u32>> {
    let mut counts: BTreeMap<String, BTreeMap<String, u32>> = BTreeMap::new();
    for doc in docs {
        for token in doc.tokens() {
            *counts
                .entry(token.clone())
                .or_default()
                .entry(doc.id().as_str().to_owned())
                .or_default() += 1;
        }
    }
    counts
}

fn check_against_counter(docs: &[Document]) {
    let (index, stats) = build_index(docs).unwrap();
    let expected = brute_force(docs);
    assert_eq!(index.len(), expected.len());
    for (word, per_doc) in &expected {
        let entry = index.get(word).unwrap_or_else(|| panic!("{word} missing"));
        assert_eq!(entry.df() as usize, entry.postings().len());
        assert_eq!(entry.df() as usize, per_doc.len());
        let got: BTreeMap<String, u32> = entry
            .postings()
            .iter()
            .map(|(doc, tf)| (doc.as_str().to_owned(), *tf))
            .collect();
        assert_eq!(&got, per_doc, "postings of {word}");
    }
    assert_eq!(stats.d() as usize, docs.len());
    let total: u64 = docs.iter().map(|d| d.dl() as u64).sum();
    assert_eq!(index.total_occurrences(), total);
    assert!((stats.avdl() - total as f64 / docs.len() as f64).abs() < 1e-9);
}

#[test]
fn thousand_document_corpus_matches_counter() {
    let docs = generate_synthetic_corpus(1000, 5000, 60, 7).unwrap();
    check_against_counter(&docs);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn synthetic_indexes_match_counter(seed in any::<u64>(), vocab in 50u32..3000, mean_dl in 1u32..80) {
        let docs = generate_synthetic_corpus(1000, vocab, mean_dl, seed).unwrap();
        check_against_counter(&docs);
    }

    #[test]
    fn document_order_does_not_change_counts(seed in any::<u64>(), rotate in 0usize..40) {
        let docs = generate_synthetic_corpus(40, 200, 15, seed).unwrap();
        let mut rotated = docs.clone();
        rotated.rotate_left(rotate % docs.len());
        let (a, _) = build_index(&docs).unwrap();
        let (b, _) = build_index(&rotated).unwrap();
        prop_assert_eq!(a.len(), b.len());
        for (word, entry) in a.iter() {
            let other = b.get(word).unwrap();
            prop_assert_eq!(entry.df(), other.df());
            let lhs: HashMap<_, _> = entry.postings().iter().cloned().collect();
            let rhs: HashMap<_, _> = other.postings().iter().cloned().collect();
            prop_assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn replication_scales_counts(seed in any::<u64>(), n in 1u32..6) {
        let docs = generate_synthetic_corpus(30, 150, 12, seed).unwrap();
        let (index, _) = build_index(&docs).unwrap();
        let replicated = replicate_index(&index, n).unwrap();
        prop_assert_eq!(replicated.len(), index.len() * n as usize);
        prop_assert_eq!(replicated.total_postings(), index.total_postings() * n as u64);
        for (word, entry) in index.iter() {
            for k in 2..=n {
                let copy = replicated.get(&format!("{word}#{k}")).unwrap();
                prop_assert_eq!(copy, entry);
            }
        }
    }
}

#[test]
fn synthetic_index_round_trips_through_file() {
    let docs = generate_synthetic_corpus(200, 800, 25, 3).unwrap();
    let (index, stats) = build_index(&docs).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("index.json");
    save_index(&index, &stats, &path).unwrap();
    let (index2, stats2) = load_index(&path).unwrap();
    assert_eq!(index, index2);
    assert_eq!(stats, stats2);

    // Writing the loaded index again gives the same bytes.
    let mut first = Vec::new();
    let mut second = Vec::new();
    write_index(&mut first, &index, &stats).unwrap();
    write_index(&mut second, &index2, &stats2).unwrap();
    assert_eq!(first, second);
    assert!(read_index(std::str::from_utf8(&first).unwrap()).is_ok());
}
