//! Deterministic Zipf-distributed corpora.
//!
//! Word ranks are drawn from a Zipf law with exponent [`ZIPF_EXPONENT`] over a
//! vocabulary of pronounceable pseudo-words. Document lengths come in pairs
//! `mean_dl ± delta`, so the realized average length is exactly `mean_dl`
//! whenever the document count is even (an odd trailing document gets
//! `mean_dl` itself).

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Zipf};
use serde::{Deserialize, Serialize};

use super::index::Document;
use super::tokenize::default_stopwords;
use super::CorpusError;

pub const ZIPF_EXPONENT: f64 = 1.0;

const CONSONANTS: &[u8] = b"bcdfghjklmnprstvz";
const VOWELS: &[u8] = b"aeiou";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyntheticCorpus {
    pub num_docs: u32,
    pub vocab_size: u32,
    pub mean_dl: u32,
    pub seed: u64,
}

impl SyntheticCorpus {
    pub fn generate(&self) -> Result<Vec<Document>, CorpusError> {
        generate_synthetic_corpus(self.num_docs, self.vocab_size, self.mean_dl, self.seed)
    }
}

pub fn generate_synthetic_corpus(
    num_docs: u32,
    vocab_size: u32,
    mean_dl: u32,
    seed: u64,
) -> Result<Vec<Document>, CorpusError> {
    for (name, value) in [
        ("num_docs", num_docs),
        ("vocab_size", vocab_size),
        ("mean_dl", mean_dl),
    ] {
        if value == 0 {
            return Err(CorpusError::InvalidParameter(format!(
                "{name} must be positive"
            )));
        }
    }

    let vocab = vocabulary(vocab_size as usize);
    let zipf = Zipf::new(f64::from(vocab_size), ZIPF_EXPONENT)
        .map_err(|e| CorpusError::InvalidParameter(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let max_delta = (mean_dl / 2).min(mean_dl - 1);

    let mut lengths = Vec::with_capacity(num_docs as usize);
    while lengths.len() + 1 < num_docs as usize {
        let delta = rng.random_range(0..=max_delta);
        lengths.push(mean_dl + delta);
        lengths.push(mean_dl - delta);
    }
    if lengths.len() < num_docs as usize {
        lengths.push(mean_dl);
    }

    let width = num_docs.to_string().len();
    let docs = lengths
        .into_iter()
        .enumerate()
        .map(|(i, len)| {
            let tokens = (0..len)
                .map(|_| {
                    let rank = zipf.sample(&mut rng) as usize;
                    vocab[rank.clamp(1, vocab.len()) - 1].clone()
                })
                .collect();
            Document::new(format!("doc_{:0width$}", i + 1), tokens)
        })
        .collect();
    Ok(docs)
}

/// `size` distinct lowercase pseudo-words of at least four letters, none of
/// them a default stopword. The same size always yields the same list.
pub fn vocabulary(size: usize) -> Vec<String> {
    let stop: HashSet<&str> = default_stopwords().collect();
    let base = CONSONANTS.len() * VOWELS.len();
    // Offsetting by base + 1 makes every bijective numeral at least two digits.
    (base + 1..)
        .map(|n| syllables(n, base))
        .filter(|w| !stop.contains(w.as_str()))
        .take(size)
        .collect()
}

fn syllables(mut n: usize, base: usize) -> String {
    let mut digits = Vec::new();
    while n > 0 {
        n -= 1;
        digits.push(n % base);
        n /= base;
    }
    let mut word = String::with_capacity(digits.len() * 2);
    for &digit in digits.iter().rev() {
        word.push(CONSONANTS[digit / VOWELS.len()] as char);
        word.push(VOWELS[digit % VOWELS.len()] as char);
    }
    word
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::tokenize::{tokenize, TokenFilterConfig};

    #[test]
    fn degenerate_vocabulary() {
        let docs = generate_synthetic_corpus(1, 1, 5, 99).unwrap();
        assert_eq!(docs.len(), 1);
        let first = &vocabulary(1)[0];
        assert_eq!(docs[0].tokens(), vec![first.clone(); 5].as_slice());
        assert_eq!(docs[0].dl(), 5);
    }

    #[test]
    fn deterministic_for_seed() {
        let a = generate_synthetic_corpus(100, 500, 50, 42).unwrap();
        let b = generate_synthetic_corpus(100, 500, 50, 42).unwrap();
        assert_eq!(a, b);
        let c = generate_synthetic_corpus(100, 500, 50, 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn lengths_average_to_mean() {
        let docs = generate_synthetic_corpus(200, 300, 40, 1).unwrap();
        let total: u32 = docs.iter().map(|d| d.dl()).sum();
        assert_eq!(total, 200 * 40);
        assert!(docs.iter().all(|d| d.dl() >= 1));
        assert!(docs.iter().any(|d| d.dl() != 40));

        let odd = generate_synthetic_corpus(3, 10, 1, 5).unwrap();
        assert!(odd.iter().all(|d| d.dl() == 1));
    }

    #[test]
    fn rejects_zero_parameters() {
        assert!(generate_synthetic_corpus(0, 1, 1, 0).is_err());
        assert!(generate_synthetic_corpus(1, 0, 1, 0).is_err());
        assert!(generate_synthetic_corpus(1, 1, 0, 0).is_err());
    }

    #[test]
    fn vocabulary_is_unique_and_survives_tokenizer() {
        let vocab = vocabulary(30_000);
        let unique: HashSet<_> = vocab.iter().collect();
        assert_eq!(unique.len(), vocab.len());
        let filter = TokenFilterConfig::default();
        for word in vocab.iter().step_by(97) {
            assert_eq!(tokenize(word, &filter), vec![word.clone()]);
        }
    }

    #[test]
    fn rank_one_is_most_frequent() {
        let docs = generate_synthetic_corpus(50, 100, 40, 3).unwrap();
        let vocab = vocabulary(100);
        let count = |w: &str| {
            docs.iter()
                .flat_map(|d| d.tokens())
                .filter(|t| *t == w)
                .count()
        };
        assert!(count(&vocab[0]) > count(&vocab[9]));
        assert!(count(&vocab[9]) > 0);
    }
}
