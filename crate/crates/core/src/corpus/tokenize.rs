use std::collections::HashSet;

const DEFAULT_STOPWORDS: &str = include_str!("../../data/stopwords_en.txt");

/// Minimum token length (in characters) kept by the default filter.
pub const DEFAULT_MIN_LEN: usize = 3;

/// Which tokens count as "meaningful" words.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenFilterConfig {
    pub min_len: usize,
    pub stopwords: HashSet<String>,
}

impl TokenFilterConfig {
    /// A filter that only enforces `min_len`.
    pub fn without_stopwords(min_len: usize) -> Self {
        Self {
            min_len,
            stopwords: HashSet::new(),
        }
    }

    pub fn with_stopwords<I, S>(min_len: usize, stopwords: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        Self {
            min_len,
            stopwords: stopwords
                .into_iter()
                .map(|s| s.as_ref().to_lowercase())
                .collect(),
        }
    }

    pub fn is_stopword(&self, token: &str) -> bool {
        self.stopwords.contains(token)
    }
}

impl Default for TokenFilterConfig {
    fn default() -> Self {
        Self::with_stopwords(DEFAULT_MIN_LEN, default_stopwords())
    }
}

/// The shipped English stopword list.
pub fn default_stopwords() -> impl Iterator<Item = &'static str> {
    DEFAULT_STOPWORDS
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
}

/// Splits `text` on non-alphanumeric characters, lowercases, and drops
/// short tokens and stopwords. Token order follows the text.
pub fn tokenize(text: &str, filter: &TokenFilterConfig) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|raw| !raw.is_empty())
        .map(str::to_lowercase)
        .filter(|tok| tok.chars().count() >= filter.min_len && !filter.is_stopword(tok))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_yields_nothing() {
        assert!(tokenize("", &TokenFilterConfig::default()).is_empty());
    }

    #[test]
    fn case_folds_and_drops_stopwords() {
        let filter = TokenFilterConfig::with_stopwords(3, ["the"]);
        assert_eq!(
            tokenize("The rocket, the ROCKET!", &filter),
            vec!["rocket", "rocket"]
        );
    }

    #[test]
    fn default_filter_drops_the() {
        assert_eq!(
            tokenize("The rocket, the ROCKET!", &TokenFilterConfig::default()),
            vec!["rocket", "rocket"]
        );
    }

    #[test]
    fn counts_repeated_pairs() {
        let n = 37;
        let text = "alpha beta ".repeat(n);
        let tokens = tokenize(&text, &TokenFilterConfig::without_stopwords(3));
        assert_eq!(tokens.len(), 2 * n);
        assert_eq!(tokens[0], "alpha");
        assert_eq!(tokens[1], "beta");
    }

    #[test]
    fn min_len_counts_characters() {
        let filter = TokenFilterConfig::without_stopwords(3);
        assert_eq!(
            tokenize("ab abc ünï x1y", &filter),
            vec!["abc", "ünï", "x1y"]
        );
    }

    #[test]
    fn default_list_loaded() {
        let filter = TokenFilterConfig::default();
        assert!(filter.is_stopword("the"));
        assert!(filter.is_stopword("which"));
        assert!(!filter.is_stopword("rocket"));
        assert!(!filter.stopwords.iter().any(|w| w.starts_with('#')));
    }
}
