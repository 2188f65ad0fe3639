use std::collections::HashSet;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// The shipped English stopword list (version 1), one token per line.
pub const DEFAULT_STOPWORDS: &str = include_str!("../../data/stopwords_en_v1.txt");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stemmer {
    None,
    #[default]
    Porter,
}

/// Token boundaries: any non-alphanumeric character splits; shorter tokens are dropped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenPattern {
    pub min_len: usize,
}

impl Default for TokenPattern {
    fn default() -> Self {
        TokenPattern { min_len: 2 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub lowercase: bool,
    pub stopwords: HashSet<String>,
    pub stemmer: Stemmer,
    pub token_pattern: TokenPattern,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            lowercase: true,
            stopwords: parse_stopwords(DEFAULT_STOPWORDS),
            stemmer: Stemmer::Porter,
            token_pattern: TokenPattern::default(),
        }
    }
}

impl PipelineConfig {
    /// Lowercasing only: no stopwords, no stemming.
    pub fn identity() -> Self {
        PipelineConfig {
            lowercase: true,
            stopwords: HashSet::new(),
            stemmer: Stemmer::None,
            token_pattern: TokenPattern::default(),
        }
    }

    pub fn with_stopwords<I, S>(mut self, words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.stopwords = words.into_iter().map(Into::into).collect();
        self
    }

    pub fn with_stemmer(mut self, stemmer: Stemmer) -> Self {
        self.stemmer = stemmer;
        self
    }

    pub fn load_stopwords(mut self, path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::file(path, e))?;
        self.stopwords = parse_stopwords(&text);
        Ok(self)
    }
}

fn parse_stopwords(text: &str) -> HashSet<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(str::to_lowercase)
        .collect()
}

/// Splits `text` into tokens, then removes stopwords, then stems.
pub fn tokenize(text: &str, config: &PipelineConfig) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|raw| raw.chars().count() >= config.token_pattern.min_len)
        .map(|raw| {
            if config.lowercase {
                raw.to_lowercase()
            } else {
                raw.to_string()
            }
        })
        .filter(|tok| !config.stopwords.contains(tok))
        .map(|tok| match config.stemmer {
            Stemmer::None => tok,
            Stemmer::Porter => super::porter::stem(&tok),
        })
        .collect()
}
