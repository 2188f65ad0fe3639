use std::collections::{HashMap, HashSet};
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{tokenize, Document, PipelineConfig};
use crate::{Error, Field, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldSelection {
    Title,
    Abstract,
    Both,
}

impl FieldSelection {
    pub fn fields(self) -> &'static [Field] {
        match self {
            FieldSelection::Title => &[Field::Title],
            FieldSelection::Abstract => &[Field::Abstract],
            FieldSelection::Both => &[Field::Title, Field::Abstract],
        }
    }
}

impl From<Field> for FieldSelection {
    fn from(f: Field) -> Self {
        match f {
            Field::Title => FieldSelection::Title,
            Field::Abstract => FieldSelection::Abstract,
        }
    }
}

impl std::str::FromStr for FieldSelection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "title" => Ok(FieldSelection::Title),
            "abstract" => Ok(FieldSelection::Abstract),
            "both" => Ok(FieldSelection::Both),
            other => Err(Error::invalid(format!("unknown field '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TokenCounts {
    pub corpus_frequency: u64,
    pub document_frequency: u64,
}

/// Token frequencies over a set of documents, with a frequency ranking.
///
/// Rank 0 is the most frequent token; ties are broken lexicographically.
#[derive(Debug, Clone, PartialEq)]
pub struct TokenStats {
    counts: HashMap<String, TokenCounts>,
    ranking: Vec<String>,
    rank_of: HashMap<String, usize>,
    total_tokens: u64,
}

impl TokenStats {
    /// Builds statistics from already tokenized documents.
    pub fn from_token_docs<'a, I, D>(docs: I) -> Self
    where
        I: IntoIterator<Item = D>,
        D: IntoIterator<Item = &'a str>,
    {
        let mut counts: HashMap<String, TokenCounts> = HashMap::new();
        let mut total = 0u64;
        let mut seen = HashSet::new();
        for doc in docs {
            seen.clear();
            for tok in doc {
                total += 1;
                let entry = counts.entry(tok.to_string()).or_default();
                entry.corpus_frequency += 1;
                if seen.insert(tok) {
                    entry.document_frequency += 1;
                }
            }
        }
        let mut ranking: Vec<String> = counts.keys().cloned().collect();
        ranking.sort_unstable_by(|a, b| {
            counts[b]
                .corpus_frequency
                .cmp(&counts[a].corpus_frequency)
                .then_with(|| a.cmp(b))
        });
        let rank_of = ranking
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        TokenStats {
            counts,
            ranking,
            rank_of,
            total_tokens: total,
        }
    }

    pub fn total_tokens(&self) -> u64 {
        self.total_tokens
    }

    pub fn unique_tokens(&self) -> usize {
        self.ranking.len()
    }

    pub fn get(&self, token: &str) -> Option<TokenCounts> {
        self.counts.get(token).copied()
    }

    /// 0-based frequency rank of `token`.
    pub fn rank(&self, token: &str) -> Option<usize> {
        self.rank_of.get(token).copied()
    }

    /// Tokens ordered from most to least frequent.
    pub fn ranking(&self) -> &[String] {
        &self.ranking
    }

    /// True when `token` is among the `vocab_size` most frequent tokens.
    /// A `vocab_size` of 0 keeps every token, including unseen ones.
    pub fn in_top(&self, token: &str, vocab_size: usize) -> bool {
        vocab_size == 0 || self.rank(token).is_some_and(|r| r < vocab_size)
    }

    /// `(rank, frequency)` pairs with rank starting at 1.
    pub fn rank_frequency(&self) -> Vec<(usize, u64)> {
        self.ranking
            .iter()
            .enumerate()
            .map(|(i, t)| (i + 1, self.counts[t].corpus_frequency))
            .collect()
    }

    /// CSV export: `rank,token,corpus_frequency,document_frequency`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "rank,token,corpus_frequency,document_frequency")?;
        for (i, tok) in self.ranking.iter().enumerate() {
            let c = self.counts[tok];
            writeln!(w, "{},{},{},{}", i + 1, tok, c.corpus_frequency, c.document_frequency)?;
        }
        Ok(())
    }
}

/// Tokenizes the selected field(s) of every document and counts tokens.
///
/// With [`FieldSelection::Both`] a document's title and abstract count as one
/// document for document frequency.
pub fn token_stats(
    docs: &[Document],
    fields: FieldSelection,
    config: &PipelineConfig,
) -> Result<TokenStats> {
    if docs.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let tokenized: Vec<Vec<String>> = docs
        .iter()
        .map(|d| {
            fields
                .fields()
                .iter()
                .flat_map(|&f| tokenize(d.field(f), config))
                .collect()
        })
        .collect();
    Ok(TokenStats::from_token_docs(
        tokenized.iter().map(|d| d.iter().map(String::as_str)),
    ))
}

/// Least-squares slope of `ln(frequency)` against `ln(rank)`.
pub fn pareto_slope(stats: &TokenStats) -> Option<f64> {
    let pts: Vec<(f64, f64)> = stats
        .rank_frequency()
        .into_iter()
        .map(|(r, f)| ((r as f64).ln(), (f as f64).ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Some(sxy / sxx)
}
