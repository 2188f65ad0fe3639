//! Content models for scientific articles.
//!
//! `emberank` compares hashed TFIDF document vectors against skip-gram word
//! embeddings composed into document vectors. It covers the whole pipeline:
//!
//! - [`corpus`]: JSONL ingestion, tokenize/stopword/stem pipeline, token
//!   statistics, deterministic train/test split, journal eligibility and a
//!   planted-topic synthetic corpus generator.
//! - [`tfidf`]: hashed term frequencies, IDF fitting and sparse/dense vectors.
//! - [`embed`]: skip-gram training with a Huffman-coded hierarchical softmax.
//! - [`wordsim`]: word-pair similarity evaluation with Spearman correlation.
//! - [`compose`]: the document composers (mean, TFIDF-weighted, frequency band).
//! - [`evalrank`]: journal-centroid ranking benchmark and its metrics.
//! - [`profile`]: memory accounting and all-pairs dot product timing.
//! - [`project`]: PCA followed by exact tSNE, and SVG scatter export.
//! - [`cli`]: the layered configuration and subcommands behind the binary.
//!
//! See the crate's `examples/` directory for one runnable program per area.

pub mod cli;
pub mod compose;
pub mod corpus;
pub mod embed;
mod error;
pub mod evalrank;
pub mod profile;
pub mod project;
pub mod tfidf;
pub mod wordsim;

pub use error::{Error, Result};

/// Dense vector type used for composed documents and centroids.
pub type DenseVector = Vec<f64>;

/// Which text field of a document a computation runs on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    Title,
    Abstract,
}

impl Field {
    pub fn as_str(self) -> &'static str {
        match self {
            Field::Title => "title",
            Field::Abstract => "abstract",
        }
    }
}

impl std::fmt::Display for Field {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.pad(self.as_str())
    }
}

impl std::str::FromStr for Field {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "title" => Ok(Field::Title),
            "abstract" => Ok(Field::Abstract),
            other => Err(Error::invalid(format!("unknown field '{other}'"))),
        }
    }
}
