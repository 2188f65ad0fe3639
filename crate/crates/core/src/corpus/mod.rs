//! Corpus ingestion and preprocessing.
//!
//! A corpus is a list of [`Document`]s stored as JSON Lines, one object per
//! line with the field names of [`Document`].

mod pipeline;
pub mod porter;
mod split;
mod stats;
mod synth;

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Field, Result};

pub use pipeline::{tokenize, PipelineConfig, Stemmer, TokenPattern, DEFAULT_STOPWORDS};
pub use split::{filter_journals, split_train_test, Partition, SplitAssignment};
pub use stats::{pareto_slope, token_stats, FieldSelection, TokenCounts, TokenStats};
pub use synth::{generate_synthetic, SynthSpec};

/// One article record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub title: String,
    #[serde(rename = "abstract")]
    pub abstract_text: String,
    pub journal_id: String,
    pub journal_name: String,
    pub publisher: String,
    pub year: i32,
}

impl Document {
    pub fn field(&self, field: Field) -> &str {
        match field {
            Field::Title => &self.title,
            Field::Abstract => &self.abstract_text,
        }
    }
}

/// Checks the corpus invariants: non-empty unique ids and non-empty journal ids.
pub fn validate(docs: &[Document]) -> Result<()> {
    let mut seen = HashSet::with_capacity(docs.len());
    for (i, doc) in docs.iter().enumerate() {
        if doc.id.is_empty() {
            return Err(Error::invalid(format!("document {} has an empty id", i + 1)));
        }
        if doc.journal_id.is_empty() {
            return Err(Error::invalid(format!("document '{}' has an empty journal_id", doc.id)));
        }
        if !seen.insert(doc.id.as_str()) {
            return Err(Error::invalid(format!("duplicate document id '{}'", doc.id)));
        }
    }
    Ok(())
}

/// Parses JSON Lines from a reader. Blank lines are skipped.
pub fn read_jsonl<R: BufRead>(reader: R) -> Result<Vec<Document>> {
    let mut docs = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let doc: Document =
            serde_json::from_str(&line).map_err(|e| Error::parse(i + 1, e.to_string()))?;
        docs.push(doc);
    }
    validate(&docs)?;
    Ok(docs)
}

pub fn load_corpus(path: impl AsRef<Path>) -> Result<Vec<Document>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::file(path, e))?;
    read_jsonl(BufReader::new(file))
}

pub fn write_jsonl<W: Write>(docs: &[Document], mut writer: W) -> Result<()> {
    for doc in docs {
        serde_json::to_writer(&mut writer, doc)?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}

pub fn save_corpus(docs: &[Document], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::file(path, e))?;
    let mut w = BufWriter::new(file);
    write_jsonl(docs, &mut w)?;
    w.flush()?;
    Ok(())
}

/// Keeps only documents published in `year`.
pub fn filter_year(docs: Vec<Document>, year: i32) -> Vec<Document> {
    docs.into_iter().filter(|d| d.year == year).collect()
}
