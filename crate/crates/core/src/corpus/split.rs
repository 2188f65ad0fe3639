use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::Document;
use crate::{Error, Result};

const HASH_SEED: u32 = 0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Partition {
    Train,
    Test,
}

/// Train/test membership of each document.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitAssignment {
    pub test_fraction: f64,
    pub seed: u64,
    assignment: HashMap<String, Partition>,
}

impl SplitAssignment {
    pub fn get(&self, doc_id: &str) -> Option<Partition> {
        self.assignment.get(doc_id).copied()
    }

    pub fn is_test(&self, doc_id: &str) -> bool {
        self.get(doc_id) == Some(Partition::Test)
    }

    pub fn is_train(&self, doc_id: &str) -> bool {
        self.get(doc_id) == Some(Partition::Train)
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    pub fn test_count(&self) -> usize {
        self.assignment.values().filter(|&&p| p == Partition::Test).count()
    }

    /// Deterministic membership for a single id.
    pub fn assign(doc_id: &str, seed: u64, test_fraction: f64) -> Partition {
        let mut bytes = Vec::with_capacity(doc_id.len() + 8);
        bytes.extend_from_slice(doc_id.as_bytes());
        bytes.extend_from_slice(&seed.to_le_bytes());
        let h = murmur3::murmur3_32(&mut &bytes[..], HASH_SEED).expect("in-memory read");
        let threshold = (test_fraction * 10_000.0).round() as u32;
        if h % 10_000 < threshold {
            Partition::Test
        } else {
            Partition::Train
        }
    }
}

/// Assigns each document to train or test from a hash of its id and the seed.
///
/// The 32-bit hash is MurmurHash3 (x86, seed 0) over the id bytes followed by
/// the seed as 8 little-endian bytes. A document is in the test set when
/// `hash % 10000 < test_fraction * 10000`.
pub fn split_train_test(docs: &[Document], test_fraction: f64, seed: u64) -> Result<SplitAssignment> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::invalid(format!(
            "test_fraction must be in (0, 1), got {test_fraction}"
        )));
    }
    let assignment = docs
        .iter()
        .map(|d| (d.id.clone(), SplitAssignment::assign(&d.id, seed, test_fraction)))
        .collect();
    Ok(SplitAssignment {
        test_fraction,
        seed,
        assignment,
    })
}

/// Journals with at least `min_pubs` documents and at least one document on
/// each side of the split. Returned sorted by journal id.
pub fn filter_journals(
    docs: &[Document],
    split: &SplitAssignment,
    min_pubs: usize,
) -> Result<BTreeSet<String>> {
    // (total, train, test)
    let mut per_journal: BTreeMap<&str, (usize, usize, usize)> = BTreeMap::new();
    for d in docs {
        let e = per_journal.entry(&d.journal_id).or_default();
        e.0 += 1;
        match split.get(&d.id) {
            Some(Partition::Train) => e.1 += 1,
            Some(Partition::Test) => e.2 += 1,
            None => {}
        }
    }
    let eligible: BTreeSet<String> = per_journal
        .into_iter()
        .filter(|(_, (total, train, test))| *total >= min_pubs && *train > 0 && *test > 0)
        .map(|(j, _)| j.to_string())
        .collect();
    if eligible.is_empty() {
        return Err(Error::NoEligibleJournals);
    }
    Ok(eligible)
}
