//! Word-pair similarity evaluation.
//!
//! Pair files are TSV: `word_a<TAB>word_b<TAB>score`, `#` lines ignored.
//! Words go through the same pipeline as training text, so a generic set
//! will disagree with a domain corpus on pairs whose sense shifts (a
//! scientific corpus rarely relates "show" to "television").

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::Serialize;

use crate::corpus::{tokenize, PipelineConfig};
use crate::embed::EmbeddingModel;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct WordPair {
    pub a: String,
    pub b: String,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WordPairSet {
    pub name: String,
    pub pairs: Vec<WordPair>,
}

impl WordPairSet {
    /// Builds a set, keeping the first occurrence of each unordered pair.
    pub fn new(name: impl Into<String>, pairs: impl IntoIterator<Item = WordPair>) -> Result<Self> {
        let mut seen = HashSet::new();
        let mut kept = Vec::new();
        for p in pairs {
            if !p.score.is_finite() {
                return Err(Error::invalid(format!("non-finite score for {}/{}", p.a, p.b)));
            }
            let key = if p.a <= p.b {
                (p.a.clone(), p.b.clone())
            } else {
                (p.b.clone(), p.a.clone())
            };
            if seen.insert(key) {
                kept.push(p);
            } else {
                log::warn!("duplicate pair {}/{} ignored", p.a, p.b);
            }
        }
        Ok(WordPairSet {
            name: name.into(),
            pairs: kept,
        })
    }

    pub fn read<R: BufRead>(name: impl Into<String>, r: R) -> Result<Self> {
        let mut pairs = Vec::new();
        for (i, line) in r.lines().enumerate() {
            let line = line?;
            let t = line.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = t.split('\t').collect();
            if cols.len() < 3 {
                return Err(Error::parse(i + 1, "expected word_a<TAB>word_b<TAB>score"));
            }
            let score: f64 = cols[2]
                .trim()
                .parse()
                .map_err(|_| Error::parse(i + 1, format!("bad score '{}'", cols[2])))?;
            pairs.push(WordPair {
                a: cols[0].trim().to_string(),
                b: cols[1].trim().to_string(),
                score,
            });
        }
        Self::new(name, pairs)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::file(path, e))?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        Self::read(name, BufReader::new(file))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WordSimReport {
    pub name: String,
    pub spearman_rho: f64,
    pub pairs_total: usize,
    pub pairs_covered: usize,
    pub coverage_ratio: f64,
}

/// Per-set reports plus the mean rho across sets.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WordSimSummary {
    pub sets: Vec<WordSimReport>,
    pub mean_rho: f64,
}

pub fn cosine(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let (mut ab, mut aa, mut bb) = (0.0, 0.0, 0.0);
    for (&x, &y) in a.iter().zip(b) {
        ab += x * y;
        aa += x * x;
        bb += y * y;
    }
    if aa == 0.0 || bb == 0.0 {
        return Err(Error::UndefinedCosine);
    }
    Ok((ab / (aa.sqrt() * bb.sqrt())).clamp(-1.0, 1.0))
}

/// Fractional ranks starting at 1; tied values share their average rank.
pub fn fractional_ranks(xs: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut ranks = vec![0.0; xs.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && xs[order[j + 1]] == xs[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman's rho: Pearson correlation of fractional ranks.
pub fn spearman(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::DimensionMismatch {
            left: xs.len(),
            right: ys.len(),
        });
    }
    if xs.len() < 2 {
        return Err(Error::invalid("spearman needs at least 2 observations"));
    }
    let rx = fractional_ranks(xs);
    let ry = fractional_ranks(ys);
    let n = rx.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in rx.iter().zip(&ry) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx).powi(2);
        syy += (y - my).powi(2);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::invalid("constant input has no rank variance"));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

fn normalize<'a>(word: &str, config: &PipelineConfig, model: &'a EmbeddingModel) -> Option<&'a [f32]> {
    let toks = tokenize(word, config);
    match toks.as_slice() {
        [t] => model.vector(t),
        _ => None,
    }
}

/// Spearman correlation between model cosines and human scores.
///
/// Pairs with an out-of-vocabulary word (or a zero vector) are skipped and
/// reported through the coverage fields.
pub fn evaluate_word_pairs(
    model: &EmbeddingModel,
    set: &WordPairSet,
    config: &PipelineConfig,
) -> Result<WordSimReport> {
    let mut sims = Vec::new();
    let mut human = Vec::new();
    for p in &set.pairs {
        let (Some(a), Some(b)) = (normalize(&p.a, config, model), normalize(&p.b, config, model)) else {
            continue;
        };
        let a: Vec<f64> = a.iter().map(|&x| x as f64).collect();
        let b: Vec<f64> = b.iter().map(|&x| x as f64).collect();
        if let Ok(c) = cosine(&a, &b) {
            sims.push(c);
            human.push(p.score);
        }
    }
    let total = set.pairs.len();
    if sims.len() < 2 {
        return Err(Error::InsufficientCoverage {
            covered: sims.len(),
            total,
        });
    }
    Ok(WordSimReport {
        name: set.name.clone(),
        spearman_rho: spearman(&sims, &human)?,
        pairs_total: total,
        pairs_covered: sims.len(),
        coverage_ratio: sims.len() as f64 / total as f64,
    })
}

pub fn summarize(reports: Vec<WordSimReport>) -> WordSimSummary {
    let mean_rho = if reports.is_empty() {
        f64::NAN
    } else {
        reports.iter().map(|r| r.spearman_rho).sum::<f64>() / reports.len() as f64
    };
    WordSimSummary {
        sets: reports,
        mean_rho,
    }
}
