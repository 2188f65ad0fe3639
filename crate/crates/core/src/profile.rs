//! Memory accounting and all-pairs dot-product timing for document vectors.
//!
//! Memory is analytic: a dense vector costs `dim · 4` bytes (f32 storage),
//! a sparse one `nnz · (4 + 4)` bytes (u32 index + f32 value), and every
//! stored vector adds [`PER_VECTOR_OVERHEAD`]. Null records store nothing.
//!
//! Timing runs on the calling thread only.

use std::fmt;
use std::hint::black_box;
use std::str::FromStr;
use std::time::Instant;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::compose::{DocRepr, DocVector};
use crate::tfidf::{dense_dot_unchecked, sparse_dot_unchecked, SparseVector};
use crate::{Error, Result};

/// Bytes charged per stored vector: a length word plus a pointer.
pub const PER_VECTOR_OVERHEAD: u64 = 16;
pub const DENSE_BYTES_PER_ELEMENT: u64 = 4;
pub const SPARSE_BYTES_PER_ENTRY: u64 = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Representation {
    Sparse,
    Dense,
}

impl fmt::Display for Representation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            Representation::Sparse => "sparse",
            Representation::Dense => "dense",
        })
    }
}

impl FromStr for Representation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sparse" => Ok(Representation::Sparse),
            "dense" => Ok(Representation::Dense),
            _ => Err(Error::invalid(format!("unknown representation '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemoryReport {
    pub model_label: String,
    pub representation: Representation,
    pub n_vectors: usize,
    pub total_bytes: u64,
    pub bytes_per_vector_avg: f64,
    pub assumptions: String,
}

pub fn vector_bytes(v: &DocRepr, representation: Representation) -> u64 {
    PER_VECTOR_OVERHEAD
        + match representation {
            Representation::Dense => v.dim() as u64 * DENSE_BYTES_PER_ELEMENT,
            Representation::Sparse => v.nnz() as u64 * SPARSE_BYTES_PER_ENTRY,
        }
}

/// Analytic footprint of the non-null vectors under `representation`.
pub fn memory_footprint(
    model_label: &str,
    vectors: &[DocVector],
    representation: Representation,
) -> MemoryReport {
    let stored: Vec<&DocRepr> = vectors.iter().filter_map(|v| v.vector.as_ref()).collect();
    let total_bytes = stored.iter().map(|v| vector_bytes(v, representation)).sum();
    MemoryReport {
        model_label: model_label.to_string(),
        representation,
        n_vectors: stored.len(),
        total_bytes,
        bytes_per_vector_avg: if stored.is_empty() {
            0.0
        } else {
            total_bytes as f64 / stored.len() as f64
        },
        assumptions: format!(
            "dense {DENSE_BYTES_PER_ELEMENT} B/element, sparse {SPARSE_BYTES_PER_ENTRY} B/nonzero, \
             {PER_VECTOR_OVERHEAD} B/vector overhead, null records 0 B"
        ),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingReport {
    pub model_label: String,
    pub representation: Representation,
    pub n_docs_sampled: usize,
    pub n_products: usize,
    pub wall_seconds: f64,
    pub ratio_vs_baseline: f64,
}

/// Vectors materialized in one representation, ready for timing.
#[derive(Debug, Clone)]
pub enum Materialized {
    Dense(Vec<Vec<f64>>),
    Sparse(Vec<SparseVector>),
}

impl Materialized {
    pub fn new(vectors: &[&DocRepr], representation: Representation) -> Self {
        match representation {
            Representation::Dense => Materialized::Dense(vectors.iter().map(|v| v.to_dense()).collect()),
            Representation::Sparse => Materialized::Sparse(vectors.iter().map(|v| v.to_sparse()).collect()),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Materialized::Dense(v) => v.len(),
            Materialized::Sparse(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Row-major `n × n` dot products into `out`.
    pub fn all_pairs_into(&self, out: &mut [f64]) {
        let n = self.len();
        assert_eq!(out.len(), n * n);
        match self {
            Materialized::Dense(vs) => {
                for (i, a) in vs.iter().enumerate() {
                    for (j, b) in vs.iter().enumerate() {
                        out[i * n + j] = dense_dot_unchecked(a, b);
                    }
                }
            }
            Materialized::Sparse(vs) => {
                for (i, a) in vs.iter().enumerate() {
                    for (j, b) in vs.iter().enumerate() {
                        out[i * n + j] = sparse_dot_unchecked(a, b);
                    }
                }
            }
        }
    }

    pub fn all_pairs(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.len() * self.len()];
        self.all_pairs_into(&mut out);
        out
    }
}

/// Draws `n_sample` non-null vectors without replacement, in draw order.
pub fn sample_vectors(vectors: &[DocVector], n_sample: usize, seed: u64) -> Result<Vec<&DocRepr>> {
    let stored: Vec<&DocRepr> = vectors.iter().filter_map(|v| v.vector.as_ref()).collect();
    if stored.len() < n_sample || n_sample == 0 {
        return Err(Error::invalid(format!(
            "need {n_sample} non-null vectors for timing, have {}",
            stored.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(sample(&mut rng, stored.len(), n_sample)
        .into_iter()
        .map(|i| stored[i])
        .collect())
}

/// Times `n_sample²` dot products: one warm-up pass, then the minimum over
/// `repetitions` timed passes. `ratio_vs_baseline` is left at 1.
pub fn time_all_pairs(
    model_label: &str,
    vectors: &[DocVector],
    representation: Representation,
    n_sample: usize,
    seed: u64,
    repetitions: usize,
) -> Result<TimingReport> {
    let sampled = sample_vectors(vectors, n_sample, seed)?;
    let data = Materialized::new(&sampled, representation);
    let mut out = vec![0.0; n_sample * n_sample];
    data.all_pairs_into(&mut out);
    black_box(&out);
    let mut best = f64::INFINITY;
    for _ in 0..repetitions.max(1) {
        let start = Instant::now();
        data.all_pairs_into(black_box(&mut out));
        black_box(&out);
        best = best.min(start.elapsed().as_secs_f64());
    }
    Ok(TimingReport {
        model_label: model_label.to_string(),
        representation,
        n_docs_sampled: n_sample,
        n_products: n_sample * n_sample,
        wall_seconds: best.max(f64::MIN_POSITIVE),
        ratio_vs_baseline: 1.0,
    })
}

/// Sets every report's ratio against the one labelled `baseline`.
pub fn apply_baseline(reports: &mut [TimingReport], baseline: &str) -> Result<()> {
    let base = reports
        .iter()
        .find(|r| r.model_label == baseline)
        .map(|r| r.wall_seconds)
        .ok_or_else(|| Error::invalid(format!("no timing report labelled '{baseline}'")))?;
    for r in reports {
        r.ratio_vs_baseline = r.wall_seconds / base;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Field;

    fn dv(v: Option<DocRepr>) -> DocVector {
        DocVector {
            doc_id: "d".into(),
            field: Field::Abstract,
            surviving_tokens: usize::from(v.is_some()),
            vector: v,
        }
    }

    #[test]
    fn dense_arithmetic() {
        let vs: Vec<_> = (0..1000).map(|_| dv(Some(DocRepr::Dense(vec![1.0; 300])))).collect();
        let m = memory_footprint("emb", &vs, Representation::Dense);
        assert_eq!(m.total_bytes, 1000 * 1200 + 1000 * PER_VECTOR_OVERHEAD);
        assert_eq!(m.n_vectors, 1000);
    }

    #[test]
    fn sparse_and_null() {
        let empty = DocRepr::Sparse(SparseVector::empty(10));
        let two = DocRepr::Sparse(SparseVector::from_pairs(10, vec![(1, 1.0), (4, 2.0)]));
        let vs = vec![dv(Some(empty)), dv(Some(two)), dv(None)];
        let m = memory_footprint("t", &vs, Representation::Sparse);
        assert_eq!(m.n_vectors, 2);
        assert_eq!(m.total_bytes, 2 * PER_VECTOR_OVERHEAD + 16);
        let d = memory_footprint("t", &vs, Representation::Dense);
        assert_eq!(d.total_bytes, 2 * (PER_VECTOR_OVERHEAD + 40));
    }

    #[test]
    fn representations_agree() {
        let vs: Vec<_> = (0..20u32)
            .map(|k| {
                let pairs = (0..5).map(|i| ((k * 7 + i * 13) % 50, (k + i) as f64 * 0.25 + 0.1)).collect();
                dv(Some(DocRepr::Sparse(SparseVector::from_pairs(50, pairs))))
            })
            .collect();
        let s = sample_vectors(&vs, 10, 3).unwrap();
        let a = Materialized::new(&s, Representation::Sparse).all_pairs();
        let b = Materialized::new(&s, Representation::Dense).all_pairs();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() <= 1e-9 * x.abs().max(1.0));
        }
        assert!(sample_vectors(&vs, 21, 3).is_err());
    }

    #[test]
    fn baseline_ratio() {
        let vs: Vec<_> = (0..4).map(|i| dv(Some(DocRepr::Dense(vec![i as f64; 8])))).collect();
        let mut rs = vec![
            time_all_pairs("emb", &vs, Representation::Dense, 4, 1, 3).unwrap(),
            time_all_pairs("other", &vs, Representation::Sparse, 4, 1, 3).unwrap(),
        ];
        assert_eq!(rs[0].n_products, 16);
        apply_baseline(&mut rs, "emb").unwrap();
        assert_eq!(rs[0].ratio_vs_baseline, 1.0);
        assert!(rs[0].wall_seconds > 0.0);
        assert!(apply_baseline(&mut rs, "none").is_err());
    }
}
