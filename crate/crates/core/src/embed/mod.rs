//! Skip-gram word embeddings with a hierarchical softmax output layer.

mod huffman;
pub mod hs;
mod io;
mod train;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use huffman::HuffmanTree;
pub use io::{load_model, read_model, save_model, write_model};
pub use train::{build_vocab, train};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainParams {
    pub dim: usize,
    pub window: usize,
    pub min_count: u64,
    pub learning_rate: f64,
    pub iterations: usize,
    /// Frequent-word subsampling threshold; 0 disables it.
    pub subsample_threshold: f64,
    pub seed: u64,
    /// Worker threads. More than one trains lock-free and is not reproducible.
    pub threads: usize,
    /// Always use the full window instead of sampling its size per position.
    pub static_window: bool,
}

impl Default for TrainParams {
    fn default() -> Self {
        TrainParams {
            dim: 300,
            window: 5,
            min_count: 25,
            learning_rate: 0.025,
            iterations: 1,
            subsample_threshold: 0.0,
            seed: 1,
            threads: 1,
            static_window: false,
        }
    }
}

impl TrainParams {
    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::invalid("dim must be at least 1"));
        }
        if self.window == 0 {
            return Err(Error::invalid("window must be at least 1"));
        }
        if !(self.learning_rate > 0.0) {
            return Err(Error::invalid("learning_rate must be positive"));
        }
        if self.iterations == 0 {
            return Err(Error::invalid("iterations must be at least 1"));
        }
        if self.subsample_threshold < 0.0 {
            return Err(Error::invalid("subsample_threshold must be non-negative"));
        }
        Ok(())
    }
}

/// Hierarchical-softmax output layer: Huffman codes plus inner-node vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct HsLayer {
    pub counts: Vec<u64>,
    pub tree: HuffmanTree,
    /// `(vocab_size - 1) × dim`, row-major.
    pub inner: Vec<f32>,
}

/// Word vectors, and the output layer when the model was trained in-process.
///
/// Models loaded from a file only carry the word vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingModel {
    words: Vec<String>,
    index: HashMap<String, usize>,
    dim: usize,
    input: Vec<f32>,
    output: Option<HsLayer>,
    params: Option<TrainParams>,
}

impl EmbeddingModel {
    /// Word vectors only. `input` is `words.len() × dim`, row-major.
    pub fn from_vectors(words: Vec<String>, dim: usize, input: Vec<f32>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("dim must be at least 1"));
        }
        if input.len() != words.len() * dim {
            return Err(Error::invalid("vector table does not match vocabulary size"));
        }
        if input.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("non-finite vector entry"));
        }
        let mut index = HashMap::with_capacity(words.len());
        for (i, w) in words.iter().enumerate() {
            if index.insert(w.clone(), i).is_some() {
                return Err(Error::invalid(format!("duplicate token '{w}'")));
            }
        }
        Ok(EmbeddingModel {
            words,
            index,
            dim,
            input,
            output: None,
            params: None,
        })
    }

    /// Full model including the output layer built from `counts`.
    pub fn with_output(
        words: Vec<String>,
        counts: Vec<u64>,
        dim: usize,
        input: Vec<f32>,
        inner: Vec<f32>,
    ) -> Result<Self> {
        if counts.len() != words.len() {
            return Err(Error::invalid("counts do not match vocabulary size"));
        }
        let tree = HuffmanTree::build(&counts)?;
        if inner.len() != tree.n_inner() * dim {
            return Err(Error::invalid("inner table does not match vocabulary size"));
        }
        let mut m = Self::from_vectors(words, dim, input)?;
        m.output = Some(HsLayer {
            counts,
            tree,
            inner,
        });
        Ok(m)
    }

    pub(crate) fn set_params(&mut self, params: TrainParams) {
        self.params = Some(params);
    }

    pub fn params(&self) -> Option<&TrainParams> {
        self.params.as_ref()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn index_of(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    pub fn contains(&self, token: &str) -> bool {
        self.index.contains_key(token)
    }

    pub fn vector_at(&self, idx: usize) -> &[f32] {
        &self.input[idx * self.dim..(idx + 1) * self.dim]
    }

    pub fn vector(&self, token: &str) -> Option<&[f32]> {
        self.index_of(token).map(|i| self.vector_at(i))
    }

    pub fn vectors(&self) -> &[f32] {
        &self.input
    }

    pub fn output(&self) -> Option<&HsLayer> {
        self.output.as_ref()
    }

    /// Probability of `target` given `center` under the hierarchical
    /// softmax: `Π_j σ(s_j · u_center · θ_j)` over the target's path, with
    /// `s_j = +1` for code bit 0 and `-1` for bit 1.
    pub fn hs_probability(&self, center: &str, target: &str) -> Result<f64> {
        let out = self
            .output
            .as_ref()
            .ok_or_else(|| Error::invalid("model has no output layer"))?;
        let c = self
            .index_of(center)
            .ok_or_else(|| Error::OutOfVocabulary(center.to_string()))?;
        let t = self
            .index_of(target)
            .ok_or_else(|| Error::OutOfVocabulary(target.to_string()))?;
        let u = self.vector_at(c);
        let mut p = 1.0f64;
        for (&node, &bit) in out.tree.path(t).iter().zip(out.tree.code(t)) {
            let row = &out.inner[node as usize * self.dim..(node as usize + 1) * self.dim];
            let f: f64 = u.iter().zip(row).map(|(&a, &b)| a as f64 * b as f64).sum();
            let s = if bit == 0 { 1.0 } else { -1.0 };
            p *= hs::sigmoid(s * f);
        }
        Ok(p)
    }
}
