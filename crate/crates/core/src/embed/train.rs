use std::collections::HashMap;
use std::sync::atomic::{AtomicU32, AtomicU64, Ordering};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::hs::{sgd_step, InnerRows, SliceRows};
use super::{EmbeddingModel, HuffmanTree, TrainParams};
use crate::{Error, Result};

const MIN_LR_FRACTION: f64 = 1e-4;

/// Tokens with at least `min_count` occurrences, most frequent first
/// (ties lexicographic), with their counts.
pub fn build_vocab<S: AsRef<str>>(sentences: &[Vec<S>], min_count: u64) -> (Vec<String>, Vec<u64>) {
    let mut counts: HashMap<&str, u64> = HashMap::new();
    for s in sentences {
        for t in s {
            *counts.entry(t.as_ref()).or_default() += 1;
        }
    }
    let mut kept: Vec<(&str, u64)> = counts.into_iter().filter(|&(_, c)| c >= min_count).collect();
    kept.sort_unstable_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    kept.into_iter().map(|(w, c)| (w.to_string(), c)).unzip()
}

struct Schedule {
    lr0: f64,
    total: f64,
}

impl Schedule {
    /// Linear decay from `lr0` to `lr0 * 1e-4` over all training tokens.
    fn lr(&self, processed: u64) -> f32 {
        let frac = (processed as f64 / self.total).min(1.0);
        (self.lr0 * (1.0 - (1.0 - MIN_LR_FRACTION) * frac)) as f32
    }
}

struct Corpus<'a> {
    sentences: Vec<Vec<u32>>,
    tree: &'a HuffmanTree,
    keep_prob: Vec<f32>,
}

impl Corpus<'_> {
    fn subsample(&self, sentence: &[u32], rng: &mut ChaCha8Rng, out: &mut Vec<u32>) {
        out.clear();
        for &w in sentence {
            let p = self.keep_prob[w as usize];
            if p >= 1.0 || rng.gen::<f32>() < p {
                out.push(w);
            }
        }
    }
}

/// Trains skip-gram vectors with hierarchical softmax.
///
/// Each sentence is one record field; windows never cross sentences. For
/// every position a window radius is drawn uniformly from `1..=window`
/// (or fixed at `window` with `static_window`), and each (center, context)
/// pair takes one SGD step on `-ln p(context | center)`.
///
/// With `threads == 1` the result is a pure function of the input and
/// `seed`. With more threads, workers update shared tables without locks.
pub fn train<S: AsRef<str>>(sentences: &[Vec<S>], params: &TrainParams) -> Result<EmbeddingModel> {
    params.validate()?;
    let (words, counts) = build_vocab(sentences, params.min_count);
    if words.is_empty() {
        return Err(Error::VocabularyEmpty);
    }
    if words.len() < 2 {
        return Err(Error::invalid("vocabulary needs at least 2 words"));
    }
    let tree = HuffmanTree::build(&counts)?;
    let index: HashMap<&str, u32> = words.iter().enumerate().map(|(i, w)| (w.as_str(), i as u32)).collect();
    let encoded: Vec<Vec<u32>> = sentences
        .iter()
        .map(|s| s.iter().filter_map(|t| index.get(t.as_ref()).copied()).collect())
        .filter(|s: &Vec<u32>| s.len() > 1)
        .collect();
    let train_words: u64 = encoded.iter().map(|s| s.len() as u64).sum();
    let total_count: u64 = counts.iter().sum();
    let keep_prob = counts
        .iter()
        .map(|&c| {
            if params.subsample_threshold > 0.0 {
                let t = params.subsample_threshold * total_count as f64;
                (((c as f64 / t).sqrt() + 1.0) * t / c as f64) as f32
            } else {
                1.0
            }
        })
        .collect();
    let corpus = Corpus {
        sentences: encoded,
        tree: &tree,
        keep_prob,
    };
    let schedule = Schedule {
        lr0: params.learning_rate,
        total: (train_words * params.iterations as u64).max(1) as f64,
    };

    let dim = params.dim;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let scale = 0.5 / dim as f32;
    let mut input: Vec<f32> = (0..words.len() * dim).map(|_| rng.gen_range(-scale..scale)).collect();
    let mut inner = vec![0.0f32; tree.n_inner() * dim];

    if params.threads <= 1 {
        train_serial(&corpus, params, &schedule, &mut rng, &mut input, &mut inner);
    } else {
        train_hogwild(&corpus, params, &schedule, &mut input, &mut inner);
    }

    if input.iter().chain(&inner).any(|v| !v.is_finite()) {
        return Err(Error::invalid("training diverged: non-finite parameters"));
    }
    let mut model = EmbeddingModel::with_output(words, counts, dim, input, inner)?;
    model.set_params(params.clone());
    Ok(model)
}

fn radius(params: &TrainParams, rng: &mut ChaCha8Rng) -> usize {
    if params.static_window {
        params.window
    } else {
        rng.gen_range(1..=params.window)
    }
}

fn train_serial(
    corpus: &Corpus,
    params: &TrainParams,
    schedule: &Schedule,
    rng: &mut ChaCha8Rng,
    input: &mut [f32],
    inner: &mut [f32],
) {
    let dim = params.dim;
    let mut work = vec![0.0f32; dim];
    let mut sentence = Vec::new();
    let mut processed = 0u64;
    let mut rows = SliceRows { data: inner, dim };
    for _ in 0..params.iterations {
        for raw in &corpus.sentences {
            corpus.subsample(raw, rng, &mut sentence);
            for pos in 0..sentence.len() {
                let lr = schedule.lr(processed);
                processed += 1;
                let b = radius(params, rng);
                let center = sentence[pos] as usize;
                let lo = pos.saturating_sub(b);
                let hi = (pos + b).min(sentence.len() - 1);
                for ctx in lo..=hi {
                    if ctx == pos {
                        continue;
                    }
                    let target = sentence[ctx] as usize;
                    let u = &mut input[center * dim..(center + 1) * dim];
                    sgd_step(u, &mut rows, corpus.tree.path(target), corpus.tree.code(target), lr, &mut work);
                }
            }
            // Keep the schedule aligned with unsubsampled token counts.
            processed += (raw.len() - sentence.len()) as u64;
        }
    }
}

/// f32 table stored as bits in relaxed atomics, shared by all workers.
struct AtomicTable {
    data: Vec<AtomicU32>,
}

impl AtomicTable {
    fn from_slice(v: &[f32]) -> Self {
        AtomicTable {
            data: v.iter().map(|x| AtomicU32::new(x.to_bits())).collect(),
        }
    }

    fn load_row(&self, start: usize, out: &mut [f32]) {
        let end = start + out.len();
        for (o, a) in out.iter_mut().zip(&self.data[start..end]) {
            *o = f32::from_bits(a.load(Ordering::Relaxed));
        }
    }

    fn store_row(&self, start: usize, vals: &[f32]) {
        for (v, a) in vals.iter().zip(&self.data[start..start + vals.len()]) {
            a.store(v.to_bits(), Ordering::Relaxed);
        }
    }

    fn copy_into(&self, out: &mut [f32]) {
        self.load_row(0, out);
    }
}

struct AtomicRows<'a> {
    table: &'a AtomicTable,
    dim: usize,
    buf: Vec<f32>,
}

impl InnerRows<f32> for AtomicRows<'_> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn with_row<R>(&mut self, node: usize, f: impl FnOnce(&mut [f32]) -> R) -> R {
        let start = node * self.dim;
        self.table.load_row(start, &mut self.buf);
        let r = f(&mut self.buf);
        self.table.store_row(start, &self.buf);
        r
    }
}

fn train_hogwild(
    corpus: &Corpus,
    params: &TrainParams,
    schedule: &Schedule,
    input: &mut [f32],
    inner: &mut [f32],
) {
    let dim = params.dim;
    let shared_in = AtomicTable::from_slice(input);
    let shared_inner = AtomicTable::from_slice(inner);
    let processed = AtomicU64::new(0);
    let n_workers = params.threads.min(corpus.sentences.len()).max(1);
    let chunk = corpus.sentences.len().div_ceil(n_workers);

    std::thread::scope(|scope| {
        for (worker, part) in corpus.sentences.chunks(chunk.max(1)).enumerate() {
            let (shared_in, shared_inner, processed) = (&shared_in, &shared_inner, &processed);
            scope.spawn(move || {
                let mut rng = ChaCha8Rng::seed_from_u64(params.seed.wrapping_add(worker as u64 + 1));
                let mut rows = AtomicRows {
                    table: shared_inner,
                    dim,
                    buf: vec![0.0; dim],
                };
                let mut u = vec![0.0f32; dim];
                let mut work = vec![0.0f32; dim];
                let mut sentence = Vec::new();
                for _ in 0..params.iterations {
                    for raw in part {
                        corpus.subsample(raw, &mut rng, &mut sentence);
                        let base = processed.fetch_add(raw.len() as u64, Ordering::Relaxed);
                        for pos in 0..sentence.len() {
                            let lr = schedule.lr(base + pos as u64);
                            let b = radius(params, &mut rng);
                            let center = sentence[pos] as usize;
                            let lo = pos.saturating_sub(b);
                            let hi = (pos + b).min(sentence.len() - 1);
                            for ctx in lo..=hi {
                                if ctx == pos {
                                    continue;
                                }
                                let target = sentence[ctx] as usize;
                                shared_in.load_row(center * dim, &mut u);
                                sgd_step(&mut u, &mut rows, corpus.tree.path(target), corpus.tree.code(target), lr, &mut work);
                                shared_in.store_row(center * dim, &u);
                            }
                        }
                    }
                }
            });
        }
    });
    shared_in.copy_into(input);
    shared_inner.copy_into(inner);
}
