mod common;

use std::collections::{BTreeMap, HashMap};
use std::io::Cursor;

use emberank::compose::{compose, ComposeModels, ComposerSpec, DocRepr};
use emberank::corpus::{generate_synthetic, tokenize, PipelineConfig};
use emberank::tfidf::{read_model, write_model, TfidfConfig};
use emberank::Field;

fn bucket(token: &str, b: usize) -> u32 {
    murmur3::murmur3_32(&mut Cursor::new(token.as_bytes()), 42).unwrap() % b as u32
}

/// Counts, cuts, hashes and weights everything from scratch.
fn oracle(docs: &[Vec<String>], vocab: usize, buckets: usize) -> Vec<BTreeMap<u32, f64>> {
    let mut freq: HashMap<&str, u64> = HashMap::new();
    for d in docs {
        for t in d {
            *freq.entry(t).or_default() += 1;
        }
    }
    let mut ranked: Vec<(&str, u64)> = freq.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
    let keep: std::collections::HashSet<&str> = ranked
        .iter()
        .take(if vocab == 0 { usize::MAX } else { vocab })
        .map(|(t, _)| *t)
        .collect();
    let tfs: Vec<BTreeMap<u32, f64>> = docs
        .iter()
        .map(|d| {
            let mut tf = BTreeMap::new();
            for t in d.iter().filter(|t| keep.contains(t.as_str())) {
                *tf.entry(bucket(t, buckets)).or_insert(0.0) += 1.0;
            }
            tf
        })
        .collect();
    let mut df = vec![0u64; buckets];
    for tf in &tfs {
        for b in tf.keys() {
            df[*b as usize] += 1;
        }
    }
    let n = docs.len() as f64;
    tfs.into_iter()
        .map(|tf| {
            tf.into_iter()
                .map(|(b, c)| (b, c * ((n + 1.0) / (df[b as usize] as f64 + 1.0)).ln()))
                .filter(|(_, v)| *v != 0.0)
                .collect()
        })
        .collect()
}

#[test]
fn library_matches_brute_force() {
    let docs = generate_synthetic(&common::small_spec()).unwrap();
    let pipeline = PipelineConfig::default();
    let tokens: Vec<Vec<String>> = docs.iter().map(|d| tokenize(&d.abstract_text, &pipeline)).collect();
    for (vocab, buckets) in [(0, 64), (50, 64), (300, 1000), (5000, 10_000)] {
        let cfg = TfidfConfig::new(vocab, buckets).unwrap();
        let spec = ComposerSpec::tfidf(cfg);
        let models = ComposeModels::fit(&tokens, std::slice::from_ref(&spec), None).unwrap();
        let expected = oracle(&tokens, vocab, buckets);
        for ((d, t), want) in docs.iter().zip(&tokens).zip(&expected) {
            let got = compose(&d.id, Field::Abstract, t, &spec, &models).unwrap();
            let got: BTreeMap<u32, f64> = match got.vector {
                Some(DocRepr::Sparse(v)) => v.iter().collect(),
                None => BTreeMap::new(),
                Some(DocRepr::Dense(_)) => panic!("raw TFIDF must be sparse"),
            };
            assert_eq!(got.keys().collect::<Vec<_>>(), want.keys().collect::<Vec<_>>());
            for (k, v) in &got {
                assert!((v - want[k]).abs() <= 1e-12 * v.abs().max(1.0));
            }
        }
    }
}

#[test]
fn model_file_round_trip() {
    let docs = generate_synthetic(&common::small_spec()).unwrap();
    let pipeline = PipelineConfig::default();
    let tokens: Vec<Vec<String>> = docs.iter().map(|d| tokenize(&d.title, &pipeline)).collect();
    let cfg = TfidfConfig::new(100, 256).unwrap();
    let models = ComposeModels::fit(&tokens, &[ComposerSpec::tfidf(cfg.clone())], None).unwrap();
    let idf = &models.tfidf[&cfg];
    let mut bytes = Vec::new();
    write_model(&cfg, idf, &mut bytes).unwrap();
    let (cfg2, idf2) = read_model(bytes.as_slice()).unwrap();
    assert_eq!(cfg2, cfg);
    let mut again = Vec::new();
    write_model(&cfg2, &idf2, &mut again).unwrap();
    assert_eq!(bytes, again);
}
