use std::collections::BTreeMap;

use emberank::compose::{compose, ComposeModels, ComposerSpec, DocRepr, WEIGHTING_BUCKETS};
use emberank::corpus::TokenStats;
use emberank::embed::EmbeddingModel;
use emberank::tfidf::{hash_token, IdfModel};
use emberank::Field;
use proptest::prelude::*;

const VOCAB: usize = 40;
const DIM: usize = 6;

fn word(i: usize) -> String {
    format!("w{i:02}")
}

fn models(vectors: &[f32], idf_values: &[f64]) -> ComposeModels {
    let words: Vec<String> = (0..VOCAB).map(word).collect();
    let embedding = EmbeddingModel::from_vectors(words.clone(), DIM, vectors.to_vec()).unwrap();
    let mut idf = vec![0.0; WEIGHTING_BUCKETS];
    for (i, w) in words.iter().enumerate() {
        idf[hash_token(w, WEIGHTING_BUCKETS) as usize] = idf_values[i];
    }
    // Frequency ranking: w00 most frequent, descending.
    let docs: Vec<Vec<&str>> = words
        .iter()
        .enumerate()
        .map(|(i, w)| vec![w.as_str(); VOCAB - i])
        .collect();
    ComposeModels {
        embedding: Some(embedding),
        ranking: Some(TokenStats::from_token_docs(docs.iter().map(|d| d.iter().copied()))),
        weighting: Some(IdfModel::from_values(idf, 100).unwrap()),
        tfidf: BTreeMap::new(),
    }
}

fn dense(v: Option<DocRepr>) -> Option<Vec<f64>> {
    v.map(|r| r.to_dense())
}

fn arb_setup() -> impl Strategy<Value = (Vec<f32>, Vec<f64>, Vec<usize>)> {
    (
        prop::collection::vec(-1.0f32..1.0, VOCAB * DIM),
        prop::collection::vec(0.0f64..5.0, VOCAB),
        prop::collection::vec(0..VOCAB + 5, 0..30),
    )
}

fn tokens(ids: &[usize]) -> Vec<String> {
    // ids ≥ VOCAB are out of vocabulary
    ids.iter().map(|&i| if i < VOCAB { word(i) } else { format!("oov{i}") }).collect()
}

proptest! {
    #[test]
    fn weight_scaling_leaves_weighted_mean_unchanged((vectors, idf, ids) in arb_setup(), c in 0.1f64..10.0) {
        let spec = ComposerSpec::preset("TFIDF_embedding").unwrap();
        let scaled: Vec<f64> = idf.iter().map(|v| v * c).collect();
        let a = compose("d", Field::Title, &tokens(&ids), &spec, &models(&vectors, &idf)).unwrap();
        let b = compose("d", Field::Title, &tokens(&ids), &spec, &models(&vectors, &scaled)).unwrap();
        prop_assert_eq!(a.is_null(), b.is_null());
        if let (Some(x), Some(y)) = (dense(a.vector), dense(b.vector)) {
            for (p, q) in x.iter().zip(&y) {
                prop_assert!((p - q).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn token_order_is_irrelevant((vectors, idf, ids) in arb_setup(), seed in any::<u64>()) {
        let m = models(&vectors, &idf);
        let mut shuffled = ids.clone();
        let n = shuffled.len();
        for i in (1..n).rev() {
            let j = (seed.wrapping_mul(i as u64 + 7) >> 3) as usize % (i + 1);
            shuffled.swap(i, j);
        }
        for preset in ["embedding", "TFIDF_embedding", "5K_embedding", "1K_6K_embedding"] {
            let spec = ComposerSpec::preset(preset).unwrap();
            let a = compose("d", Field::Title, &tokens(&ids), &spec, &m).unwrap();
            let b = compose("d", Field::Title, &tokens(&shuffled), &spec, &m).unwrap();
            prop_assert_eq!(a, b);
        }
    }

    #[test]
    fn null_iff_nothing_survives((vectors, idf, ids) in arb_setup()) {
        let m = models(&vectors, &idf);
        for preset in ["embedding", "TFIDF_embedding", "10K_embedding"] {
            let spec = ComposerSpec::preset(preset).unwrap();
            let v = compose("d", Field::Title, &tokens(&ids), &spec, &m).unwrap();
            prop_assert_eq!(v.is_null(), v.surviving_tokens == 0);
        }
    }

    #[test]
    fn nested_bands_agree_when_survivors_coincide((vectors, idf, ids) in arb_setup()) {
        let m = models(&vectors, &idf);
        // Every vocabulary word ranks below 40, so both bands keep the same tokens.
        let narrow = ComposerSpec::band("narrow", 0, VOCAB).unwrap();
        let wide = ComposerSpec::preset("10K_embedding").unwrap();
        let a = compose("d", Field::Title, &tokens(&ids), &narrow, &m).unwrap();
        let b = compose("d", Field::Title, &tokens(&ids), &wide, &m).unwrap();
        prop_assert_eq!(a.vector, b.vector);
        // A narrower band only ever drops tokens.
        let top = ComposerSpec::band("top", 0, 10).unwrap();
        let c = compose("d", Field::Title, &tokens(&ids), &top, &m).unwrap();
        prop_assert!(c.surviving_tokens <= b.surviving_tokens);
    }
}

#[test]
fn band_excluding_top_tokens_gives_null() {
    let vectors: Vec<f32> = (0..VOCAB * DIM).map(|i| (i % 7) as f32 - 3.0).collect();
    let m = models(&vectors, &[1.0; VOCAB]);
    let spec = ComposerSpec::band("skip10", 10, 30).unwrap();
    let top = tokens(&(0..10).collect::<Vec<_>>());
    assert!(compose("d", Field::Abstract, &top, &spec, &m).unwrap().is_null());
    let mixed = tokens(&[0, 1, 12]);
    let v = compose("d", Field::Abstract, &mixed, &spec, &m).unwrap();
    assert_eq!(v.surviving_tokens, 1);
    let expected: Vec<f64> = vectors[12 * DIM..13 * DIM].iter().map(|&x| x as f64).collect();
    assert_eq!(dense(v.vector).unwrap(), expected);
}
