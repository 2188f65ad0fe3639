//! Memory footprint and all-pairs dot-product timing, sparse versus dense.

use emberank::compose::{compose_corpus, ComposeModels, ComposerSpec};
use emberank::corpus::{generate_synthetic, tokenize, PipelineConfig, SynthSpec};
use emberank::embed::{train, TrainParams};
use emberank::profile::{apply_baseline, memory_footprint, time_all_pairs, Representation};
use emberank::Field;

fn main() -> emberank::Result<()> {
    let docs = generate_synthetic(&SynthSpec {
        docs_per_journal: 10,
        ..SynthSpec::default()
    })?;
    let pipeline = PipelineConfig::default();
    let tokens: Vec<Vec<String>> = docs.iter().map(|d| tokenize(&d.abstract_text, &pipeline)).collect();
    let embedding = train(
        &tokens,
        &TrainParams {
            dim: 100,
            min_count: 5,
            ..TrainParams::default()
        },
    )?;
    let specs = [ComposerSpec::preset("tfidf10k10k")?, ComposerSpec::preset("embedding")?];
    let models = ComposeModels::fit(&tokens, &specs, Some(embedding))?;
    let pairs: Vec<(&str, &[String])> = docs.iter().zip(&tokens).map(|(d, t)| (d.id.as_str(), t.as_slice())).collect();

    let tfidf = compose_corpus(&pairs, Field::Abstract, &specs[0], &models)?.vectors;
    let emb = compose_corpus(&pairs, Field::Abstract, &specs[1], &models)?.vectors;

    for (label, vs, repr) in [
        ("tfidf", &tfidf, Representation::Sparse),
        ("tfidf", &tfidf, Representation::Dense),
        ("embedding", &emb, Representation::Dense),
    ] {
        let m = memory_footprint(label, vs, repr);
        println!("{label:<10} {repr:<6} {:>10} B  ({:.0} B/vector)", m.total_bytes, m.bytes_per_vector_avg);
    }

    let mut timings = vec![
        time_all_pairs("embedding", &emb, Representation::Dense, 300, 1, 3)?,
        time_all_pairs("tfidf-sparse", &tfidf, Representation::Sparse, 300, 1, 3)?,
        time_all_pairs("tfidf-dense", &tfidf, Representation::Dense, 300, 1, 3)?,
    ];
    apply_baseline(&mut timings, "embedding")?;
    for t in &timings {
        println!(
            "{:<13} {} products in {:.4}s  x{:.1}",
            t.model_label, t.n_products, t.wall_seconds, t.ratio_vs_baseline
        );
    }
    Ok(())
}
