//! Train a small skip-gram model and list nearest neighbours of a token.

use emberank::corpus::{generate_synthetic, tokenize, PipelineConfig, SynthSpec};
use emberank::embed::{train, TrainParams};
use emberank::wordsim::cosine;

fn main() -> emberank::Result<()> {
    let docs = generate_synthetic(&SynthSpec {
        docs_per_journal: 20,
        ..SynthSpec::default()
    })?;
    let pipeline = PipelineConfig::default();
    let sentences: Vec<Vec<String>> = docs.iter().map(|d| tokenize(&d.abstract_text, &pipeline)).collect();
    let params = TrainParams {
        dim: 50,
        min_count: 5,
        ..TrainParams::default()
    };
    let model = train(&sentences, &params)?;
    println!("vocabulary {} words, dim {}", model.len(), model.dim());

    let as_f64 = |v: &[f32]| v.iter().map(|&x| x as f64).collect::<Vec<_>>();
    let query = SynthSpec::topic_token(0, 0);
    let Some(q) = model.vector(&query).map(as_f64) else {
        println!("{query} fell below min_count");
        return Ok(());
    };
    let mut scored: Vec<(f64, &str)> = model
        .words()
        .iter()
        .filter(|w| **w != query)
        .filter_map(|w| Some((cosine(&q, &as_f64(model.vector(w)?)).ok()?, w.as_str())))
        .collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0));
    println!("nearest to {query}:");
    for (s, w) in scored.iter().take(8) {
        println!("  {w:<12} {s:.3}");
    }
    Ok(())
}
