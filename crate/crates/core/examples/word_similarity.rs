//! Score an embedding against a word-pair similarity list.

use emberank::corpus::{generate_synthetic, tokenize, PipelineConfig, SynthSpec};
use emberank::embed::{train, TrainParams};
use emberank::wordsim::{evaluate_word_pairs, WordPair, WordPairSet};

fn main() -> emberank::Result<()> {
    let docs = generate_synthetic(&SynthSpec {
        docs_per_journal: 20,
        ..SynthSpec::default()
    })?;
    let pipeline = PipelineConfig::default();
    let sentences: Vec<Vec<String>> = docs.iter().map(|d| tokenize(&d.abstract_text, &pipeline)).collect();
    let model = train(
        &sentences,
        &TrainParams {
            dim: 50,
            min_count: 5,
            ..TrainParams::default()
        },
    )?;

    // Same-topic pairs are judged similar, cross-topic pairs dissimilar.
    let mut pairs = Vec::new();
    for i in 0..10 {
        let t = i % 5;
        pairs.push(WordPair {
            a: SynthSpec::topic_token(t, i),
            b: SynthSpec::topic_token(t, i + 1),
            score: 9.0,
        });
        pairs.push(WordPair {
            a: SynthSpec::topic_token(t, i),
            b: SynthSpec::topic_token((t + 1) % 5, i),
            score: 1.0,
        });
    }
    let set = WordPairSet::new("synthetic-topics", pairs)?;
    let report = evaluate_word_pairs(&model, &set, &pipeline)?;
    println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    Ok(())
}
