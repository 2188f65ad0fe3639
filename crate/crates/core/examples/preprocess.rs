//! Tokenize a few titles and print corpus token statistics.

use emberank::corpus::{generate_synthetic, token_stats, tokenize, FieldSelection, PipelineConfig, SynthSpec};

fn main() -> emberank::Result<()> {
    let config = PipelineConfig::default();
    for text in [
        "Running experiments on the stability of connected networks",
        "A study of generalized relational databases",
    ] {
        println!("{text:?}\n  -> {:?}", tokenize(text, &config));
    }

    let docs = generate_synthetic(&SynthSpec {
        docs_per_journal: 20,
        ..SynthSpec::default()
    })?;
    let stats = token_stats(&docs, FieldSelection::Both, &config)?;
    println!(
        "{} documents, {} tokens, {} unique",
        docs.len(),
        stats.total_tokens(),
        stats.unique_tokens()
    );
    for token in &stats.ranking()[..5] {
        println!("  {token}: {:?}", stats.get(token).unwrap());
    }
    Ok(())
}
