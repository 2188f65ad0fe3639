//! Compose one document with every preset composer.

use emberank::compose::{compose, ComposeModels, ComposerSpec};
use emberank::corpus::{generate_synthetic, tokenize, PipelineConfig, SynthSpec};
use emberank::embed::{train, TrainParams};
use emberank::Field;

fn main() -> emberank::Result<()> {
    let docs = generate_synthetic(&SynthSpec {
        docs_per_journal: 20,
        ..SynthSpec::default()
    })?;
    let pipeline = PipelineConfig::default();
    let tokens: Vec<Vec<String>> = docs.iter().map(|d| tokenize(&d.abstract_text, &pipeline)).collect();
    let params = TrainParams {
        dim: 32,
        min_count: 5,
        ..TrainParams::default()
    };
    let embedding = train(&tokens, &params)?;

    let specs = ComposerSpec::all_presets();
    let models = ComposeModels::fit(&tokens, &specs, Some(embedding))?;
    for spec in &specs {
        let v = compose(&docs[0].id, Field::Abstract, &tokens[0], spec, &models)?;
        match &v.vector {
            Some(r) => println!(
                "{spec:<22} dim {:>6}  nnz {:>4}  norm {:.3}  tokens used {}",
                r.dim(),
                r.nnz(),
                r.norm(),
                v.surviving_tokens
            ),
            None => println!("{spec:<22} null"),
        }
    }
    Ok(())
}
