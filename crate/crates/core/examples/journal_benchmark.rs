//! Rank held-out documents against journal centroids.

use emberank::compose::ComposerSpec;
use emberank::corpus::{generate_synthetic, split_train_test, PipelineConfig, SynthSpec};
use emberank::embed::TrainParams;
use emberank::evalrank::run_benchmark;
use emberank::Field;

fn main() -> emberank::Result<()> {
    let docs = generate_synthetic(&SynthSpec {
        docs_per_journal: 40,
        ..SynthSpec::default()
    })?;
    let split = split_train_test(&docs, 0.2, 1)?;
    let specs = [
        ComposerSpec::preset("tfidf10k10k")?,
        ComposerSpec::preset("embedding")?,
        ComposerSpec::preset("TFIDF_embedding")?,
    ];
    let params = TrainParams {
        dim: 50,
        min_count: 5,
        ..TrainParams::default()
    };
    let reports = run_benchmark(
        &docs,
        &split,
        &specs,
        &[Field::Title, Field::Abstract],
        10,
        &PipelineConfig::default(),
        &params,
    )?;
    println!("{:<18} {:<9} {:>6} {:>7} {:>8}", "model", "field", "hit", "median", "average");
    for r in &reports {
        println!(
            "{:<18} {:<9} {:>5.1}% {:>7.1} {:>8.2}",
            r.model_label,
            r.field,
            r.absolute_hit * 100.0,
            r.median_rank,
            r.average_rank
        );
    }
    Ok(())
}
