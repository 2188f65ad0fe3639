//! Project journal centroids to 2-D and write an SVG scatter plot.

use std::collections::BTreeMap;

use emberank::compose::ComposerSpec;
use emberank::corpus::{generate_synthetic, split_train_test, PipelineConfig, SynthSpec};
use emberank::evalrank::Benchmark;
use emberank::project::{default_color_map, project_journals, render_scatter, ProjectionConfig};
use emberank::Field;

fn main() -> emberank::Result<()> {
    let docs = generate_synthetic(&SynthSpec {
        docs_per_journal: 30,
        topic_token_ratio: 0.9,
        ..SynthSpec::default()
    })?;
    let split = split_train_test(&docs, 0.2, 1)?;
    let bench = Benchmark::new(&docs, &split, 10, &PipelineConfig::default())?;
    let run = bench.run(&[ComposerSpec::preset("tfidf10k10k")?], &[Field::Abstract])?.remove(0);

    let publishers: BTreeMap<String, String> =
        docs.iter().map(|d| (d.journal_id.clone(), d.publisher.clone())).collect();
    let config = ProjectionConfig::default().fit_to(run.centroids.len());
    let points = project_journals(&run.centroids, &publishers, &config)?;

    let out = std::env::temp_dir().join("journal_map.svg");
    std::fs::write(&out, render_scatter(&points, &default_color_map(), 10))?;
    println!("{} journals at perplexity {} -> {}", points.len(), config.perplexity, out.display());
    Ok(())
}
