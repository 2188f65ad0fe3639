//! Fit a hashed TFIDF model and compare two documents.

use emberank::corpus::{generate_synthetic, tokenize, PipelineConfig, SynthSpec, TokenStats};
use emberank::tfidf::{fit_idf, sparse_dot, term_frequencies, tfidf_vector, SparseVector, TfidfConfig};

fn main() -> emberank::Result<()> {
    let docs = generate_synthetic(&SynthSpec {
        docs_per_journal: 10,
        ..SynthSpec::default()
    })?;
    let pipeline = PipelineConfig::default();
    let tokens: Vec<Vec<String>> = docs.iter().map(|d| tokenize(&d.abstract_text, &pipeline)).collect();
    let ranking = TokenStats::from_token_docs(tokens.iter().map(|t| t.iter().map(String::as_str)));

    let config = TfidfConfig::new(5_000, 10_000)?;
    let tf: Vec<_> = tokens
        .iter()
        .map(|t| term_frequencies(t, &config, Some(&ranking)))
        .collect::<emberank::Result<_>>()?;
    let idf = fit_idf(&tf)?;

    let a = tfidf_vector(&tokens[0], &config, &idf, Some(&ranking))?;
    let b = tfidf_vector(&tokens[1], &config, &idf, Some(&ranking))?;
    let c = tfidf_vector(&tokens[tokens.len() - 1], &config, &idf, Some(&ranking))?;
    let cos = |x: &SparseVector, y: &SparseVector| -> emberank::Result<f64> {
        Ok(sparse_dot(x, y)? / (x.norm() * y.norm()))
    };
    println!("{}: nnz {} of {} buckets", config.label(), a.nnz(), a.dim());
    println!("same journal   cos = {:.3}", cos(&a, &b)?);
    println!("other journal  cos = {:.3}", cos(&a, &c)?);
    Ok(())
}
