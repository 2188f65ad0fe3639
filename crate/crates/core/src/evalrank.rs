//! Journal categorization benchmark.
//!
//! Journal centroids are averaged from training-split document vectors.
//! Each test document is ranked against every centroid by cosine similarity
//! (ties broken by journal id), and the rank of its true journal feeds the
//! median / average / absolute-hit / CDF metrics.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::Write;

use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::compose::{compose, ComposeModels, ComposerSpec, DocRepr, DocVector};
use crate::corpus::{filter_journals, tokenize, Document, PipelineConfig, SplitAssignment};
use crate::embed::{train, EmbeddingModel, TrainParams};
use crate::tfidf::SparseVector;
use crate::{Error, Field, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JournalCentroid {
    pub journal_id: String,
    pub vector: DocRepr,
    pub n_docs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankResult {
    pub doc_id: String,
    pub field: Field,
    pub true_journal_id: String,
    pub rank: usize,
    pub best_journal_id: String,
    pub best_score: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CdfPoint {
    pub rank: usize,
    pub fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub model_label: String,
    pub field: Field,
    pub n_journals: usize,
    pub n_docs_ranked: usize,
    pub n_null_skipped: usize,
    /// Test documents whose journal has no usable centroid.
    pub n_unrankable: usize,
    pub median_rank: f64,
    pub average_rank: f64,
    pub absolute_hit: f64,
    pub cdf: Vec<CdfPoint>,
}

impl MetricsReport {
    /// Cumulative fraction of documents with rank ≤ `rank`.
    pub fn cdf_at(&self, rank: usize) -> f64 {
        self.cdf
            .iter()
            .take_while(|p| p.rank <= rank)
            .last()
            .map_or(0.0, |p| p.fraction)
    }
}

/// Averages member vectors per eligible journal. `members` yields
/// `(journal_id, vector)`; null records must already be filtered out.
pub fn journal_centroids<'a, I>(members: I, eligible: &BTreeSet<String>) -> Result<Vec<JournalCentroid>>
where
    I: IntoIterator<Item = (&'a str, &'a DocRepr)>,
{
    let mut groups: BTreeMap<&str, Vec<&DocRepr>> = BTreeMap::new();
    for (journal, v) in members {
        if eligible.contains(journal) {
            groups.entry(journal).or_default().push(v);
        }
    }
    for j in eligible {
        if !groups.contains_key(j.as_str()) {
            warn!("journal {j} has no non-null training vectors; dropped");
        }
    }
    let mut out = Vec::with_capacity(groups.len());
    for (journal, vs) in groups {
        let vector = mean_vector(&vs)?;
        if vector.norm() == 0.0 {
            warn!("journal {journal} has a zero centroid; dropped");
            continue;
        }
        out.push(JournalCentroid {
            journal_id: journal.to_string(),
            vector,
            n_docs: vs.len(),
        });
    }
    if out.is_empty() {
        return Err(Error::NoEligibleJournals);
    }
    Ok(out)
}

fn mean_vector(vs: &[&DocRepr]) -> Result<DocRepr> {
    let n = vs.len() as f64;
    let dim = vs[0].dim();
    if let Some(v) = vs.iter().find(|v| v.dim() != dim) {
        return Err(Error::DimensionMismatch {
            left: dim,
            right: v.dim(),
        });
    }
    match vs[0] {
        DocRepr::Dense(_) => {
            let mut acc = vec![0.0; dim];
            for v in vs {
                let DocRepr::Dense(d) = v else {
                    return Err(Error::invalid("mixed sparse and dense vectors in one journal"));
                };
                for (a, x) in acc.iter_mut().zip(d) {
                    *a += x;
                }
            }
            acc.iter_mut().for_each(|a| *a /= n);
            Ok(DocRepr::Dense(acc))
        }
        DocRepr::Sparse(_) => {
            let mut pairs = Vec::new();
            for v in vs {
                let DocRepr::Sparse(s) = v else {
                    return Err(Error::invalid("mixed sparse and dense vectors in one journal"));
                };
                pairs.extend(s.iter());
            }
            let mut sum = SparseVector::from_pairs(dim, pairs);
            sum.scale(1.0 / n);
            Ok(DocRepr::Sparse(sum))
        }
    }
}

/// Cosine similarity; errors on a zero vector.
pub fn cosine_similarity(a: &DocRepr, b: &DocRepr) -> Result<f64> {
    let (na, nb) = (a.norm(), b.norm());
    if na == 0.0 || nb == 0.0 {
        return Err(Error::UndefinedCosine);
    }
    Ok(a.dot(b)? / (na * nb))
}

/// Ranks `doc` against `centroids`; the true journal's 1-based position
/// after sorting by (similarity desc, journal id asc).
pub fn rank_document(
    doc: &DocVector,
    true_journal: &str,
    centroids: &[JournalCentroid],
) -> Result<RankResult> {
    let v = doc
        .vector
        .as_ref()
        .ok_or_else(|| Error::invalid(format!("document {} has a null vector", doc.doc_id)))?;
    let sims = centroids
        .iter()
        .map(|c| cosine_similarity(v, &c.vector))
        .collect::<Result<Vec<f64>>>()?;
    let t = centroids
        .iter()
        .position(|c| c.journal_id == true_journal)
        .ok_or_else(|| Error::UnknownJournal(true_journal.to_string()))?;
    let ahead = |i: usize, j: usize| {
        sims[i] > sims[j] || (sims[i] == sims[j] && centroids[i].journal_id < centroids[j].journal_id)
    };
    let rank = 1 + (0..centroids.len()).filter(|&i| i != t && ahead(i, t)).count();
    let mut best = 0;
    for i in 1..centroids.len() {
        if ahead(i, best) {
            best = i;
        }
    }
    Ok(RankResult {
        doc_id: doc.doc_id.clone(),
        field: doc.field,
        true_journal_id: true_journal.to_string(),
        rank,
        best_journal_id: centroids[best].journal_id.clone(),
        best_score: sims[best],
    })
}

/// Median of unsorted ranks; even counts average the two middle values.
pub fn median_rank(ranks: &[usize]) -> Option<f64> {
    if ranks.is_empty() {
        return None;
    }
    let mut s = ranks.to_vec();
    s.sort_unstable();
    let n = s.len();
    Some(if n % 2 == 1 {
        s[n / 2] as f64
    } else {
        (s[n / 2 - 1] + s[n / 2]) as f64 / 2.0
    })
}

pub fn compute_metrics(
    model_label: &str,
    field: Field,
    n_journals: usize,
    results: &[RankResult],
    n_null_skipped: usize,
    n_unrankable: usize,
) -> Result<MetricsReport> {
    let ranks: Vec<usize> = results.iter().map(|r| r.rank).collect();
    let median = median_rank(&ranks).ok_or_else(|| Error::invalid("no ranked documents"))?;
    let n = ranks.len();
    let total: u64 = ranks.iter().map(|&r| r as u64).sum();
    let mut hist: BTreeMap<usize, usize> = BTreeMap::new();
    for &r in &ranks {
        *hist.entry(r).or_default() += 1;
    }
    let mut seen = 0;
    let cdf = hist
        .into_iter()
        .map(|(rank, c)| {
            seen += c;
            CdfPoint {
                rank,
                fraction: seen as f64 / n as f64,
            }
        })
        .collect();
    Ok(MetricsReport {
        model_label: model_label.to_string(),
        field,
        n_journals,
        n_docs_ranked: n,
        n_null_skipped,
        n_unrankable,
        median_rank: median,
        average_rank: total as f64 / n as f64,
        absolute_hit: ranks.iter().filter(|&&r| r == 1).count() as f64 / n as f64,
        cdf,
    })
}

pub fn write_cdf_csv<W: Write>(report: &MetricsReport, mut w: W) -> Result<()> {
    writeln!(w, "rank,fraction")?;
    for p in &report.cdf {
        writeln!(w, "{},{}", p.rank, p.fraction)?;
    }
    Ok(())
}

/// Outcome of one (composer, field) pair.
#[derive(Debug, Clone)]
pub struct BenchmarkRun {
    pub spec: ComposerSpec,
    pub report: MetricsReport,
    pub ranks: Vec<RankResult>,
    pub centroids: Vec<JournalCentroid>,
    /// Composed test vectors, null records included.
    pub test_vectors: Vec<DocVector>,
}

/// A corpus prepared for benchmarking: documents in id order, tokenized,
/// split, with the eligible journals fixed.
#[derive(Debug, Clone)]
pub struct Benchmark {
    docs: Vec<Document>,
    title_tokens: Vec<Vec<String>>,
    abstract_tokens: Vec<Vec<String>>,
    split: SplitAssignment,
    eligible: BTreeSet<String>,
    embedding: Option<EmbeddingModel>,
}

impl Benchmark {
    pub fn new(
        docs: &[Document],
        split: &SplitAssignment,
        min_pubs: usize,
        pipeline: &PipelineConfig,
    ) -> Result<Self> {
        if docs.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let mut docs = docs.to_vec();
        docs.sort_by(|a, b| a.id.cmp(&b.id));
        let eligible = filter_journals(&docs, split, min_pubs)?;
        let tok = |f: Field| -> Vec<Vec<String>> {
            docs.par_iter().map(|d| tokenize(d.field(f), pipeline)).collect()
        };
        Ok(Benchmark {
            title_tokens: tok(Field::Title),
            abstract_tokens: tok(Field::Abstract),
            docs,
            split: split.clone(),
            eligible,
            embedding: None,
        })
    }

    pub fn docs(&self) -> &[Document] {
        &self.docs
    }

    pub fn eligible(&self) -> &BTreeSet<String> {
        &self.eligible
    }

    pub fn split(&self) -> &SplitAssignment {
        &self.split
    }

    pub fn tokens(&self, field: Field) -> &[Vec<String>] {
        match field {
            Field::Title => &self.title_tokens,
            Field::Abstract => &self.abstract_tokens,
        }
    }

    pub fn embedding(&self) -> Option<&EmbeddingModel> {
        self.embedding.as_ref()
    }

    pub fn with_embedding(mut self, model: EmbeddingModel) -> Self {
        self.embedding = Some(model);
        self
    }

    /// Training-split titles and abstracts as separate sentences, in id order.
    pub fn training_sentences(&self) -> Vec<&[String]> {
        let mut out = Vec::new();
        for (i, d) in self.docs.iter().enumerate() {
            if self.split.is_train(&d.id) {
                out.push(self.title_tokens[i].as_slice());
                out.push(self.abstract_tokens[i].as_slice());
            }
        }
        out
    }

    pub fn train_embedding(self, params: &TrainParams) -> Result<Self> {
        let sentences: Vec<Vec<&str>> = self
            .training_sentences()
            .into_iter()
            .map(|s| s.iter().map(String::as_str).collect())
            .collect();
        info!("training embedding on {} sentences", sentences.len());
        let model = train(&sentences, params)?;
        Ok(self.with_embedding(model))
    }

    /// Fits rankings and IDF tables for `specs` on the training split of `field`.
    pub fn fit_models(&self, field: Field, specs: &[ComposerSpec]) -> Result<ComposeModels> {
        let tokens = self.tokens(field);
        let train_docs: Vec<&[String]> = self
            .docs
            .iter()
            .enumerate()
            .filter(|(_, d)| self.split.is_train(&d.id))
            .map(|(i, _)| tokens[i].as_slice())
            .collect();
        let train_docs: Vec<Vec<&str>> = train_docs
            .iter()
            .map(|d| d.iter().map(String::as_str).collect())
            .collect();
        let embedding = if specs.iter().any(ComposerSpec::needs_embedding) {
            Some(
                self.embedding
                    .clone()
                    .ok_or_else(|| Error::invalid("embedding composers need a trained embedding"))?,
            )
        } else {
            None
        };
        ComposeModels::fit(&train_docs, specs, embedding)
    }

    pub fn run(&self, specs: &[ComposerSpec], fields: &[Field]) -> Result<Vec<BenchmarkRun>> {
        let mut out = Vec::with_capacity(specs.len() * fields.len());
        for &field in fields {
            let models = self.fit_models(field, specs)?;
            for spec in specs {
                out.push(self.run_one(spec, field, &models)?);
            }
        }
        Ok(out)
    }

    pub fn run_one(&self, spec: &ComposerSpec, field: Field, models: &ComposeModels) -> Result<BenchmarkRun> {
        let tokens = self.tokens(field);
        let members: Vec<usize> = (0..self.docs.len())
            .filter(|&i| self.eligible.contains(&self.docs[i].journal_id))
            .collect();
        let composed: Vec<DocVector> = members
            .par_iter()
            .map(|&i| compose(&self.docs[i].id, field, &tokens[i], spec, models))
            .collect::<Result<_>>()?;
        let mut train_members = Vec::new();
        let mut test = Vec::new();
        for (&i, v) in members.iter().zip(composed) {
            let journal = self.docs[i].journal_id.as_str();
            if self.split.is_test(&v.doc_id) {
                test.push((journal, v));
            } else if self.split.is_train(&v.doc_id) {
                train_members.push((journal, v));
            }
        }
        let centroids = journal_centroids(
            train_members
                .iter()
                .filter_map(|(j, v)| v.vector.as_ref().map(|r| (*j, r))),
            &self.eligible,
        )?;
        let known: HashMap<&str, ()> = centroids.iter().map(|c| (c.journal_id.as_str(), ())).collect();
        let n_null = test.iter().filter(|(_, v)| v.is_null()).count();
        let rankable: Vec<&(&str, DocVector)> = test
            .iter()
            .filter(|(j, v)| !v.is_null() && known.contains_key(j))
            .collect();
        let ranked: Vec<Option<RankResult>> = rankable
            .par_iter()
            .map(|(j, v)| match rank_document(v, j, &centroids) {
                Ok(r) => Ok(Some(r)),
                Err(Error::UndefinedCosine) => Ok(None),
                Err(e) => Err(e),
            })
            .collect::<Result<_>>()?;
        let ranks: Vec<RankResult> = ranked.into_iter().flatten().collect();
        let n_unrankable = test.len() - n_null - ranks.len();
        let report = compute_metrics(&spec.label, field, centroids.len(), &ranks, n_null, n_unrankable)?;
        Ok(BenchmarkRun {
            spec: spec.clone(),
            report,
            ranks,
            centroids,
            test_vectors: test.into_iter().map(|(_, v)| v).collect(),
        })
    }
}

/// Prepares, trains an embedding when any spec needs one, and runs every
/// (spec, field) pair.
pub fn run_benchmark(
    docs: &[Document],
    split: &SplitAssignment,
    specs: &[ComposerSpec],
    fields: &[Field],
    min_pubs: usize,
    pipeline: &PipelineConfig,
    train_params: &TrainParams,
) -> Result<Vec<MetricsReport>> {
    let mut bench = Benchmark::new(docs, split, min_pubs, pipeline)?;
    if specs.iter().any(ComposerSpec::needs_embedding) {
        bench = bench.train_embedding(train_params)?;
    }
    Ok(bench.run(specs, fields)?.into_iter().map(|r| r.report).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense(v: &[f64]) -> DocRepr {
        DocRepr::Dense(v.to_vec())
    }

    fn centroid(id: &str, v: &[f64]) -> JournalCentroid {
        JournalCentroid {
            journal_id: id.into(),
            vector: dense(v),
            n_docs: 1,
        }
    }

    fn doc(v: &[f64]) -> DocVector {
        DocVector {
            doc_id: "d".into(),
            field: Field::Abstract,
            vector: Some(dense(v)),
            surviving_tokens: 1,
        }
    }

    fn result(rank: usize) -> RankResult {
        RankResult {
            doc_id: "d".into(),
            field: Field::Title,
            true_journal_id: "j".into(),
            rank,
            best_journal_id: "j".into(),
            best_score: 1.0,
        }
    }

    fn eligible(ids: &[&str]) -> BTreeSet<String> {
        ids.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn one_doc_centroid_is_the_doc() {
        let v = dense(&[1.0, 2.0]);
        let c = journal_centroids([("a", &v)], &eligible(&["a"])).unwrap();
        assert_eq!(c[0].vector, v);
        assert_eq!(c[0].n_docs, 1);
    }

    #[test]
    fn cancelling_journal_is_dropped() {
        let (v, w, u) = (dense(&[1.0, 2.0]), dense(&[-1.0, -2.0]), dense(&[0.0, 1.0]));
        let c = journal_centroids([("a", &v), ("a", &w), ("b", &u)], &eligible(&["a", "b"])).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].journal_id, "b");
        assert!(matches!(
            journal_centroids([("a", &v), ("a", &w)], &eligible(&["a"])),
            Err(Error::NoEligibleJournals)
        ));
    }

    #[test]
    fn sparse_centroid() {
        let a = DocRepr::Sparse(SparseVector::from_pairs(4, vec![(1, 2.0)]));
        let b = DocRepr::Sparse(SparseVector::from_pairs(4, vec![(1, 2.0), (3, 4.0)]));
        let c = journal_centroids([("j", &a), ("j", &b)], &eligible(&["j"])).unwrap();
        assert_eq!(c[0].vector.to_dense(), vec![0.0, 2.0, 0.0, 2.0]);
    }

    #[test]
    fn ranks() {
        let cs = [centroid("a", &[1.0, 0.0]), centroid("b", &[0.0, 1.0])];
        let r = rank_document(&doc(&[1.0, 0.0]), "a", &cs).unwrap();
        assert_eq!((r.rank, r.best_journal_id.as_str()), (1, "a"));
        // similarities 0.9 / 0.5 / 0.1
        let s = |c: f64| [c, (1.0 - c * c).sqrt()];
        let cs = [centroid("x", &s(0.1)), centroid("y", &s(0.9)), centroid("z", &s(0.5))];
        let r = rank_document(&doc(&[1.0, 0.0]), "z", &cs).unwrap();
        assert_eq!(r.rank, 2);
        assert_eq!(r.best_journal_id, "y");
        assert!((r.best_score - 0.9).abs() < 1e-12);
        assert!(matches!(
            rank_document(&doc(&[1.0, 0.0]), "q", &cs),
            Err(Error::UnknownJournal(_))
        ));
    }

    #[test]
    fn ties_break_by_journal_id() {
        let cs = [centroid("b", &[1.0, 0.0]), centroid("a", &[2.0, 0.0])];
        assert_eq!(rank_document(&doc(&[1.0, 0.0]), "a", &cs).unwrap().rank, 1);
        let r = rank_document(&doc(&[1.0, 0.0]), "b", &cs).unwrap();
        assert_eq!((r.rank, r.best_journal_id.as_str()), (2, "a"));
    }

    #[test]
    fn metrics_examples() {
        let m = compute_metrics("m", Field::Title, 3, &[result(1), result(1), result(1)], 0, 0).unwrap();
        assert_eq!((m.median_rank, m.average_rank, m.absolute_hit), (1.0, 1.0, 1.0));
        let rs: Vec<_> = [4, 2, 1, 3].map(result).to_vec();
        let m = compute_metrics("m", Field::Title, 4, &rs, 2, 0).unwrap();
        assert_eq!((m.median_rank, m.average_rank, m.absolute_hit), (2.5, 2.5, 0.25));
        assert_eq!(m.cdf.len(), 4);
        assert_eq!(m.cdf.last().unwrap().fraction, 1.0);
        assert_eq!(m.cdf_at(1), m.absolute_hit);
        assert_eq!(m.cdf_at(0), 0.0);
        assert_eq!(m.n_null_skipped, 2);
        assert!(compute_metrics("m", Field::Title, 1, &[], 0, 0).is_err());
    }

    #[test]
    fn cdf_csv() {
        let m = compute_metrics("m", Field::Title, 3, &[result(1), result(3)], 0, 0).unwrap();
        let mut out = Vec::new();
        write_cdf_csv(&m, &mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "rank,fraction\n1,0.5\n3,1\n");
    }
}
