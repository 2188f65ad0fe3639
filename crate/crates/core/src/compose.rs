//! Document vectors from token streams.
//!
//! Five embedding-based recipes plus raw hashed TFIDF:
//!
//! | preset             | recipe                                                     |
//! |--------------------|------------------------------------------------------------|
//! | `embedding`        | unweighted mean of the vectors of all in-vocabulary tokens |
//! | `TFIDF_embedding`  | TFIDF-weighted mean over all tokens                        |
//! | `10K_embedding`    | TFIDF-weighted mean over frequency ranks `[0, 10000)`      |
//! | `5K_embedding`     | TFIDF-weighted mean over frequency ranks `[0, 5000)`       |
//! | `1K_6K_embedding`  | TFIDF-weighted mean over frequency ranks `[1000, 7000)`    |
//! | `tfidf10k10k` etc. | raw hashed TFIDF (sparse), `tfidf<vocab><buckets>`         |
//!
//! A document whose tokens are all filtered out gets a null vector.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::TokenStats;
use crate::embed::EmbeddingModel;
use crate::tfidf::{
    apply_idf, hash_token, term_frequencies, DocumentFrequencies, IdfModel, SparseVector,
    TfidfConfig,
};
use crate::{DenseVector, Error, Field, Result};

/// Buckets of the IDF table used to weight embedding composers
/// (2^18, the usual hashing-TF default). The vocabulary is not cut.
pub const WEIGHTING_BUCKETS: usize = 1 << 18;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ComposerKind {
    TfidfRaw(TfidfConfig),
    Mean,
    TfidfWeightedMean,
    /// Weighted mean restricted to frequency ranks in `[lo, hi)` (0-based).
    BandTfidfWeightedMean { lo: usize, hi: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ComposerSpec {
    pub label: String,
    pub kind: ComposerKind,
}

impl ComposerSpec {
    pub fn new(label: impl Into<String>, kind: ComposerKind) -> Result<Self> {
        if let ComposerKind::BandTfidfWeightedMean { lo, hi } = kind {
            if lo >= hi {
                return Err(Error::invalid(format!("empty band [{lo}, {hi})")));
            }
        }
        Ok(ComposerSpec {
            label: label.into(),
            kind,
        })
    }

    pub fn tfidf(config: TfidfConfig) -> Self {
        ComposerSpec {
            label: format!("tfidf {}", config.label()),
            kind: ComposerKind::TfidfRaw(config),
        }
    }

    pub fn band(label: &str, lo: usize, hi: usize) -> Result<Self> {
        Self::new(label, ComposerKind::BandTfidfWeightedMean { lo, hi })
    }

    pub fn preset(name: &str) -> Result<Self> {
        let lower = name.to_ascii_lowercase();
        match lower.as_str() {
            "embedding" => Self::new("embedding", ComposerKind::Mean),
            "tfidf_embedding" => Self::new("TFIDF_embedding", ComposerKind::TfidfWeightedMean),
            "10k_embedding" => Self::band("10K_embedding", 0, 10_000),
            "5k_embedding" => Self::band("5K_embedding", 0, 5_000),
            "1k_6k_embedding" => Self::band("1K_6K_embedding", 1_000, 7_000),
            _ => match lower.strip_prefix("tfidf") {
                Some(rest) => Ok(Self::tfidf(parse_tfidf_suffix(rest)?)),
                None => Err(Error::invalid(format!("unknown composer preset '{name}'"))),
            },
        }
    }

    /// The named presets in the order they are usually reported.
    pub fn all_presets() -> Vec<ComposerSpec> {
        [
            "tfidf5k5k",
            "tfidf5k10k",
            "tfidf10k10k",
            "embedding",
            "5K_embedding",
            "10K_embedding",
            "TFIDF_embedding",
            "1K_6K_embedding",
        ]
        .iter()
        .map(|p| Self::preset(p).expect("built-in preset"))
        .collect()
    }

    pub fn needs_embedding(&self) -> bool {
        !matches!(self.kind, ComposerKind::TfidfRaw(_))
    }

    pub fn needs_weighting(&self) -> bool {
        matches!(
            self.kind,
            ComposerKind::TfidfWeightedMean | ComposerKind::BandTfidfWeightedMean { .. }
        )
    }
}

/// `10k10k`, `5k10k`, `_10K/5K`, `2000/4096` ...
fn parse_tfidf_suffix(s: &str) -> Result<TfidfConfig> {
    let s = s.trim_start_matches(['_', ' ', '-']);
    if s.contains('/') {
        return s.parse();
    }
    let bad = || Error::invalid(format!("cannot parse TFIDF preset suffix '{s}'"));
    let cut = s.find('k').ok_or_else(bad)?;
    let (v, b) = s.split_at(cut + 1);
    format!("{v}/{b}").parse().map_err(|_| bad())
}

impl FromStr for ComposerSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::preset(s)
    }
}

impl fmt::Display for ComposerSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(&self.label)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum DocRepr {
    Dense(DenseVector),
    Sparse(SparseVector),
}

impl DocRepr {
    pub fn dim(&self) -> usize {
        match self {
            DocRepr::Dense(v) => v.len(),
            DocRepr::Sparse(v) => v.dim(),
        }
    }

    pub fn nnz(&self) -> usize {
        match self {
            DocRepr::Dense(v) => v.iter().filter(|x| **x != 0.0).count(),
            DocRepr::Sparse(v) => v.nnz(),
        }
    }

    pub fn norm(&self) -> f64 {
        match self {
            DocRepr::Dense(v) => v.iter().map(|x| x * x).sum::<f64>().sqrt(),
            DocRepr::Sparse(v) => v.norm(),
        }
    }

    pub fn to_dense(&self) -> DenseVector {
        match self {
            DocRepr::Dense(v) => v.clone(),
            DocRepr::Sparse(v) => crate::tfidf::to_dense(v),
        }
    }

    pub fn to_sparse(&self) -> SparseVector {
        match self {
            DocRepr::Sparse(v) => v.clone(),
            DocRepr::Dense(v) => SparseVector::from_pairs(
                v.len(),
                v.iter()
                    .enumerate()
                    .filter(|(_, x)| **x != 0.0)
                    .map(|(i, &x)| (i as u32, x))
                    .collect(),
            ),
        }
    }

    pub fn dot(&self, other: &DocRepr) -> Result<f64> {
        match (self, other) {
            (DocRepr::Dense(a), DocRepr::Dense(b)) => crate::tfidf::dense_dot(a, b),
            (DocRepr::Sparse(a), DocRepr::Sparse(b)) => crate::tfidf::sparse_dot(a, b),
            (DocRepr::Sparse(s), DocRepr::Dense(d)) | (DocRepr::Dense(d), DocRepr::Sparse(s)) => {
                if s.dim() != d.len() {
                    return Err(Error::DimensionMismatch {
                        left: s.dim(),
                        right: d.len(),
                    });
                }
                Ok(s.iter().map(|(i, v)| v * d[i as usize]).sum())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocVector {
    pub doc_id: String,
    pub field: Field,
    pub vector: Option<DocRepr>,
    pub surviving_tokens: usize,
}

impl DocVector {
    pub fn is_null(&self) -> bool {
        self.vector.is_none()
    }
}

/// Everything a composer may need, fitted on training data.
#[derive(Debug, Clone, Default)]
pub struct ComposeModels {
    pub embedding: Option<EmbeddingModel>,
    /// Corpus-frequency ranking for vocabulary cuts and bands.
    pub ranking: Option<TokenStats>,
    /// IDF over [`WEIGHTING_BUCKETS`] for the weighted composers.
    pub weighting: Option<IdfModel>,
    pub tfidf: BTreeMap<TfidfConfig, IdfModel>,
}

impl ComposeModels {
    /// Fits the ranking and every IDF table that `specs` need on `train_docs`.
    pub fn fit<S: AsRef<str> + Sync>(
        train_docs: &[Vec<S>],
        specs: &[ComposerSpec],
        embedding: Option<EmbeddingModel>,
    ) -> Result<Self> {
        let ranking = TokenStats::from_token_docs(
            train_docs.iter().map(|d| d.iter().map(AsRef::as_ref)),
        );
        let mut models = ComposeModels {
            embedding,
            ranking: Some(ranking),
            ..Default::default()
        };
        if specs.iter().any(ComposerSpec::needs_weighting) {
            let cfg = TfidfConfig::new(0, WEIGHTING_BUCKETS)?;
            models.weighting = Some(fit_idf_for(train_docs, &cfg, None)?);
        }
        for spec in specs {
            if let ComposerKind::TfidfRaw(cfg) = &spec.kind {
                if !models.tfidf.contains_key(cfg) {
                    let idf = fit_idf_for(train_docs, cfg, models.ranking.as_ref())?;
                    models.tfidf.insert(cfg.clone(), idf);
                }
            }
        }
        Ok(models)
    }
}

fn fit_idf_for<S: AsRef<str> + Sync>(
    docs: &[Vec<S>],
    config: &TfidfConfig,
    ranking: Option<&TokenStats>,
) -> Result<IdfModel> {
    let partial = docs
        .par_iter()
        .try_fold(
            || DocumentFrequencies::new(config.num_buckets),
            |mut acc, d| {
                acc.add(&term_frequencies(d, config, ranking)?)?;
                Ok::<_, Error>(acc)
            },
        )
        .try_reduce(
            || DocumentFrequencies::new(config.num_buckets),
            |mut a, b| {
                a.merge(&b)?;
                Ok(a)
            },
        )?;
    partial.finish()
}

fn missing(what: &str, spec: &ComposerSpec) -> Error {
    Error::invalid(format!("composer '{}' needs {what}", spec.label))
}

/// Composes one document.
pub fn compose<S: AsRef<str>>(
    doc_id: &str,
    field: Field,
    tokens: &[S],
    spec: &ComposerSpec,
    models: &ComposeModels,
) -> Result<DocVector> {
    let (vector, surviving_tokens) = match &spec.kind {
        ComposerKind::TfidfRaw(cfg) => {
            let idf = models.tfidf.get(cfg).ok_or_else(|| missing("a fitted IDF table", spec))?;
            let tf = term_frequencies(tokens, cfg, models.ranking.as_ref())?;
            let v = apply_idf(&tf, idf)?;
            let surviving = v.indices().iter().map(|&i| tf.get(i) as usize).sum();
            ((!v.is_empty()).then_some(DocRepr::Sparse(v)), surviving)
        }
        ComposerKind::Mean => {
            let model = models.embedding.as_ref().ok_or_else(|| missing("an embedding", spec))?;
            let counts = in_vocab_counts(tokens, model);
            let weighted: Vec<(usize, f64)> = counts.values().map(|&(i, c)| (i, c as f64)).collect();
            let n = counts.values().map(|&(_, c)| c).sum();
            (weighted_mean(model, &weighted).map(DocRepr::Dense), n)
        }
        ComposerKind::TfidfWeightedMean | ComposerKind::BandTfidfWeightedMean { .. } => {
            let model = models.embedding.as_ref().ok_or_else(|| missing("an embedding", spec))?;
            let idf = models.weighting.as_ref().ok_or_else(|| missing("a weighting IDF table", spec))?;
            let band = match spec.kind {
                ComposerKind::BandTfidfWeightedMean { lo, hi } => {
                    let ranking = models.ranking.as_ref().ok_or_else(|| missing("a token ranking", spec))?;
                    Some((ranking, lo, hi))
                }
                _ => None,
            };
            let mut weighted = Vec::new();
            let mut surviving = 0;
            for (tok, (idx, tf)) in in_vocab_counts(tokens, model) {
                if let Some((ranking, lo, hi)) = band {
                    match ranking.rank(tok) {
                        Some(r) if (lo..hi).contains(&r) => {}
                        _ => continue,
                    }
                }
                let w = tf as f64 * idf.idf(hash_token(tok, idf.num_buckets()));
                if w > 0.0 {
                    weighted.push((idx, w));
                    surviving += tf;
                }
            }
            (weighted_mean(model, &weighted).map(DocRepr::Dense), surviving)
        }
    };
    Ok(DocVector {
        doc_id: doc_id.to_string(),
        field,
        vector,
        surviving_tokens,
    })
}

/// Distinct in-vocabulary tokens with (model index, count), ordered by token.
fn in_vocab_counts<'a, S: AsRef<str>>(
    tokens: &'a [S],
    model: &EmbeddingModel,
) -> BTreeMap<&'a str, (usize, usize)> {
    let mut out: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
    for t in tokens {
        let t = t.as_ref();
        if let Some(e) = out.get_mut(t) {
            e.1 += 1;
        } else if let Some(i) = model.index_of(t) {
            out.insert(t, (i, 1));
        }
    }
    out
}

/// `Σ w·v / Σ w`, or `None` when there are no terms.
fn weighted_mean(model: &EmbeddingModel, terms: &[(usize, f64)]) -> Option<DenseVector> {
    if terms.is_empty() {
        return None;
    }
    let mut acc = vec![0.0f64; model.dim()];
    let mut total = 0.0;
    for &(idx, w) in terms {
        for (a, &v) in acc.iter_mut().zip(model.vector_at(idx)) {
            *a += w * v as f64;
        }
        total += w;
    }
    for a in &mut acc {
        *a /= total;
    }
    Some(acc)
}

/// Composed vectors for one field of a corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct ComposedField {
    pub vectors: Vec<DocVector>,
    pub null_count: usize,
}

/// Composes every document; `docs` pairs ids with already tokenized text.
/// Null records are kept and counted.
pub fn compose_corpus<S: AsRef<str> + Sync>(
    docs: &[(&str, &[S])],
    field: Field,
    spec: &ComposerSpec,
    models: &ComposeModels,
) -> Result<ComposedField> {
    let vectors: Vec<DocVector> = docs
        .par_iter()
        .map(|(id, toks)| compose(id, field, toks, spec, models))
        .collect::<Result<_>>()?;
    let null_count = vectors.iter().filter(|v| v.is_null()).count();
    Ok(ComposedField {
        vectors,
        null_count,
    })
}

/// One `doc_id<TAB>field<TAB>null|v,v,…` line. Sparse vectors print as
/// `index:value` pairs.
pub fn write_doc_vector<W: Write>(v: &DocVector, mut w: W) -> Result<()> {
    write!(w, "{}\t{}\t", v.doc_id, v.field)?;
    match &v.vector {
        None => write!(w, "null")?,
        Some(DocRepr::Dense(d)) => {
            for (i, x) in d.iter().enumerate() {
                if i > 0 {
                    w.write_all(b",")?;
                }
                write!(w, "{}", *x as f32)?;
            }
        }
        Some(DocRepr::Sparse(s)) => {
            for (k, (i, x)) in s.iter().enumerate() {
                if k > 0 {
                    w.write_all(b",")?;
                }
                write!(w, "{i}:{}", x as f32)?;
            }
        }
    }
    writeln!(w)?;
    Ok(())
}

/// Token → model index lookup shared by tests and examples.
pub fn vocabulary_index(model: &EmbeddingModel) -> HashMap<&str, usize> {
    model.words().iter().enumerate().map(|(i, w)| (w.as_str(), i)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tfidf::fit_idf;

    fn toy_model() -> EmbeddingModel {
        let words = ["aa", "bb", "cc"].map(String::from).to_vec();
        EmbeddingModel::from_vectors(words, 2, vec![1.0, 0.0, 0.0, 2.0, -1.0, 1.0]).unwrap()
    }

    fn models_with(idf: Option<IdfModel>, ranking: Option<TokenStats>) -> ComposeModels {
        ComposeModels {
            embedding: Some(toy_model()),
            ranking,
            weighting: idf,
            tfidf: BTreeMap::new(),
        }
    }

    #[test]
    fn presets() {
        assert_eq!(ComposerSpec::preset("embedding").unwrap().kind, ComposerKind::Mean);
        assert_eq!(
            ComposerSpec::preset("1K_6K_embedding").unwrap().kind,
            ComposerKind::BandTfidfWeightedMean { lo: 1000, hi: 7000 }
        );
        let t = ComposerSpec::preset("tfidf10k10k").unwrap();
        assert_eq!(t.kind, ComposerKind::TfidfRaw(TfidfConfig::new(10_000, 10_000).unwrap()));
        assert_eq!(t.label, "tfidf 10K/10K");
        assert_eq!(
            ComposerSpec::preset("tfidf5k10k").unwrap().kind,
            ComposerKind::TfidfRaw(TfidfConfig::new(5_000, 10_000).unwrap())
        );
        assert!(ComposerSpec::preset("bogus").is_err());
        assert!(ComposerSpec::band("x", 5, 5).is_err());
        assert_eq!(ComposerSpec::all_presets().len(), 8);
    }

    #[test]
    fn single_token_mean_is_that_vector() {
        let m = models_with(None, None);
        let spec = ComposerSpec::preset("embedding").unwrap();
        let v = compose("d", Field::Title, &["bb", "zz"], &spec, &m).unwrap();
        assert_eq!(v.vector, Some(DocRepr::Dense(vec![0.0, 2.0])));
        assert_eq!(v.surviving_tokens, 1);
    }

    #[test]
    fn mean_respects_multiplicity() {
        let m = models_with(None, None);
        let spec = ComposerSpec::preset("embedding").unwrap();
        let v = compose("d", Field::Title, &["aa", "aa", "bb"], &spec, &m).unwrap();
        let DocRepr::Dense(d) = v.vector.unwrap() else { panic!() };
        assert!((d[0] - 2.0 / 3.0).abs() < 1e-15 && (d[1] - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn all_oov_is_null() {
        let m = models_with(None, None);
        let spec = ComposerSpec::preset("embedding").unwrap();
        let v = compose("d", Field::Abstract, &["zz"], &spec, &m).unwrap();
        assert!(v.is_null());
        assert_eq!(v.surviving_tokens, 0);
        let empty: [&str; 0] = [];
        assert!(compose("d", Field::Abstract, &empty, &spec, &m).unwrap().is_null());
    }

    #[test]
    fn zero_weights_are_dropped() {
        // "aa" appears in every training doc, so its idf is 0.
        let cfg = TfidfConfig::new(0, WEIGHTING_BUCKETS).unwrap();
        let tfs: Vec<SparseVector> = [vec!["aa", "bb"], vec!["aa"]]
            .iter()
            .map(|d| term_frequencies(d, &cfg, None).unwrap())
            .collect();
        let m = models_with(Some(fit_idf(&tfs).unwrap()), None);
        let spec = ComposerSpec::preset("TFIDF_embedding").unwrap();
        let v = compose("d", Field::Title, &["aa", "bb"], &spec, &m).unwrap();
        assert_eq!(v.vector, Some(DocRepr::Dense(vec![0.0, 2.0])));
        assert!(compose("d", Field::Title, &["aa"], &spec, &m).unwrap().is_null());
    }

    #[test]
    fn missing_models_are_errors() {
        let spec = ComposerSpec::preset("TFIDF_embedding").unwrap();
        assert!(compose("d", Field::Title, &["aa"], &spec, &ComposeModels::default()).is_err());
        let raw = ComposerSpec::preset("tfidf5k5k").unwrap();
        assert!(compose("d", Field::Title, &["aa"], &raw, &models_with(None, None)).is_err());
    }

    #[test]
    fn dump_lines() {
        let mut out = Vec::new();
        let v = DocVector {
            doc_id: "d1".into(),
            field: Field::Title,
            vector: Some(DocRepr::Dense(vec![0.5, -1.0])),
            surviving_tokens: 2,
        };
        write_doc_vector(&v, &mut out).unwrap();
        let n = DocVector { vector: None, surviving_tokens: 0, ..v };
        write_doc_vector(&n, &mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "d1\ttitle\t0.5,-1\nd1\ttitle\tnull\n");
    }

    #[test]
    fn mixed_dot() {
        let s = DocRepr::Sparse(SparseVector::from_pairs(3, vec![(1, 2.0)]));
        let d = DocRepr::Dense(vec![1.0, 3.0, 5.0]);
        assert_eq!(s.dot(&d).unwrap(), 6.0);
        assert_eq!(s.to_dense(), vec![0.0, 2.0, 0.0]);
        assert_eq!(d.to_sparse().nnz(), 3);
    }
}
