//! Hashed TFIDF document vectors.
//!
//! Tokens are hashed into `num_buckets` buckets with MurmurHash3 (x86, 32-bit,
//! seed 42). An optional vocabulary cut keeps only the `vocab_size` most
//! frequent tokens before hashing. Term frequencies are raw counts and the IDF
//! is `ln((N + 1) / (df + 1))`.

use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::TokenStats;
use crate::{DenseVector, Error, Result};

pub const HASH_SEED: u32 = 42;

/// Vocabulary cut plus bucket count, labelled `"<vocab>/<buckets>"`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TfidfConfig {
    /// Keep the top-`vocab_size` tokens by corpus frequency; 0 keeps all.
    pub vocab_size: usize,
    pub num_buckets: usize,
}

impl TfidfConfig {
    pub fn new(vocab_size: usize, num_buckets: usize) -> Result<Self> {
        if num_buckets == 0 {
            return Err(Error::invalid("num_buckets must be at least 1"));
        }
        Ok(TfidfConfig {
            vocab_size,
            num_buckets,
        })
    }

    /// e.g. `10K/10K`; an unlimited vocabulary prints as `all`.
    pub fn label(&self) -> String {
        let v = if self.vocab_size == 0 {
            "all".to_string()
        } else {
            short_count(self.vocab_size)
        };
        format!("{v}/{}", short_count(self.num_buckets))
    }
}

fn short_count(n: usize) -> String {
    if n >= 1000 && n % 1000 == 0 {
        format!("{}K", n / 1000)
    } else {
        n.to_string()
    }
}

fn parse_count(s: &str) -> Result<usize> {
    let s = s.trim();
    if s.eq_ignore_ascii_case("all") {
        return Ok(0);
    }
    let (num, mult) = match s.strip_suffix(['k', 'K']) {
        Some(n) => (n, 1000),
        None => (s, 1),
    };
    num.parse::<usize>()
        .map(|n| n * mult)
        .map_err(|_| Error::invalid(format!("bad count '{s}'")))
}

impl fmt::Display for TfidfConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(&self.label())
    }
}

impl FromStr for TfidfConfig {
    type Err = Error;

    /// Parses `"10K/5K"` style labels.
    fn from_str(s: &str) -> Result<Self> {
        let (v, b) = s
            .split_once('/')
            .ok_or_else(|| Error::invalid(format!("expected '<vocab>/<buckets>', got '{s}'")))?;
        TfidfConfig::new(parse_count(v)?, parse_count(b)?)
    }
}

/// Sorted index/value pairs over `dim` buckets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseVector {
    dim: usize,
    indices: Vec<u32>,
    values: Vec<f64>,
}

impl SparseVector {
    pub fn empty(dim: usize) -> Self {
        SparseVector {
            dim,
            indices: Vec::new(),
            values: Vec::new(),
        }
    }

    /// Checks strictly ascending in-range indices and finite values.
    pub fn new(dim: usize, indices: Vec<u32>, values: Vec<f64>) -> Result<Self> {
        if indices.len() != values.len() {
            return Err(Error::invalid("indices and values differ in length"));
        }
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("indices must be strictly ascending"));
        }
        if indices.last().is_some_and(|&i| i as usize >= dim) {
            return Err(Error::invalid("index out of range"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("non-finite value"));
        }
        Ok(SparseVector {
            dim,
            indices,
            values,
        })
    }

    /// Builds from unsorted `(index, value)` pairs, summing duplicates and
    /// dropping zeros.
    pub fn from_pairs(dim: usize, mut pairs: Vec<(u32, f64)>) -> Self {
        pairs.sort_by_key(|p| p.0);
        let mut indices = Vec::with_capacity(pairs.len());
        let mut values: Vec<f64> = Vec::with_capacity(pairs.len());
        for (i, v) in pairs {
            if indices.last() == Some(&i) {
                *values.last_mut().unwrap() += v;
            } else {
                indices.push(i);
                values.push(v);
            }
        }
        let mut out = SparseVector {
            dim,
            indices,
            values,
        };
        out.retain_nonzero();
        out
    }

    fn retain_nonzero(&mut self) {
        let mut k = 0;
        for j in 0..self.indices.len() {
            if self.values[j] != 0.0 {
                self.indices[k] = self.indices[j];
                self.values[k] = self.values[j];
                k += 1;
            }
        }
        self.indices.truncate(k);
        self.values.truncate(k);
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[u32] {
        &self.indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, index: u32) -> f64 {
        match self.indices.binary_search(&index) {
            Ok(k) => self.values[k],
            Err(_) => 0.0,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.indices.iter().copied().zip(self.values.iter().copied())
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn scale(&mut self, factor: f64) {
        for v in &mut self.values {
            *v *= factor;
        }
        self.retain_nonzero();
    }
}

/// Bucket of `token`: MurmurHash3 x86_32 (seed 42) of its UTF-8 bytes, as
/// an unsigned integer, modulo `num_buckets`.
pub fn hash_token(token: &str, num_buckets: usize) -> u32 {
    assert!(num_buckets >= 1, "num_buckets must be at least 1");
    let h = murmur3::murmur3_32(&mut token.as_bytes(), HASH_SEED).expect("in-memory read");
    (h as u64 % num_buckets as u64) as u32
}

/// Raw hashed term counts of the tokens that survive the vocabulary cut.
pub fn term_frequencies<S: AsRef<str>>(
    tokens: &[S],
    config: &TfidfConfig,
    ranking: Option<&TokenStats>,
) -> Result<SparseVector> {
    let ranking = match (config.vocab_size, ranking) {
        (0, _) => None,
        (_, Some(r)) => Some(r),
        (_, None) => {
            return Err(Error::invalid(
                "a vocabulary cut requires a token frequency ranking",
            ))
        }
    };
    let pairs = tokens
        .iter()
        .map(AsRef::as_ref)
        .filter(|t| ranking.is_none_or(|r| r.in_top(t, config.vocab_size)))
        .map(|t| (hash_token(t, config.num_buckets), 1.0))
        .collect();
    Ok(SparseVector::from_pairs(config.num_buckets, pairs))
}

/// Per-bucket inverse document frequencies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdfModel {
    idf: Vec<f64>,
    n_docs: u64,
}

impl IdfModel {
    /// A table from explicit per-bucket values.
    pub fn from_values(idf: Vec<f64>, n_docs: u64) -> Result<Self> {
        if idf.is_empty() {
            return Err(Error::invalid("IDF table needs at least one bucket"));
        }
        if idf.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::invalid("IDF values must be finite and non-negative"));
        }
        Ok(IdfModel { idf, n_docs })
    }

    pub fn num_buckets(&self) -> usize {
        self.idf.len()
    }

    pub fn n_docs(&self) -> u64 {
        self.n_docs
    }

    pub fn idf(&self, bucket: u32) -> f64 {
        self.idf[bucket as usize]
    }

    pub fn values(&self) -> &[f64] {
        &self.idf
    }
}

/// Document-frequency accumulator. Partial counts from separate partitions
/// can be merged before [`DocumentFrequencies::finish`].
#[derive(Debug, Clone)]
pub struct DocumentFrequencies {
    df: Vec<u64>,
    n_docs: u64,
}

impl DocumentFrequencies {
    pub fn new(num_buckets: usize) -> Self {
        DocumentFrequencies {
            df: vec![0; num_buckets],
            n_docs: 0,
        }
    }

    pub fn add(&mut self, tf: &SparseVector) -> Result<()> {
        check_dim(self.df.len(), tf.dim())?;
        self.n_docs += 1;
        for (i, v) in tf.iter() {
            if v != 0.0 {
                self.df[i as usize] += 1;
            }
        }
        Ok(())
    }

    pub fn merge(&mut self, other: &DocumentFrequencies) -> Result<()> {
        check_dim(self.df.len(), other.df.len())?;
        self.n_docs += other.n_docs;
        for (a, b) in self.df.iter_mut().zip(&other.df) {
            *a += b;
        }
        Ok(())
    }

    pub fn finish(self) -> Result<IdfModel> {
        if self.n_docs == 0 {
            return Err(Error::invalid("cannot fit IDF on zero documents"));
        }
        let n1 = (self.n_docs + 1) as f64;
        let idf = self
            .df
            .iter()
            .map(|&df| (n1 / (df + 1) as f64).ln())
            .collect();
        Ok(IdfModel {
            idf,
            n_docs: self.n_docs,
        })
    }
}

/// `idf(b) = ln((N + 1) / (df(b) + 1))` over the given term-frequency vectors.
pub fn fit_idf(tf_vectors: &[SparseVector]) -> Result<IdfModel> {
    let first = tf_vectors
        .first()
        .ok_or_else(|| Error::invalid("cannot fit IDF on zero documents"))?;
    let mut acc = DocumentFrequencies::new(first.dim());
    for v in tf_vectors {
        acc.add(v)?;
    }
    acc.finish()
}

/// Multiplies term frequencies by IDF; zero products are omitted.
pub fn apply_idf(tf: &SparseVector, idf: &IdfModel) -> Result<SparseVector> {
    check_dim(idf.num_buckets(), tf.dim())?;
    let pairs = tf.iter().map(|(i, v)| (i, v * idf.idf(i))).collect();
    Ok(SparseVector::from_pairs(tf.dim(), pairs))
}

pub fn tfidf_vector<S: AsRef<str>>(
    tokens: &[S],
    config: &TfidfConfig,
    idf: &IdfModel,
    ranking: Option<&TokenStats>,
) -> Result<SparseVector> {
    check_dim(idf.num_buckets(), config.num_buckets)?;
    apply_idf(&term_frequencies(tokens, config, ranking)?, idf)
}

fn check_dim(left: usize, right: usize) -> Result<()> {
    if left != right {
        return Err(Error::DimensionMismatch { left, right });
    }
    Ok(())
}

pub fn sparse_dot(a: &SparseVector, b: &SparseVector) -> Result<f64> {
    check_dim(a.dim, b.dim)?;
    Ok(sparse_dot_unchecked(a, b))
}

/// Merge-join inner product; callers guarantee equal dimensions.
#[inline]
pub fn sparse_dot_unchecked(a: &SparseVector, b: &SparseVector) -> f64 {
    let (ai, av) = (&a.indices, &a.values);
    let (bi, bv) = (&b.indices, &b.values);
    let (mut i, mut j) = (0, 0);
    let mut acc = 0.0;
    while i < ai.len() && j < bi.len() {
        match ai[i].cmp(&bi[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                acc += av[i] * bv[j];
                i += 1;
                j += 1;
            }
        }
    }
    acc
}

pub fn to_dense(a: &SparseVector) -> DenseVector {
    let mut out = vec![0.0; a.dim];
    for (i, v) in a.iter() {
        out[i as usize] = v;
    }
    out
}

pub fn dense_dot(a: &[f64], b: &[f64]) -> Result<f64> {
    check_dim(a.len(), b.len())?;
    Ok(dense_dot_unchecked(a, b))
}

/// Inner product with four independent accumulators.
#[inline]
pub fn dense_dot_unchecked(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0f64; 4];
    let ca = a.chunks_exact(4);
    let cb = b.chunks_exact(4);
    let tail: f64 = ca
        .remainder()
        .iter()
        .zip(cb.remainder())
        .map(|(x, y)| x * y)
        .sum();
    for (x, y) in ca.zip(cb) {
        acc[0] += x[0] * y[0];
        acc[1] += x[1] * y[1];
        acc[2] += x[2] * y[2];
        acc[3] += x[3] * y[3];
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// Writes `tfidf v1 <num_buckets> <vocab_size> <n_docs>` then one
/// `bucket idf` line per bucket.
pub fn write_model<W: Write>(config: &TfidfConfig, idf: &IdfModel, mut w: W) -> Result<()> {
    check_dim(config.num_buckets, idf.num_buckets())?;
    writeln!(
        w,
        "tfidf v1 {} {} {}",
        config.num_buckets, config.vocab_size, idf.n_docs
    )?;
    for (b, v) in idf.idf.iter().enumerate() {
        writeln!(w, "{b} {v}")?;
    }
    Ok(())
}

pub fn read_model<R: BufRead>(r: R) -> Result<(TfidfConfig, IdfModel)> {
    let mut lines = r.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::parse(1, "missing header"))??;
    let parts: Vec<&str> = header.split_whitespace().collect();
    if parts.len() != 5 || parts[0] != "tfidf" || parts[1] != "v1" {
        return Err(Error::parse(1, "expected 'tfidf v1 <num_buckets> <vocab_size> <n_docs>'"));
    }
    let num = |s: &str| s.parse::<u64>().map_err(|_| Error::parse(1, format!("bad number '{s}'")));
    let num_buckets = num(parts[2])? as usize;
    let vocab_size = num(parts[3])? as usize;
    let n_docs = num(parts[4])?;
    let config = TfidfConfig::new(vocab_size, num_buckets).map_err(|e| Error::parse(1, e.to_string()))?;

    let mut idf = vec![f64::NAN; num_buckets];
    let mut count = 0;
    for (k, line) in lines.enumerate() {
        let lineno = k + 2;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let (b, v) = line
            .split_once(' ')
            .ok_or_else(|| Error::parse(lineno, "expected 'bucket idf'"))?;
        let b: usize = b.parse().map_err(|_| Error::parse(lineno, "bad bucket"))?;
        let v: f64 = v.trim().parse().map_err(|_| Error::parse(lineno, "bad idf value"))?;
        if b >= num_buckets || !idf[b].is_nan() {
            return Err(Error::parse(lineno, format!("bucket {b} out of range or repeated")));
        }
        if !(v.is_finite() && v >= 0.0) {
            return Err(Error::parse(lineno, "idf must be finite and non-negative"));
        }
        idf[b] = v;
        count += 1;
    }
    if count != num_buckets {
        return Err(Error::parse(
            count + 1,
            format!("expected {num_buckets} bucket lines, found {count}"),
        ));
    }
    Ok((config, IdfModel { idf, n_docs }))
}

/// One `doc_id idx:val idx:val …` line.
pub fn write_vector_line<W: Write>(doc_id: &str, v: &SparseVector, mut w: W) -> Result<()> {
    write!(w, "{doc_id}")?;
    for (i, x) in v.iter() {
        write!(w, " {i}:{x}")?;
    }
    writeln!(w)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::TokenStats;
    use proptest::prelude::*;
    use std::collections::HashSet;

    fn stats(docs: &[&[&str]]) -> TokenStats {
        TokenStats::from_token_docs(docs.iter().map(|d| d.iter().copied()))
    }

    #[test]
    fn murmur3_reference_vectors() {
        // Published MurmurHash3_x86_32 test vectors.
        let h = |s: &str, seed| murmur3::murmur3_32(&mut s.as_bytes(), seed).unwrap();
        assert_eq!(h("", 0), 0);
        assert_eq!(h("", 1), 0x514E_28B7);
        assert_eq!(h("hello", 0), 0x248B_FA47);
        assert_eq!(h("The quick brown fox jumps over the lazy dog", 0), 0x2E4F_F723);
    }

    #[test]
    fn single_bucket() {
        for t in ["a", "b", "anything"] {
            assert_eq!(hash_token(t, 1), 0);
        }
    }

    #[test]
    fn hashing_is_deterministic() {
        assert_eq!(hash_token("protein", 10_000), hash_token("protein", 10_000));
    }

    #[test]
    fn occupancy_matches_birthday_statistics() {
        let n = 10_000;
        let occupied: HashSet<u32> = (0..n).map(|i| hash_token(&format!("tok{i}x"), n)).collect();
        // Expected (1 - 1/e) * n ≈ 6321.
        assert!((6000..=6700).contains(&occupied.len()), "{}", occupied.len());
    }

    #[test]
    fn counts_per_bucket() {
        let b = 1 << 20;
        let cfg = TfidfConfig::new(0, b).unwrap();
        let (ha, hb) = (hash_token("a", b), hash_token("b", b));
        assert_ne!(ha, hb);
        let tf = term_frequencies(&["a", "a", "b"], &cfg, None).unwrap();
        assert_eq!(tf.get(ha), 2.0);
        assert_eq!(tf.get(hb), 1.0);
        assert_eq!(tf.nnz(), 2);
    }

    #[test]
    fn vocabulary_cut_drops_rare_tokens() {
        let b = 1 << 20;
        let ranking = stats(&[&["a", "a", "b"]]);
        let cfg = TfidfConfig::new(1, b).unwrap();
        let tf = term_frequencies(&["a", "a", "b"], &cfg, Some(&ranking)).unwrap();
        assert_eq!(tf.nnz(), 1);
        assert_eq!(tf.get(hash_token("a", b)), 2.0);
        assert!(term_frequencies(&["a"], &cfg, None).is_err());
    }

    #[test]
    fn colliding_tokens_sum() {
        let b = 97;
        let target = hash_token("alpha", b);
        let other = (0..10_000)
            .map(|i| format!("w{i}"))
            .find(|t| hash_token(t, b) == target)
            .expect("collision in 97 buckets");
        let cfg = TfidfConfig::new(0, b).unwrap();
        let tf = term_frequencies(&["alpha", other.as_str(), "alpha"], &cfg, None).unwrap();
        assert_eq!(tf.nnz(), 1);
        assert_eq!(tf.get(target), 3.0);
    }

    #[test]
    fn idf_formula() {
        let dim = 4;
        let docs: Vec<SparseVector> = (0..9)
            .map(|_| SparseVector::from_pairs(dim, vec![(0, 1.0)]))
            .collect();
        let idf = fit_idf(&docs).unwrap();
        assert_eq!(idf.idf(0), 0.0);
        assert!((idf.idf(3) - 2.302_585_092_994_046).abs() < 1e-12);
        let one = fit_idf(&[SparseVector::from_pairs(dim, vec![(2, 5.0)])]).unwrap();
        assert_eq!(one.idf(2), 0.0);
        assert!(fit_idf(&[]).is_err());
    }

    #[test]
    fn tfidf_products() {
        let tf = SparseVector::from_pairs(8, vec![(3, 2.0)]);
        let mut idf = IdfModel {
            idf: vec![1.0; 8],
            n_docs: 1,
        };
        idf.idf[3] = 0.0;
        assert!(apply_idf(&tf, &idf).unwrap().is_empty());
        idf.idf[3] = 1.5;
        let v = apply_idf(&tf, &idf).unwrap();
        assert_eq!(v.indices(), &[3]);
        assert_eq!(v.values(), &[3.0]);
    }

    #[test]
    fn bucket_mismatch_is_error() {
        let idf = fit_idf(&[SparseVector::empty(5)]).unwrap();
        let cfg = TfidfConfig::new(0, 6).unwrap();
        assert!(matches!(
            tfidf_vector(&["a"], &cfg, &idf, None),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn dot_basics() {
        let a = SparseVector::from_pairs(4, vec![(0, 2.0)]);
        assert_eq!(sparse_dot(&a, &a).unwrap(), 4.0);
        let b = SparseVector::from_pairs(4, vec![(1, 2.0)]);
        assert_eq!(sparse_dot(&a, &b).unwrap(), 0.0);
        assert!(sparse_dot(&a, &SparseVector::empty(5)).is_err());
        assert!(dense_dot(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn labels() {
        assert_eq!(TfidfConfig::new(10_000, 10_000).unwrap().label(), "10K/10K");
        assert_eq!(TfidfConfig::new(5000, 10_000).unwrap().label(), "5K/10K");
        assert_eq!(TfidfConfig::new(0, 1500).unwrap().label(), "all/1500");
        assert_eq!("10k/5K".parse::<TfidfConfig>().unwrap(), TfidfConfig::new(10_000, 5000).unwrap());
        assert!(TfidfConfig::new(5, 0).is_err());
    }

    #[test]
    fn model_file_round_trip_and_errors() {
        let cfg = TfidfConfig::new(2, 3).unwrap();
        let idf = fit_idf(&[SparseVector::from_pairs(3, vec![(1, 1.0)])]).unwrap();
        let mut buf = Vec::new();
        write_model(&cfg, &idf, &mut buf).unwrap();
        assert!(String::from_utf8_lossy(&buf).starts_with("tfidf v1 3 2 1\n"));
        let (c2, i2) = read_model(&buf[..]).unwrap();
        assert_eq!((c2, i2), (cfg, idf));
        let truncated = "tfidf v1 3 2 1\n0 0.5\n";
        assert!(matches!(read_model(truncated.as_bytes()), Err(Error::Parse { .. })));
        assert!(matches!(read_model("tf v1 3\n".as_bytes()), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn vector_dump_line() {
        let v = SparseVector::from_pairs(10, vec![(7, 0.5), (2, 1.0)]);
        let mut out = Vec::new();
        write_vector_line("d1", &v, &mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "d1 2:1 7:0.5\n");
    }

    #[test]
    fn vocabulary_growth_is_monotonic() {
        let ranking = stats(&[&["a", "a", "a", "b", "b", "c", "d", "d", "d", "d"]]);
        let mut prev: HashSet<String> = HashSet::new();
        for v in 1..=5 {
            let kept: HashSet<String> = ranking
                .ranking()
                .iter()
                .filter(|t| ranking.in_top(t, v))
                .cloned()
                .collect();
            assert!(prev.is_subset(&kept));
            prev = kept;
        }
    }

    fn sparse_strategy(dim: usize) -> impl Strategy<Value = SparseVector> {
        proptest::collection::vec((0..dim as u32, -10.0f64..10.0), 0..40)
            .prop_map(move |pairs| SparseVector::from_pairs(dim, pairs))
    }

    proptest! {
        #[test]
        fn sparse_and_dense_dot_agree(a in sparse_strategy(300), b in sparse_strategy(300)) {
            let s = sparse_dot(&a, &b).unwrap();
            let d = dense_dot(&to_dense(&a), &to_dense(&b)).unwrap();
            let scale: f64 = a.iter().map(|(i, x)| (x * b.get(i)).abs()).sum::<f64>().max(1e-300);
            prop_assert!((s - d).abs() <= 1e-9 * scale);
        }

        #[test]
        fn buckets_in_range(token in "\\PC{1,12}", buckets in 1usize..5000) {
            prop_assert!((hash_token(&token, buckets) as usize) < buckets);
        }

        #[test]
        fn tf_values_are_positive_integers(tokens in proptest::collection::vec("[a-e]{1,2}", 0..30)) {
            let cfg = TfidfConfig::new(0, 16).unwrap();
            let tf = term_frequencies(&tokens, &cfg, None).unwrap();
            prop_assert_eq!(tf.values().iter().sum::<f64>() as usize, tokens.len());
            for &v in tf.values() {
                prop_assert!(v >= 1.0 && v.fract() == 0.0);
            }
        }
    }
}
