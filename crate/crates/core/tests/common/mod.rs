//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;

use emberank::corpus::SynthSpec;

/// 2 topics × 5 journals × 20 documents.
pub fn small_spec() -> SynthSpec {
    SynthSpec {
        n_topics: 2,
        journals_per_topic: 5,
        docs_per_journal: 20,
        topic_vocab_size: 200,
        shared_vocab_size: 300,
        title_len: 8,
        abstract_len: 60,
        ..SynthSpec::default()
    }
}

pub fn naive_dot(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..a.len() {
        s += a[i] * b[i];
    }
    s
}

pub fn naive_cosine(a: &[f64], b: &[f64]) -> f64 {
    naive_dot(a, b) / (naive_dot(a, a).sqrt() * naive_dot(b, b).sqrt())
}

/// Sorts every journal by (similarity desc, id asc) and returns the 1-based
/// position of `truth` plus the winner.
pub fn oracle_rank(sims: &BTreeMap<String, f64>, truth: &str) -> (usize, String, f64) {
    let mut list: Vec<(&String, f64)> = sims.iter().map(|(j, &s)| (j, s)).collect();
    list.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then_with(|| a.0.cmp(b.0)));
    let pos = list.iter().position(|(j, _)| *j == truth).unwrap() + 1;
    (pos, list[0].0.clone(), list[0].1)
}

pub fn oracle_median(ranks: &[usize]) -> f64 {
    let mut s = ranks.to_vec();
    s.sort();
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2] as f64
    } else {
        (s[n / 2 - 1] as f64 + s[n / 2] as f64) / 2.0
    }
}

pub fn oracle_average(ranks: &[usize]) -> f64 {
    let total: usize = ranks.iter().sum();
    total as f64 / ranks.len() as f64
}

/// `(r, fraction with rank ≤ r)` at every distinct rank.
pub fn oracle_cdf(ranks: &[usize]) -> Vec<(usize, f64)> {
    let mut distinct: Vec<usize> = ranks.to_vec();
    distinct.sort();
    distinct.dedup();
    distinct
        .into_iter()
        .map(|r| (r, ranks.iter().filter(|&&x| x <= r).count() as f64 / ranks.len() as f64))
        .collect()
}

/// Average ranks by counting, then Pearson on the ranks.
pub fn oracle_spearman(x: &[f64], y: &[f64]) -> f64 {
    let rank = |v: &[f64]| -> Vec<f64> {
        v.iter()
            .map(|a| {
                let less = v.iter().filter(|b| *b < a).count() as f64;
                let equal = v.iter().filter(|b| *b == a).count() as f64;
                less + (equal + 1.0) / 2.0
            })
            .collect()
    };
    let (rx, ry) = (rank(x), rank(y));
    let n = x.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for i in 0..x.len() {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    sxy / (sxx * syy).sqrt()
}

pub fn mean_pairwise_distance(points: &[(f64, f64)], pairs: &[(usize, usize)]) -> f64 {
    pairs
        .iter()
        .map(|&(i, j)| ((points[i].0 - points[j].0).powi(2) + (points[i].1 - points[j].1).powi(2)).sqrt())
        .sum::<f64>()
        / pairs.len() as f64
}
