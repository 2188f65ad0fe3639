use nalgebra::{DMatrix, SymmetricEigen};

use crate::{Error, Result};

/// A fitted principal component projection.
#[derive(Debug, Clone, PartialEq)]
pub struct Pca {
    pub mean: Vec<f64>,
    /// `k` unit rows of length `dim`, by decreasing variance.
    pub components: Vec<Vec<f64>>,
    /// Variance along each component (denominator `n - 1`).
    pub eigenvalues: Vec<f64>,
    /// Sum of all per-dimension variances.
    pub total_variance: f64,
    /// The input rows projected onto the components.
    pub projected: Vec<Vec<f64>>,
}

impl Pca {
    pub fn transform(&self, row: &[f64]) -> Vec<f64> {
        self.components
            .iter()
            .map(|c| c.iter().zip(row).zip(&self.mean).map(|((c, x), m)| c * (x - m)).sum())
            .collect()
    }

    pub fn reconstruct(&self, coords: &[f64]) -> Vec<f64> {
        let mut out = self.mean.clone();
        for (c, &a) in self.components.iter().zip(coords) {
            for (o, v) in out.iter_mut().zip(c) {
                *o += a * v;
            }
        }
        out
    }
}

/// Projects `data` onto its top-`k` covariance eigenvectors. Each
/// component's largest-magnitude loading is made positive.
///
/// When there are more dimensions than rows the eigenproblem is solved on
/// the `n × n` Gram matrix instead; components with zero variance then come
/// back as zero rows.
pub fn pca(data: &[Vec<f64>], k: usize) -> Result<Pca> {
    let wide = data.first().is_some_and(|r| r.len() > data.len());
    pca_with(data, k, wide)
}

fn pca_with(data: &[Vec<f64>], k: usize, use_gram: bool) -> Result<Pca> {
    let n = data.len();
    if n < 2 {
        return Err(Error::invalid("PCA needs at least two rows"));
    }
    let dim = data[0].len();
    if let Some(r) = data.iter().find(|r| r.len() != dim) {
        return Err(Error::DimensionMismatch { left: dim, right: r.len() });
    }
    if k == 0 || k > n.min(dim) {
        return Err(Error::invalid(format!("k = {k} must be in 1..={}", n.min(dim))));
    }
    let mut mean = vec![0.0; dim];
    for r in data {
        for (m, x) in mean.iter_mut().zip(r) {
            *m += x;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    let x = DMatrix::from_fn(n, dim, |i, j| data[i][j] - mean[j]);
    let denom = (n - 1) as f64;
    let total_variance = x.iter().map(|v| v * v).sum::<f64>() / denom;

    let mut components = Vec::with_capacity(k);
    let mut eigenvalues = Vec::with_capacity(k);
    if !use_gram {
        let cov = (x.transpose() * &x) / denom;
        let eig = SymmetricEigen::new(cov);
        for idx in descending(eig.eigenvalues.as_slice()).into_iter().take(k) {
            eigenvalues.push(eig.eigenvalues[idx].max(0.0));
            components.push(eig.eigenvectors.column(idx).iter().copied().collect());
        }
    } else {
        let gram = (&x * x.transpose()) / denom;
        let eig = SymmetricEigen::new(gram);
        let scale_tol = 1e-12 * eig.eigenvalues.amax().max(f64::MIN_POSITIVE);
        for idx in descending(eig.eigenvalues.as_slice()).into_iter().take(k) {
            let lambda = eig.eigenvalues[idx].max(0.0);
            eigenvalues.push(lambda);
            if lambda <= scale_tol {
                components.push(vec![0.0; dim]);
                continue;
            }
            let v = x.transpose() * eig.eigenvectors.column(idx);
            let norm = v.norm();
            components.push(v.iter().map(|c| c / norm).collect());
        }
    }
    for c in &mut components {
        fix_sign(c);
    }
    let projected = (0..n)
        .map(|i| {
            components
                .iter()
                .map(|c| c.iter().zip(x.row(i).iter()).map(|(a, b)| a * b).sum())
                .collect()
        })
        .collect();
    Ok(Pca {
        mean,
        components,
        eigenvalues,
        total_variance,
        projected,
    })
}

fn descending(values: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    idx
}

fn fix_sign(c: &mut [f64]) {
    let mut best = 0;
    for i in 1..c.len() {
        if c[i].abs() > c[best].abs() {
            best = i;
        }
    }
    if c.get(best).is_some_and(|v| *v < 0.0) {
        c.iter_mut().for_each(|v| *v = -*v);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(n: usize, dim: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect()
    }

    #[test]
    fn orthonormal_and_sorted() {
        let data = random(100, 20, 1);
        let p = pca(&data, 20).unwrap();
        for (i, a) in p.components.iter().enumerate() {
            for (j, b) in p.components.iter().enumerate() {
                let d: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
                assert!((d - f64::from(i == j)).abs() < 1e-8);
            }
        }
        assert!(p.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
        let kept: f64 = p.eigenvalues.iter().sum();
        assert!((kept - p.total_variance).abs() < 1e-9 * p.total_variance);
    }

    #[test]
    fn low_rank_reconstructs_exactly() {
        let base = random(30, 3, 2);
        let data: Vec<Vec<f64>> = base
            .iter()
            .map(|r| r.iter().copied().chain(std::iter::repeat(0.0).take(5)).collect())
            .collect();
        let p = pca(&data, 3).unwrap();
        for (row, coords) in data.iter().zip(&p.projected) {
            for (a, b) in row.iter().zip(p.reconstruct(coords)) {
                assert!((a - b).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn gram_path_matches_covariance_path() {
        let data = random(12, 40, 3);
        let (g, c) = (pca_with(&data, 5, true).unwrap(), pca_with(&data, 5, false).unwrap());
        for (a, b) in g.eigenvalues.iter().zip(&c.eigenvalues) {
            assert!((a - b).abs() < 1e-9);
        }
        for (a, b) in g.components.iter().flatten().zip(c.components.iter().flatten()) {
            assert!((a - b).abs() < 1e-8);
        }
        for (a, b) in g.projected.iter().flatten().zip(c.projected.iter().flatten()) {
            assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn translation_invariant() {
        let data = random(50, 6, 4);
        let shifted: Vec<Vec<f64>> = data.iter().map(|r| r.iter().map(|x| x + 7.5).collect()).collect();
        let (a, b) = (pca(&data, 3).unwrap(), pca(&shifted, 3).unwrap());
        for (r, s) in a.projected.iter().zip(&b.projected) {
            for (x, y) in r.iter().zip(s) {
                assert!((x - y).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn sign_convention() {
        let p = pca(&random(40, 5, 5), 5).unwrap();
        for c in &p.components {
            let m = c.iter().copied().fold(0.0f64, |a, v| if v.abs() > a.abs() { v } else { a });
            assert!(m > 0.0);
        }
    }

    #[test]
    fn k_too_large() {
        assert!(pca(&random(5, 3, 1), 4).is_err());
        assert!(pca(&random(5, 3, 1), 0).is_err());
        assert!(pca(&random(1, 3, 1), 1).is_err());
    }
}
