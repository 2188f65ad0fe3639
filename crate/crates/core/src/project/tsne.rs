use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

const ENTROPY_TOL: f64 = 1e-5;
const MAX_BISECTION_STEPS: usize = 50;
const MIN_GAIN: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProjectionConfig {
    pub pca_dims: usize,
    pub perplexity: f64,
    pub iterations: usize,
    pub early_exaggeration: f64,
    /// Iterations run with exaggerated P and the initial momentum.
    pub exaggeration_iters: usize,
    pub initial_momentum: f64,
    pub final_momentum: f64,
    pub step_size: f64,
    pub seed: u64,
}

impl Default for ProjectionConfig {
    fn default() -> Self {
        ProjectionConfig {
            pca_dims: 50,
            perplexity: 30.0,
            iterations: 1000,
            early_exaggeration: 12.0,
            exaggeration_iters: 250,
            initial_momentum: 0.5,
            final_momentum: 0.8,
            step_size: 200.0,
            seed: 1,
        }
    }
}

impl ProjectionConfig {
    pub fn max_perplexity(n_points: usize) -> f64 {
        (n_points as f64 - 1.0) / 3.0
    }

    pub fn validate(&self, n_points: usize) -> Result<()> {
        if n_points < 5 {
            return Err(Error::invalid(format!("tSNE needs at least 5 points, got {n_points}")));
        }
        let max = Self::max_perplexity(n_points);
        if !(self.perplexity > 0.0 && self.perplexity < max) {
            return Err(Error::invalid(format!(
                "perplexity {} infeasible for {n_points} points (must be below {max:.3})",
                self.perplexity
            )));
        }
        if self.iterations < self.exaggeration_iters.max(250) {
            return Err(Error::invalid("tSNE needs at least 250 iterations"));
        }
        if !(self.step_size > 0.0 && self.early_exaggeration >= 1.0) {
            return Err(Error::invalid("step size must be positive and exaggeration at least 1"));
        }
        Ok(())
    }

    /// Lowers the perplexity to the largest integer below the feasibility
    /// bound when it is too high for `n_points`.
    pub fn fit_to(&self, n_points: usize) -> ProjectionConfig {
        let max = Self::max_perplexity(n_points);
        let mut out = self.clone();
        if self.perplexity >= max {
            out.perplexity = (max.ceil() - 1.0).max(1.0);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TsneResult {
    pub embedding: Vec<[f64; 2]>,
    /// KL(P‖Q) at the initial layout.
    pub kl_initial: f64,
    pub kl_final: f64,
}

fn squared_distances(points: &[Vec<f64>]) -> Vec<f64> {
    let n = points.len();
    let mut d = vec![0.0; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let s: f64 = points[i].iter().zip(&points[j]).map(|(a, b)| (a - b) * (a - b)).sum();
            d[i * n + j] = s;
            d[j * n + i] = s;
        }
    }
    d
}

/// Conditional row for point `i` whose entropy (nats) matches `ln(perplexity)`.
fn conditional_row(d: &[f64], i: usize, target: f64, row: &mut [f64]) {
    let n = row.len();
    let d_min = (0..n).filter(|&j| j != i).map(|j| d[j]).fold(f64::INFINITY, f64::min);
    let (mut beta, mut lo, mut hi) = (1.0, 0.0, f64::INFINITY);
    for _ in 0..MAX_BISECTION_STEPS {
        let mut sum = 0.0;
        let mut weighted = 0.0;
        for j in 0..n {
            row[j] = if j == i { 0.0 } else { (-beta * (d[j] - d_min)).exp() };
            sum += row[j];
            weighted += row[j] * (d[j] - d_min);
        }
        let entropy = sum.ln() + beta * weighted / sum;
        let diff = entropy - target;
        if diff.abs() < ENTROPY_TOL {
            break;
        }
        if diff > 0.0 {
            lo = beta;
            beta = if hi.is_finite() { (beta + hi) / 2.0 } else { beta * 2.0 };
        } else {
            hi = beta;
            beta = (beta + lo) / 2.0;
        }
    }
    let sum: f64 = row.iter().sum();
    row.iter_mut().for_each(|p| *p /= sum);
}

/// Symmetrized affinities `P` (row-major `n × n`, zero diagonal, sum 1).
pub fn joint_probabilities(points: &[Vec<f64>], perplexity: f64) -> Result<Vec<f64>> {
    let n = points.len();
    if n < 2 {
        return Err(Error::invalid("need at least two points"));
    }
    let d = squared_distances(points);
    let target = perplexity.ln();
    let mut cond = vec![0.0; n * n];
    for i in 0..n {
        conditional_row(&d[i * n..(i + 1) * n], i, target, &mut cond[i * n..(i + 1) * n]);
    }
    let mut p = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            p[i * n + j] = cond[i * n + j] + cond[j * n + i];
        }
    }
    let total: f64 = p.iter().sum();
    p.iter_mut().for_each(|v| *v /= total);
    Ok(p)
}

/// Student-t kernel `1 / (1 + ‖yi − yj‖²)` (zero diagonal) and its sum.
fn kernel(y: &[[f64; 2]]) -> (Vec<f64>, f64) {
    let n = y.len();
    let mut num = vec![0.0; n * n];
    let mut sum = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            let dx = y[i][0] - y[j][0];
            let dy = y[i][1] - y[j][1];
            let v = 1.0 / (1.0 + dx * dx + dy * dy);
            num[i * n + j] = v;
            num[j * n + i] = v;
            sum += 2.0 * v;
        }
    }
    (num, sum)
}

/// KL(P‖Q) for layout `y`.
pub fn kl_divergence(p: &[f64], y: &[[f64; 2]]) -> f64 {
    let (num, sum) = kernel(y);
    p.iter()
        .zip(&num)
        .filter(|(p, _)| **p > 0.0)
        .map(|(p, q)| p * (p / (q / sum)).ln())
        .sum()
}

/// Exact gradient of [`kl_divergence`] with respect to `y`.
pub fn kl_gradient(p: &[f64], y: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let n = y.len();
    let (num, sum) = kernel(y);
    let mut grad = vec![[0.0; 2]; n];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let w = num[i * n + j];
            let m = 4.0 * (p[i * n + j] - w / sum) * w;
            grad[i][0] += m * (y[i][0] - y[j][0]);
            grad[i][1] += m * (y[i][1] - y[j][1]);
        }
    }
    grad
}

/// Exact tSNE to two dimensions.
pub fn tsne(points: &[Vec<f64>], config: &ProjectionConfig) -> Result<TsneResult> {
    let n = points.len();
    config.validate(n)?;
    let p = joint_probabilities(points, config.perplexity)?;
    let p_exaggerated: Vec<f64> = p.iter().map(|v| v * config.early_exaggeration).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let normal = Normal::new(0.0, 1e-4).expect("valid normal");
    let mut y: Vec<[f64; 2]> = (0..n).map(|_| [normal.sample(&mut rng), normal.sample(&mut rng)]).collect();
    let kl_initial = kl_divergence(&p, &y);

    let mut update = vec![[0.0; 2]; n];
    let mut gains = vec![[1.0f64; 2]; n];
    for iter in 0..config.iterations {
        let early = iter < config.exaggeration_iters;
        let grad = kl_gradient(if early { &p_exaggerated } else { &p }, &y);
        let momentum = if early { config.initial_momentum } else { config.final_momentum };
        for i in 0..n {
            for k in 0..2 {
                let g = grad[i][k];
                gains[i][k] = if (g > 0.0) != (update[i][k] > 0.0) {
                    gains[i][k] + 0.2
                } else {
                    (gains[i][k] * 0.8).max(MIN_GAIN)
                };
                update[i][k] = momentum * update[i][k] - config.step_size * gains[i][k] * g;
                y[i][k] += update[i][k];
            }
        }
        for k in 0..2 {
            let mean = y.iter().map(|r| r[k]).sum::<f64>() / n as f64;
            y.iter_mut().for_each(|r| r[k] -= mean);
        }
    }
    if y.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::invalid("tSNE diverged"));
    }
    let kl_final = kl_divergence(&p, &y);
    Ok(TsneResult {
        embedding: y,
        kl_initial,
        kl_final,
    })
}
