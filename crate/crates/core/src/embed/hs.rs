//! Hierarchical-softmax loss, gradient and SGD update for one
//! (center, target) pair.
//!
//! With `f_j = u · θ_j` at inner node `j` on the target's path and code bit
//! `c_j`, the pair loss is `-Σ_j ln σ(s_j f_j)` where `s_j = +1` for bit 0 and
//! `-1` for bit 1.

use num_traits::Float;

pub fn sigmoid<F: Float>(x: F) -> F {
    if x >= F::zero() {
        F::one() / (F::one() + (-x).exp())
    } else {
        let e = x.exp();
        e / (F::one() + e)
    }
}

/// `ln σ(x)` without overflow.
fn log_sigmoid<F: Float>(x: F) -> F {
    if x >= F::zero() {
        -(-x).exp().ln_1p()
    } else {
        x - x.exp().ln_1p()
    }
}

fn dot<F: Float>(a: &[F], b: &[F]) -> F {
    a.iter().zip(b).fold(F::zero(), |acc, (&x, &y)| acc + x * y)
}

fn sign<F: Float>(bit: u8) -> F {
    if bit == 0 {
        F::one()
    } else {
        -F::one()
    }
}

/// Row access to the inner-node table.
pub trait InnerRows<F> {
    fn dim(&self) -> usize;
    fn with_row<R>(&mut self, node: usize, f: impl FnOnce(&mut [F]) -> R) -> R;
}

/// A row-major `n × dim` table in a plain slice.
pub struct SliceRows<'a, F> {
    pub data: &'a mut [F],
    pub dim: usize,
}

impl<F> InnerRows<F> for SliceRows<'_, F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn with_row<R>(&mut self, node: usize, f: impl FnOnce(&mut [F]) -> R) -> R {
        let start = node * self.dim;
        f(&mut self.data[start..start + self.dim])
    }
}

/// Loss of one pair given a read-only inner table (row-major).
pub fn pair_loss<F: Float>(center: &[F], inner: &[F], path: &[u32], code: &[u8]) -> F {
    let dim = center.len();
    path.iter().zip(code).fold(F::zero(), |acc, (&node, &bit)| {
        let row = &inner[node as usize * dim..(node as usize + 1) * dim];
        acc - log_sigmoid(sign::<F>(bit) * dot(center, row))
    })
}

/// Analytic gradient of [`pair_loss`]: `(∂/∂u, [(node, ∂/∂θ_node)])`.
pub fn pair_gradient<F: Float>(
    center: &[F],
    inner: &[F],
    path: &[u32],
    code: &[u8],
) -> (Vec<F>, Vec<(u32, Vec<F>)>) {
    let dim = center.len();
    let mut d_center = vec![F::zero(); dim];
    let mut d_inner = Vec::with_capacity(path.len());
    for (&node, &bit) in path.iter().zip(code) {
        let row = &inner[node as usize * dim..(node as usize + 1) * dim];
        let label = F::one() - F::from(bit).unwrap();
        // dL/df = σ(f) - label
        let df = sigmoid(dot(center, row)) - label;
        for (d, &t) in d_center.iter_mut().zip(row) {
            *d = *d + df * t;
        }
        d_inner.push((node, center.iter().map(|&u| df * u).collect()));
    }
    (d_center, d_inner)
}

/// One SGD step on the pair loss: every inner row on the path and the center
/// vector move by `-lr` times their gradient, all evaluated at the current
/// parameters. `work` must have length `dim`. Returns the loss before the step.
pub fn sgd_step<F: Float, T: InnerRows<F>>(
    center: &mut [F],
    inner: &mut T,
    path: &[u32],
    code: &[u8],
    lr: F,
    work: &mut [F],
) -> F {
    debug_assert_eq!(center.len(), inner.dim());
    work.iter_mut().for_each(|w| *w = F::zero());
    let mut loss = F::zero();
    for (&node, &bit) in path.iter().zip(code) {
        let u: &[F] = center;
        inner.with_row(node as usize, |theta| {
            let f = dot(u, theta);
            loss = loss - log_sigmoid(sign::<F>(bit) * f);
            let label = F::one() - F::from(bit).unwrap();
            let g = (label - sigmoid(f)) * lr;
            for (w, &t) in work.iter_mut().zip(theta.iter()) {
                *w = *w + g * t;
            }
            for (t, &x) in theta.iter_mut().zip(u) {
                *t = *t + g * x;
            }
        });
    }
    for (c, &w) in center.iter_mut().zip(work.iter()) {
        *c = *c + w;
    }
    loss
}
