//! Fully connected network: tanh hidden layers, logistic output, binary
//! cross-entropy with optional L2 on the weights. Parameters live in one
//! flat vector so gradients can be checked against finite differences.

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpNet {
    /// Input width, hidden widths, then 1.
    pub sizes: Vec<usize>,
    pub params: Vec<f64>,
    pub l2: f64,
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `-log(sigmoid(z))` for `y = 1`, `-log(1 - sigmoid(z))` for `y = 0`,
/// computed from the logit without overflow.
fn bce_from_logit(z: f64, y: f64) -> f64 {
    z.max(0.0) - z * y + (-z.abs()).exp().ln_1p()
}

impl MlpNet {
    pub fn n_params_for(sizes: &[usize]) -> usize {
        sizes.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
    }

    /// Glorot-uniform weights and biases from a seeded stream.
    pub fn init(input: usize, hidden: &[usize], l2: f64, seed: u64) -> MlpNet {
        let mut sizes = vec![input];
        sizes.extend_from_slice(hidden);
        sizes.push(1);
        let mut rng = rng::seeded(seed);
        let mut params = Vec::with_capacity(Self::n_params_for(&sizes));
        for w in sizes.windows(2) {
            let bound = (6.0 / (w[0] + w[1]) as f64).sqrt();
            for _ in 0..(w[0] * w[1] + w[1]) {
                params.push(rng.gen_range(-bound..bound));
            }
        }
        MlpNet { sizes, params, l2 }
    }

    fn layer_offsets(&self) -> Vec<(usize, usize)> {
        let mut off = 0;
        self.sizes
            .windows(2)
            .map(|w| {
                let wo = off;
                let bo = off + w[0] * w[1];
                off = bo + w[1];
                (wo, bo)
            })
            .collect()
    }

    /// Activations per layer; the last entry holds the output logit.
    fn forward_all(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let offs = self.layer_offsets();
        let mut acts = vec![x.to_vec()];
        let last = offs.len() - 1;
        for (l, (wo, bo)) in offs.into_iter().enumerate() {
            let (n_in, n_out) = (self.sizes[l], self.sizes[l + 1]);
            let a = &acts[l];
            let mut z = Vec::with_capacity(n_out);
            for o in 0..n_out {
                let row = &self.params[wo + o * n_in..wo + (o + 1) * n_in];
                let s = row.iter().zip(a).map(|(w, v)| w * v).sum::<f64>() + self.params[bo + o];
                z.push(if l == last { s } else { s.tanh() });
            }
            acts.push(z);
        }
        acts
    }

    pub fn predict_proba(&self, x: &[f64]) -> f64 {
        sigmoid(self.forward_all(x).last().expect("output layer")[0])
    }

    fn weight_penalty(&self) -> f64 {
        let offs = self.layer_offsets();
        let mut s = 0.0;
        for (l, (wo, _)) in offs.into_iter().enumerate() {
            let n = self.sizes[l] * self.sizes[l + 1];
            s += self.params[wo..wo + n].iter().map(|w| w * w).sum::<f64>();
        }
        s
    }

    /// Mean cross-entropy over the rows plus `l2 / 2 * |W|^2`.
    pub fn loss(&self, x: &[Vec<f64>], y: &[f64]) -> f64 {
        let n = x.len().max(1) as f64;
        let data: f64 = x.iter().zip(y).map(|(r, &t)| bce_from_logit(self.forward_all(r)[self.sizes.len() - 1][0], t)).sum();
        data / n + 0.5 * self.l2 * self.weight_penalty()
    }

    /// Gradient of [`MlpNet::loss`] by backpropagation.
    pub fn gradient(&self, x: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
        let offs = self.layer_offsets();
        let mut g = vec![0.0; self.params.len()];
        let n = x.len().max(1) as f64;
        let layers = offs.len();
        for (r, &t) in x.iter().zip(y) {
            let acts = self.forward_all(r);
            // dL/dz at the output for a logistic output with cross-entropy.
            let mut delta = vec![(sigmoid(acts[layers][0]) - t) / n];
            for l in (0..layers).rev() {
                let (wo, bo) = offs[l];
                let (n_in, n_out) = (self.sizes[l], self.sizes[l + 1]);
                let a = &acts[l];
                for o in 0..n_out {
                    g[bo + o] += delta[o];
                    for i in 0..n_in {
                        g[wo + o * n_in + i] += delta[o] * a[i];
                    }
                }
                if l > 0 {
                    let mut prev = vec![0.0; n_in];
                    for (i, p) in prev.iter_mut().enumerate() {
                        let s: f64 = (0..n_out).map(|o| self.params[wo + o * n_in + i] * delta[o]).sum();
                        *p = s * (1.0 - a[i] * a[i]);
                    }
                    delta = prev;
                }
            }
        }
        for (l, &(wo, _)) in offs.iter().enumerate() {
            for k in wo..wo + self.sizes[l] * self.sizes[l + 1] {
                g[k] += self.l2 * self.params[k];
            }
        }
        g
    }

    /// Seeded mini-batch training with Adam.
    pub fn train(&mut self, x: &[Vec<f64>], y: &[f64], epochs: usize, batch: usize, lr: f64, seed: u64) {
        let (b1, b2, eps) = (0.9_f64, 0.999_f64, 1e-8);
        let mut m = vec![0.0; self.params.len()];
        let mut v = vec![0.0; self.params.len()];
        let mut step = 0i32;
        let mut order: Vec<usize> = (0..x.len()).collect();
        let mut rng = rng::seeded(seed);
        let batch = batch.max(1);
        for _ in 0..epochs {
            order.shuffle(&mut rng);
            for chunk in order.chunks(batch) {
                let bx: Vec<Vec<f64>> = chunk.iter().map(|&i| x[i].clone()).collect();
                let by: Vec<f64> = chunk.iter().map(|&i| y[i]).collect();
                let g = self.gradient(&bx, &by);
                step += 1;
                let c1 = 1.0 - b1.powi(step);
                let c2 = 1.0 - b2.powi(step);
                for k in 0..self.params.len() {
                    m[k] = b1 * m[k] + (1.0 - b1) * g[k];
                    v[k] = b2 * v[k] + (1.0 - b2) * g[k] * g[k];
                    self.params[k] -= lr * (m[k] / c1) / ((v[k] / c2).sqrt() + eps);
                }
            }
        }
    }
}
