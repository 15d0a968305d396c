//! Dense tanh networks with manual backpropagation, and Adam.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub inputs: usize,
    pub outputs: usize,
    /// Row-major `outputs × inputs`.
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

/// Hidden layers use tanh; the output layer is linear.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    pub layers: Vec<Layer>,
}

impl Mlp {
    /// Gaussian init with std `1/sqrt(fan_in)`, scaled by `out_gain` on the last layer.
    pub fn new<R: Rng>(sizes: &[usize], out_gain: f64, rng: &mut R) -> Mlp {
        let mut m = Mlp::zeros(sizes);
        let last = m.layers.len().saturating_sub(1);
        for (k, l) in m.layers.iter_mut().enumerate() {
            let gain = if k == last { out_gain } else { 1.0 };
            let normal = Normal::new(0.0, gain / (l.inputs as f64).sqrt()).expect("finite std");
            for w in &mut l.weights {
                *w = normal.sample(rng);
            }
        }
        m
    }

    pub fn zeros(sizes: &[usize]) -> Mlp {
        let layers = sizes
            .windows(2)
            .map(|w| Layer { inputs: w[0], outputs: w[1], weights: vec![0.0; w[0] * w[1]], bias: vec![0.0; w[1]] })
            .collect();
        Mlp { layers }
    }

    pub fn zeros_like(&self) -> Mlp {
        Mlp::zeros(&self.sizes())
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut s: Vec<usize> = self.layers.iter().map(|l| l.inputs).collect();
        s.extend(self.layers.last().map(|l| l.outputs));
        s
    }

    pub fn input_len(&self) -> usize {
        self.layers.first().map_or(0, |l| l.inputs)
    }

    pub fn output_len(&self) -> usize {
        self.layers.last().map_or(0, |l| l.outputs)
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.bias.len()).sum()
    }

    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        self.trace(x).pop().unwrap_or_default()
    }

    /// Activations of every layer, input first.
    pub fn trace(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let mut acts = Vec::with_capacity(self.layers.len() + 1);
        acts.push(x.to_vec());
        let last = self.layers.len().saturating_sub(1);
        for (k, l) in self.layers.iter().enumerate() {
            let a = acts.last().expect("input");
            let mut out = l.bias.clone();
            for (o, v) in out.iter_mut().enumerate() {
                let row = &l.weights[o * l.inputs..(o + 1) * l.inputs];
                *v += row.iter().zip(a).map(|(w, x)| w * x).sum::<f64>();
                if k != last {
                    *v = v.tanh();
                }
            }
            acts.push(out);
        }
        acts
    }

    /// Accumulates the gradient of a scalar loss into `grads`, given `d loss / d output`.
    pub fn backward(&self, acts: &[Vec<f64>], grad_out: &[f64], grads: &mut Mlp) {
        let mut delta = grad_out.to_vec();
        for k in (0..self.layers.len()).rev() {
            let l = &self.layers[k];
            let g = &mut grads.layers[k];
            let a = &acts[k];
            for (o, d) in delta.iter().enumerate() {
                if *d == 0.0 {
                    continue;
                }
                g.bias[o] += d;
                let row = &mut g.weights[o * l.inputs..(o + 1) * l.inputs];
                for (w, x) in row.iter_mut().zip(a) {
                    *w += d * x;
                }
            }
            if k == 0 {
                break;
            }
            let mut prev = vec![0.0; l.inputs];
            for (o, d) in delta.iter().enumerate() {
                if *d == 0.0 {
                    continue;
                }
                let row = &l.weights[o * l.inputs..(o + 1) * l.inputs];
                for (p, w) in prev.iter_mut().zip(row) {
                    *p += d * w;
                }
            }
            for (p, a) in prev.iter_mut().zip(a) {
                *p *= 1.0 - a * a;
            }
            delta = prev;
        }
    }

    pub fn tensors(&self) -> Vec<&Vec<f64>> {
        self.layers.iter().flat_map(|l| [&l.weights, &l.bias]).collect()
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut Vec<f64>> {
        self.layers.iter_mut().flat_map(|l| [&mut l.weights, &mut l.bias]).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.tensors().iter().all(|t| t.iter().all(|v| v.is_finite()))
    }

    pub fn scale(&mut self, k: f64) {
        for t in self.tensors_mut() {
            for v in t.iter_mut() {
                *v *= k;
            }
        }
    }

    pub fn add(&mut self, other: &Mlp) {
        for (t, o) in self.tensors_mut().into_iter().zip(other.tensors()) {
            for (v, w) in t.iter_mut().zip(o) {
                *v += w;
            }
        }
    }

    pub fn sq_norm(&self) -> f64 {
        self.tensors().iter().flat_map(|t| t.iter()).map(|v| v * v).sum()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub t: u64,
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
}

impl Adam {
    pub fn new(lr: f64, eps: f64) -> Adam {
        Adam { lr, beta1: 0.9, beta2: 0.999, eps, t: 0, m: Vec::new(), v: Vec::new() }
    }

    /// One step over parallel lists of parameter and gradient tensors.
    pub fn step(&mut self, params: Vec<&mut Vec<f64>>, grads: Vec<&Vec<f64>>) {
        if self.m.is_empty() {
            self.m = grads.iter().map(|g| vec![0.0; g.len()]).collect();
            self.v = self.m.clone();
        }
        self.t += 1;
        let c1 = 1.0 - self.beta1.powi(self.t as i32);
        let c2 = 1.0 - self.beta2.powi(self.t as i32);
        for (k, (p, g)) in params.into_iter().zip(grads).enumerate() {
            let (m, v) = (&mut self.m[k], &mut self.v[k]);
            for i in 0..p.len() {
                m[i] = self.beta1 * m[i] + (1.0 - self.beta1) * g[i];
                v[i] = self.beta2 * v[i] + (1.0 - self.beta2) * g[i] * g[i];
                p[i] -= self.lr * (m[i] / c1) / ((v[i] / c2).sqrt() + self.eps);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn backward_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let net = Mlp::new(&[4, 5, 3], 1.0, &mut rng);
        let x = [0.3, -0.2, 0.9, 0.1];
        let c = [1.0, -2.0, 0.5];
        let f = |n: &Mlp| n.forward(&x).iter().zip(&c).map(|(o, c)| o * c).sum::<f64>();
        let mut g = net.zeros_like();
        net.backward(&net.trace(&x), &c, &mut g);
        for (li, layer) in net.layers.iter().enumerate() {
            for i in 0..layer.weights.len() {
                let mut a = net.clone();
                let mut b = net.clone();
                a.layers[li].weights[i] += 1e-6;
                b.layers[li].weights[i] -= 1e-6;
                let num = (f(&a) - f(&b)) / 2e-6;
                assert!((num - g.layers[li].weights[i]).abs() < 1e-6);
            }
        }
    }
}
