//! Supervised imitation of expert actions.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Adam, Mlp, PolicyError, PolicyParameters};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BcConfig {
    pub hidden: Vec<usize>,
    pub lr: f64,
    pub epochs: usize,
    pub minibatch: usize,
    /// Stop after this many epochs without a relative loss improvement of `min_delta`.
    pub patience: usize,
    pub min_delta: f64,
    pub seed: u64,
}

impl Default for BcConfig {
    fn default() -> Self {
        BcConfig { hidden: vec![512, 256, 256], lr: 1e-3, epochs: 200, minibatch: 64, patience: 10, min_delta: 1e-3, seed: 0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BcReport {
    pub accuracy: f64,
    pub final_loss: f64,
    pub epochs_run: usize,
}

const SUB_CHUNK: usize = 8;

fn log_softmax(z: &[f64]) -> Vec<f64> {
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + z.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
    z.iter().map(|v| v - lse).collect()
}

/// Cross-entropy training with Adam. Returns an actor-only policy and the final
/// training accuracy of greedy predictions.
pub fn bc_train(
    data: &[(Vec<f64>, usize)],
    n_actions: usize,
    cfg: &BcConfig,
) -> Result<(PolicyParameters, BcReport), PolicyError> {
    let Some((first, _)) = data.first() else { return Err(PolicyError::EmptyDataset) };
    let obs_len = first.len();
    for (o, a) in data {
        if o.len() != obs_len {
            return Err(PolicyError::Shape { expected: obs_len, got: o.len() });
        }
        if *a >= n_actions {
            return Err(PolicyError::Shape { expected: n_actions, got: *a + 1 });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let sizes = [&[obs_len][..], &cfg.hidden, &[n_actions]].concat();
    let mut net = Mlp::new(&sizes, 0.01, &mut rng);
    let mut adam = Adam::new(cfg.lr, 1e-8);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let (mut best, mut stale, mut epochs_run, mut last_loss) = (f64::INFINITY, 0, 0, f64::NAN);
    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for chunk in order.chunks(cfg.minibatch.max(1)) {
            let b = chunk.len() as f64;
            // Fixed sub-chunks summed in order keep the result independent of thread scheduling.
            let parts: Vec<(Mlp, f64)> = chunk
                .par_chunks(SUB_CHUNK)
                .map(|sub| {
                    let mut g = net.zeros_like();
                    let mut loss = 0.0;
                    for &i in sub {
                        let (obs, a) = &data[i];
                        let acts = net.trace(obs);
                        let ls = log_softmax(acts.last().expect("output"));
                        loss -= ls[*a];
                        let grad: Vec<f64> =
                            ls.iter().enumerate().map(|(j, l)| (l.exp() - if j == *a { 1.0 } else { 0.0 }) / b).collect();
                        net.backward(&acts, &grad, &mut g);
                    }
                    (g, loss)
                })
                .collect();
            let mut g = net.zeros_like();
            for (part, loss) in parts {
                g.add(&part);
                total += loss;
            }
            adam.step(net.tensors_mut(), g.tensors());
        }
        epochs_run += 1;
        last_loss = total / data.len() as f64;
        if !last_loss.is_finite() {
            return Err(PolicyError::NonFinite);
        }
        if last_loss < best * (1.0 - cfg.min_delta) {
            best = last_loss;
            stale = 0;
        } else {
            stale += 1;
            if stale >= cfg.patience {
                break;
            }
        }
    }
    let correct = data.iter().filter(|(o, a)| argmax(&net.forward(o)) == *a).count();
    let report = BcReport { accuracy: correct as f64 / data.len() as f64, final_loss: last_loss, epochs_run };
    Ok((PolicyParameters { actor: net, critic: None, adam, updates: epochs_run as u64 }, report))
}

fn argmax(v: &[f64]) -> usize {
    v.iter().enumerate().fold(0, |b, (i, x)| if *x > v[b] { i } else { b })
}
