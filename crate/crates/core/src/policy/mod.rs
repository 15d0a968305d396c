//! Policy networks and learners: masked PPO with expert injection, and behavior cloning.

mod bc;
mod net;
mod ppo;

pub use bc::{bc_train, BcConfig, BcReport};
pub use net::{Adam, Layer, Mlp};
pub use ppo::{
    compute_gae, expert_batch, inject_expert, ppo_loss_and_grad, ppo_update, LossTerms, PpoConfig, RolloutBatch,
    UpdateStats,
};

use std::collections::HashMap;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::encodings::{observe, ActionIndexMap};
use crate::world::{step, CraftInstance, WorldState};
use crate::model::Outcome;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolicyError {
    #[error("shape mismatch: expected {expected}, got {got}")]
    Shape { expected: usize, got: usize },
    #[error("mask admits no action")]
    EmptyMask,
    #[error("non-finite loss in update")]
    NonFinite,
    #[error("empty dataset")]
    EmptyDataset,
    #[error("trajectory does not match instance at step {0}")]
    Mismatch(usize),
    #[error("policy has no critic")]
    NoCritic,
    #[error("checkpoint: {0}")]
    Checkpoint(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolicyParameters {
    pub actor: Mlp,
    /// Absent for behavior-cloned policies.
    pub critic: Option<Mlp>,
    pub adam: Adam,
    pub updates: u64,
}

impl PolicyParameters {
    /// Actor and critic with the given hidden widths, seeded init.
    pub fn new(obs_len: usize, n_actions: usize, hidden: &[usize], lr: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sizes = |out: usize| [&[obs_len][..], hidden, &[out]].concat();
        let actor = Mlp::new(&sizes(n_actions), 0.01, &mut rng);
        let critic = Mlp::new(&sizes(1), 1.0, &mut rng);
        PolicyParameters { actor, critic: Some(critic), adam: Adam::new(lr, 1e-5), updates: 0 }
    }

    pub fn obs_len(&self) -> usize {
        self.actor.input_len()
    }

    pub fn n_actions(&self) -> usize {
        self.actor.output_len()
    }

    /// Action logits and state value (0 without a critic).
    pub fn forward(&self, obs: &[f64]) -> Result<(Vec<f64>, f64), PolicyError> {
        if obs.len() != self.obs_len() {
            return Err(PolicyError::Shape { expected: self.obs_len(), got: obs.len() });
        }
        let v = self.critic.as_ref().map_or(0.0, |c| c.forward(obs)[0]);
        Ok((self.actor.forward(obs), v))
    }

    pub fn is_finite(&self) -> bool {
        self.actor.is_finite() && self.critic.as_ref().is_none_or(|c| c.is_finite())
    }
}

/// Softmax over the admitted entries; masked entries get probability 0.
pub fn masked_softmax(logits: &[f64], mask: &[bool]) -> Result<Vec<f64>, PolicyError> {
    if logits.len() != mask.len() {
        return Err(PolicyError::Shape { expected: logits.len(), got: mask.len() });
    }
    let max = logits
        .iter()
        .zip(mask)
        .filter(|(_, m)| **m)
        .map(|(l, _)| *l)
        .fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return Err(PolicyError::EmptyMask);
    }
    let mut p: Vec<f64> = logits.iter().zip(mask).map(|(l, m)| if *m { (l - max).exp() } else { 0.0 }).collect();
    let z: f64 = p.iter().sum();
    for v in &mut p {
        *v /= z;
    }
    Ok(p)
}

pub fn masked_sample<R: Rng + ?Sized>(logits: &[f64], mask: &[bool], rng: &mut R) -> Result<usize, PolicyError> {
    let p = masked_softmax(logits, mask)?;
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    let mut last = 0;
    for (i, (pi, m)) in p.iter().zip(mask).enumerate() {
        if !m {
            continue;
        }
        acc += pi;
        last = i;
        if u < acc {
            return Ok(i);
        }
    }
    Ok(last)
}

/// Highest admitted logit; ties go to the lowest index.
pub fn masked_argmax(logits: &[f64], mask: &[bool]) -> Result<usize, PolicyError> {
    let mut best: Option<usize> = None;
    for (i, (l, m)) in logits.iter().zip(mask).enumerate() {
        if *m && best.is_none_or(|b| *l > logits[b]) {
            best = Some(i);
        }
    }
    best.ok_or(PolicyError::EmptyMask)
}

/// Per-state record of actions rejected by the environment during one episode.
#[derive(Clone, Debug, Default)]
pub struct RuntimeMask {
    n_actions: usize,
    rejected: HashMap<WorldState, Vec<bool>>,
}

impl RuntimeMask {
    pub fn new(n_actions: usize) -> Self {
        RuntimeMask { n_actions, rejected: HashMap::new() }
    }

    pub fn mask(&self, state: &WorldState) -> Vec<bool> {
        self.rejected.get(state).cloned().unwrap_or_else(|| vec![true; self.n_actions])
    }

    pub fn reject(&mut self, state: &WorldState, action: usize) {
        let n = self.n_actions;
        self.rejected.entry(state.clone()).or_insert_with(|| vec![true; n])[action] = false;
    }

    pub fn clear(&mut self) {
        self.rejected.clear();
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalResult {
    pub solved: bool,
    /// Environment steps taken, rejected attempts included.
    pub steps: usize,
}

/// Rolls the actor out from the instance's initial state for at most `cap` steps.
pub fn evaluate<R: Rng + ?Sized>(
    params: &PolicyParameters,
    instance: &CraftInstance,
    cap: usize,
    greedy: bool,
    rng: &mut R,
) -> Result<EvalResult, PolicyError> {
    let map = ActionIndexMap::new(instance.task(), instance.size());
    if map.len() != params.n_actions() {
        return Err(PolicyError::Shape { expected: params.n_actions(), got: map.len() });
    }
    let mut state = instance.reset();
    let mut mask = RuntimeMask::new(map.len());
    for steps in 0..cap {
        let m = mask.mask(&state);
        if !m.iter().any(|x| *x) {
            return Ok(EvalResult { solved: false, steps });
        }
        let (logits, _) = params.forward(&observe(&state))?;
        let a = if greedy { masked_argmax(&logits, &m)? } else { masked_sample(&logits, &m, rng)? };
        let r = step(&state, map.action(a));
        if r.outcome == Outcome::Rejected {
            mask.reject(&state, a);
            continue;
        }
        state = r.state;
        if r.done {
            return Ok(EvalResult { solved: true, steps: steps + 1 });
        }
    }
    Ok(EvalResult { solved: false, steps: cap })
}

const CHECKPOINT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Checkpoint {
    version: u32,
    params: PolicyParameters,
}

pub fn checkpoint_to_string(params: &PolicyParameters) -> String {
    serde_json::to_string(&Checkpoint { version: CHECKPOINT_VERSION, params: params.clone() }).expect("serializable")
}

pub fn checkpoint_from_str(s: &str) -> Result<PolicyParameters, PolicyError> {
    let c: Checkpoint = serde_json::from_str(s).map_err(|e| PolicyError::Checkpoint(e.to_string()))?;
    if c.version != CHECKPOINT_VERSION {
        return Err(PolicyError::Checkpoint(format!("unsupported version {}", c.version)));
    }
    Ok(c.params)
}

pub fn save_checkpoint(path: &Path, params: &PolicyParameters) -> Result<(), PolicyError> {
    std::fs::write(path, checkpoint_to_string(params)).map_err(|e| PolicyError::Checkpoint(e.to_string()))
}

pub fn load_checkpoint(path: &Path) -> Result<PolicyParameters, PolicyError> {
    let s = std::fs::read_to_string(path).map_err(|e| PolicyError::Checkpoint(e.to_string()))?;
    checkpoint_from_str(&s)
}
