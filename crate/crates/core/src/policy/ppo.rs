//! Clipped-surrogate actor-critic updates over masked categorical policies.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{masked_sample, masked_softmax, Mlp, PolicyError, PolicyParameters};
use crate::encodings::{execute_grounded, observe, symbolic_to_world, world_to_symbolic, ActionIndexMap};
use crate::model::Trajectory;
use crate::world::CraftInstance;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PpoConfig {
    pub clip: f64,
    pub ent_coef: f64,
    pub gamma: f64,
    pub vf_coef: f64,
    pub max_grad_norm: f64,
    pub gae_lambda: f64,
    pub lr: f64,
    pub epochs: usize,
    pub minibatch: usize,
    pub rollout_len: usize,
    pub normalize_advantages: bool,
}

impl Default for PpoConfig {
    fn default() -> Self {
        PpoConfig {
            clip: 0.2,
            ent_coef: 0.01,
            gamma: 0.999,
            vf_coef: 0.65,
            max_grad_norm: 1.0,
            gae_lambda: 0.95,
            lr: 3e-4,
            epochs: 4,
            minibatch: 64,
            rollout_len: 512,
            normalize_advantages: true,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RolloutBatch {
    pub obs: Vec<Vec<f64>>,
    pub actions: Vec<usize>,
    pub masks: Vec<Vec<bool>>,
    pub logp: Vec<f64>,
    pub rewards: Vec<f64>,
    /// True when the episode ended after this step.
    pub dones: Vec<bool>,
    pub values: Vec<f64>,
    pub advantages: Vec<f64>,
    pub returns: Vec<f64>,
}

impl RolloutBatch {
    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    #[allow(clippy::too_many_arguments)]
    pub fn push(&mut self, obs: Vec<f64>, action: usize, mask: Vec<bool>, logp: f64, reward: f64, done: bool, value: f64) {
        self.obs.push(obs);
        self.actions.push(action);
        self.masks.push(mask);
        self.logp.push(logp);
        self.rewards.push(reward);
        self.dones.push(done);
        self.values.push(value);
    }

    /// Fills advantages and returns; `last_value` bootstraps an unfinished final step.
    pub fn finish(&mut self, last_value: f64, gamma: f64, lambda: f64) {
        let (a, r) = compute_gae(&self.rewards, &self.values, &self.dones, last_value, gamma, lambda);
        self.advantages = a;
        self.returns = r;
    }

    pub fn clear(&mut self) {
        *self = RolloutBatch::default();
    }
}

/// Generalized advantage estimates and the matching value targets.
pub fn compute_gae(
    rewards: &[f64],
    values: &[f64],
    dones: &[bool],
    last_value: f64,
    gamma: f64,
    lambda: f64,
) -> (Vec<f64>, Vec<f64>) {
    let n = rewards.len();
    let mut adv = vec![0.0; n];
    let mut gae = 0.0;
    for t in (0..n).rev() {
        let live = if dones[t] { 0.0 } else { 1.0 };
        let next = if t + 1 == n { last_value } else { values[t + 1] };
        let delta = rewards[t] + gamma * next * live - values[t];
        gae = delta + gamma * lambda * live * gae;
        adv[t] = gae;
    }
    let ret = adv.iter().zip(values).map(|(a, v)| a + v).collect();
    (adv, ret)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LossTerms {
    pub policy: f64,
    pub entropy: f64,
    pub value: f64,
    pub total: f64,
    pub clip_fraction: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct UpdateStats {
    pub last: LossTerms,
    pub minibatches: usize,
    pub max_grad_norm_seen: f64,
}

/// Loss over the samples `idx` and its gradients for actor and critic.
pub fn ppo_loss_and_grad(
    params: &PolicyParameters,
    batch: &RolloutBatch,
    idx: &[usize],
    cfg: &PpoConfig,
) -> Result<(LossTerms, Mlp, Mlp), PolicyError> {
    let critic = params.critic.as_ref().ok_or(PolicyError::NoCritic)?;
    let mut ga = params.actor.zeros_like();
    let mut gc = critic.zeros_like();
    let b = idx.len() as f64;
    let mut adv: Vec<f64> = idx.iter().map(|&i| batch.advantages[i]).collect();
    if cfg.normalize_advantages && adv.len() > 1 {
        let mean = adv.iter().sum::<f64>() / b;
        let var = adv.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / (b - 1.0);
        let sd = var.sqrt();
        for a in &mut adv {
            *a = (*a - mean) / (sd + 1e-8);
        }
    }
    let mut t = LossTerms::default();
    for (k, &i) in idx.iter().enumerate() {
        let obs = &batch.obs[i];
        let mask = &batch.masks[i];
        let act = batch.actions[i];
        if !mask.get(act).copied().unwrap_or(false) {
            return Err(PolicyError::Mismatch(i));
        }
        let acts = params.actor.trace(obs);
        let p = masked_softmax(acts.last().expect("output"), mask)?;
        let logp = p[act].ln();
        let ratio = (logp - batch.logp[i]).exp();
        let a = adv[k];
        let s1 = ratio * a;
        let s2 = ratio.clamp(1.0 - cfg.clip, 1.0 + cfg.clip) * a;
        t.policy -= s1.min(s2);
        if (ratio - 1.0).abs() > cfg.clip {
            t.clip_fraction += 1.0;
        }
        let g_logp = if s1 <= s2 { s1 } else { 0.0 };
        let h: f64 = -p.iter().filter(|x| **x > 0.0).map(|x| x * x.ln()).sum::<f64>();
        t.entropy += h;
        let grad: Vec<f64> = p
            .iter()
            .enumerate()
            .map(|(j, &pj)| {
                if pj <= 0.0 {
                    return 0.0;
                }
                let onehot = if j == act { 1.0 } else { 0.0 };
                (-g_logp * (onehot - pj) + cfg.ent_coef * pj * (pj.ln() + h)) / b
            })
            .collect();
        params.actor.backward(&acts, &grad, &mut ga);

        let vt = critic.trace(obs);
        let err = vt.last().expect("output")[0] - batch.returns[i];
        t.value += err * err;
        critic.backward(&vt, &[cfg.vf_coef * 2.0 * err / b], &mut gc);
    }
    t.policy /= b;
    t.entropy /= b;
    t.value /= b;
    t.clip_fraction /= b;
    t.total = t.policy - cfg.ent_coef * t.entropy + cfg.vf_coef * t.value;
    Ok((t, ga, gc))
}

/// Runs the configured epochs of shuffled minibatch steps. On a non-finite loss
/// the parameters are restored and an error is returned.
pub fn ppo_update<R: Rng + ?Sized>(
    params: &mut PolicyParameters,
    batch: &RolloutBatch,
    cfg: &PpoConfig,
    rng: &mut R,
) -> Result<UpdateStats, PolicyError> {
    let mut stats = UpdateStats::default();
    if batch.is_empty() {
        return Ok(stats);
    }
    let snapshot = params.clone();
    let mut order: Vec<usize> = (0..batch.len()).collect();
    params.adam.lr = cfg.lr;
    for _ in 0..cfg.epochs {
        order.shuffle(rng);
        for chunk in order.chunks(cfg.minibatch.max(1)) {
            let (terms, mut ga, mut gc) = match ppo_loss_and_grad(params, batch, chunk, cfg) {
                Ok(r) => r,
                Err(e) => {
                    *params = snapshot;
                    return Err(e);
                }
            };
            if !terms.total.is_finite() {
                *params = snapshot;
                return Err(PolicyError::NonFinite);
            }
            let norm = (ga.sq_norm() + gc.sq_norm()).sqrt();
            stats.max_grad_norm_seen = stats.max_grad_norm_seen.max(norm);
            if norm > cfg.max_grad_norm {
                let k = cfg.max_grad_norm / (norm + 1e-6);
                ga.scale(k);
                gc.scale(k);
            }
            let PolicyParameters { actor, critic, adam, .. } = params;
            let critic = critic.as_mut().expect("checked above");
            let ps = actor.tensors_mut().into_iter().chain(critic.tensors_mut()).collect();
            let gs = ga.tensors().into_iter().chain(gc.tensors()).collect();
            adam.step(ps, gs);
            stats.last = terms;
            stats.minibatches += 1;
        }
    }
    if !params.is_finite() {
        *params = snapshot;
        return Err(PolicyError::NonFinite);
    }
    params.updates += 1;
    Ok(stats)
}

/// Replays a goal-reaching trajectory as a rollout. A single-action mask forces
/// the recorded action; its log-probability is taken under the full mask.
pub fn expert_batch(
    params: &PolicyParameters,
    instance: &CraftInstance,
    traj: &Trajectory,
    cfg: &PpoConfig,
) -> Result<RolloutBatch, PolicyError> {
    let map = ActionIndexMap::new(instance.task(), instance.size());
    let n = map.len();
    let mut batch = RolloutBatch::default();
    let mut world = instance.reset();
    if traj.records.first().is_some_and(|r| r.pre != world_to_symbolic(&world)) {
        return Err(PolicyError::Mismatch(0));
    }
    let mut rng = rand::rngs::mock::StepRng::new(0, 0);
    for (k, rec) in traj.records.iter().enumerate() {
        let pre = symbolic_to_world(&rec.pre, instance.task()).map_err(|_| PolicyError::Mismatch(k))?;
        if pre != world {
            return Err(PolicyError::Mismatch(k));
        }
        let idx = map.index_of_grounded(&rec.action).ok_or(PolicyError::Mismatch(k))?;
        let step = execute_grounded(&world, &rec.action).ok_or(PolicyError::Mismatch(k))?;
        if rec.post.as_ref() != Some(&world_to_symbolic(&step.state)) {
            return Err(PolicyError::Mismatch(k));
        }
        let obs = observe(&world);
        let (logits, value) = params.forward(&obs)?;
        let mut only = vec![false; n];
        only[idx] = true;
        let a = masked_sample(&logits, &only, &mut rng)?;
        let logp = masked_softmax(&logits, &vec![true; n])?[a].ln();
        let last = k + 1 == traj.records.len();
        batch.push(obs, a, vec![true; n], logp, f64::from(step.reward), last, value);
        world = step.state;
    }
    batch.finish(0.0, cfg.gamma, cfg.gae_lambda);
    // A fitted critic would cancel the expert signal, so returns serve as advantages.
    batch.advantages = batch.returns.clone();
    Ok(batch)
}

/// Trains on an expert trajectory. Advantages keep their sign (no normalization).
pub fn inject_expert<R: Rng + ?Sized>(
    params: &mut PolicyParameters,
    instance: &CraftInstance,
    traj: &Trajectory,
    cfg: &PpoConfig,
    rng: &mut R,
) -> Result<UpdateStats, PolicyError> {
    if traj.is_empty() {
        return Ok(UpdateStats::default());
    }
    let batch = expert_batch(params, instance, traj, cfg)?;
    let cfg = PpoConfig { normalize_advantages: false, ..cfg.clone() };
    ppo_update(params, &batch, &cfg, rng)
}
