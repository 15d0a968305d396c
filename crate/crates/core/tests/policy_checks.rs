mod common;

use common::{ga, run, workshop};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ramplab::policy::{
    bc_train, compute_gae, evaluate, inject_expert, masked_argmax, masked_sample, ppo_loss_and_grad, ppo_update, BcConfig, Mlp,
    PolicyParameters, PpoConfig, RolloutBatch, RuntimeMask,
};
use ramplab::encodings::{env_to_grounded, execute_grounded, observation_len, observe, ActionIndexMap};
use ramplab::model::Outcome;
use ramplab::world::{step, CraftInstance, Item, Task};

/// Loss recomputed from network outputs alone, independent of the crate's loss code.
fn reference_loss(p: &PolicyParameters, batch: &RolloutBatch, cfg: &PpoConfig) -> f64 {
    let b = batch.len() as f64;
    let mut adv = batch.advantages.clone();
    if cfg.normalize_advantages {
        let mean = adv.iter().sum::<f64>() / b;
        let sd = (adv.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / (b - 1.0)).sqrt();
        adv.iter_mut().for_each(|a| *a = (*a - mean) / (sd + 1e-8));
    }
    let (mut pg, mut ent, mut vl) = (0.0, 0.0, 0.0);
    for i in 0..batch.len() {
        let (logits, v) = p.forward(&batch.obs[i]).unwrap();
        let z: f64 = logits.iter().zip(&batch.masks[i]).filter(|(_, m)| **m).map(|(l, _)| l.exp()).sum();
        let probs: Vec<f64> =
            logits.iter().zip(&batch.masks[i]).map(|(l, m)| if *m { l.exp() / z } else { 0.0 }).collect();
        let ratio = probs[batch.actions[i]].ln() - batch.logp[i];
        let ratio = ratio.exp();
        let clipped = ratio.clamp(1.0 - cfg.clip, 1.0 + cfg.clip);
        pg -= (ratio * adv[i]).min(clipped * adv[i]);
        ent -= probs.iter().filter(|q| **q > 0.0).map(|q| q * q.ln()).sum::<f64>();
        vl += (v - batch.returns[i]).powi(2);
    }
    pg / b - cfg.ent_coef * ent / b + cfg.vf_coef * vl / b
}

fn random_batch(rng: &mut ChaCha8Rng, p: &PolicyParameters, n: usize) -> RolloutBatch {
    let (d, k) = (p.obs_len(), p.n_actions());
    let mut batch = RolloutBatch::default();
    for _ in 0..n {
        let obs: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut mask: Vec<bool> = (0..k).map(|_| rng.gen_bool(0.7)).collect();
        let a = rng.gen_range(0..k);
        mask[a] = true;
        let logp = -rng.gen_range(0.2..3.0);
        batch.push(obs, a, mask, logp, rng.gen_range(-1.0..1.0), rng.gen_bool(0.2), rng.gen_range(-1.0..1.0));
    }
    batch.finish(rng.gen_range(-1.0..1.0), 0.99, 0.95);
    batch
}

fn params_mut(p: &mut PolicyParameters, critic: bool) -> &mut Mlp {
    if critic { p.critic.as_mut().unwrap() } else { &mut p.actor }
}

#[test]
fn loss_gradients_match_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let (mut checked, mut worst) = (0usize, 0.0f64);
    for trial in 0..8 {
        let d = rng.gen_range(2..6);
        let k = rng.gen_range(2..6);
        let hidden: Vec<usize> = (0..rng.gen_range(1..3)).map(|_| rng.gen_range(3..7)).collect();
        let mut p = PolicyParameters::new(d, k, &hidden, 3e-4, trial);
        // Larger output weights give non-trivial policies.
        p.actor.layers.last_mut().unwrap().weights.iter_mut().for_each(|w| *w *= 100.0);
        let batch = random_batch(&mut rng, &p, 12);
        let cfg = PpoConfig { normalize_advantages: trial % 2 == 0, ent_coef: 0.05, ..PpoConfig::default() };
        let idx: Vec<usize> = (0..batch.len()).collect();
        let (terms, g_actor, g_critic) = ppo_loss_and_grad(&p, &batch, &idx, &cfg).unwrap();
        let base = reference_loss(&p, &batch, &cfg);
        assert!((terms.total - base).abs() <= 1e-10 * base.abs().max(1.0), "loss value {} vs {}", terms.total, base);
        for (critic, grads) in [(false, &g_actor), (true, &g_critic)] {
            for (li, layer) in grads.layers.iter().enumerate() {
                for (which, len) in [(0, layer.weights.len()), (1, layer.bias.len())] {
                    for i in 0..len {
                        let h = 1e-5;
                        let eval = |delta: f64| {
                            let mut q = p.clone();
                            let l = &mut params_mut(&mut q, critic).layers[li];
                            if which == 0 { l.weights[i] += delta } else { l.bias[i] += delta }
                            reference_loss(&q, &batch, &cfg)
                        };
                        let num = (eval(h) - eval(-h)) / (2.0 * h);
                        let ana = if which == 0 { layer.weights[i] } else { layer.bias[i] };
                        let scale = num.abs().max(ana.abs());
                        // Below 1e-6 both sides are rounding noise of the difference quotient.
                        let rel = if scale < 1e-6 { 0.0 } else { (num - ana).abs() / scale };
                        worst = worst.max(rel);
                        checked += 1;
                    }
                }
            }
        }
    }
    println!("finite-difference check: {checked} parameters, worst relative error {worst:.2e}");
    assert!(worst <= 1e-4);
}

#[test]
fn gae_with_unit_lambda_and_gamma_is_monte_carlo_return() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..50 {
        let n = rng.gen_range(1..40);
        let rewards: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let values: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let dones: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.2)).collect();
        let last = rng.gen_range(-1.0..1.0);
        let (adv, ret) = compute_gae(&rewards, &values, &dones, last, 1.0, 1.0);
        for t in 0..n {
            let mut g = 0.0;
            let mut j = t;
            loop {
                g += rewards[j];
                if dones[j] {
                    break;
                }
                j += 1;
                if j == n {
                    g += last;
                    break;
                }
            }
            assert!((ret[t] - g).abs() < 1e-12);
            assert!((adv[t] - (g - values[t])).abs() < 1e-12);
        }
    }
}

#[test]
fn masked_sampling_matches_softmax_frequencies() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let logits = [0.3, -1.2, 2.0, 0.0, 1.1, -0.4];
    let mask = [true, true, false, true, true, false];
    let z: f64 = logits.iter().zip(&mask).filter(|(_, m)| **m).map(|(l, _)| f64::exp(*l)).sum();
    let draws = 100_000;
    let mut counts = [0usize; 6];
    for _ in 0..draws {
        counts[masked_sample(&logits, &mask, &mut rng).unwrap()] += 1;
    }
    for i in 0..6 {
        let p = if mask[i] { logits[i].exp() / z } else { 0.0 };
        let expect = p * draws as f64;
        let sigma = (draws as f64 * p * (1.0 - p)).sqrt();
        assert!((counts[i] as f64 - expect).abs() <= 3.0 * sigma, "action {i}: {} vs {expect:.0}", counts[i]);
    }
}

#[test]
fn ppo_solves_a_one_step_bandit() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut p = PolicyParameters::new(1, 3, &[16], 3e-4, 7);
    let cfg = PpoConfig { rollout_len: 64, ..PpoConfig::default() };
    let obs = vec![1.0];
    let mask = vec![true; 3];
    let prob_best = |p: &PolicyParameters| {
        let (l, _) = p.forward(&obs).unwrap();
        let z: f64 = l.iter().map(|v| v.exp()).sum();
        l[2].exp() / z
    };
    let mut reached = None;
    for update in 1..=500 {
        let mut batch = RolloutBatch::default();
        for _ in 0..cfg.rollout_len {
            let (logits, v) = p.forward(&obs).unwrap();
            let a = masked_sample(&logits, &mask, &mut rng).unwrap();
            let z: f64 = logits.iter().map(|x| x.exp()).sum();
            let r = if a == 2 { 1.0 } else { 0.0 };
            batch.push(obs.clone(), a, mask.clone(), (logits[a].exp() / z).ln(), r, true, v);
        }
        batch.finish(0.0, cfg.gamma, cfg.gae_lambda);
        ppo_update(&mut p, &batch, &cfg, &mut rng).unwrap();
        if prob_best(&p) > 0.95 {
            reached = Some(update);
            break;
        }
    }
    println!("bandit: P(best) > 0.95 after {reached:?} updates");
    assert!(reached.is_some(), "final P(best) {}", prob_best(&p));
}

/// Probability mass the policy puts on the plan's actions, at each plan state.
fn plan_mass(p: &PolicyParameters, inst: &CraftInstance, plan: &[ramplab::model::GroundedAction]) -> Vec<f64> {
    let map = ActionIndexMap::new(inst.task(), inst.size());
    let idx: Vec<usize> = plan.iter().map(|a| map.index_of_grounded(a).unwrap()).collect();
    let mut w = inst.reset();
    plan.iter()
        .map(|a| {
            let (l, _) = p.forward(&observe(&w)).unwrap();
            let z: f64 = l.iter().map(|x| x.exp()).sum();
            w = execute_grounded(&w, a).unwrap().state;
            idx.iter().map(|&i| l[i].exp() / z).sum()
        })
        .collect()
}

#[test]
fn repeated_injection_reproduces_a_short_plan() {
    let start = workshop(Task::Sword, &[(Item::Log, 1)]);
    let plan = [ga("CRAFT_PLANK", &[]), ga("CRAFT_STICK", &[]), ga("CRAFT_WOODEN_SWORD", &["cell_1_0"])];
    let traj = run(&start, &plan);
    let inst = CraftInstance { id: "workshop".into(), seed: 0, initial: start };
    let map = ActionIndexMap::new(Task::Sword, 4);
    let mut p = PolicyParameters::new(observation_len(4), map.len(), &[64, 64], 3e-4, 1);
    let cfg = PpoConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    assert!(plan_mass(&p, &inst, &plan).iter().all(|m| *m < 0.2));
    for _ in 0..50 {
        inject_expert(&mut p, &inst, &traj, &cfg, &mut rng).unwrap();
    }
    let mass = plan_mass(&p, &inst, &plan);
    assert!(mass.iter().all(|m| *m > 0.9), "plan mass {mass:?}");

    // Greedy rollout with runtime applicability masking; rejected attempts are masked out.
    let mut w = inst.reset();
    let mut mask = RuntimeMask::new(map.len());
    let mut executed = Vec::new();
    for _ in 0..32 {
        let (l, _) = p.forward(&observe(&w)).unwrap();
        let a = masked_argmax(&l, &mask.mask(&w)).unwrap();
        let r = step(&w, map.action(a));
        if r.outcome == Outcome::Rejected {
            mask.reject(&w, a);
            continue;
        }
        executed.push(env_to_grounded(&w, map.action(a)).unwrap());
        w = r.state;
        if r.done {
            break;
        }
    }
    assert_eq!(executed, plan);
    let r = evaluate(&p, &inst, 32, true, &mut rng).unwrap();
    assert!(r.solved);
}

#[test]
fn bc_fits_a_single_pair() {
    let data = vec![(vec![0.5, -0.5, 1.0], 2)];
    let cfg = BcConfig { hidden: vec![8], epochs: 50, ..BcConfig::default() };
    let (_, report) = bc_train(&data, 4, &cfg).unwrap();
    assert_eq!(report.accuracy, 1.0);
}

#[test]
fn bc_on_random_labels_generalizes_at_chance() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let k = 4;
    let mut sample = |n: usize| -> Vec<(Vec<f64>, usize)> {
        (0..n).map(|_| ((0..6).map(|_| rng.gen_range(-1.0..1.0)).collect(), rng.gen_range(0..k))).collect()
    };
    let train = sample(400);
    let held_out = sample(2000);
    let cfg = BcConfig { hidden: vec![32], epochs: 60, ..BcConfig::default() };
    let (p, _) = bc_train(&train, k, &cfg).unwrap();
    let hits = held_out
        .iter()
        .filter(|(o, a)| {
            let (l, _) = p.forward(o).unwrap();
            l.iter().enumerate().fold(0, |b, (i, x)| if *x > l[b] { i } else { b }) == *a
        })
        .count();
    let acc = hits as f64 / held_out.len() as f64;
    // Chance is 0.25; three binomial standard deviations on 2000 draws is about 0.03.
    assert!((acc - 0.25).abs() < 0.04, "held-out accuracy {acc}");
}
