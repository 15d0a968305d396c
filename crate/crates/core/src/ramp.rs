//! Online hybrid control: plan with the learned model when possible, act with
//! masked PPO otherwise, relearn and shortcut after goal-reaching episodes.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::encodings::{env_to_grounded, execute_grounded, observation_len, observe, replay, world_to_symbolic, ActionIndexMap};
use crate::model::{Outcome, Plan, Producer, Trajectory, TransitionRecord};
use crate::nsam::{Learner, NsamConfig, NsamError};
use crate::planner::{plan, PlannerConfig};
use crate::policy::{
    inject_expert, masked_sample, masked_softmax, ppo_update, PolicyError, PolicyParameters, PpoConfig, RolloutBatch,
    RuntimeMask,
};
use crate::shortcut::{remove_loops, shortcut_search};
use crate::world::{ground_truth_model, step, CraftInstance, Task, WorldState};

#[derive(Debug, Error)]
pub enum RampError {
    #[error(transparent)]
    Nsam(#[from] NsamError),
    #[error(transparent)]
    Policy(#[from] PolicyError),
    #[error("invalid budgets: B_i={b_i}, B_e={b_e}")]
    Budget { b_i: usize, b_e: usize },
    #[error("instance {0} does not match the campaign's task and size")]
    Instance(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Full,
    MinusP,
    MinusPn,
    /// Policy-only control, no model learning or shortcuts.
    Ppo,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::Full => "ramp",
            Variant::MinusP => "ramp_minus_p",
            Variant::MinusPn => "ramp_minus_pn",
            Variant::Ppo => "ppo",
        }
    }

    fn learns_model(self) -> bool {
        matches!(self, Variant::Full | Variant::MinusP)
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "full" | "ramp" => Ok(Variant::Full),
            "minus_p" | "ramp_minus_p" => Ok(Variant::MinusP),
            "minus_pn" | "ramp_minus_pn" => Ok(Variant::MinusPn),
            "ppo" => Ok(Variant::Ppo),
            other => Err(format!("unknown variant {other:?}")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BudgetConfig {
    pub b_i: usize,
    pub b_e: usize,
}

impl BudgetConfig {
    pub fn for_task(task: Task) -> Self {
        match task {
            Task::Sword => BudgetConfig { b_i: 800, b_e: 200 },
            Task::Pogo => BudgetConfig { b_i: 6000, b_e: 1500 },
        }
    }

    pub fn validate(&self) -> Result<(), RampError> {
        if self.b_e == 0 || self.b_i < self.b_e {
            return Err(RampError::Budget { b_i: self.b_i, b_e: self.b_e });
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RampConfig {
    pub variant: Variant,
    pub budgets: BudgetConfig,
    pub planner: PlannerConfig,
    pub ppo: PpoConfig,
    pub hidden: Vec<usize>,
    pub nsam: NsamConfig,
    pub reset_policy_per_instance: bool,
}

impl RampConfig {
    pub fn new(task: Task, variant: Variant) -> Self {
        RampConfig {
            variant,
            budgets: BudgetConfig::for_task(task),
            planner: PlannerConfig { timeout: std::time::Duration::from_secs(20), node_budget: 500_000 },
            ppo: PpoConfig::default(),
            hidden: vec![64, 64],
            nsam: NsamConfig::default(),
            reset_policy_per_instance: false,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CallCounters {
    pub planner_calls: usize,
    pub nsam_updates: usize,
    pub shortcut_calls: usize,
    pub injections: usize,
    pub ppo_updates: usize,
    /// Planner plans that failed in the simulator. Zero under a safe model.
    pub unsafe_plans: usize,
    /// Planner plans executed and checked in the simulator.
    pub checked_plans: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Controller {
    Planner,
    Policy,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EpisodeEvent {
    pub episode_id: u64,
    pub instance: String,
    pub controller: Controller,
    pub steps: usize,
    pub solved: bool,
    pub plan_length: Option<usize>,
    pub model_changed: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EpisodeResult {
    pub trajectory: Trajectory,
    pub solved: bool,
    pub steps: usize,
    pub controller: Controller,
    /// Lengths of simulator-valid goal-reaching plans obtained in this episode.
    pub plan_lengths: Vec<usize>,
}

/// Per-instance planner bookkeeping.
#[derive(Clone, Debug, Default)]
pub struct InstanceProgress {
    /// Model version of the last planner call on this instance.
    planner_version: Option<u64>,
    pub steps: usize,
    pub episodes: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceMetrics {
    pub instance: String,
    pub solved: bool,
    pub min_plan_len: Option<usize>,
    pub episodes: usize,
    pub steps: usize,
}

pub struct RampState {
    pub config: RampConfig,
    pub task: Task,
    pub size: usize,
    pub seed: u64,
    rng: ChaCha8Rng,
    learner: Learner,
    model_version: u64,
    /// Every episode trajectory, in order.
    pub store: Vec<Trajectory>,
    /// Prefix of `store` already given to the learner.
    learned_upto: usize,
    pub goal_reached_ever: bool,
    pub policy: PolicyParameters,
    rollout: RolloutBatch,
    pub counters: CallCounters,
    pub events: Vec<EpisodeEvent>,
    next_episode: u64,
}

impl RampState {
    pub fn new(task: Task, size: usize, config: RampConfig, seed: u64) -> Self {
        let map = ActionIndexMap::new(task, size);
        let policy = PolicyParameters::new(observation_len(size), map.len(), &config.hidden, config.ppo.lr, seed);
        let learner = Learner::new(&ground_truth_model(task), config.nsam.clone());
        RampState {
            config,
            task,
            size,
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_0f_7a3b),
            learner,
            model_version: 0,
            store: Vec::new(),
            learned_upto: 0,
            goal_reached_ever: false,
            policy,
            rollout: RolloutBatch::default(),
            counters: CallCounters::default(),
            events: Vec::new(),
            next_episode: 0,
        }
    }

    pub fn model(&self) -> &crate::model::DomainModel {
        self.learner.model()
    }

    /// Feeds goal-reaching trajectories to the learner before any episode runs.
    /// They count as reached goals, so planning starts on the first episode.
    pub fn pretrain(&mut self, trajectories: &[Trajectory]) -> Result<bool, RampError> {
        let changed = self.learner.update_all(trajectories)?;
        if changed {
            self.model_version += 1;
        }
        self.goal_reached_ever |= trajectories.iter().any(|t| t.reached_goal());
        Ok(changed)
    }

    fn action_map(&self) -> ActionIndexMap {
        ActionIndexMap::new(self.task, self.size)
    }

    fn value(&self, w: &WorldState) -> Result<f64, PolicyError> {
        Ok(self.policy.forward(&observe(w))?.1)
    }

    fn flush_rollout(&mut self, last_value: f64) -> Result<(), RampError> {
        if self.rollout.is_empty() {
            return Ok(());
        }
        let cfg = self.config.ppo.clone();
        self.rollout.finish(last_value, cfg.gamma, cfg.gae_lambda);
        let batch = std::mem::take(&mut self.rollout);
        ppo_update(&mut self.policy, &batch, &cfg, &mut self.rng)?;
        self.counters.ppo_updates += 1;
        Ok(())
    }

    /// Policy control from `world` for at most `budget` steps, appending applied transitions.
    fn policy_steps(
        &mut self,
        world: &mut WorldState,
        budget: usize,
        records: &mut Vec<TransitionRecord>,
    ) -> Result<(usize, bool), RampError> {
        let map = self.action_map();
        let mut mask = RuntimeMask::new(map.len());
        let gamma = self.config.ppo.gamma;
        let mut steps = 0;
        while steps < budget {
            let m = mask.mask(world);
            if !m.iter().any(|x| *x) {
                if let Some(d) = self.rollout.dones.last_mut() {
                    *d = true;
                }
                break;
            }
            let obs = observe(world);
            let (logits, v) = self.policy.forward(&obs)?;
            let a = masked_sample(&logits, &m, &mut self.rng)?;
            let logp = masked_softmax(&logits, &m)?[a].ln();
            let action = map.action(a);
            let grounded = env_to_grounded(world, action);
            let r = step(world, action);
            steps += 1;
            if r.outcome == Outcome::Rejected {
                mask.reject(world, a);
            } else {
                let g = grounded.expect("applied action has a grounding");
                records.push(TransitionRecord::applied(
                    world_to_symbolic(world),
                    g,
                    world_to_symbolic(&r.state),
                    r.reward,
                ));
                *world = r.state.clone();
            }
            let truncated = !r.done && steps == budget;
            let mut reward = f64::from(r.reward);
            if truncated {
                reward += gamma * self.value(world)?;
            }
            self.rollout.push(obs, a, m, logp, reward, r.done || truncated, v);
            if self.rollout.len() >= self.config.ppo.rollout_len {
                let last = if r.done || truncated { 0.0 } else { self.value(world)? };
                self.flush_rollout(last)?;
            }
            if r.done {
                return Ok((steps, true));
            }
        }
        Ok((steps, false))
    }

    fn call_planner(&mut self, instance: &CraftInstance, progress: &mut InstanceProgress) -> Option<Plan> {
        self.counters.planner_calls += 1;
        let out = plan(self.learner.model(), &instance.problem(), &self.config.planner);
        progress.planner_version = Some(self.model_version);
        out.plan().cloned()
    }

    fn inject(&mut self, instance: &CraftInstance, traj: &Trajectory) -> Result<bool, RampError> {
        let cfg = self.config.ppo.clone();
        match inject_expert(&mut self.policy, instance, traj, &cfg, &mut self.rng) {
            Ok(_) => {
                self.counters.injections += 1;
                Ok(true)
            }
            Err(PolicyError::Mismatch(_)) => Ok(false),
            Err(e) => Err(e.into()),
        }
    }
}

/// Builds the simulator trajectory of `plan` from the instance start, if it is valid.
fn plan_trajectory(instance: &CraftInstance, p: &Plan, producer: Producer) -> Option<Trajectory> {
    let start = instance.reset();
    let results = replay(&start, &p.0).ok()?;
    let mut states = vec![world_to_symbolic(&start)];
    states.extend(results.iter().map(|r| world_to_symbolic(&r.state)));
    let reached = results.last().is_some_and(|r| r.state.goal_reached());
    let mut t = Trajectory::from_states(states, p.0.clone(), u8::from(reached));
    t.instance_id = instance.id.clone();
    t.producer = producer;
    Some(t)
}

pub fn run_episode(
    st: &mut RampState,
    instance: &CraftInstance,
    progress: &mut InstanceProgress,
) -> Result<EpisodeResult, RampError> {
    let budget = st.config.budgets.b_e.min(st.config.budgets.b_i.saturating_sub(progress.steps));
    let variant = st.config.variant;
    let mut world = instance.reset();
    let mut records = Vec::new();
    let mut steps = 0;
    let mut solved = false;
    let mut controller = Controller::Policy;
    let mut plan_lengths = Vec::new();

    if variant == Variant::Full && st.goal_reached_ever && progress.planner_version != Some(st.model_version) {
        if let Some(p) = st.call_planner(instance, progress) {
            controller = Controller::Planner;
            st.counters.checked_plans += 1;
            for a in &p.0 {
                if steps == budget {
                    break;
                }
                let Some(r) = execute_grounded(&world, a) else {
                    st.counters.unsafe_plans += 1;
                    break;
                };
                steps += 1;
                records.push(TransitionRecord::applied(
                    world_to_symbolic(&world),
                    a.clone(),
                    world_to_symbolic(&r.state),
                    r.reward,
                ));
                world = r.state;
                if r.done {
                    solved = true;
                    break;
                }
            }
            if !solved && steps == p.len() {
                st.counters.unsafe_plans += 1;
            }
        }
    }
    if !solved && steps < budget {
        let (n, s) = st.policy_steps(&mut world, budget - steps, &mut records)?;
        steps += n;
        solved = s;
        if controller == Controller::Planner && n > 0 {
            controller = Controller::Policy;
        }
    }

    let episode_id = st.next_episode;
    st.next_episode += 1;
    let mut traj = Trajectory {
        episode_id,
        instance_id: instance.id.clone(),
        seed: st.seed,
        producer: if controller == Controller::Planner { Producer::Planner } else { Producer::Rl },
        records,
    };
    if !solved {
        if let Some(last) = traj.records.last_mut() {
            last.reward = 0;
        }
    }
    let mut model_changed = false;

    st.store.push(traj.clone());
    if solved {
        st.goal_reached_ever = true;
        plan_lengths.push(traj.len());
        if variant.learns_model() {
            st.counters.nsam_updates += 1;
            model_changed = st.learner.update_all(&st.store[st.learned_upto..])?;
            st.learned_upto = st.store.len();
            if model_changed {
                st.model_version += 1;
            }
        }
        match controller {
            Controller::Planner => {
                st.inject(instance, &traj)?;
            }
            Controller::Policy if variant != Variant::Ppo => {
                let mut injected = false;
                if variant == Variant::Full && model_changed {
                    if let Some(p) = st.call_planner(instance, progress) {
                        st.counters.checked_plans += 1;
                        match plan_trajectory(instance, &p, Producer::Planner) {
                            Some(pt) if pt.reached_goal() => {
                                plan_lengths.push(pt.len());
                                injected = st.inject(instance, &pt)?;
                            }
                            _ => st.counters.unsafe_plans += 1,
                        }
                    }
                }
                if !injected {
                    st.counters.shortcut_calls += 1;
                    let mut short = match variant {
                        Variant::MinusPn => remove_loops(&traj),
                        _ => shortcut_search(&traj, st.learner.model(), &instance.problem()),
                    };
                    if short.len() < traj.len() {
                        short.producer = Producer::Shortcut;
                        if st.inject(instance, &short)? {
                            plan_lengths.push(short.len());
                        }
                    }
                }
            }
            Controller::Policy => {}
        }
    }
    st.events.push(EpisodeEvent {
        episode_id,
        instance: instance.id.clone(),
        controller,
        steps,
        solved,
        plan_length: plan_lengths.iter().copied().min(),
        model_changed,
    });
    progress.steps += steps;
    progress.episodes += 1;
    Ok(EpisodeResult { trajectory: traj, solved, steps, controller, plan_lengths })
}

/// Runs episodes on one instance until its step budget is spent.
pub fn run_instance(st: &mut RampState, instance: &CraftInstance) -> Result<InstanceMetrics, RampError> {
    st.config.budgets.validate()?;
    if instance.task() != st.task || instance.size() != st.size {
        return Err(RampError::Instance(instance.id.clone()));
    }
    if st.config.reset_policy_per_instance {
        let map = st.action_map();
        st.policy = PolicyParameters::new(observation_len(st.size), map.len(), &st.config.hidden, st.config.ppo.lr, st.seed);
        st.rollout.clear();
    }
    let mut progress = InstanceProgress::default();
    let mut solved = false;
    let mut min_len: Option<usize> = None;
    while progress.steps < st.config.budgets.b_i {
        let r = run_episode(st, instance, &mut progress)?;
        solved |= r.solved;
        if let Some(m) = r.plan_lengths.iter().min() {
            min_len = Some(min_len.map_or(*m, |x| x.min(*m)));
        }
        if r.steps == 0 {
            break;
        }
    }
    Ok(InstanceMetrics {
        instance: instance.id.clone(),
        solved,
        min_plan_len: min_len,
        episodes: progress.episodes,
        steps: progress.steps,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct CampaignResult {
    pub seed: u64,
    pub variant: Variant,
    pub instances: Vec<InstanceMetrics>,
    pub counters: CallCounters,
    pub events: Vec<EpisodeEvent>,
}

/// Instances in order with model and policy carried over; one seed.
pub fn run_campaign(instances: &[CraftInstance], seed: u64, config: &RampConfig) -> Result<CampaignResult, RampError> {
    let Some(first) = instances.first() else {
        return Ok(CampaignResult { seed, variant: config.variant, instances: vec![], counters: CallCounters::default(), events: vec![] });
    };
    let mut st = RampState::new(first.task(), first.size(), config.clone(), seed);
    let mut out = Vec::with_capacity(instances.len());
    for inst in instances {
        out.push(run_instance(&mut st, inst)?);
    }
    Ok(CampaignResult { seed, variant: config.variant, instances: out, counters: st.counters, events: st.events })
}

/// Independent campaigns per seed, run in parallel; results in seed order.
pub fn run_campaigns(instances: &[CraftInstance], seeds: &[u64], config: &RampConfig) -> Result<Vec<CampaignResult>, RampError> {
    seeds.par_iter().map(|&s| run_campaign(instances, s, config)).collect()
}

pub fn events_to_jsonl(events: &[EpisodeEvent]) -> String {
    events.iter().map(|e| serde_json::to_string(e).expect("serializable") + "\n").collect()
}
