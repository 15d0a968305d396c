//! Experiment protocols: instance pools, expert data, offline / zero-shot / online
//! runs, metrics tables and reports.

mod config;
mod metrics;
mod report;

pub use config::{parse_kv, ConfigError};
pub use metrics::{rows_from_csv, rows_to_csv, MetricsRow};
pub use report::{band_stats, render_svg, BandPoint, Metric};

use std::time::{Duration, Instant};

use rayon::prelude::*;
use thiserror::Error;

use crate::encodings::{observe, replay, world_to_symbolic, ActionIndexMap};
use crate::model::{DomainModel, Plan, Producer, Trajectory};
use crate::nsam::{learn, NsamConfig, NsamError};
use crate::planner::{plan, PlannerConfig};
use crate::policy::{bc_train, evaluate, BcConfig, PolicyError};
use crate::ramp::{run_campaigns, CampaignResult, RampConfig, RampError, Variant};
use crate::world::{filter_solvable, generate, ground_truth_model, CraftInstance, GeneratorConfig, Solvability, Task};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("generation failed: {0}")]
    Generation(String),
    #[error("missing expert data: {0}")]
    MissingExpert(String),
    #[error("behavior cloning has no zero-shot path: observation length differs between map sizes")]
    NoZeroShot,
    #[error(transparent)]
    Nsam(#[from] NsamError),
    #[error(transparent)]
    Policy(#[from] PolicyError),
    #[error(transparent)]
    Ramp(#[from] RampError),
    #[error("{0}")]
    Invalid(String),
}

/// A generated instance with the expert's simulator-validated trajectory.
#[derive(Clone, Debug, PartialEq)]
pub struct ExpertInstance {
    pub instance: CraftInstance,
    pub trajectory: Trajectory,
}

impl ExpertInstance {
    pub fn solution_len(&self) -> usize {
        self.trajectory.len()
    }
}

/// Replays `plan` in the simulator; `None` unless every step applies and the goal is reached.
pub fn plan_to_trajectory(instance: &CraftInstance, plan: &Plan, producer: Producer) -> Option<Trajectory> {
    let start = instance.reset();
    let results = replay(&start, &plan.0).ok()?;
    if !results.last().is_some_and(|r| r.state.goal_reached()) {
        return None;
    }
    let mut states = vec![world_to_symbolic(&start)];
    states.extend(results.iter().map(|r| world_to_symbolic(&r.state)));
    let mut t = Trajectory::from_states(states, plan.0.clone(), 1);
    t.instance_id = instance.id.clone();
    t.seed = instance.seed;
    t.producer = producer;
    Some(t)
}

/// Plans with the ground-truth model and returns the validated trajectory.
pub fn expert_trajectory(instance: &CraftInstance, config: &PlannerConfig) -> Option<Trajectory> {
    match filter_solvable(instance, config) {
        Solvability::Solvable(p) => plan_to_trajectory(instance, &p, Producer::Expert),
        _ => None,
    }
}

/// The first `count` solvable instances in seed order starting at `base_seed`.
pub fn expert_pool(
    task: Task,
    size: usize,
    count: usize,
    base_seed: u64,
    config: &PlannerConfig,
) -> Result<Vec<ExpertInstance>, HarnessError> {
    let mut out = Vec::with_capacity(count);
    let mut next = base_seed;
    let mut tried = 0usize;
    while out.len() < count {
        let chunk = (count - out.len()).max(8) * 2;
        let seeds: Vec<u64> = (next..next + chunk as u64).collect();
        next += chunk as u64;
        tried += chunk;
        let found: Vec<Option<ExpertInstance>> = seeds
            .par_iter()
            .map(|&s| {
                let inst = generate(&GeneratorConfig::new(task, size, s)).ok()?;
                let trajectory = expert_trajectory(&inst, config)?;
                Some(ExpertInstance { instance: inst, trajectory })
            })
            .collect();
        out.extend(found.into_iter().flatten().take(count - out.len()));
        if tried > count * 50 + 1000 {
            return Err(HarnessError::Generation(format!(
                "only {} solvable {task} {size}x{size} instances in {tried} seeds",
                out.len()
            )));
        }
    }
    Ok(out)
}

/// Round-robin partition of `0..n` into `k` folds.
pub fn fold_partition(n: usize, k: usize) -> Vec<Vec<usize>> {
    let k = k.max(1);
    let mut folds = vec![Vec::new(); k];
    for i in 0..n {
        folds[i % k].push(i);
    }
    folds
}

/// Solution-length bucket label.
pub fn length_bucket(task: Task, len: usize) -> String {
    match task {
        Task::Sword => match len {
            0..=3 => "len<=3".into(),
            4 | 5 => format!("len={len}"),
            _ => "len>=6".into(),
        },
        Task::Pogo => match len {
            0..=5 => "len<=5".into(),
            6..=11 => format!("len={len}"),
            _ => "len>=12".into(),
        },
    }
}

/// Buckets in ascending difficulty.
pub fn bucket_order(task: Task) -> Vec<String> {
    let lens: Vec<usize> = match task {
        Task::Sword => vec![3, 4, 5, 6],
        Task::Pogo => (5..=12).collect(),
    };
    lens.into_iter().map(|l| length_bucket(task, l)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OfflineAlgo {
    NsamP,
    Bc,
}

impl OfflineAlgo {
    pub fn name(self) -> &'static str {
        match self {
            OfflineAlgo::NsamP => "nsam_p",
            OfflineAlgo::Bc => "bc",
        }
    }
}

impl std::str::FromStr for OfflineAlgo {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "nsam_p" | "nsam" => Ok(OfflineAlgo::NsamP),
            "bc" => Ok(OfflineAlgo::Bc),
            other => Err(format!("unknown offline algorithm {other:?}")),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OfflineProtocol {
    pub task: Task,
    pub size: usize,
    pub pool: usize,
    pub folds: usize,
    pub train_trajectories: usize,
    pub step_cap: usize,
    pub planner: PlannerConfig,
    pub bc: BcConfig,
    pub nsam: NsamConfig,
    /// Training-set sizes for the success-vs-trajectories curve; empty disables it.
    pub curve: Vec<usize>,
    pub seed: u64,
    pub timing: bool,
}

/// Per-call planner limit by task and map size.
pub fn planner_limit(task: Task, size: usize) -> PlannerConfig {
    let secs = match (task, size) {
        (Task::Sword, s) if s <= 6 => 10.0,
        (Task::Sword, s) if s <= 10 => 30.0,
        (Task::Sword, _) => 60.0,
        (Task::Pogo, s) if s <= 6 => 30.0,
        (Task::Pogo, s) if s <= 10 => 60.0,
        (Task::Pogo, _) => 120.0,
    };
    PlannerConfig { timeout: Duration::from_secs_f64(secs), node_budget: 2_000_000 }
}

impl OfflineProtocol {
    pub fn new(task: Task, size: usize) -> Self {
        OfflineProtocol {
            task,
            size,
            pool: 200,
            folds: 5,
            train_trajectories: 100,
            step_cap: 32,
            planner: planner_limit(task, size),
            bc: BcConfig::default(),
            nsam: NsamConfig::default(),
            curve: Vec::new(),
            seed: 0,
            timing: false,
        }
    }
}

/// Outcome of one test instance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TestOutcome {
    pub solved: bool,
    /// A learned-model plan was returned.
    pub planned: bool,
    /// A returned plan failed to replay to the goal.
    pub unsafe_plan: bool,
}

/// Plans for `instance` with `model`; success means a simulator-valid plan within `cap` steps.
pub fn plan_and_check(model: &DomainModel, instance: &CraftInstance, config: &PlannerConfig, cap: usize) -> TestOutcome {
    match plan(model, &instance.problem(), config).plan() {
        None => TestOutcome { solved: false, planned: false, unsafe_plan: false },
        Some(p) => {
            let valid = plan_to_trajectory(instance, p, Producer::Planner).is_some();
            TestOutcome { solved: valid && p.len() <= cap, planned: true, unsafe_plan: !valid }
        }
    }
}

/// Safety tally over learned-model planning episodes.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SafetyTally {
    pub plans: usize,
    pub violations: usize,
}

impl SafetyTally {
    pub fn add(&mut self, o: &TestOutcome) {
        self.plans += usize::from(o.planned);
        self.violations += usize::from(o.unsafe_plan);
    }
}

pub struct OfflineResult {
    pub rows: Vec<MetricsRow>,
    pub safety: SafetyTally,
}

fn bucket_rows(
    task: Task,
    size: usize,
    algo: &str,
    fold: usize,
    tests: &[(&ExpertInstance, bool)],
    wall_ms: u64,
) -> Vec<MetricsRow> {
    let mut rows = Vec::new();
    let mk = |bucket: String, items: Vec<bool>| {
        let n = items.len();
        let rate = if n == 0 { 0.0 } else { items.iter().filter(|x| **x).count() as f64 / n as f64 };
        MetricsRow {
            task: task.name().to_string(),
            size,
            algo: algo.to_string(),
            seed_or_fold: fold as u64,
            bucket,
            n,
            success_rate: rate,
            cum_min_len: None,
            wall_ms,
        }
    };
    rows.push(mk("all".into(), tests.iter().map(|(_, s)| *s).collect()));
    for b in bucket_order(task) {
        let items: Vec<bool> =
            tests.iter().filter(|(e, _)| length_bucket(task, e.solution_len()) == b).map(|(_, s)| *s).collect();
        if !items.is_empty() {
            rows.push(mk(b, items));
        }
    }
    rows
}

/// Trains on `train` and scores every test instance.
fn run_offline_fold(
    algo: OfflineAlgo,
    protocol: &OfflineProtocol,
    train: &[&ExpertInstance],
    tests: &[&ExpertInstance],
    safety: &mut SafetyTally,
) -> Result<Vec<bool>, HarnessError> {
    match algo {
        OfflineAlgo::NsamP => {
            let trajs: Vec<Trajectory> = train.iter().map(|e| e.trajectory.clone()).collect();
            let model = learn(&trajs, &ground_truth_model(protocol.task).skeleton(), &protocol.nsam)?;
            let outcomes: Vec<TestOutcome> = tests
                .par_iter()
                .map(|e| plan_and_check(&model, &e.instance, &protocol.planner, protocol.step_cap))
                .collect();
            for o in &outcomes {
                safety.add(o);
            }
            Ok(outcomes.into_iter().map(|o| o.solved).collect())
        }
        OfflineAlgo::Bc => {
            if train.is_empty() {
                return Ok(vec![false; tests.len()]);
            }
            let map = ActionIndexMap::new(protocol.task, protocol.size);
            let mut data = Vec::new();
            for e in train {
                let mut w = e.instance.reset();
                for r in &e.trajectory.records {
                    let idx = map
                        .index_of_grounded(&r.action)
                        .ok_or_else(|| HarnessError::MissingExpert(format!("unmappable action {}", r.action)))?;
                    data.push((observe(&w), idx));
                    w = crate::encodings::execute_grounded(&w, &r.action)
                        .ok_or_else(|| HarnessError::MissingExpert(format!("invalid expert step in {}", e.instance.id)))?
                        .state;
                }
            }
            let (params, _) = bc_train(&data, map.len(), &protocol.bc)?;
            let mut rng = rand::rngs::mock::StepRng::new(0, 0);
            tests
                .iter()
                .map(|e| Ok(evaluate(&params, &e.instance, protocol.step_cap, true, &mut rng)?.solved))
                .collect()
        }
    }
}

/// k-fold offline evaluation on an expert pool.
pub fn offline_experiment(
    algo: OfflineAlgo,
    protocol: &OfflineProtocol,
    pool: &[ExpertInstance],
) -> Result<OfflineResult, HarnessError> {
    if pool.is_empty() {
        return Err(HarnessError::MissingExpert("empty instance pool".into()));
    }
    if let Some(e) = pool.iter().find(|e| e.instance.task() != protocol.task || e.instance.size() != protocol.size) {
        return Err(HarnessError::Invalid(format!("instance {} does not match the protocol", e.instance.id)));
    }
    let folds = fold_partition(pool.len(), protocol.folds);
    let per_fold: Vec<Result<(Vec<MetricsRow>, SafetyTally), HarnessError>> = folds
        .par_iter()
        .enumerate()
        .map(|(f, test_idx)| {
            let start = Instant::now();
            let test: Vec<&ExpertInstance> = test_idx.iter().map(|&i| &pool[i]).collect();
            let train_all: Vec<&ExpertInstance> =
                (0..pool.len()).filter(|i| !test_idx.contains(i)).map(|i| &pool[i]).collect();
            let mut safety = SafetyTally::default();
            let mut rows = Vec::new();
            let n_train = protocol.train_trajectories.min(train_all.len());
            let solved = run_offline_fold(algo, protocol, &train_all[..n_train], &test, &mut safety)?;
            let wall = if protocol.timing { start.elapsed().as_millis() as u64 } else { 0 };
            let tagged: Vec<(&ExpertInstance, bool)> = test.iter().copied().zip(solved).collect();
            rows.extend(bucket_rows(protocol.task, protocol.size, algo.name(), f, &tagged, wall));
            for &n in &protocol.curve {
                let k = n.min(train_all.len());
                let solved = run_offline_fold(algo, protocol, &train_all[..k], &test, &mut safety)?;
                let rate = solved.iter().filter(|s| **s).count() as f64 / solved.len().max(1) as f64;
                rows.push(MetricsRow {
                    task: protocol.task.name().to_string(),
                    size: protocol.size,
                    algo: algo.name().to_string(),
                    seed_or_fold: f as u64,
                    bucket: k.to_string(),
                    n: solved.len(),
                    success_rate: rate,
                    cum_min_len: None,
                    wall_ms: 0,
                });
            }
            Ok((rows, safety))
        })
        .collect();
    let mut rows = Vec::new();
    let mut safety = SafetyTally::default();
    for r in per_fold {
        let (r, s) = r?;
        rows.extend(r);
        safety.plans += s.plans;
        safety.violations += s.violations;
    }
    Ok(OfflineResult { rows, safety })
}

/// Learns on folds of the small-map pool and plans on the matching folds of larger maps.
pub fn zero_shot_experiment(
    algo: OfflineAlgo,
    protocol: &OfflineProtocol,
    train_pool: &[ExpertInstance],
    test_pools: &[(usize, Vec<ExpertInstance>)],
) -> Result<OfflineResult, HarnessError> {
    if algo == OfflineAlgo::Bc {
        return Err(HarnessError::NoZeroShot);
    }
    if train_pool.is_empty() {
        return Err(HarnessError::MissingExpert("empty training pool".into()));
    }
    let train_folds = fold_partition(train_pool.len(), protocol.folds);
    let mut rows = Vec::new();
    let mut safety = SafetyTally::default();
    for (f, test_idx) in train_folds.iter().enumerate() {
        let train: Vec<Trajectory> = (0..train_pool.len())
            .filter(|i| !test_idx.contains(i))
            .take(protocol.train_trajectories)
            .map(|i| train_pool[i].trajectory.clone())
            .collect();
        let model = learn(&train, &ground_truth_model(protocol.task).skeleton(), &protocol.nsam)?;
        for (size, pool) in test_pools {
            let start = Instant::now();
            let folds = fold_partition(pool.len(), protocol.folds);
            let test: Vec<&ExpertInstance> = folds[f].iter().map(|&i| &pool[i]).collect();
            let limit = planner_limit(protocol.task, *size);
            let outcomes: Vec<TestOutcome> =
                test.par_iter().map(|e| plan_and_check(&model, &e.instance, &limit, protocol.step_cap)).collect();
            for o in &outcomes {
                safety.add(o);
            }
            let wall = if protocol.timing { start.elapsed().as_millis() as u64 } else { 0 };
            let tagged: Vec<(&ExpertInstance, bool)> =
                test.iter().copied().zip(outcomes.iter().map(|o| o.solved)).collect();
            rows.extend(bucket_rows(protocol.task, *size, "nsam_pt", f, &tagged, wall));
        }
    }
    Ok(OfflineResult { rows, safety })
}

/// Fresh solvable instances for online campaigns.
pub fn online_instances(task: Task, size: usize, count: usize, base_seed: u64) -> Result<Vec<CraftInstance>, HarnessError> {
    Ok(expert_pool(task, size, count, base_seed, &planner_limit(task, size))?.into_iter().map(|e| e.instance).collect())
}

pub struct OnlineResult {
    pub rows: Vec<MetricsRow>,
    pub campaigns: Vec<CampaignResult>,
}

/// Checkpoints at which online metrics are reported.
pub fn online_checkpoints(count: usize) -> Vec<usize> {
    let step = (count / 5).max(1);
    let mut c: Vec<usize> = (1..).map(|k| k * step).take_while(|&k| k < count).collect();
    c.push(count);
    c
}

/// Campaigns for every variant and seed; rows per instances-trained checkpoint.
pub fn online_experiment(
    instances: &[CraftInstance],
    variants: &[Variant],
    seeds: &[u64],
    base: &RampConfig,
) -> Result<OnlineResult, HarnessError> {
    let Some(first) = instances.first() else {
        return Ok(OnlineResult { rows: vec![], campaigns: vec![] });
    };
    let mut campaigns = Vec::new();
    for &v in variants {
        let cfg = RampConfig { variant: v, ..base.clone() };
        campaigns.extend(run_campaigns(instances, seeds, &cfg)?);
    }
    let rows = online_rows(first.task(), first.size(), &campaigns, variants, seeds);
    Ok(OnlineResult { rows, campaigns })
}

/// Success rate and cumulative minimum plan length per checkpoint. The length sum
/// runs over instances solved by every listed variant under the same seed.
pub fn online_rows(
    task: Task,
    size: usize,
    campaigns: &[CampaignResult],
    variants: &[Variant],
    seeds: &[u64],
) -> Vec<MetricsRow> {
    let mut rows = Vec::new();
    for &seed in seeds {
        let of_seed: Vec<&CampaignResult> = campaigns.iter().filter(|c| c.seed == seed).collect();
        let Some(n) = of_seed.first().map(|c| c.instances.len()) else { continue };
        let common: Vec<bool> = (0..n)
            .map(|i| variants.iter().all(|v| of_seed.iter().any(|c| c.variant == *v && c.instances[i].solved)))
            .collect();
        for &v in variants {
            let Some(c) = of_seed.iter().find(|c| c.variant == v) else { continue };
            for k in online_checkpoints(n) {
                let solved = c.instances[..k].iter().filter(|m| m.solved).count();
                let cum: usize = (0..k).filter(|&i| common[i]).filter_map(|i| c.instances[i].min_plan_len).sum();
                rows.push(MetricsRow {
                    task: task.name().to_string(),
                    size,
                    algo: v.name().to_string(),
                    seed_or_fold: seed,
                    bucket: k.to_string(),
                    n: k,
                    success_rate: solved as f64 / k as f64,
                    cum_min_len: Some(cum as f64),
                    wall_ms: 0,
                });
            }
        }
    }
    rows
}

/// Mean of `success_rate` over rows matching `algo` and `bucket`, with total `n`.
pub fn mean_rate(rows: &[MetricsRow], algo: &str, bucket: &str) -> Option<(f64, usize)> {
    let sel: Vec<&MetricsRow> = rows.iter().filter(|r| r.algo == algo && r.bucket == bucket).collect();
    let n: usize = sel.iter().map(|r| r.n).sum();
    if n == 0 {
        return None;
    }
    let solved: f64 = sel.iter().map(|r| r.success_rate * r.n as f64).sum();
    Some((solved / n as f64, n))
}
