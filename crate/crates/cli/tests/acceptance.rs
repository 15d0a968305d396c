//! Acceptance run: one PASS/FAIL line per criterion, then a single assertion.
//!
//! Release mode is strongly recommended: `cargo test --release -p ramplab-cli --test acceptance`.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use common::{ga, run, simulator_bfs, workshop, HullOracle};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ramplab::encodings::{execute_grounded, ActionIndexMap};
use ramplab::harness::{
    bucket_order, expert_pool, mean_rate, offline_experiment, online_experiment, online_instances,
    zero_shot_experiment, MetricsRow, OfflineAlgo, OfflineProtocol, SafetyTally,
};
use ramplab::model::{
    apply, ActionSchema, Comparator, DomainModel, FluentSignature, Goal, GroundedAction, LinearAssignment,
    LinearCondition, ProblemInstance, SymbolicState, Trajectory,
};
use ramplab::nsam::{learn, learn_hull, HullConfig, NsamConfig};
use ramplab::num::Num;
use ramplab::planner::{plan, PlanOutcome, PlannerConfig};
use ramplab::policy::{ppo_loss_and_grad, Mlp, PolicyParameters, PpoConfig, RolloutBatch};
use ramplab::ramp::{RampConfig, Variant};
use ramplab::shortcut::shortcut_search;
use ramplab::world::{generate, ground_truth_model, GeneratorConfig, Item, Task};

const MIN_SAFETY_PLANS: usize = 500;
const HULL_SETS: usize = 200;
const HULL_PROBES: usize = 1000;
const SHORTCUT_FUZZ: usize = 10_000;
const PLANNER_INSTANCES: usize = 100;
const PLANNER_SLACK: usize = 2;
const PLANNER_MIN_FRACTION: f64 = 0.95;
const OFFLINE_MIN_SUCCESS: f64 = 0.90;
const MIN_BUCKET_TESTS: usize = 10;
const ZERO_SHOT_MIN_SUCCESS: f64 = 0.85;
const ZERO_SHOT_MAX_GAP: f64 = 0.10;
const ONLINE_LENGTH_RATIO: f64 = 0.5;
const ABLATION_SLACK: f64 = 1.10;
const GRAD_MAX_REL_ERR: f64 = 1e-4;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

// ---------------------------------------------------------------- 2

fn deltas(model: &DomainModel, schema: &str) -> Option<BTreeMap<String, i64>> {
    model.schema(schema)?.numeric_effects.iter().map(|e| Some((e.target.clone(), e.as_delta()?.to_integer()))).collect()
}

fn recipe(items: &[(Item, i64)]) -> BTreeMap<String, i64> {
    items.iter().map(|(i, v)| (i.fluent().to_string(), *v)).collect()
}

fn criterion_2() -> Verdict {
    let sword = run(
        &workshop(Task::Sword, &[(Item::Log, 1)]),
        &[ga("CRAFT_PLANK", &[]), ga("CRAFT_STICK", &[]), ga("CRAFT_WOODEN_SWORD", &["cell_1_0"])],
    );
    let pogo = run(
        &workshop(Task::Pogo, &[(Item::Log, 1), (Item::Planks, 5), (Item::Stick, 1)]),
        &[
            ga("CRAFT_PLANK", &[]),
            ga("CRAFT_STICK", &[]),
            ga("CRAFT_TREE_TAP", &["cell_1_0"]),
            ga("PLACE_TREE_TAP", &["cell_1_0", "cell_2_0"]),
            ga("CRAFT_WOODEN_POGO", &["cell_1_0"]),
        ],
    );
    let expected: [(Task, &Trajectory, &str, BTreeMap<String, i64>); 7] = [
        (Task::Sword, &sword, "CRAFT_PLANK", recipe(&[(Item::Log, -1), (Item::Planks, 4)])),
        (Task::Sword, &sword, "CRAFT_STICK", recipe(&[(Item::Planks, -2), (Item::Stick, 4)])),
        (Task::Sword, &sword, "CRAFT_WOODEN_SWORD", recipe(&[(Item::Planks, -2), (Item::Stick, -1), (Item::WoodenSword, 1)])),
        (Task::Pogo, &pogo, "CRAFT_PLANK", recipe(&[(Item::Log, -1), (Item::Planks, 4)])),
        (Task::Pogo, &pogo, "CRAFT_TREE_TAP", recipe(&[(Item::Planks, -5), (Item::Stick, -1), (Item::TreeTap, 1)])),
        (Task::Pogo, &pogo, "PLACE_TREE_TAP", recipe(&[(Item::TreeTap, -1), (Item::Sack, 1)])),
        (
            Task::Pogo,
            &pogo,
            "CRAFT_WOODEN_POGO",
            recipe(&[(Item::Planks, -2), (Item::Stick, -4), (Item::Sack, -1), (Item::WoodenPogo, 1)]),
        ),
    ];
    let mut wrong = Vec::new();
    for (task, t, schema, want) in &expected {
        let m = learn(&[(*t).clone()], &ground_truth_model(*task).skeleton(), &NsamConfig::default());
        let got = m.ok().and_then(|m| deltas(&m, schema));
        if got.as_ref() != Some(want) {
            wrong.push(format!("{task} {schema}: {got:?}"));
        }
    }
    verdict(wrong.is_empty(), format!("{} recipes exact{}", expected.len() - wrong.len(), fmt_list(&wrong)))
}

fn fmt_list(v: &[String]) -> String {
    if v.is_empty() { String::new() } else { format!("; mismatches: {}", v.join(", ")) }
}

// ---------------------------------------------------------------- 3

fn criterion_3() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(0xacc3);
    let (mut disagree, mut probes_total) = (0usize, 0usize);
    for set in 0..HULL_SETS {
        let d = 2 + set % 2;
        let n = rng.gen_range(1..=12);
        let flat = rng.gen_bool(0.25);
        let dir: Vec<i64> = (0..d).map(|_| rng.gen_range(-2..=2)).collect();
        let samples: Vec<Vec<i64>> = (0..n)
            .map(|_| {
                if flat {
                    let a = rng.gen_range(-3..=3);
                    dir.iter().map(|v| a * v).collect()
                } else {
                    (0..d).map(|_| rng.gen_range(-6..=6)).collect()
                }
            })
            .collect();
        let oracle = HullOracle::new(&samples.iter().map(|s| s.iter().map(|v| 2 * *v as i128).collect()).collect::<Vec<_>>());
        let region =
            learn_hull(&samples.iter().map(|s| s.iter().map(|v| Num::from(*v)).collect()).collect::<Vec<_>>(), &HullConfig::default());
        let Ok(region) = region else {
            disagree += HULL_PROBES;
            continue;
        };
        for _ in 0..HULL_PROBES {
            let p: Vec<i128> = (0..d).map(|_| rng.gen_range(-14..=14)).collect();
            let learned = region.contains(&p.iter().map(|v| Num::new(*v as i64, 2)).collect::<Vec<_>>());
            disagree += usize::from(learned != oracle.contains(&p));
            probes_total += 1;
        }
    }
    verdict(disagree == 0, format!("{HULL_SETS} sets, {probes_total} probes, {disagree} disagreements"))
}

// ---------------------------------------------------------------- 4

const MOVES: [(&str, i64, i64); 8] = [
    ("move_up", 0, 1),
    ("move_down", 0, -1),
    ("move_left", -1, 0),
    ("move_right", 1, 0),
    ("move_up_right", 1, 1),
    ("move_up_left", -1, 1),
    ("move_down_right", 1, -1),
    ("move_down_left", -1, -1),
];

fn grid_model(size: i64, known: &[&str]) -> DomainModel {
    let bound = |axis: &str, d: i64| match d {
        1 => vec![LinearCondition::on(axis, Comparator::Le, Num::from(size - 2))],
        -1 => vec![LinearCondition::on(axis, Comparator::Ge, Num::from(1))],
        _ => vec![],
    };
    let schemas = MOVES
        .iter()
        .filter(|m| known.contains(&m.0))
        .map(|&(name, dx, dy)| {
            let mut s = ActionSchema::new(name, &[]);
            s.numeric_preconditions = [bound("x", dx), bound("y", dy)].concat();
            for (axis, d) in [("x", dx), ("y", dy)] {
                if d != 0 {
                    s.numeric_effects.push(LinearAssignment::delta(axis, Num::from(d)));
                }
            }
            s
        })
        .collect();
    DomainModel {
        name: "grid".into(),
        fluents: ["x", "y"].iter().map(|f| FluentSignature { name: f.to_string(), param_types: vec![] }).collect(),
        schemas,
        ..Default::default()
    }
}

fn pos(x: i64, y: i64) -> SymbolicState {
    SymbolicState { fluents: [("x".to_string(), Num::from(x)), ("y".to_string(), Num::from(y))].into(), ..Default::default() }
}

fn grid_problem(start: (i64, i64), goal: (i64, i64)) -> ProblemInstance {
    ProblemInstance {
        name: "grid".into(),
        init: pos(start.0, start.1),
        goal: Goal {
            atoms: vec![],
            conditions: vec![
                LinearCondition::on("x", Comparator::Eq, Num::from(goal.0)),
                LinearCondition::on("y", Comparator::Eq, Num::from(goal.1)),
            ],
        },
        ..Default::default()
    }
}

fn walk(truth: &DomainModel, start: (i64, i64), names: &[&str]) -> Trajectory {
    let mut states = vec![pos(start.0, start.1)];
    let actions: Vec<GroundedAction> = names.iter().map(|a| GroundedAction::new(a, &[])).collect();
    for a in &actions {
        states.push(apply(states.last().unwrap(), a, truth).expect("legal move"));
    }
    Trajectory::from_states(states, actions, 1)
}

fn criterion_4() -> Verdict {
    let all: Vec<&str> = MOVES.iter().map(|m| m.0).collect();
    let t = walk(&grid_model(3, &all), (0, 0), &["move_up", "move_right", "move_left", "move_right", "move_up", "move_right"]);
    let partial = grid_model(3, &["move_up", "move_left", "move_right", "move_up_right", "move_up_left"]);
    let short = shortcut_search(&t, &partial, &grid_problem((0, 0), (2, 2)));
    let names: Vec<String> = short.actions().iter().map(|a| a.name.clone()).collect();
    let example_ok = names == ["move_up_right", "move_up_right"];

    let mut rng = ChaCha8Rng::seed_from_u64(0xacc4);
    let mut bad = 0usize;
    for _ in 0..SHORTCUT_FUZZ {
        let size = rng.gen_range(3..=5);
        let truth = grid_model(size, &all);
        let start = (rng.gen_range(0..size), rng.gen_range(0..size));
        let mut cur = start;
        let mut seq = Vec::new();
        for _ in 0..rng.gen_range(0..40) {
            let (nm, dx, dy) = MOVES[rng.gen_range(0..8)];
            let next = (cur.0 + dx, cur.1 + dy);
            if (0..size).contains(&next.0) && (0..size).contains(&next.1) {
                seq.push(nm);
                cur = next;
            }
        }
        let known: Vec<&str> = all.iter().copied().filter(|_| rng.gen_bool(0.5)).collect();
        let t = walk(&truth, start, &seq);
        let out = shortcut_search(&t, &grid_model(size, &known), &grid_problem(start, cur));
        let mut s = pos(start.0, start.1);
        let mut ok = out.len() <= t.len();
        for r in &out.records {
            ok &= r.pre == s;
            match apply(&s, &r.action, &truth) {
                Ok(next) => s = next,
                Err(_) => ok = false,
            }
        }
        ok &= s == pos(cur.0, cur.1);
        bad += usize::from(!ok);
    }
    verdict(
        example_ok && bad == 0,
        format!("worked example -> {names:?}; {SHORTCUT_FUZZ} fuzzed trajectories, {bad} grew or failed to replay"),
    )
}

// ---------------------------------------------------------------- 5

fn criterion_5() -> Verdict {
    let model = ground_truth_model(Task::Sword);
    let actions = ActionIndexMap::new(Task::Sword, 6);
    let cfg = PlannerConfig::with_timeout(30.0);
    let (mut checked, mut within, mut invalid, mut seed) = (0usize, 0usize, 0usize, 0u64);
    while checked < PLANNER_INSTANCES {
        let inst = generate(&GeneratorConfig::new(Task::Sword, 6, 10_000 + seed)).expect("generated");
        seed += 1;
        let Some(opt) = simulator_bfs(&inst.initial, &actions) else { continue };
        checked += 1;
        let PlanOutcome::Found(p) = plan(&model, &inst.problem(), &cfg) else {
            invalid += 1;
            continue;
        };
        let mut w = inst.initial.clone();
        let replayed = p.0.iter().all(|a| match execute_grounded(&w, a) {
            Some(r) => {
                w = r.state;
                true
            }
            None => false,
        });
        if !replayed || !w.goal_reached() {
            invalid += 1;
        } else if p.len() <= opt + PLANNER_SLACK {
            within += 1;
        }
    }
    let frac = within as f64 / checked as f64;
    verdict(
        frac >= PLANNER_MIN_FRACTION && invalid == 0,
        format!("{within}/{checked} within optimum+{PLANNER_SLACK} (need {PLANNER_MIN_FRACTION}), {invalid} invalid"),
    )
}

// ---------------------------------------------------------------- 6, 7

struct OfflineRun {
    nsam: Vec<MetricsRow>,
    bc: Vec<MetricsRow>,
    zero_shot: Vec<MetricsRow>,
    same_size: Vec<MetricsRow>,
    safety: SafetyTally,
}

fn offline_runs() -> OfflineRun {
    let p6 = OfflineProtocol::new(Task::Sword, 6);
    let pool6 = expert_pool(Task::Sword, 6, p6.pool, 0, &p6.planner).expect("6x6 pool");
    let nsam = offline_experiment(OfflineAlgo::NsamP, &p6, &pool6).expect("nsam_p");
    let bc = offline_experiment(OfflineAlgo::Bc, &p6, &pool6).expect("bc");
    let p10 = OfflineProtocol::new(Task::Sword, 10);
    let pool10 = expert_pool(Task::Sword, 10, p10.pool, 0, &p10.planner).expect("10x10 pool");
    let zs = zero_shot_experiment(OfflineAlgo::NsamP, &p6, &pool6, &[(10, pool10.clone())]).expect("zero-shot");
    let same = offline_experiment(OfflineAlgo::NsamP, &p10, &pool10).expect("10x10 nsam_p");
    let mut safety = SafetyTally::default();
    for t in [&nsam.safety, &bc.safety, &zs.safety, &same.safety] {
        safety.plans += t.plans;
        safety.violations += t.violations;
    }
    OfflineRun { nsam: nsam.rows, bc: bc.rows, zero_shot: zs.rows, same_size: same.rows, safety }
}

fn criterion_6(r: &OfflineRun) -> Verdict {
    let (nsam_all, n) = mean_rate(&r.nsam, "nsam_p", "all").unwrap_or((0.0, 0));
    let rate = |rows: &[MetricsRow], algo: &str, b: &str| mean_rate(rows, algo, b).map_or(0.0, |x| x.0);
    // Hardest bucket with enough test instances for the comparison to mean something.
    let Some(hardest) = bucket_order(Task::Sword)
        .into_iter()
        .rev()
        .find(|b| mean_rate(&r.nsam, "nsam_p", b).is_some_and(|x| x.1 >= MIN_BUCKET_TESTS))
    else {
        return verdict(false, "no bucket with enough tests".into());
    };
    let (nsam_h, bc_h) = (rate(&r.nsam, "nsam_p", &hardest), rate(&r.bc, "bc", &hardest));
    let sparse: Vec<String> = bucket_order(Task::Sword)
        .iter()
        .filter_map(|b| {
            let (x, k) = mean_rate(&r.nsam, "nsam_p", b)?;
            (k < MIN_BUCKET_TESTS).then(|| format!("{b} n={k}: nsam_p {x:.3} vs bc {:.3}", rate(&r.bc, "bc", b)))
        })
        .collect();
    verdict(
        nsam_all >= OFFLINE_MIN_SUCCESS && nsam_h >= bc_h,
        format!(
            "nsam_p {nsam_all:.3} over {n} tests (need {OFFLINE_MIN_SUCCESS}); bucket {hardest}: nsam_p {nsam_h:.3} vs bc {bc_h:.3}; bc overall {:.3}; below {MIN_BUCKET_TESTS} tests: {}",
            rate(&r.bc, "bc", "all"),
            if sparse.is_empty() { "none".to_string() } else { sparse.join(", ") }
        ),
    )
}

fn criterion_7(r: &OfflineRun) -> Verdict {
    let zs = mean_rate(&r.zero_shot.iter().filter(|x| x.size == 10).cloned().collect::<Vec<_>>(), "nsam_pt", "all")
        .map_or(0.0, |x| x.0);
    let same = mean_rate(&r.same_size, "nsam_p", "all").map_or(0.0, |x| x.0);
    verdict(
        zs >= ZERO_SHOT_MIN_SUCCESS && (zs - same).abs() <= ZERO_SHOT_MAX_GAP,
        format!("10x10 zero-shot {zs:.3} (need {ZERO_SHOT_MIN_SUCCESS}), same-size {same:.3}, gap {:.3}", (zs - same).abs()),
    )
}

// ---------------------------------------------------------------- 8, 9

struct OnlineRun {
    rows: Vec<MetricsRow>,
    checked: usize,
    unsafe_plans: usize,
}

fn online_run() -> OnlineRun {
    let instances = online_instances(Task::Sword, 6, 10, 0).expect("instances");
    let variants = [Variant::Full, Variant::MinusP, Variant::MinusPn, Variant::Ppo];
    let r = online_experiment(&instances, &variants, &[0, 1, 2], &RampConfig::new(Task::Sword, Variant::Full))
        .expect("online");
    OnlineRun {
        checked: r.campaigns.iter().map(|c| c.counters.checked_plans).sum(),
        unsafe_plans: r.campaigns.iter().map(|c| c.counters.unsafe_plans).sum(),
        rows: r.rows,
    }
}

fn cum_len(rows: &[MetricsRow], algo: &str) -> f64 {
    rows.iter().filter(|r| r.algo == algo && r.bucket == "10").filter_map(|r| r.cum_min_len).sum()
}

fn criterion_8(r: &OnlineRun) -> Verdict {
    let rate = |a: &str| mean_rate(&r.rows, a, "10").map_or(0.0, |x| x.0);
    let (ramp, ppo) = (rate("ramp"), rate("ppo"));
    let (lr, lp) = (cum_len(&r.rows, "ramp"), cum_len(&r.rows, "ppo"));
    verdict(
        ramp >= ppo && lr <= ONLINE_LENGTH_RATIO * lp,
        format!("success ramp {ramp:.3} vs ppo {ppo:.3}; cumulative min length ramp {lr} vs ppo {lp} (need <= {ONLINE_LENGTH_RATIO}x)"),
    )
}

fn criterion_9(r: &OnlineRun) -> Verdict {
    let (a, b, c) = (cum_len(&r.rows, "ramp"), cum_len(&r.rows, "ramp_minus_p"), cum_len(&r.rows, "ramp_minus_pn"));
    verdict(
        a <= ABLATION_SLACK * b && b <= ABLATION_SLACK * c,
        format!("cumulative min length ramp {a} <= ramp_minus_p {b} <= ramp_minus_pn {c} (slack {ABLATION_SLACK})"),
    )
}

// ---------------------------------------------------------------- 10

fn layer_param(m: &mut Mlp, li: usize, which: usize, i: usize) -> &mut f64 {
    let l = &mut m.layers[li];
    if which == 0 { &mut l.weights[i] } else { &mut l.bias[i] }
}

fn criterion_10() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(0xacc10);
    let (mut checked, mut worst) = (0usize, 0.0f64);
    for trial in 0..6u64 {
        let (d, k) = (rng.gen_range(2..6), rng.gen_range(2..6));
        let hidden: Vec<usize> = (0..rng.gen_range(1..3)).map(|_| rng.gen_range(3..7)).collect();
        let mut p = PolicyParameters::new(d, k, &hidden, 3e-4, trial);
        p.actor.layers.last_mut().unwrap().weights.iter_mut().for_each(|w| *w *= 50.0);
        let mut batch = RolloutBatch::default();
        for _ in 0..10 {
            let obs: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let mut mask: Vec<bool> = (0..k).map(|_| rng.gen_bool(0.7)).collect();
            let a = rng.gen_range(0..k);
            mask[a] = true;
            let logp = -rng.gen_range(0.2..3.0);
            batch.push(obs, a, mask, logp, rng.gen_range(-1.0..1.0), rng.gen_bool(0.2), rng.gen_range(-1.0..1.0));
        }
        batch.finish(0.0, 0.99, 0.95);
        let cfg = PpoConfig { normalize_advantages: trial % 2 == 1, ..PpoConfig::default() };
        let idx: Vec<usize> = (0..batch.len()).collect();
        let loss = |q: &PolicyParameters| ppo_loss_and_grad(q, &batch, &idx, &cfg).expect("loss").0.total;
        let (_, g_actor, g_critic) = ppo_loss_and_grad(&p, &batch, &idx, &cfg).expect("grad");
        for (critic, grads) in [(false, &g_actor), (true, &g_critic)] {
            for (li, layer) in grads.layers.iter().enumerate() {
                for (which, len) in [(0, layer.weights.len()), (1, layer.bias.len())] {
                    for i in 0..len {
                        let h = 1e-5;
                        let at = |delta: f64| {
                            let mut q = p.clone();
                            let net = if critic { q.critic.as_mut().unwrap() } else { &mut q.actor };
                            *layer_param(net, li, which, i) += delta;
                            loss(&q)
                        };
                        let num = (at(h) - at(-h)) / (2.0 * h);
                        let ana = if which == 0 { layer.weights[i] } else { layer.bias[i] };
                        let scale = num.abs().max(ana.abs());
                        let rel = if scale < 1e-6 { 0.0 } else { (num - ana).abs() / scale };
                        worst = worst.max(rel);
                        checked += 1;
                    }
                }
            }
        }
    }
    verdict(worst <= GRAD_MAX_REL_ERR, format!("{checked} parameters, worst relative error {worst:.2e} (limit {GRAD_MAX_REL_ERR:.0e})"))
}

// ---------------------------------------------------------------- 11

fn ramplab(args: &[&str], dir: &Path) -> i32 {
    Command::new(env!("CARGO_BIN_EXE_ramplab"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("ramplab runs")
        .status
        .code()
        .unwrap_or(-1)
}

fn files(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).expect("readable").flatten() {
            let p = e.path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.insert(p.strip_prefix(dir).unwrap().display().to_string(), std::fs::read(&p).unwrap());
            }
        }
    }
    out
}

/// Runs every subcommand in a fresh directory; returns exit codes and produced files.
fn pipeline() -> (Vec<i32>, BTreeMap<String, Vec<u8>>) {
    let dir = tempfile::tempdir().expect("tempdir");
    let d = dir.path();
    std::fs::write(d.join("offline.cfg"), "count = 16\nfolds = 2\ntrain = 8\ncurve = 2,4\ntimeout = 600\nout = off\n").unwrap();
    std::fs::write(d.join("online.cfg"), "count = 2\nseeds = 0,1\nbudget-bi = 120\nbudget-be = 60\nout = on\n").unwrap();
    let mut codes = vec![
        ramplab(&["gen", "--count", "3", "--seed", "5", "--out", "gen"], d),
        ramplab(&["expert", "--count", "8", "--out", "exp"], d),
        ramplab(&["learn", "--input", "exp/experts.jsonl", "--out", "learn"], d),
    ];
    let maps: BTreeSet<String> = std::fs::read_dir(d.join("exp/maps")).map_or_else(
        |_| BTreeSet::new(),
        |rd| rd.flatten().map(|e| e.path().display().to_string()).collect(),
    );
    if let Some(m) = maps.first() {
        codes.push(ramplab(&["plan", "--map", m, "--domain", "learn/domain.pddl", "--out", "plan"], d));
    }
    codes.push(ramplab(&["offline", "--config", "offline.cfg", "--count", "999"], d));
    codes.push(ramplab(
        &["zeroshot", "--count", "6", "--folds", "2", "--test-sizes", "8", "--timeout", "600", "--out", "zs"],
        d,
    ));
    codes.push(ramplab(&["online", "--config", "online.cfg"], d));
    codes.push(ramplab(&["report", "--input", "off/offline.csv", "--out", "rep"], d));
    codes.push(ramplab(&["report", "--input", "on/online.csv", "--out", "rep"], d));
    let produced = files(d).into_iter().filter(|(k, _)| !k.ends_with(".cfg")).collect();
    (codes, produced)
}

fn criterion_11() -> Verdict {
    let (c1, f1) = pipeline();
    let (c2, f2) = pipeline();
    let csvs: Vec<&String> = f1.keys().filter(|k| k.ends_with(".csv")).collect();
    let differing: Vec<String> =
        f1.keys().chain(f2.keys()).collect::<BTreeSet<_>>().into_iter().filter(|k| f1.get(*k) != f2.get(*k)).cloned().collect();
    let all_ok = c1.iter().all(|c| *c == 0);
    verdict(
        all_ok && c1 == c2 && differing.is_empty() && csvs.len() == 3,
        format!(
            "{} subcommand runs (exit codes {c1:?}), {} files of which {} CSV, {} differ{}",
            c1.len(),
            f1.len(),
            csvs.len(),
            differing.len(),
            fmt_list(&differing)
        ),
    )
}

// ----------------------------------------------------------------

fn main() {
    let mut results: BTreeMap<u32, Verdict> = BTreeMap::new();
    let timed = |k: u32, f: &mut dyn FnMut() -> Verdict, results: &mut BTreeMap<u32, Verdict>| {
        let start = Instant::now();
        let v = f();
        println!("criterion {k:>2} {} ({:.1}s): {}", if v.pass { "PASS" } else { "FAIL" }, start.elapsed().as_secs_f64(), v.detail);
        results.insert(k, v);
    };
    timed(2, &mut criterion_2, &mut results);
    timed(3, &mut criterion_3, &mut results);
    timed(4, &mut criterion_4, &mut results);
    timed(5, &mut criterion_5, &mut results);
    timed(10, &mut criterion_10, &mut results);
    let start = Instant::now();
    let offline = offline_runs();
    println!("offline suites finished in {:.1}s", start.elapsed().as_secs_f64());
    timed(6, &mut || criterion_6(&offline), &mut results);
    timed(7, &mut || criterion_7(&offline), &mut results);
    let start = Instant::now();
    let online = online_run();
    println!("online suite finished in {:.1}s", start.elapsed().as_secs_f64());
    timed(8, &mut || criterion_8(&online), &mut results);
    timed(9, &mut || criterion_9(&online), &mut results);
    timed(11, &mut criterion_11, &mut results);
    timed(
        1,
        &mut || {
            let plans = offline.safety.plans + online.checked;
            let violations = offline.safety.violations + online.unsafe_plans;
            verdict(
                plans >= MIN_SAFETY_PLANS && violations == 0,
                format!(
                    "{plans} learned-model plans ({} offline, {} online), {violations} failed in the simulator",
                    offline.safety.plans, online.checked
                ),
            )
        },
        &mut results,
    );

    println!("\nacceptance summary");
    for (k, v) in &results {
        println!("{k:>2}. {} {}", if v.pass { "PASS" } else { "FAIL" }, v.detail);
    }
    let failed: Vec<u32> = results.iter().filter(|(_, v)| !v.pass).map(|(k, _)| *k).collect();
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
