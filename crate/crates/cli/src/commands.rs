use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use ramplab::encodings::{
    emit_pddl_domain, parse_pddl_domain, read_map, trajectory_read, trajectory_write_string, write_map,
};
use ramplab::harness::{
    expert_pool, online_experiment, online_instances, offline_experiment, plan_to_trajectory, planner_limit,
    render_svg, rows_from_csv, rows_to_csv, zero_shot_experiment, ExpertInstance, HarnessError, MetricsRow,
    OfflineAlgo, OfflineProtocol, SafetyTally,
};
use ramplab::model::{DomainModel, Plan, Producer};
use ramplab::nsam::{learn, NsamConfig};
use ramplab::planner::{external_plan, plan, PlanOutcome, PlannerConfig};
use ramplab::ramp::{events_to_jsonl, BudgetConfig, RampConfig, Variant};
use ramplab::world::{generate, ground_truth_model, CraftInstance, GeneratorConfig, Task};

use crate::{parse_list, CliError, Command, Settings};

pub fn dispatch(cmd: Command, s: &Settings) -> Result<(), CliError> {
    match cmd {
        Command::Gen => gen(s),
        Command::Expert => expert(s),
        Command::Learn => learn_cmd(s),
        Command::Plan => plan_cmd(s),
        Command::Offline => offline(s),
        Command::Zeroshot => zeroshot(s),
        Command::Online => online(s),
        Command::Report => report(s),
    }
}

fn planner_config(s: &Settings, task: Task, size: usize) -> PlannerConfig {
    let mut cfg = planner_limit(task, size);
    if let Some(t) = s.timeout {
        cfg.timeout = Duration::from_secs_f64(t);
    }
    cfg
}

fn validate_timeout(s: &Settings) -> Result<(), CliError> {
    match s.timeout {
        Some(t) if !(t.is_finite() && t > 0.0) => Err(CliError::Config(format!("timeout must be positive, got {t}"))),
        _ => Ok(()),
    }
}

fn out_dir(s: &Settings) -> Result<PathBuf, CliError> {
    let dir = s.out();
    fs::create_dir_all(&dir).map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", dir.display())))?;
    Ok(dir)
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))
}

fn harness(e: HarnessError) -> CliError {
    CliError::runtime(e)
}

/// Expert pool through the internal planner, or through the external command when set.
fn experts(s: &Settings, task: Task, size: usize, count: usize) -> Result<Vec<ExpertInstance>, CliError> {
    validate_timeout(s)?;
    let cfg = planner_config(s, task, size);
    let Some(template) = &s.external_planner else {
        return expert_pool(task, size, count, s.seed(), &cfg).map_err(harness);
    };
    let model = ground_truth_model(task);
    let mut out = Vec::new();
    let mut seed = s.seed();
    while out.len() < count {
        if seed - s.seed() > (count * 50 + 1000) as u64 {
            return Err(CliError::Runtime(format!("external planner solved only {} instances", out.len())));
        }
        let inst = generate(&GeneratorConfig::new(task, size, seed)).map_err(CliError::runtime)?;
        seed += 1;
        match external_plan(template, &model, &inst.problem(), cfg.timeout) {
            Ok(p) => {
                if let Some(t) = plan_to_trajectory(&inst, &p, Producer::Expert) {
                    out.push(ExpertInstance { instance: inst, trajectory: t });
                }
            }
            Err(e) => eprintln!("{}: {e}", inst.id),
        }
    }
    Ok(out)
}

fn write_maps(dir: &Path, instances: &[&CraftInstance]) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(CliError::runtime)?;
    for inst in instances {
        write(&dir.join(format!("{}.map", inst.id)), &write_map(inst))?;
    }
    Ok(())
}

fn gen(s: &Settings) -> Result<(), CliError> {
    let pool = experts(s, s.task(), s.size(), s.count.unwrap_or(10))?;
    let dir = out_dir(s)?;
    write_maps(&dir, &pool.iter().map(|e| &e.instance).collect::<Vec<_>>())?;
    println!("wrote {} instances to {}", pool.len(), dir.display());
    Ok(())
}

fn expert(s: &Settings) -> Result<(), CliError> {
    let pool = experts(s, s.task(), s.size(), s.count.unwrap_or(10))?;
    let dir = out_dir(s)?;
    write_maps(&dir.join("maps"), &pool.iter().map(|e| &e.instance).collect::<Vec<_>>())?;
    let trajs: Vec<_> = pool.iter().map(|e| e.trajectory.clone()).collect();
    write(&dir.join("experts.jsonl"), &trajectory_write_string(&trajs))?;
    println!("wrote {} expert trajectories to {}", trajs.len(), dir.join("experts.jsonl").display());
    Ok(())
}

fn learn_cmd(s: &Settings) -> Result<(), CliError> {
    let input = s.input.as_ref().ok_or_else(|| CliError::Config("learn needs --input <trajectories.jsonl>".into()))?;
    let trajs = trajectory_read(input).map_err(CliError::runtime)?;
    let model = learn(&trajs, &ground_truth_model(s.task()).skeleton(), &NsamConfig::default()).map_err(CliError::runtime)?;
    let dir = out_dir(s)?;
    write(&dir.join("domain.pddl"), &emit_pddl_domain(&model))?;
    println!("learned {} action schemas from {} trajectories", model.schemas.len(), trajs.len());
    Ok(())
}

fn load_domain(path: &Path) -> Result<DomainModel, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Runtime(format!("cannot read {}: {e}", path.display())))?;
    parse_pddl_domain(&text).map_err(CliError::runtime)
}

fn plan_cmd(s: &Settings) -> Result<(), CliError> {
    validate_timeout(s)?;
    let map = s.map.as_ref().ok_or_else(|| CliError::Config("plan needs --map <instance.map>".into()))?;
    let inst = read_map(map).map_err(CliError::runtime)?;
    let model = match &s.domain {
        Some(p) => load_domain(p)?,
        None => ground_truth_model(inst.task()),
    };
    let cfg = planner_config(s, inst.task(), inst.size());
    let found: Plan = match &s.external_planner {
        Some(template) => external_plan(template, &model, &inst.problem(), cfg.timeout).map_err(CliError::runtime)?,
        None => match plan(&model, &inst.problem(), &cfg) {
            PlanOutcome::Found(p) => p,
            PlanOutcome::NoPlan => return Err(CliError::Runtime(format!("{}: no plan exists under the model", inst.id))),
            PlanOutcome::Timeout => return Err(CliError::Runtime(format!("{}: planner limit reached", inst.id))),
        },
    };
    if plan_to_trajectory(&inst, &found, Producer::Planner).is_none() {
        return Err(CliError::Runtime(format!("{}: plan does not reach the goal in the simulator", inst.id)));
    }
    let text: String = found.0.iter().map(|a| format!("{a}\n")).collect();
    let dir = out_dir(s)?;
    write(&dir.join(format!("{}.plan", inst.id)), &text)?;
    print!("{text}");
    Ok(())
}

fn parse_value_cfg<T: std::str::FromStr<Err = String>>(key: &str, v: &str) -> Result<T, CliError> {
    v.parse().map_err(|e| CliError::Config(format!("{key}: {e}")))
}

fn offline_algos(s: &Settings) -> Result<Vec<OfflineAlgo>, CliError> {
    match s.algo.as_deref() {
        None | Some("all") => Ok(vec![OfflineAlgo::NsamP, OfflineAlgo::Bc]),
        Some(v) => parse_list("algo", v),
    }
}

fn protocol(s: &Settings, pool: usize) -> Result<OfflineProtocol, CliError> {
    let mut p = OfflineProtocol::new(s.task(), s.size());
    p.pool = pool;
    p.seed = s.seed();
    p.timing = s.timing;
    if let Some(f) = s.folds {
        if f < 2 || f > pool {
            return Err(CliError::Config(format!("folds must be in 2..={pool}, got {f}")));
        }
        p.folds = f;
    }
    if let Some(t) = s.train {
        p.train_trajectories = t;
    }
    if let Some(c) = &s.curve {
        p.curve = parse_list("curve", c)?;
    }
    p.planner = planner_config(s, s.task(), s.size());
    Ok(p)
}

fn print_safety(label: &str, t: &SafetyTally) {
    println!("{label}: {} learned-model plans, {} failed in the simulator", t.plans, t.violations);
}

fn write_csv(dir: &Path, name: &str, rows: &[MetricsRow]) -> Result<(), CliError> {
    write(&dir.join(name), &rows_to_csv(rows))?;
    println!("wrote {}", dir.join(name).display());
    Ok(())
}

fn offline(s: &Settings) -> Result<(), CliError> {
    let algos = offline_algos(s)?;
    let count = s.count.unwrap_or(200);
    let proto = protocol(s, count)?;
    let pool = experts(s, s.task(), s.size(), count)?;
    let mut rows = Vec::new();
    for algo in algos {
        let r = offline_experiment(algo, &proto, &pool).map_err(harness)?;
        print_safety(algo.name(), &r.safety);
        rows.extend(r.rows);
    }
    write_csv(&out_dir(s)?, "offline.csv", &rows)
}

fn zeroshot(s: &Settings) -> Result<(), CliError> {
    let algo = match s.algo.as_deref() {
        None | Some("all") => OfflineAlgo::NsamP,
        Some(v) => parse_value_cfg("algo", v)?,
    };
    if algo == OfflineAlgo::Bc {
        return Err(CliError::Config(HarnessError::NoZeroShot.to_string()));
    }
    let count = s.count.unwrap_or(200);
    let proto = protocol(s, count)?;
    let sizes: Vec<usize> = parse_list("test_sizes", s.test_sizes.as_deref().unwrap_or("10,15"))?;
    let train = experts(s, s.task(), s.size(), count)?;
    let mut tests = Vec::new();
    for &n in &sizes {
        tests.push((n, experts(s, s.task(), n, count)?));
    }
    let r = zero_shot_experiment(algo, &proto, &train, &tests).map_err(harness)?;
    print_safety("nsam_pt", &r.safety);
    write_csv(&out_dir(s)?, "zeroshot.csv", &r.rows)
}

fn variants(s: &Settings) -> Result<Vec<Variant>, CliError> {
    match s.variant.as_deref() {
        None | Some("all") => Ok(vec![Variant::Full, Variant::MinusP, Variant::MinusPn, Variant::Ppo]),
        Some(v) => parse_list("variant", v),
    }
}

fn online(s: &Settings) -> Result<(), CliError> {
    validate_timeout(s)?;
    let task = s.task();
    let vs = variants(s)?;
    let seeds: Vec<u64> = parse_list("seeds", s.seeds.as_deref().unwrap_or("0,1,2"))?;
    if seeds.is_empty() {
        return Err(CliError::Config("seeds must name at least one seed".into()));
    }
    let mut cfg = RampConfig::new(task, Variant::Full);
    let d = BudgetConfig::for_task(task);
    cfg.budgets = BudgetConfig { b_i: s.budget_bi.unwrap_or(d.b_i), b_e: s.budget_be.unwrap_or(d.b_e) };
    cfg.budgets.validate().map_err(|e| CliError::Config(e.to_string()))?;
    if let Some(t) = s.timeout {
        cfg.planner.timeout = Duration::from_secs_f64(t);
    }
    let instances = online_instances(task, s.size(), s.count.unwrap_or(10), s.seed()).map_err(harness)?;
    let r = online_experiment(&instances, &vs, &seeds, &cfg).map_err(harness)?;
    let dir = out_dir(s)?;
    let mut counters = serde_json::Map::new();
    for c in &r.campaigns {
        let name = format!("{}_seed{}", c.variant.name(), c.seed);
        write(&dir.join(format!("events_{name}.jsonl")), &events_to_jsonl(&c.events))?;
        counters.insert(name, serde_json::to_value(c.counters).map_err(CliError::runtime)?);
        if c.counters.unsafe_plans > 0 {
            eprintln!("{} seed {}: {} learned-model plans failed in the simulator", c.variant, c.seed, c.counters.unsafe_plans);
        }
    }
    write(&dir.join("counters.json"), &(serde_json::to_string_pretty(&counters).map_err(CliError::runtime)? + "\n"))?;
    write_csv(&dir, "online.csv", &r.rows)
}

fn report(s: &Settings) -> Result<(), CliError> {
    let input = s.input.as_ref().ok_or_else(|| CliError::Config("report needs --input <results.csv>".into()))?;
    let text = fs::read_to_string(input).map_err(|e| CliError::Runtime(format!("cannot read {}: {e}", input.display())))?;
    let rows = rows_from_csv(&text).map_err(harness)?;
    let dir = out_dir(s)?;
    let stem = input.file_stem().and_then(|x| x.to_str()).unwrap_or("report");
    let path = dir.join(format!("{stem}.svg"));
    write(&path, &render_svg(&rows))?;
    println!("wrote {}", path.display());
    Ok(())
}
