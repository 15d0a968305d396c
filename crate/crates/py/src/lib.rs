//! Python bindings: instance generation, experts, learning, planning and the experiment drivers.

use std::time::Duration;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use ramplab::encodings::{
    emit_pddl_domain, observe, parse_map, parse_pddl_domain, trajectory_read_str, trajectory_write_string, write_map,
    ActionIndexMap,
};
use ramplab::harness::{
    expert_pool, offline_experiment, online_experiment, online_instances, plan_to_trajectory, planner_limit,
    render_svg, rows_from_csv, rows_to_csv, OfflineAlgo, OfflineProtocol,
};
use ramplab::model::Producer;
use ramplab::nsam::{learn as nsam_learn, NsamConfig};
use ramplab::planner::{plan as gbfs, PlanOutcome};
use ramplab::ramp::{BudgetConfig, RampConfig, Variant};
use ramplab::world::{generate as gen_instance, ground_truth_model, GeneratorConfig, Task};

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn runtime_err(e: impl std::fmt::Display) -> PyErr {
    PyRuntimeError::new_err(e.to_string())
}

fn task(name: &str) -> PyResult<Task> {
    name.parse().map_err(value_err)
}

/// One generated instance as `.map` text (not filtered for solvability).
#[pyfunction]
fn generate(task_name: &str, size: usize, seed: u64) -> PyResult<String> {
    let inst = gen_instance(&GeneratorConfig::new(task(task_name)?, size, seed)).map_err(value_err)?;
    Ok(write_map(&inst))
}

/// `count` solvable instances with expert trajectories: `(map texts, trajectories as JSON Lines)`.
#[pyfunction]
#[pyo3(signature = (task_name, size, count, seed=0))]
fn experts(task_name: &str, size: usize, count: usize, seed: u64) -> PyResult<(Vec<String>, String)> {
    let t = task(task_name)?;
    let pool = expert_pool(t, size, count, seed, &planner_limit(t, size)).map_err(runtime_err)?;
    let maps = pool.iter().map(|e| write_map(&e.instance)).collect();
    let trajs: Vec<_> = pool.into_iter().map(|e| e.trajectory).collect();
    Ok((maps, trajectory_write_string(&trajs)))
}

/// Learns a domain from JSON Lines trajectories and returns it as PDDL.
#[pyfunction]
fn learn(task_name: &str, trajectories_jsonl: &str) -> PyResult<String> {
    let trajs = trajectory_read_str(trajectories_jsonl).map_err(value_err)?;
    let m = nsam_learn(&trajs, &ground_truth_model(task(task_name)?).skeleton(), &NsamConfig::default())
        .map_err(runtime_err)?;
    Ok(emit_pddl_domain(&m))
}

/// Plans with a PDDL domain (ground truth when `None`). Returns the actions, or `None`
/// when no plan was found. Raises if a plan fails in the simulator.
#[pyfunction]
#[pyo3(signature = (map_text, domain_pddl=None, timeout=10.0))]
fn plan(map_text: &str, domain_pddl: Option<&str>, timeout: f64) -> PyResult<Option<Vec<String>>> {
    let inst = parse_map(map_text).map_err(value_err)?;
    let model = match domain_pddl {
        Some(d) => parse_pddl_domain(d).map_err(value_err)?,
        None => ground_truth_model(inst.task()),
    };
    let mut cfg = planner_limit(inst.task(), inst.size());
    cfg.timeout = Duration::from_secs_f64(timeout);
    match gbfs(&model, &inst.problem(), &cfg) {
        PlanOutcome::Found(p) => {
            if plan_to_trajectory(&inst, &p, Producer::Planner).is_none() {
                return Err(runtime_err(format!("{}: plan does not reach the goal in the simulator", inst.id)));
            }
            Ok(Some(p.0.iter().map(|a| a.to_string()).collect()))
        }
        PlanOutcome::NoPlan | PlanOutcome::Timeout => Ok(None),
    }
}

/// The RL observation vector of a map's initial state.
#[pyfunction]
fn observation(map_text: &str) -> PyResult<Vec<f64>> {
    Ok(observe(&parse_map(map_text).map_err(value_err)?.initial))
}

#[pyfunction]
fn action_count(task_name: &str, size: usize) -> PyResult<usize> {
    Ok(ActionIndexMap::new(task(task_name)?, size).len())
}

/// k-fold offline evaluation; returns the results CSV.
#[pyfunction]
#[pyo3(signature = (task_name, size, algo, count=200, folds=5, train=100, seed=0))]
fn offline(task_name: &str, size: usize, algo: &str, count: usize, folds: usize, train: usize, seed: u64) -> PyResult<String> {
    let t = task(task_name)?;
    let algo: OfflineAlgo = algo.parse().map_err(value_err)?;
    if folds < 2 || folds > count {
        return Err(value_err(format!("folds must be in 2..={count}")));
    }
    let p = OfflineProtocol { pool: count, folds, train_trajectories: train, seed, ..OfflineProtocol::new(t, size) };
    let pool = expert_pool(t, size, count, seed, &p.planner).map_err(runtime_err)?;
    let r = offline_experiment(algo, &p, &pool).map_err(runtime_err)?;
    Ok(rows_to_csv(&r.rows))
}

/// Online campaigns for the named variants; returns the results CSV.
#[pyfunction]
#[pyo3(signature = (task_name, size, count, seeds, variants, budget_bi=None, budget_be=None, seed=0))]
#[allow(clippy::too_many_arguments)]
fn online(
    task_name: &str,
    size: usize,
    count: usize,
    seeds: Vec<u64>,
    variants: Vec<String>,
    budget_bi: Option<usize>,
    budget_be: Option<usize>,
    seed: u64,
) -> PyResult<String> {
    let t = task(task_name)?;
    let vs: Vec<Variant> = variants.iter().map(|v| v.parse().map_err(value_err)).collect::<PyResult<_>>()?;
    let d = BudgetConfig::for_task(t);
    let budgets = BudgetConfig { b_i: budget_bi.unwrap_or(d.b_i), b_e: budget_be.unwrap_or(d.b_e) };
    budgets.validate().map_err(value_err)?;
    let cfg = RampConfig { budgets, ..RampConfig::new(t, Variant::Full) };
    let instances = online_instances(t, size, count, seed).map_err(runtime_err)?;
    let r = online_experiment(&instances, &vs, &seeds, &cfg).map_err(runtime_err)?;
    Ok(rows_to_csv(&r.rows))
}

/// Renders a results CSV as SVG.
#[pyfunction]
fn report(csv_text: &str) -> PyResult<String> {
    Ok(render_svg(&rows_from_csv(csv_text).map_err(value_err)?))
}

#[pymodule]
fn ramplab_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(generate, m)?)?;
    m.add_function(wrap_pyfunction!(experts, m)?)?;
    m.add_function(wrap_pyfunction!(learn, m)?)?;
    m.add_function(wrap_pyfunction!(plan, m)?)?;
    m.add_function(wrap_pyfunction!(observation, m)?)?;
    m.add_function(wrap_pyfunction!(action_count, m)?)?;
    m.add_function(wrap_pyfunction!(offline, m)?)?;
    m.add_function(wrap_pyfunction!(online, m)?)?;
    m.add_function(wrap_pyfunction!(report, m)?)?;
    Ok(())
}
