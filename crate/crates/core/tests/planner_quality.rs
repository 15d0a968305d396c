//! GBFS plan quality against a breadth-first search run directly on the simulator.

mod common;

use common::simulator_bfs;
use ramplab::encodings::{execute_grounded, ActionIndexMap};
use ramplab::planner::{plan, PlanOutcome, PlannerConfig};
use ramplab::world::{generate, ground_truth_model, GeneratorConfig, Task};

#[test]
fn gbfs_is_near_optimal_on_small_sword_maps() {
    let model = ground_truth_model(Task::Sword);
    let actions = ActionIndexMap::new(Task::Sword, 6);
    let cfg = PlannerConfig::with_timeout(30.0);
    let (mut checked, mut within, mut seed) = (0, 0, 0u64);
    let mut worst = 0i64;
    while checked < 100 {
        let inst = generate(&GeneratorConfig::new(Task::Sword, 6, seed)).unwrap();
        seed += 1;
        let Some(opt) = simulator_bfs(&inst.initial, &actions) else { continue };
        let PlanOutcome::Found(p) = plan(&model, &inst.problem(), &cfg) else {
            panic!("{}: solvable but GBFS returned no plan", inst.id);
        };
        let mut w = inst.initial.clone();
        for a in &p.0 {
            w = execute_grounded(&w, a).unwrap_or_else(|| panic!("{}: {a} rejected by the simulator", inst.id)).state;
        }
        assert!(w.goal_reached(), "{}: plan ends short of the goal", inst.id);
        assert!(p.len() >= opt, "{}: plan shorter than the BFS optimum", inst.id);
        worst = worst.max(p.len() as i64 - opt as i64);
        within += usize::from(p.len() <= opt + 2);
        checked += 1;
    }
    println!("gbfs within optimum+2 on {within}/100 (worst gap {worst}), {seed} seeds drawn");
    assert!(within >= 95);
}
