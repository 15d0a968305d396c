//! Grounded forward search over numeric states: greedy best-first search, a breadth-first
//! optimal oracle and an adapter for external PDDL planners.

mod compiled;
mod external;

pub use external::{external_plan, parse_plan_output, ExternalError};

use crate::model::{DomainModel, Plan, ProblemInstance};
use compiled::{CompiledTask, PackedState};
use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap, VecDeque};
use std::time::{Duration, Instant};

#[derive(Clone, Debug, PartialEq)]
pub struct PlannerConfig {
    pub timeout: Duration,
    /// Maximum number of generated search nodes.
    pub node_budget: usize,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        PlannerConfig { timeout: Duration::from_secs(5), node_budget: 2_000_000 }
    }
}

impl PlannerConfig {
    pub fn with_timeout(secs: f64) -> Self {
        PlannerConfig { timeout: Duration::from_secs_f64(secs), ..Default::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PlanOutcome {
    Found(Plan),
    /// The reachable state space was exhausted.
    NoPlan,
    /// Wall-clock timeout or node budget exhausted.
    Timeout,
}

impl PlanOutcome {
    pub fn plan(&self) -> Option<&Plan> {
        match self {
            PlanOutcome::Found(p) => Some(p),
            _ => None,
        }
    }
}

/// One search node in the arena.
struct SearchNode {
    parent: u32,
    op: u32,
    g: u32,
}

fn extract(task: &CompiledTask, nodes: &[SearchNode], mut i: u32) -> Plan {
    let mut ops = Vec::new();
    while nodes[i as usize].parent != u32::MAX {
        ops.push(nodes[i as usize].op);
        i = nodes[i as usize].parent;
    }
    ops.reverse();
    Plan(ops.into_iter().map(|o| task.grounded(o)).collect())
}

/// Greedy best-first search on `h = goal-count + numeric gap`, ties on lower `g` then
/// insertion order. Goals are tested when nodes are generated.
pub fn plan(model: &DomainModel, problem: &ProblemInstance, config: &PlannerConfig) -> PlanOutcome {
    let start = Instant::now();
    let task = CompiledTask::new(model, problem);
    if task.is_goal(&task.init) {
        return PlanOutcome::Found(Plan::default());
    }
    let mut nodes = vec![SearchNode { parent: u32::MAX, op: 0, g: 0 }];
    let mut states: Vec<PackedState> = vec![task.init.clone()];
    let mut seen: HashMap<PackedState, u32> = HashMap::new();
    seen.insert(task.init.clone(), 0);
    let mut open: BinaryHeap<Reverse<(u64, u32, u32)>> = BinaryHeap::new();
    open.push(Reverse((task.heuristic(&task.init), 0, 0)));
    let mut succ = Vec::new();
    let mut expansions = 0usize;
    while let Some(Reverse((_, g, id))) = open.pop() {
        expansions += 1;
        if expansions % 256 == 0 && start.elapsed() > config.timeout {
            return PlanOutcome::Timeout;
        }
        let s = states[id as usize].clone();
        task.applicable_ops(&s, &mut succ);
        for &op in &succ {
            let next = task.apply(&s, op);
            if seen.contains_key(&next) {
                continue;
            }
            let nid = nodes.len() as u32;
            nodes.push(SearchNode { parent: id, op, g: g + 1 });
            if task.is_goal(&next) {
                return PlanOutcome::Found(extract(&task, &nodes, nid));
            }
            if nodes.len() > config.node_budget {
                return PlanOutcome::Timeout;
            }
            let h = task.heuristic(&next);
            seen.insert(next.clone(), nid);
            states.push(next);
            open.push(Reverse((h, g + 1, nid)));
        }
    }
    PlanOutcome::NoPlan
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OracleOutcome {
    Optimal(Plan),
    /// No plan within the depth cap and the space below it was exhausted.
    None,
    /// Node budget exhausted first.
    Unknown,
}

/// Breadth-first search: shortest plan up to `depth_cap` steps.
pub fn oracle_optimal(model: &DomainModel, problem: &ProblemInstance, depth_cap: usize, node_budget: usize) -> OracleOutcome {
    let task = CompiledTask::new(model, problem);
    if task.is_goal(&task.init) {
        return OracleOutcome::Optimal(Plan::default());
    }
    let mut nodes = vec![SearchNode { parent: u32::MAX, op: 0, g: 0 }];
    let mut seen: HashMap<PackedState, ()> = HashMap::new();
    seen.insert(task.init.clone(), ());
    let mut queue: VecDeque<(PackedState, u32)> = VecDeque::from([(task.init.clone(), 0)]);
    let mut succ = Vec::new();
    while let Some((s, id)) = queue.pop_front() {
        let g = nodes[id as usize].g;
        if g as usize >= depth_cap {
            continue;
        }
        task.applicable_ops(&s, &mut succ);
        for &op in &succ {
            let next = task.apply(&s, op);
            if seen.contains_key(&next) {
                continue;
            }
            let nid = nodes.len() as u32;
            nodes.push(SearchNode { parent: id, op, g: g + 1 });
            if task.is_goal(&next) {
                return OracleOutcome::Optimal(extract(&task, &nodes, nid));
            }
            if nodes.len() > node_budget {
                return OracleOutcome::Unknown;
            }
            seen.insert(next.clone(), ());
            queue.push_back((next, nid));
        }
    }
    OracleOutcome::None
}

/// Compiled (model, problem) pair reusable across many shortcut queries.
pub struct SuccessorIndex {
    task: CompiledTask,
}

impl SuccessorIndex {
    pub fn new(model: &DomainModel, problem: &ProblemInstance) -> Self {
        SuccessorIndex { task: CompiledTask::new(model, problem) }
    }

    /// First action (schema name, then binding) leading from `from` to exactly `to`.
    pub fn connect(
        &self,
        from: &crate::model::SymbolicState,
        to: &crate::model::SymbolicState,
    ) -> Option<crate::model::GroundedAction> {
        let (f, t) = (self.task.pack(from)?, self.task.pack(to)?);
        let mut succ = Vec::new();
        self.task.applicable_ops(&f, &mut succ);
        succ.iter().filter(|&&op| self.task.apply(&f, op) == t).map(|&op| self.task.grounded(op)).min()
    }

    pub fn unpack_init(&self) -> crate::model::SymbolicState {
        self.task.unpack(&self.task.init)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::validate_plan;
    use crate::world::{generate, ground_truth_model, GeneratorConfig, Task};

    #[test]
    fn empty_model_has_no_plan() {
        let inst = generate(&GeneratorConfig::new(Task::Sword, 6, 1)).unwrap();
        let m = ground_truth_model(Task::Sword).skeleton();
        assert_eq!(plan(&m, &inst.problem(), &PlannerConfig::default()), PlanOutcome::NoPlan);
    }

    #[test]
    fn plans_validate_and_match_oracle_on_small_maps() {
        let m = ground_truth_model(Task::Sword);
        for seed in 0..30 {
            let p = generate(&GeneratorConfig::new(Task::Sword, 4, seed)).unwrap().problem();
            let g = plan(&m, &p, &PlannerConfig::default());
            let o = oracle_optimal(&m, &p, 20, 5_000_000);
            match (&g, &o) {
                (PlanOutcome::Found(a), OracleOutcome::Optimal(b)) => {
                    assert!(validate_plan(&m, &p, a).is_valid());
                    assert!(a.len() <= b.len() + 2);
                }
                (PlanOutcome::NoPlan, OracleOutcome::None) => {}
                other => panic!("seed {seed}: disagreement {other:?}"),
            }
        }
    }
}
