//! Translations between the simulator, symbolic states, RL tensors and file formats.

mod mapfile;
mod pddl;
mod traj;

pub use mapfile::{parse_map, read_map, write_map};
pub use pddl::{emit_pddl_domain, emit_pddl_problem, parse_pddl_domain, parse_pddl_problem};
pub use traj::{trajectory_read, trajectory_read_str, trajectory_write, trajectory_write_string};

use crate::model::{
    Atom, Comparator, Goal, GroundedAction, InstanceMeta, LinearCondition, ProblemInstance, SymbolicState,
};
use crate::num::int;
use crate::world::{
    self, ActionTag, Block, Cell, EnvAction, GridMap, Inventory, Item, StepResult, Task, WorldState,
};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EncodingError {
    #[error("syntax error at {line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("line {line}: {msg}")]
    Line { line: usize, msg: String },
    #[error("{0}")]
    Invalid(String),
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for EncodingError {
    fn from(e: std::io::Error) -> Self {
        EncodingError::Io(e.to_string())
    }
}

pub fn world_to_symbolic(state: &WorldState) -> SymbolicState {
    let map = &state.map;
    let mut atoms = std::collections::BTreeSet::new();
    for c in map.cells() {
        let name = c.object_name();
        let kind = match map.get(c) {
            Block::Air => "air",
            Block::Tree => "tree_at",
            Block::CraftingTable => "table_at",
        };
        atoms.insert(Atom::new(kind, &[&name]));
        for nb in map.neighbors(c) {
            atoms.insert(Atom::new("adjacent", &[&name, &nb.object_name()]));
        }
        if map.near_table(c) {
            atoms.insert(Atom::new("near_table", &[&name]));
        }
    }
    atoms.insert(Atom::new("at", &[&state.agent.object_name()]));
    let fluents = Item::ALL.iter().map(|i| (i.fluent().to_string(), int(state.inventory.get(*i) as i64))).collect();
    SymbolicState { atoms, fluents }
}

/// Inverse of [`world_to_symbolic`]; the map side length is inferred from the cell objects.
pub fn symbolic_to_world(state: &SymbolicState, task: Task) -> Result<WorldState, EncodingError> {
    let cell_of = |a: &Atom| {
        a.args
            .first()
            .and_then(|s| Cell::from_object_name(s))
            .ok_or_else(|| EncodingError::Invalid(format!("bad cell argument in {a}")))
    };
    let mut blocks = Vec::new();
    let mut agent = None;
    for a in &state.atoms {
        match a.predicate.as_str() {
            "air" => blocks.push((cell_of(a)?, Block::Air)),
            "tree_at" => blocks.push((cell_of(a)?, Block::Tree)),
            "table_at" => blocks.push((cell_of(a)?, Block::CraftingTable)),
            "at" => {
                if agent.replace(cell_of(a)?).is_some() {
                    return Err(EncodingError::Invalid("agent is at two cells".into()));
                }
            }
            _ => {}
        }
    }
    let n = (blocks.len() as f64).sqrt().round() as usize;
    if n * n != blocks.len() {
        return Err(EncodingError::Invalid(format!("{} cell contents do not form a square map", blocks.len())));
    }
    let mut cells = vec![None; n * n];
    for (c, b) in blocks {
        if c.row >= n || c.col >= n || cells[c.row * n + c.col].replace(b).is_some() {
            return Err(EncodingError::Invalid(format!("cell {c:?} is out of range or has two contents")));
        }
    }
    let cells: Vec<Block> = cells.into_iter().map(|b| b.expect("all cells filled")).collect();
    let map = GridMap::new(n, cells).map_err(|e| EncodingError::Invalid(e.to_string()))?;
    let mut inventory = Inventory::default();
    for item in Item::ALL {
        let v = state.fluent(item.fluent()).unwrap_or_default();
        if !v.is_integer() || *v.numer() < 0 {
            return Err(EncodingError::Invalid(format!("{} = {v} is not a count", item.fluent())));
        }
        inventory.set(item, *v.numer() as u32);
    }
    let agent = agent.ok_or_else(|| EncodingError::Invalid("no at(...) atom".into()))?;
    WorldState::new(task, map, agent, inventory).map_err(|e| EncodingError::Invalid(e.to_string()))
}

pub fn goal_for(task: Task) -> Goal {
    Goal {
        atoms: vec![],
        conditions: vec![LinearCondition::on(task.goal_item().fluent(), Comparator::Ge, int(1))],
    }
}

pub fn problem_from_world(name: &str, state: &WorldState, seed: u64) -> ProblemInstance {
    let mut objects: Vec<(String, String)> = state.map.cells().map(|c| (c.object_name(), "cell".to_string())).collect();
    objects.sort();
    ProblemInstance {
        name: name.to_string(),
        objects,
        init: world_to_symbolic(state),
        goal: goal_for(state.task),
        meta: InstanceMeta { task: state.task.name().to_string(), size: state.size(), seed },
    }
}

/// Grounded form of an env action in `state`, or `None` when the simulator would reject it.
pub fn env_to_grounded(state: &WorldState, action: EnvAction) -> Option<GroundedAction> {
    if !world::is_legal(state, action) {
        return None;
    }
    let here = state.agent.object_name();
    let tag = action.tag();
    let name = tag.schema_name();
    let tree = |target: Option<Cell>| target.or_else(|| state.map.first_tree_neighbor(state.agent)).expect("legal");
    Some(match action {
        EnvAction::TpTo(c) => GroundedAction::new(name, &[&here, &c.object_name()]),
        EnvAction::Break { target } | EnvAction::PlaceTreeTap { target } => {
            GroundedAction::new(name, &[&here, &tree(target).object_name()])
        }
        EnvAction::CraftPlank | EnvAction::CraftStick => GroundedAction::new(name, &[]),
        EnvAction::CraftWoodenSword | EnvAction::CraftTreeTap | EnvAction::CraftWoodenPogo => {
            GroundedAction::new(name, &[&here])
        }
    })
}

/// Grounded action with no reference to a state; the agent cell argument is dropped.
pub fn grounded_to_env(action: &GroundedAction) -> Result<EnvAction, EncodingError> {
    let tag = ActionTag::from_schema_name(&action.name)
        .ok_or_else(|| EncodingError::Invalid(format!("unknown action {}", action.name)))?;
    let cell = |i: usize| {
        action
            .args
            .get(i)
            .and_then(|s| Cell::from_object_name(s))
            .ok_or_else(|| EncodingError::Invalid(format!("{action}: missing cell argument {i}")))
    };
    Ok(match tag {
        ActionTag::TpTo => EnvAction::TpTo(cell(1)?),
        ActionTag::Break => EnvAction::Break { target: Some(cell(1)?) },
        ActionTag::PlaceTreeTap => EnvAction::PlaceTreeTap { target: Some(cell(1)?) },
        other => EnvAction::from_tag(other).expect("non-teleport"),
    })
}

/// Executes a grounded action in the simulator, failing when the simulator's own
/// grounding of the step differs (wrong agent cell, arguments, or a rejection).
pub fn execute_grounded(state: &WorldState, action: &GroundedAction) -> Option<StepResult> {
    let env = grounded_to_env(action).ok()?;
    if env_to_grounded(state, env).as_ref() != Some(action) {
        return None;
    }
    Some(world::step(state, env))
}

/// Replays `plan` from `state`; returns the visited states or the index of the first failing step.
pub fn replay(state: &WorldState, plan: &[GroundedAction]) -> Result<Vec<StepResult>, usize> {
    let mut out = Vec::with_capacity(plan.len());
    let mut cur = state.clone();
    for (i, a) in plan.iter().enumerate() {
        let r = execute_grounded(&cur, a).ok_or(i)?;
        cur = r.state.clone();
        out.push(r);
    }
    Ok(out)
}

pub type ObservationVector = Vec<f64>;

pub fn observation_len(n: usize) -> usize {
    4 * n * n + 7
}

/// Layout: AIR, TREE, TABLE one-hot planes, agent plane (each N² row-major), then inventory / 64.
pub fn observe(state: &WorldState) -> ObservationVector {
    let n2 = state.size() * state.size();
    let mut v = vec![0.0; observation_len(state.size())];
    for (i, c) in state.map.cells().enumerate() {
        let plane = match state.map.get(c) {
            Block::Air => 0,
            Block::Tree => 1,
            Block::CraftingTable => 2,
        };
        v[plane * n2 + i] = 1.0;
    }
    v[3 * n2 + state.agent.row * state.size() + state.agent.col] = 1.0;
    for (k, item) in Item::ALL.iter().enumerate() {
        v[4 * n2 + k] = (state.inventory.get(*item) as f64 / 64.0).clamp(0.0, 1.0);
    }
    v
}

/// Bijection between env actions and `0..len()`: teleports in row-major order, then crafts.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ActionIndexMap {
    pub task: Task,
    pub size: usize,
}

impl ActionIndexMap {
    pub fn new(task: Task, size: usize) -> Self {
        ActionIndexMap { task, size }
    }

    pub fn len(&self) -> usize {
        self.size * self.size + self.task.craft_tags().len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn action(&self, i: usize) -> EnvAction {
        let n2 = self.size * self.size;
        if i < n2 {
            EnvAction::TpTo(Cell::new(i / self.size, i % self.size))
        } else {
            EnvAction::from_tag(self.task.craft_tags()[i - n2]).expect("craft tag")
        }
    }

    /// Targeted BREAK / PLACE_TREE_TAP map to their untargeted index.
    pub fn index(&self, action: EnvAction) -> Option<usize> {
        match action {
            EnvAction::TpTo(c) => (c.row < self.size && c.col < self.size).then(|| c.row * self.size + c.col),
            other => {
                let pos = self.task.craft_tags().iter().position(|t| *t == other.tag())?;
                Some(self.size * self.size + pos)
            }
        }
    }

    pub fn index_of_grounded(&self, action: &GroundedAction) -> Option<usize> {
        self.index(grounded_to_env(action).ok()?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{apply, ground};
    use crate::world::{generate, ground_truth_model, GeneratorConfig};

    #[test]
    fn symbolic_round_trip() {
        for seed in 0..50 {
            let inst = generate(&GeneratorConfig::new(Task::Pogo, 6, seed)).unwrap();
            let s = world_to_symbolic(&inst.initial);
            assert!(s.holds(&Atom::new("at", &[&inst.initial.agent.object_name()])));
            let w = symbolic_to_world(&s, Task::Pogo).unwrap();
            assert_eq!(w, inst.initial);
        }
    }

    #[test]
    fn index_map_is_bijective() {
        for task in [Task::Sword, Task::Pogo] {
            for n in [6, 10, 15] {
                let m = ActionIndexMap::new(task, n);
                let extra = if task == Task::Sword { 4 } else { 7 };
                assert_eq!(m.len(), n * n + extra);
                for i in 0..m.len() {
                    assert_eq!(m.index(m.action(i)), Some(i));
                }
            }
        }
    }

    #[test]
    fn grounded_count_matches_formula() {
        for (task, n) in [(Task::Sword, 6), (Task::Pogo, 6), (Task::Sword, 3)] {
            let inst = generate(&GeneratorConfig::new(task, n, 1)).unwrap();
            let g = ground(&ground_truth_model(task), &inst.problem().objects).unwrap();
            let n4 = n * n * n * n;
            let expect = match task {
                Task::Sword => 2 * n4 + 2,
                Task::Pogo => 3 * n4 + 2 * n * n + 2,
            };
            assert_eq!(g.len(), expect);
        }
    }

    #[test]
    fn observation_layout() {
        let inst = generate(&GeneratorConfig::new(Task::Sword, 6, 3)).unwrap();
        let o = observe(&inst.initial);
        assert_eq!(o.len(), 4 * 36 + 7);
        assert_eq!(o[..108].iter().sum::<f64>(), 36.0);
        assert_eq!(o[108..144].iter().sum::<f64>(), 1.0);
    }

    #[test]
    fn simulator_and_model_agree_on_random_steps() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for task in [Task::Sword, Task::Pogo] {
            let model = ground_truth_model(task);
            for seed in 0..20 {
                let inst = generate(&GeneratorConfig::new(task, 4, seed)).unwrap();
                let map = ActionIndexMap::new(task, 4);
                let mut w = inst.reset();
                for _ in 0..100 {
                    let a = map.action(rng.gen_range(0..map.len()));
                    let r = world::step(&w, a);
                    match env_to_grounded(&w, a) {
                        Some(g) => {
                            let s = apply(&world_to_symbolic(&w), &g, &model).unwrap();
                            assert_eq!(s, world_to_symbolic(&r.state));
                        }
                        None => assert_eq!(r.state, w),
                    }
                    w = r.state;
                }
            }
        }
    }
}
