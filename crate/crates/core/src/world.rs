//! Deterministic crafting simulator on an N×N grid, its problem generator and the
//! hand-written ground-truth domain model.

use crate::model::{
    ActionSchema, Comparator, DomainModel, FluentSignature, LinearAssignment, LinearCondition, Literal,
    Outcome, PredicateSignature, Term,
};
use crate::num::int;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WorldError {
    #[error("cannot generate instance: {0}")]
    Generation(String),
    #[error("invalid world: {0}")]
    Invalid(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Sword,
    Pogo,
}

impl Task {
    pub fn goal_item(self) -> Item {
        match self {
            Task::Sword => Item::WoodenSword,
            Task::Pogo => Item::WoodenPogo,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Task::Sword => "sword",
            Task::Pogo => "pogo",
        }
    }

    /// Non-teleport actions available in this task, in action-index order.
    pub fn craft_tags(self) -> &'static [ActionTag] {
        use ActionTag::*;
        match self {
            Task::Sword => &[Break, CraftPlank, CraftStick, CraftWoodenSword],
            Task::Pogo => &[Break, CraftPlank, CraftStick, CraftWoodenSword, CraftTreeTap, PlaceTreeTap, CraftWoodenPogo],
        }
    }

    /// Items the generator randomizes (the others start at zero).
    fn random_items(self) -> &'static [Item] {
        match self {
            Task::Sword => &[Item::Log, Item::Planks],
            Task::Pogo => &[Item::Log, Item::Planks, Item::Stick],
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Task {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "sword" | "craft_wooden_sword" => Ok(Task::Sword),
            "pogo" | "craft_wooden_pogo" => Ok(Task::Pogo),
            other => Err(format!("unknown task `{other}`")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cell {
    pub row: usize,
    pub col: usize,
}

impl Cell {
    pub fn new(row: usize, col: usize) -> Self {
        Cell { row, col }
    }

    pub fn object_name(self) -> String {
        format!("cell_{}_{}", self.row, self.col)
    }

    pub fn from_object_name(s: &str) -> Option<Cell> {
        let rest = s.strip_prefix("cell_")?;
        let (r, c) = rest.split_once('_')?;
        Some(Cell { row: r.parse().ok()?, col: c.parse().ok()? })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Block {
    Air,
    Tree,
    CraftingTable,
}

impl Block {
    pub fn to_char(self) -> char {
        match self {
            Block::Air => '.',
            Block::Tree => 'T',
            Block::CraftingTable => 'C',
        }
    }

    pub fn from_char(c: char) -> Option<Block> {
        match c {
            '.' => Some(Block::Air),
            'T' => Some(Block::Tree),
            'C' => Some(Block::CraftingTable),
            _ => None,
        }
    }
}

/// Cells outside `[0, n)²` are bedrock and never reachable.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GridMap {
    n: usize,
    cells: Vec<Block>,
}

impl GridMap {
    pub fn new(n: usize, cells: Vec<Block>) -> Result<Self, WorldError> {
        if cells.len() != n * n {
            return Err(WorldError::Invalid(format!("expected {} cells, got {}", n * n, cells.len())));
        }
        let tables = cells.iter().filter(|b| **b == Block::CraftingTable).count();
        if tables != 1 {
            return Err(WorldError::Invalid(format!("expected exactly one crafting table, found {tables}")));
        }
        Ok(GridMap { n, cells })
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, c: Cell) -> Block {
        self.cells[c.row * self.n + c.col]
    }

    fn set(&mut self, c: Cell, b: Block) {
        self.cells[c.row * self.n + c.col] = b;
    }

    pub fn cells(&self) -> impl Iterator<Item = Cell> + '_ {
        (0..self.n * self.n).map(move |i| Cell::new(i / self.n, i % self.n))
    }

    pub fn contains(&self, c: Cell) -> bool {
        c.row < self.n && c.col < self.n
    }

    /// In-map orthogonal neighbours in N, E, S, W order.
    pub fn neighbors(&self, c: Cell) -> impl Iterator<Item = Cell> + '_ {
        let n = self.n as isize;
        let (r, col) = (c.row as isize, c.col as isize);
        [(r - 1, col), (r, col + 1), (r + 1, col), (r, col - 1)]
            .into_iter()
            .filter(move |&(rr, cc)| rr >= 0 && cc >= 0 && rr < n && cc < n)
            .map(|(rr, cc)| Cell::new(rr as usize, cc as usize))
    }

    pub fn table(&self) -> Cell {
        self.cells().find(|c| self.get(*c) == Block::CraftingTable).expect("map has a table")
    }

    pub fn tree_count(&self) -> usize {
        self.cells.iter().filter(|b| **b == Block::Tree).count()
    }

    pub fn near_table(&self, c: Cell) -> bool {
        self.neighbors(c).any(|x| self.get(x) == Block::CraftingTable)
    }

    pub fn first_tree_neighbor(&self, c: Cell) -> Option<Cell> {
        self.neighbors(c).find(|x| self.get(*x) == Block::Tree)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Item {
    Log,
    Planks,
    Stick,
    TreeTap,
    Sack,
    WoodenSword,
    WoodenPogo,
}

impl Item {
    pub const ALL: [Item; 7] =
        [Item::Log, Item::Planks, Item::Stick, Item::TreeTap, Item::Sack, Item::WoodenSword, Item::WoodenPogo];

    pub fn fluent(self) -> &'static str {
        match self {
            Item::Log => "count_log",
            Item::Planks => "count_planks",
            Item::Stick => "count_stick",
            Item::TreeTap => "count_tree_tap",
            Item::Sack => "count_sacks",
            Item::WoodenSword => "count_sword",
            Item::WoodenPogo => "count_pogo",
        }
    }

    pub fn key(self) -> &'static str {
        match self {
            Item::Log => "log",
            Item::Planks => "planks",
            Item::Stick => "stick",
            Item::TreeTap => "tree_tap",
            Item::Sack => "sack",
            Item::WoodenSword => "wooden_sword",
            Item::WoodenPogo => "wooden_pogo",
        }
    }

    pub fn from_key(s: &str) -> Option<Item> {
        Item::ALL.into_iter().find(|i| i.key() == s)
    }

    pub fn from_fluent(s: &str) -> Option<Item> {
        Item::ALL.into_iter().find(|i| i.fluent() == s)
    }

    fn index(self) -> usize {
        self as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Inventory(pub [u32; 7]);

impl Inventory {
    pub fn get(&self, item: Item) -> u32 {
        self.0[item.index()]
    }

    pub fn set(&mut self, item: Item, v: u32) {
        self.0[item.index()] = v;
    }

    fn has(&self, reqs: &[(Item, u32)]) -> bool {
        reqs.iter().all(|&(i, n)| self.get(i) >= n)
    }

    fn transfer(&mut self, consume: &[(Item, u32)], produce: &[(Item, u32)]) {
        for &(i, n) in consume {
            self.0[i.index()] -= n;
        }
        for &(i, n) in produce {
            self.0[i.index()] += n;
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WorldState {
    pub task: Task,
    pub map: GridMap,
    pub agent: Cell,
    pub inventory: Inventory,
}

impl WorldState {
    pub fn new(task: Task, map: GridMap, agent: Cell, inventory: Inventory) -> Result<Self, WorldError> {
        if !map.contains(agent) || map.get(agent) != Block::Air {
            return Err(WorldError::Invalid(format!("agent cell {agent:?} must be an in-map AIR cell")));
        }
        Ok(WorldState { task, map, agent, inventory })
    }

    pub fn goal_reached(&self) -> bool {
        self.inventory.get(self.task.goal_item()) >= 1
    }

    pub fn size(&self) -> usize {
        self.map.size()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ActionTag {
    TpTo,
    Break,
    CraftPlank,
    CraftStick,
    CraftWoodenSword,
    CraftTreeTap,
    PlaceTreeTap,
    CraftWoodenPogo,
}

impl ActionTag {
    pub fn schema_name(self) -> &'static str {
        match self {
            ActionTag::TpTo => "TP_TO",
            ActionTag::Break => "BREAK",
            ActionTag::CraftPlank => "CRAFT_PLANK",
            ActionTag::CraftStick => "CRAFT_STICK",
            ActionTag::CraftWoodenSword => "CRAFT_WOODEN_SWORD",
            ActionTag::CraftTreeTap => "CRAFT_TREE_TAP",
            ActionTag::PlaceTreeTap => "PLACE_TREE_TAP",
            ActionTag::CraftWoodenPogo => "CRAFT_WOODEN_POGO",
        }
    }

    pub fn from_schema_name(s: &str) -> Option<ActionTag> {
        use ActionTag::*;
        [TpTo, Break, CraftPlank, CraftStick, CraftWoodenSword, CraftTreeTap, PlaceTreeTap, CraftWoodenPogo]
            .into_iter()
            .find(|t| t.schema_name().eq_ignore_ascii_case(s))
    }
}

/// Simulator command. `target: None` on BREAK / PLACE_TREE_TAP picks the first tree
/// neighbour in N, E, S, W order (the RL action space only issues untargeted forms).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EnvAction {
    TpTo(Cell),
    Break { target: Option<Cell> },
    CraftPlank,
    CraftStick,
    CraftWoodenSword,
    CraftTreeTap,
    PlaceTreeTap { target: Option<Cell> },
    CraftWoodenPogo,
}

impl EnvAction {
    pub fn tag(self) -> ActionTag {
        match self {
            EnvAction::TpTo(_) => ActionTag::TpTo,
            EnvAction::Break { .. } => ActionTag::Break,
            EnvAction::CraftPlank => ActionTag::CraftPlank,
            EnvAction::CraftStick => ActionTag::CraftStick,
            EnvAction::CraftWoodenSword => ActionTag::CraftWoodenSword,
            EnvAction::CraftTreeTap => ActionTag::CraftTreeTap,
            EnvAction::PlaceTreeTap { .. } => ActionTag::PlaceTreeTap,
            EnvAction::CraftWoodenPogo => ActionTag::CraftWoodenPogo,
        }
    }

    /// Untargeted form of a non-teleport tag.
    pub fn from_tag(tag: ActionTag) -> Option<EnvAction> {
        Some(match tag {
            ActionTag::TpTo => return None,
            ActionTag::Break => EnvAction::Break { target: None },
            ActionTag::CraftPlank => EnvAction::CraftPlank,
            ActionTag::CraftStick => EnvAction::CraftStick,
            ActionTag::CraftWoodenSword => EnvAction::CraftWoodenSword,
            ActionTag::CraftTreeTap => EnvAction::CraftTreeTap,
            ActionTag::PlaceTreeTap => EnvAction::PlaceTreeTap { target: None },
            ActionTag::CraftWoodenPogo => EnvAction::CraftWoodenPogo,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StepResult {
    pub state: WorldState,
    pub reward: u8,
    pub done: bool,
    pub outcome: Outcome,
}

const PLANK: (&[(Item, u32)], &[(Item, u32)]) = (&[(Item::Log, 1)], &[(Item::Planks, 4)]);
const STICK: (&[(Item, u32)], &[(Item, u32)]) = (&[(Item::Planks, 2)], &[(Item::Stick, 4)]);
const SWORD: (&[(Item, u32)], &[(Item, u32)]) = (&[(Item::Stick, 1), (Item::Planks, 2)], &[(Item::WoodenSword, 1)]);
const TAP: (&[(Item, u32)], &[(Item, u32)]) = (&[(Item::Stick, 1), (Item::Planks, 5)], &[(Item::TreeTap, 1)]);
const PLACE: (&[(Item, u32)], &[(Item, u32)]) = (&[(Item::TreeTap, 1)], &[(Item::Sack, 1)]);
const POGO: (&[(Item, u32)], &[(Item, u32)]) =
    (&[(Item::Stick, 4), (Item::Planks, 2), (Item::Sack, 1)], &[(Item::WoodenPogo, 1)]);

/// Resolves the tree an action would act on, honouring an explicit target.
fn tree_target(state: &WorldState, target: Option<Cell>) -> Option<Cell> {
    match target {
        None => state.map.first_tree_neighbor(state.agent),
        Some(t) => {
            let adjacent = state.map.neighbors(state.agent).any(|x| x == t);
            (adjacent && state.map.get(t) == Block::Tree).then_some(t)
        }
    }
}

/// Whether `action` would be applied in `state`.
pub fn is_legal(state: &WorldState, action: EnvAction) -> bool {
    if action.tag() != ActionTag::TpTo && !state.task.craft_tags().contains(&action.tag()) {
        return false;
    }
    let inv = &state.inventory;
    match action {
        EnvAction::TpTo(c) => state.map.contains(c) && state.map.get(c) == Block::Air && c != state.agent,
        EnvAction::Break { target } => tree_target(state, target).is_some(),
        EnvAction::CraftPlank => inv.has(PLANK.0),
        EnvAction::CraftStick => inv.has(STICK.0),
        EnvAction::CraftWoodenSword => state.map.near_table(state.agent) && inv.has(SWORD.0),
        EnvAction::CraftTreeTap => state.map.near_table(state.agent) && inv.has(TAP.0),
        EnvAction::PlaceTreeTap { target } => tree_target(state, target).is_some() && inv.has(PLACE.0),
        EnvAction::CraftWoodenPogo => state.map.near_table(state.agent) && inv.has(POGO.0),
    }
}

/// Total, deterministic transition. Illegal actions are rejected and leave the state unchanged.
pub fn step(state: &WorldState, action: EnvAction) -> StepResult {
    if !is_legal(state, action) {
        return StepResult { state: state.clone(), reward: 0, done: state.goal_reached(), outcome: Outcome::Rejected };
    }
    let mut next = state.clone();
    let craft = |next: &mut WorldState, recipe: (&[(Item, u32)], &[(Item, u32)])| {
        next.inventory.transfer(recipe.0, recipe.1);
    };
    match action {
        EnvAction::TpTo(c) => next.agent = c,
        EnvAction::Break { target } => {
            let t = tree_target(state, target).expect("legal");
            next.map.set(t, Block::Air);
            next.inventory.transfer(&[], &[(Item::Log, 1)]);
        }
        EnvAction::CraftPlank => craft(&mut next, PLANK),
        EnvAction::CraftStick => craft(&mut next, STICK),
        EnvAction::CraftWoodenSword => craft(&mut next, SWORD),
        EnvAction::CraftTreeTap => craft(&mut next, TAP),
        EnvAction::PlaceTreeTap { .. } => craft(&mut next, PLACE),
        EnvAction::CraftWoodenPogo => craft(&mut next, POGO),
    }
    let reward = u8::from(!state.goal_reached() && next.goal_reached());
    let done = next.goal_reached();
    StepResult { state: next, reward, done, outcome: Outcome::Applied }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub task: Task,
    pub size: usize,
    /// Inclusive range for randomized inventory counts.
    pub inventory_range: (u32, u32),
    /// Inclusive range for the tree count; `None` means `[0, ⌊N²/3⌋]`.
    pub tree_range: Option<(usize, usize)>,
    pub seed: u64,
}

impl GeneratorConfig {
    pub fn new(task: Task, size: usize, seed: u64) -> Self {
        GeneratorConfig { task, size, inventory_range: (0, 8), tree_range: None, seed }
    }
}

/// A generated problem: its identity plus the initial world.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CraftInstance {
    pub id: String,
    pub seed: u64,
    pub initial: WorldState,
}

impl CraftInstance {
    pub fn task(&self) -> Task {
        self.initial.task
    }

    pub fn size(&self) -> usize {
        self.initial.size()
    }

    pub fn reset(&self) -> WorldState {
        self.initial.clone()
    }

    pub fn problem(&self) -> crate::model::ProblemInstance {
        crate::encodings::problem_from_world(&self.id, &self.initial, self.seed)
    }
}

pub fn generate(config: &GeneratorConfig) -> Result<CraftInstance, WorldError> {
    let n = config.size;
    if n < 2 {
        return Err(WorldError::Generation(format!("map size {n} too small for a table and the agent")));
    }
    let (lo_t, hi_t) = config.tree_range.unwrap_or((0, n * n / 3));
    if lo_t > hi_t || hi_t + 2 > n * n {
        return Err(WorldError::Generation(format!(
            "tree range [{lo_t}, {hi_t}] does not fit a {n}x{n} map with a table and the agent"
        )));
    }
    let (lo_i, hi_i) = config.inventory_range;
    if lo_i > hi_i {
        return Err(WorldError::Generation(format!("empty inventory range [{lo_i}, {hi_i}]")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut free: Vec<usize> = (0..n * n).collect();
    let mut take = |rng: &mut ChaCha8Rng| free.swap_remove(rng.gen_range(0..free.len()));
    let mut cells = vec![Block::Air; n * n];
    cells[take(&mut rng)] = Block::CraftingTable;
    let trees = rng.gen_range(lo_t..=hi_t);
    for _ in 0..trees {
        cells[take(&mut rng)] = Block::Tree;
    }
    let a = take(&mut rng);
    let agent = Cell::new(a / n, a % n);
    let mut inventory = Inventory::default();
    for &item in config.task.random_items() {
        inventory.set(item, rng.gen_range(lo_i..=hi_i));
    }
    let map = GridMap::new(n, cells)?;
    let initial = WorldState::new(config.task, map, agent, inventory)?;
    Ok(CraftInstance { id: format!("{}_{}x{}_s{}", config.task, n, n, config.seed), seed: config.seed, initial })
}

pub fn reset(instance: &CraftInstance) -> WorldState {
    instance.reset()
}

/// Legality of every index in the task's RL action space.
pub fn legal_mask(state: &WorldState) -> Vec<bool> {
    let map = crate::encodings::ActionIndexMap::new(state.task, state.size());
    (0..map.len()).map(|i| is_legal(state, map.action(i))).collect()
}

pub fn schema_count(task: Task) -> usize {
    ground_truth_model(task).schemas.len()
}

/// The expert's hand-written lifted model; semantics match [`step`] on targeted actions.
pub fn ground_truth_model(task: Task) -> DomainModel {
    use Comparator::Ge;
    let p = Term::Param;
    let ge = |i: Item, v: i64| LinearCondition::on(i.fluent(), Ge, int(v));
    let d = |i: Item, v: i64| LinearAssignment::delta(i.fluent(), int(v));

    let mut tp = ActionSchema::new("TP_TO", &[("?from", "cell"), ("?to", "cell")]);
    tp.distinct = vec![(0, 1)];
    tp.preconditions = vec![Literal::pos("at", vec![p(0)]), Literal::pos("air", vec![p(1)])];
    tp.del_effects = vec![Literal::pos("at", vec![p(0)])];
    tp.add_effects = vec![Literal::pos("at", vec![p(1)])];

    let tree_action = |name: &str| {
        let mut s = ActionSchema::new(name, &[("?agent", "cell"), ("?tree", "cell")]);
        s.preconditions = vec![
            Literal::pos("at", vec![p(0)]),
            Literal::pos("adjacent", vec![p(0), p(1)]),
            Literal::pos("tree_at", vec![p(1)]),
        ];
        s
    };
    let mut brk = tree_action("BREAK");
    brk.del_effects = vec![Literal::pos("tree_at", vec![p(1)])];
    brk.add_effects = vec![Literal::pos("air", vec![p(1)])];
    brk.numeric_effects = vec![d(Item::Log, 1)];

    let mut plank = ActionSchema::new("CRAFT_PLANK", &[]);
    plank.numeric_preconditions = vec![ge(Item::Log, 1)];
    plank.numeric_effects = vec![d(Item::Log, -1), d(Item::Planks, 4)];

    let mut stick = ActionSchema::new("CRAFT_STICK", &[]);
    stick.numeric_preconditions = vec![ge(Item::Planks, 2)];
    stick.numeric_effects = vec![d(Item::Planks, -2), d(Item::Stick, 4)];

    let table_action = |name: &str, reqs: &[(Item, i64)], out: Item| {
        let mut s = ActionSchema::new(name, &[("?at", "cell")]);
        s.preconditions = vec![Literal::pos("at", vec![p(0)]), Literal::pos("near_table", vec![p(0)])];
        s.numeric_preconditions = reqs.iter().map(|&(i, v)| ge(i, v)).collect();
        s.numeric_effects = reqs.iter().map(|&(i, v)| d(i, -v)).chain([d(out, 1)]).collect();
        s
    };
    let sword = table_action("CRAFT_WOODEN_SWORD", &[(Item::Stick, 1), (Item::Planks, 2)], Item::WoodenSword);

    let mut schemas = vec![tp, brk, plank, stick, sword];
    if task == Task::Pogo {
        schemas.push(table_action("CRAFT_TREE_TAP", &[(Item::Stick, 1), (Item::Planks, 5)], Item::TreeTap));
        let mut place = tree_action("PLACE_TREE_TAP");
        place.numeric_preconditions = vec![ge(Item::TreeTap, 1)];
        place.numeric_effects = vec![d(Item::TreeTap, -1), d(Item::Sack, 1)];
        schemas.push(place);
        schemas.push(table_action(
            "CRAFT_WOODEN_POGO",
            &[(Item::Stick, 4), (Item::Planks, 2), (Item::Sack, 1)],
            Item::WoodenPogo,
        ));
    }
    for s in &mut schemas {
        s.canonicalize();
    }
    DomainModel {
        name: format!("craft_{}", task.name()),
        types: vec!["cell".into()],
        predicates: signatures(),
        fluents: Item::ALL
            .iter()
            .map(|i| FluentSignature { name: i.fluent().to_string(), param_types: vec![] })
            .collect(),
        schemas,
    }
}

fn signatures() -> Vec<PredicateSignature> {
    let one = |n: &str| PredicateSignature { name: n.into(), param_types: vec!["cell".into()] };
    vec![
        one("at"),
        one("tree_at"),
        one("table_at"),
        one("air"),
        PredicateSignature { name: "adjacent".into(), param_types: vec!["cell".into(), "cell".into()] },
        one("near_table"),
    ]
}

/// Outcome of the solvability check used to filter generated instances.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Solvability {
    Solvable(crate::model::Plan),
    Unsolvable,
    Unknown,
}

/// Plans with the ground-truth model; timeouts count as unknown.
pub fn filter_solvable(instance: &CraftInstance, config: &crate::planner::PlannerConfig) -> Solvability {
    let model = ground_truth_model(instance.task());
    match crate::planner::plan(&model, &instance.problem(), config) {
        crate::planner::PlanOutcome::Found(p) => Solvability::Solvable(p),
        crate::planner::PlanOutcome::NoPlan => Solvability::Unsolvable,
        crate::planner::PlanOutcome::Timeout => Solvability::Unknown,
    }
}
