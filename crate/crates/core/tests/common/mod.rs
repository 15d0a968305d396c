#![allow(dead_code)]
//! Independent oracles shared by the integration tests. Nothing here calls into the
//! crate's own hull or linear-algebra code.

use std::collections::{HashSet, VecDeque};

use ramplab::encodings::{execute_grounded, world_to_symbolic, ActionIndexMap};
use ramplab::model::{GroundedAction, Outcome, Trajectory};
use ramplab::world::{step, Block, Cell, GridMap, Inventory, Item, Task, WorldState};

/// Determinant of a small square integer matrix by cofactor expansion.
pub fn det(m: &[Vec<i128>]) -> i128 {
    match m.len() {
        0 => 1,
        1 => m[0][0],
        2 => m[0][0] * m[1][1] - m[0][1] * m[1][0],
        n => (0..n)
            .map(|j| {
                let minor: Vec<Vec<i128>> =
                    m[1..].iter().map(|r| r.iter().enumerate().filter(|(k, _)| *k != j).map(|(_, v)| *v).collect()).collect();
                let s = if j % 2 == 0 { 1 } else { -1 };
                s * m[0][j] * det(&minor)
            })
            .sum(),
    }
}

/// Rank of an integer matrix (rows are vectors), via fraction-free elimination.
pub fn rank(rows: &[Vec<i128>]) -> usize {
    let mut m: Vec<Vec<i128>> = rows.to_vec();
    let cols = m.first().map_or(0, |r| r.len());
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..m.len()).find(|&i| m[i][c] != 0) else { continue };
        m.swap(r, p);
        for i in 0..m.len() {
            if i != r && m[i][c] != 0 {
                let (a, b) = (m[r][c], m[i][c]);
                for k in 0..cols {
                    m[i][k] = m[i][k] * a - m[r][k] * b;
                }
                let g = m[i].iter().fold(0i128, |g, v| gcd(g, v.abs()));
                if g > 1 {
                    m[i].iter_mut().for_each(|v| *v /= g);
                }
            }
        }
        r += 1;
    }
    r
}

fn gcd(a: i128, b: i128) -> i128 {
    if b == 0 { a } else { gcd(b, a % b) }
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

/// A full-dimensional simplex of the sample span, prepared for barycentric tests.
struct Simplex {
    base: Vec<i128>,
    /// Columns `s_i - s_0`, stored as `d` rows of `k` entries.
    dirs: Vec<Vec<i128>>,
    rows: Vec<usize>,
    det: i128,
}

/// Carathéodory oracle: `p` lies in the hull of `S` iff it lies in a simplex spanned by
/// `k + 1` affinely independent samples, where `k` is the dimension of the span of `S`.
pub struct HullOracle {
    k: usize,
    point: Option<Vec<i128>>,
    simplices: Vec<Simplex>,
}

impl HullOracle {
    pub fn new(samples: &[Vec<i128>]) -> Self {
        let d = samples[0].len();
        let diffs: Vec<Vec<i128>> =
            samples[1..].iter().map(|s| s.iter().zip(&samples[0]).map(|(a, b)| a - b).collect()).collect();
        let k = rank(&diffs);
        if k == 0 {
            return HullOracle { k, point: Some(samples[0].clone()), simplices: vec![] };
        }
        let mut simplices = Vec::new();
        for subset in combinations(samples.len(), k + 1) {
            let base = samples[subset[0]].clone();
            let dirs: Vec<Vec<i128>> =
                (0..d).map(|r| subset[1..].iter().map(|&i| samples[i][r] - base[r]).collect()).collect();
            // First k rows with a non-zero minor.
            let found = combinations(d, k).into_iter().find_map(|rows| {
                let m: Vec<Vec<i128>> = rows.iter().map(|&r| dirs[r].clone()).collect();
                let dt = det(&m);
                (dt != 0).then_some((rows, dt))
            });
            if let Some((rows, det)) = found {
                simplices.push(Simplex { base, dirs, rows, det });
            }
        }
        HullOracle { k, point: None, simplices }
    }

    pub fn span_dim(&self) -> usize {
        self.k
    }

    pub fn contains(&self, p: &[i128]) -> bool {
        if let Some(pt) = &self.point {
            return pt.as_slice() == p;
        }
        let k = self.k;
        self.simplices.iter().any(|s| {
            let r: Vec<i128> = p.iter().zip(&s.base).map(|(a, b)| a - b).collect();
            // Cramer: mu_j = det(M_j) / det(M), scaled by det(M).
            let m: Vec<Vec<i128>> = s.rows.iter().map(|&i| s.dirs[i].clone()).collect();
            let mut num = vec![0i128; k];
            for (j, slot) in num.iter_mut().enumerate() {
                let mj: Vec<Vec<i128>> = m
                    .iter()
                    .zip(&s.rows)
                    .map(|(row, &ri)| {
                        let mut row = row.clone();
                        row[j] = r[ri];
                        row
                    })
                    .collect();
                *slot = det(&mj);
            }
            let (num, den): (Vec<i128>, i128) =
                if s.det < 0 { (num.iter().map(|v| -v).collect(), -s.det) } else { (num, s.det) };
            if num.iter().any(|v| *v < 0) || num.iter().sum::<i128>() > den {
                return false;
            }
            // Every coordinate, not only the chosen rows, must match.
            s.dirs.iter().zip(&r).all(|(row, rv)| row.iter().zip(&num).map(|(a, b)| a * b).sum::<i128>() == rv * den)
        })
    }
}

/// A hand-built 4x4 world: table at (0,0), one tree at (2,0), agent at (1,0), which is
/// next to both.
pub fn workshop(task: Task, inv: &[(Item, u32)]) -> WorldState {
    let n = 4;
    let mut cells = vec![Block::Air; n * n];
    cells[0] = Block::CraftingTable;
    cells[2 * n] = Block::Tree;
    let map = GridMap::new(n, cells).expect("valid map");
    let mut inventory = Inventory::default();
    for &(i, v) in inv {
        inventory.set(i, v);
    }
    WorldState::new(task, map, Cell::new(1, 0), inventory).expect("valid state")
}

/// Executes `actions` from `start`, panicking on any rejected step.
pub fn run(start: &WorldState, actions: &[GroundedAction]) -> Trajectory {
    let mut w = start.clone();
    let mut states = vec![world_to_symbolic(&w)];
    for a in actions {
        let r = execute_grounded(&w, a).unwrap_or_else(|| panic!("{a} rejected"));
        w = r.state;
        states.push(world_to_symbolic(&w));
    }
    Trajectory::from_states(states, actions.to_vec(), u8::from(w.goal_reached()))
}

pub fn ga(name: &str, args: &[&str]) -> GroundedAction {
    GroundedAction::new(name, args)
}

/// Shortest number of legal simulator steps to the goal; no planner code involved.
pub fn simulator_bfs(start: &WorldState, actions: &ActionIndexMap) -> Option<usize> {
    if start.goal_reached() {
        return Some(0);
    }
    let mut seen = HashSet::from([start.clone()]);
    let mut queue = VecDeque::from([(start.clone(), 0usize)]);
    while let Some((s, d)) = queue.pop_front() {
        for i in 0..actions.len() {
            let r = step(&s, actions.action(i));
            if r.outcome == Outcome::Rejected || !seen.insert(r.state.clone()) {
                continue;
            }
            if r.state.goal_reached() {
                return Some(d + 1);
            }
            queue.push_back((r.state, d + 1));
        }
    }
    None
}

