//! Loop removal and single-action shortcuts over goal-reaching trajectories.

use std::collections::HashMap;

use crate::model::{apply, DomainModel, GroundedAction, ProblemInstance, SymbolicState, Trajectory};
use crate::planner::SuccessorIndex;

fn split(t: &Trajectory) -> (Vec<SymbolicState>, Vec<GroundedAction>) {
    let states = t.states().into_iter().cloned().collect();
    let actions = t.actions().into_iter().cloned().collect();
    (states, actions)
}

fn rebuild(src: &Trajectory, states: Vec<SymbolicState>, actions: Vec<GroundedAction>) -> Trajectory {
    if actions.is_empty() {
        return Trajectory { records: Vec::new(), ..src.clone() };
    }
    let reward = src.records.last().map_or(0, |r| r.reward);
    let mut out = Trajectory::from_states(states, actions, reward);
    out.episode_id = src.episode_id;
    out.instance_id = src.instance_id.clone();
    out.seed = src.seed;
    out.producer = src.producer;
    out
}

/// Cuts every segment that starts and ends in the same state. A later visit to
/// an already seen state rewinds to its first occurrence.
pub fn remove_loops(t: &Trajectory) -> Trajectory {
    let (states, actions) = split(t);
    if actions.is_empty() {
        return t.clone();
    }
    let mut out_states: Vec<SymbolicState> = Vec::with_capacity(states.len());
    let mut out_actions: Vec<GroundedAction> = Vec::with_capacity(actions.len());
    let mut seen: HashMap<SymbolicState, usize> = HashMap::new();
    for (k, s) in states.into_iter().enumerate() {
        if let Some(&pos) = seen.get(&s) {
            for dropped in out_states.drain(pos + 1..) {
                seen.remove(&dropped);
            }
            out_actions.truncate(pos);
            continue;
        }
        if k > 0 {
            out_actions.push(actions[k - 1].clone());
        }
        seen.insert(s.clone(), out_states.len());
        out_states.push(s);
    }
    rebuild(t, out_states, out_actions)
}

/// One suffix-first scan. Returns the number of replacements made.
fn scan(
    states: &mut Vec<SymbolicState>,
    actions: &mut Vec<GroundedAction>,
    index: &SuccessorIndex,
    model: &DomainModel,
) -> usize {
    let mut replaced = 0;
    let mut to = actions.len();
    while to >= 2 {
        let from = to - 2;
        let found = index
            .connect(&states[from], &states[to])
            .filter(|a| apply(&states[from], a, model).ok().as_ref() == Some(&states[to]));
        match found {
            Some(a) => {
                states.drain(from + 1..to);
                actions.splice(from..to, [a]);
                to = from + 1;
                replaced += 1;
            }
            None => to -= 1,
        }
    }
    replaced
}

/// Loop removal followed by suffix-first single-action replacement, repeated
/// until a pass makes no change.
pub fn shortcut_search(t: &Trajectory, model: &DomainModel, problem: &ProblemInstance) -> Trajectory {
    let looped = remove_loops(t);
    if looped.len() < 2 || model.schemas.is_empty() {
        return looped;
    }
    let (mut states, mut actions) = split(&looped);
    let mut p = problem.clone();
    p.init = states[0].clone();
    let index = SuccessorIndex::new(model, &p);
    while scan(&mut states, &mut actions, &index, model) > 0 {}
    rebuild(&looped, states, actions)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Atom, PredicateSignature};
    use std::collections::BTreeSet;

    fn at(x: i32, y: i32) -> SymbolicState {
        SymbolicState { atoms: BTreeSet::from([Atom::new("at", &[&format!("c{x}{y}")])]), ..Default::default() }
    }

    fn loop_traj(xs: &[(i32, i32)]) -> Trajectory {
        let states: Vec<_> = xs.iter().map(|&(x, y)| at(x, y)).collect();
        let actions = (1..xs.len()).map(|i| GroundedAction::new("go", &[&format!("k{i}")])).collect();
        Trajectory::from_states(states, actions, 1)
    }

    #[test]
    fn loops_are_cut() {
        let t = loop_traj(&[(0, 0), (0, 1), (1, 1), (0, 1), (1, 1), (1, 2), (2, 2)]);
        let r = remove_loops(&t);
        assert_eq!(r.len(), 4);
        assert!(r.is_chained());
        assert!(r.reached_goal());
        let full = remove_loops(&loop_traj(&[(0, 0), (1, 0), (0, 0)]));
        assert!(full.is_empty());
        let plain = loop_traj(&[(0, 0), (1, 0), (2, 0)]);
        assert_eq!(remove_loops(&plain), plain);
    }

    #[test]
    fn empty_model_only_removes_loops() {
        let t = loop_traj(&[(0, 0), (0, 1), (0, 0), (1, 0), (1, 1)]);
        let m = DomainModel {
            types: vec!["cell".into()],
            predicates: vec![PredicateSignature { name: "at".into(), param_types: vec!["cell".into()] }],
            ..Default::default()
        };
        let p = ProblemInstance { init: at(0, 0), ..Default::default() };
        assert_eq!(shortcut_search(&t, &m, &p), remove_loops(&t));
    }
}
