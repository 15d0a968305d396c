//! Trajectories as JSON Lines, one transition per line.

use super::EncodingError;
use crate::model::{GroundedAction, Outcome, Producer, SymbolicState, Trajectory, TransitionRecord};
use serde::{Deserialize, Serialize};
use std::io::{BufRead, Write};
use std::path::Path;

#[derive(Serialize, Deserialize)]
struct Line {
    episode_id: u64,
    step: usize,
    #[serde(default)]
    instance: String,
    #[serde(default)]
    seed: u64,
    #[serde(default)]
    producer: Producer,
    pre_state: SymbolicState,
    action: GroundedAction,
    post_state: Option<SymbolicState>,
    outcome: Outcome,
    reward: u8,
}

pub fn trajectory_write_string(trajectories: &[Trajectory]) -> String {
    let mut out = String::new();
    for t in trajectories {
        for (step, r) in t.records.iter().enumerate() {
            let line = Line {
                episode_id: t.episode_id,
                step,
                instance: t.instance_id.clone(),
                seed: t.seed,
                producer: t.producer,
                pre_state: r.pre.clone(),
                action: r.action.clone(),
                post_state: r.post.clone(),
                outcome: r.outcome,
                reward: r.reward,
            };
            out.push_str(&serde_json::to_string(&line).expect("serializable"));
            out.push('\n');
        }
    }
    out
}

pub fn trajectory_write(path: &Path, trajectories: &[Trajectory]) -> Result<(), EncodingError> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    f.write_all(trajectory_write_string(trajectories).as_bytes())?;
    f.flush()?;
    Ok(())
}

/// Groups consecutive lines by episode id; rejected transitions are log-only and skipped.
pub fn trajectory_read_str(text: &str) -> Result<Vec<Trajectory>, EncodingError> {
    let mut out: Vec<Trajectory> = Vec::new();
    let mut last_key: Option<(u64, String)> = None;
    for (i, raw) in text.lines().enumerate() {
        if raw.trim().is_empty() {
            continue;
        }
        let line: Line =
            serde_json::from_str(raw).map_err(|e| EncodingError::Line { line: i + 1, msg: e.to_string() })?;
        let rec = TransitionRecord {
            pre: line.pre_state,
            action: line.action,
            post: line.post_state,
            outcome: line.outcome,
            reward: line.reward,
        };
        if !rec.is_consistent() {
            return Err(EncodingError::Line { line: i + 1, msg: "post_state must be present iff applied".into() });
        }
        if rec.outcome == Outcome::Rejected {
            continue;
        }
        let key = (line.episode_id, line.instance.clone());
        if last_key.as_ref() != Some(&key) || line.step == 0 {
            out.push(Trajectory {
                episode_id: line.episode_id,
                instance_id: line.instance,
                seed: line.seed,
                producer: line.producer,
                records: Vec::new(),
            });
            last_key = Some(key);
        }
        out.last_mut().expect("pushed").records.push(rec);
    }
    Ok(out)
}

pub fn trajectory_read(path: &Path) -> Result<Vec<Trajectory>, EncodingError> {
    let f = std::io::BufReader::new(std::fs::File::open(path)?);
    let mut text = String::new();
    for l in f.lines() {
        text.push_str(&l?);
        text.push('\n');
    }
    trajectory_read_str(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Atom;
    use crate::num::int;

    fn st(log: i64) -> SymbolicState {
        SymbolicState {
            atoms: [Atom::new("at", &["cell_0_0"])].into_iter().collect(),
            fluents: [("count_log".to_string(), int(log))].into_iter().collect(),
        }
    }

    #[test]
    fn round_trip() {
        assert!(trajectory_read_str("").unwrap().is_empty());
        let mut t = Trajectory::from_states(vec![st(0), st(1)], vec![GroundedAction::new("BREAK", &["a", "b"])], 1);
        t.episode_id = 3;
        t.instance_id = "sword_6x6_s1".into();
        let text = trajectory_write_string(&[t.clone(), t.clone()]);
        assert_eq!(trajectory_read_str(&text).unwrap(), vec![t.clone(), t]);
    }

    #[test]
    fn malformed_line_reports_number() {
        let err = trajectory_read_str("\n{bad json}\n").unwrap_err();
        assert!(matches!(err, EncodingError::Line { line: 2, .. }));
    }
}
