//! `.map` instance files.
//!
//! ```text
//! id sword_6x6_s7
//! task sword
//! size 6
//! seed 7
//! agent 2 3
//! inventory log=3 planks=0 stick=0 tree_tap=0 sack=0 wooden_sword=0 wooden_pogo=0
//! map
//! C.....
//! ..T...
//! ```

use super::EncodingError;
use crate::world::{Block, Cell, CraftInstance, GridMap, Inventory, Item, Task, WorldState};
use std::path::Path;

pub fn write_map(instance: &CraftInstance) -> String {
    let w = &instance.initial;
    let mut out = format!(
        "id {}\ntask {}\nsize {}\nseed {}\nagent {} {}\ninventory",
        instance.id,
        w.task,
        w.size(),
        instance.seed,
        w.agent.row,
        w.agent.col
    );
    for item in Item::ALL {
        out.push_str(&format!(" {}={}", item.key(), w.inventory.get(item)));
    }
    out.push_str("\nmap\n");
    for r in 0..w.size() {
        let row: String = (0..w.size()).map(|c| w.map.get(Cell::new(r, c)).to_char()).collect();
        out.push_str(&row);
        out.push('\n');
    }
    out
}

pub fn parse_map(text: &str) -> Result<CraftInstance, EncodingError> {
    let err = |line: usize, msg: String| EncodingError::Line { line, msg };
    let mut id = None;
    let mut task = None;
    let mut size = None;
    let mut seed = 0u64;
    let mut agent = None;
    let mut inventory = Inventory::default();
    let mut rows: Vec<(usize, &str)> = Vec::new();
    let mut in_map = false;
    for (i, raw) in text.lines().enumerate() {
        let ln = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if in_map {
            rows.push((ln, line));
            continue;
        }
        let (key, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
        let rest = rest.trim();
        match key {
            "id" => id = Some(rest.to_string()),
            "task" => task = Some(rest.parse::<Task>().map_err(|e| err(ln, e))?),
            "size" => size = Some(rest.parse::<usize>().map_err(|e| err(ln, format!("bad size: {e}")))?),
            "seed" => seed = rest.parse().map_err(|e| err(ln, format!("bad seed: {e}")))?,
            "agent" => {
                let v: Vec<usize> = rest
                    .split_whitespace()
                    .map(|x| x.parse::<usize>())
                    .collect::<Result<_, _>>()
                    .map_err(|e| err(ln, format!("bad agent cell: {e}")))?;
                let [r, c] = v[..] else { return Err(err(ln, "agent needs `row col`".into())) };
                agent = Some(Cell::new(r, c));
            }
            "inventory" => {
                for kv in rest.split_whitespace() {
                    let (k, v) = kv.split_once('=').ok_or_else(|| err(ln, format!("expected key=value, got `{kv}`")))?;
                    let item = Item::from_key(k).ok_or_else(|| err(ln, format!("unknown item `{k}`")))?;
                    inventory.set(item, v.parse().map_err(|e| err(ln, format!("bad count for {k}: {e}")))?);
                }
            }
            "map" => in_map = true,
            other => return Err(err(ln, format!("unknown key `{other}`"))),
        }
    }
    let task = task.ok_or_else(|| EncodingError::Invalid("missing `task`".into()))?;
    let n = size.ok_or_else(|| EncodingError::Invalid("missing `size`".into()))?;
    let agent = agent.ok_or_else(|| EncodingError::Invalid("missing `agent`".into()))?;
    if rows.len() != n {
        return Err(EncodingError::Invalid(format!("expected {n} map rows, found {}", rows.len())));
    }
    let mut cells = Vec::with_capacity(n * n);
    for (ln, row) in rows {
        if row.chars().count() != n {
            return Err(err(ln, format!("expected {n} cells, found {}", row.chars().count())));
        }
        for ch in row.chars() {
            cells.push(Block::from_char(ch).ok_or_else(|| err(ln, format!("unknown cell character `{ch}`")))?);
        }
    }
    let map = GridMap::new(n, cells).map_err(|e| EncodingError::Invalid(e.to_string()))?;
    let initial = WorldState::new(task, map, agent, inventory).map_err(|e| EncodingError::Invalid(e.to_string()))?;
    let id = id.unwrap_or_else(|| format!("{task}_{n}x{n}_s{seed}"));
    Ok(CraftInstance { id, seed, initial })
}

pub fn read_map(path: &Path) -> Result<CraftInstance, EncodingError> {
    parse_map(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::{generate, GeneratorConfig};

    #[test]
    fn round_trip() {
        for seed in 0..20 {
            let inst = generate(&GeneratorConfig::new(Task::Pogo, 5, seed)).unwrap();
            assert_eq!(parse_map(&write_map(&inst)).unwrap(), inst);
        }
    }

    #[test]
    fn bad_row_has_line_number() {
        let text = "task sword\nsize 2\nagent 0 1\nmap\nC.\nX.\n";
        assert!(matches!(parse_map(text), Err(EncodingError::Line { line: 6, .. })));
    }
}
