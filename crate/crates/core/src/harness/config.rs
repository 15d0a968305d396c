use std::collections::BTreeMap;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
#[error("config line {line}: {msg}")]
pub struct ConfigError {
    pub line: usize,
    pub msg: String,
}

/// Parses `key = value` lines. Blank lines and `#` comments are skipped; later keys win.
pub fn parse_kv(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(ConfigError { line: i + 1, msg: format!("expected key=value, got {line:?}") });
        };
        let k = k.trim().trim_start_matches("--").replace('-', "_");
        if k.is_empty() {
            return Err(ConfigError { line: i + 1, msg: "empty key".into() });
        }
        out.insert(k, v.trim().to_string());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_rejects() {
        let m = parse_kv("# c\ntask = sword\n--budget-bi=10 # x\n\nsize=6\nsize=10").unwrap();
        assert_eq!(m["task"], "sword");
        assert_eq!(m["budget_bi"], "10");
        assert_eq!(m["size"], "10");
        assert_eq!(parse_kv("a=1\nnope").unwrap_err().line, 2);
    }
}
