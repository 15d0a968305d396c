use serde::{Deserialize, Serialize};

use super::HarnessError;

pub const CSV_HEADER: &str = "task,size,algo,seed_or_fold,bucket,n,success_rate,cum_min_len,wall_ms";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub task: String,
    pub size: usize,
    pub algo: String,
    pub seed_or_fold: u64,
    /// Solution-length label (`len<=3`, `all`, ...) or a numeric x value
    /// (trajectories trained on, instances trained on).
    pub bucket: String,
    pub n: usize,
    pub success_rate: f64,
    pub cum_min_len: Option<f64>,
    pub wall_ms: u64,
}

pub fn rows_to_csv(rows: &[MetricsRow]) -> String {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    for r in rows {
        w.write_record([
            r.task.clone(),
            r.size.to_string(),
            r.algo.clone(),
            r.seed_or_fold.to_string(),
            r.bucket.clone(),
            r.n.to_string(),
            format!("{:.6}", r.success_rate),
            r.cum_min_len.map(|v| format!("{v:.2}")).unwrap_or_default(),
            r.wall_ms.to_string(),
        ])
        .expect("in-memory write");
    }
    let body = String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8");
    format!("{CSV_HEADER}\n{body}")
}

pub fn rows_from_csv(text: &str) -> Result<Vec<MetricsRow>, HarnessError> {
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let header: Vec<String> =
        rdr.headers().map_err(|e| HarnessError::Invalid(e.to_string()))?.iter().map(str::to_string).collect();
    if header.join(",") != CSV_HEADER {
        return Err(HarnessError::Invalid(format!("unexpected csv header {:?}", header.join(","))));
    }
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| HarnessError::Invalid(format!("line {line}: {e}")))?;
        let field = |k: usize| rec.get(k).unwrap_or("");
        let bad = |name: &str| HarnessError::Invalid(format!("line {line}: bad {name} {:?}", field(col(name))));
        let rate: f64 = field(6).parse().map_err(|_| bad("success_rate"))?;
        if !(0.0..=1.0).contains(&rate) {
            return Err(bad("success_rate"));
        }
        out.push(MetricsRow {
            task: field(0).to_string(),
            size: field(1).parse().map_err(|_| bad("size"))?,
            algo: field(2).to_string(),
            seed_or_fold: field(3).parse().map_err(|_| bad("seed_or_fold"))?,
            bucket: field(4).to_string(),
            n: field(5).parse().map_err(|_| bad("n"))?,
            success_rate: rate,
            cum_min_len: match field(7) {
                "" => None,
                s => Some(s.parse().map_err(|_| bad("cum_min_len"))?),
            },
            wall_ms: field(8).parse().map_err(|_| bad("wall_ms"))?,
        });
    }
    Ok(out)
}

fn col(name: &str) -> usize {
    CSV_HEADER.split(',').position(|c| c == name).unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let rows = vec![MetricsRow {
            task: "sword".into(),
            size: 6,
            algo: "ramp".into(),
            seed_or_fold: 2,
            bucket: "len<=3".into(),
            n: 40,
            success_rate: 0.975,
            cum_min_len: Some(12.0),
            wall_ms: 0,
        }];
        let text = rows_to_csv(&rows);
        assert!(text.starts_with(CSV_HEADER));
        assert_eq!(rows_from_csv(&text).unwrap(), rows);
        assert!(rows_from_csv("a,b\n1,2\n").is_err());
        assert!(rows_from_csv(&format!("{CSV_HEADER}\nsword,6,x,0,all,1,1.5,,0\n")).is_err());
    }
}
