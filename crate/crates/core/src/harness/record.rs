use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sign_models::Model;

pub const SCHEMA_VERSION: u32 = 1;

/// One solved graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub schema: u32,
    #[serde(rename = "N")]
    pub n: u64,
    /// 0 for models without a multiplicative range.
    #[serde(rename = "Q")]
    pub q: u64,
    pub model: Model,
    pub trial_index: u64,
    pub seed: Option<u64>,
    pub omega: usize,
    pub optimal: bool,
    /// Equal to `omega` when optimal, otherwise a coloring bound.
    pub upper_bound: usize,
    pub witness: Vec<usize>,
    pub nodes_expanded: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub all_small_primes_positive: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<f64>,
}

pub fn write_jsonl<W: Write>(mut w: W, records: &[ExperimentRecord]) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_jsonl<R: BufRead>(r: R) -> Result<Vec<ExperimentRecord>> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: ExperimentRecord = serde_json::from_str(&line)?;
        if rec.schema != SCHEMA_VERSION {
            return Err(Error::domain(format!("line {}: unsupported schema {}", i + 1, rec.schema)));
        }
        out.push(rec);
    }
    Ok(out)
}

/// Creates missing parent directories.
pub fn write_jsonl_file(path: &Path, records: &[ExperimentRecord]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    let f = std::fs::File::create(path)?;
    write_jsonl(std::io::BufWriter::new(f), records)
}

pub fn read_jsonl_file(path: &Path) -> Result<Vec<ExperimentRecord>> {
    read_jsonl(std::io::BufReader::new(std::fs::File::open(path)?))
}

/// `runs.jsonl` -> `runs.summary.csv` for suffix `summary.csv`.
pub fn sidecar_path(out: &Path, suffix: &str) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    out.with_file_name(format!("{stem}.{suffix}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(trial: u64) -> ExperimentRecord {
        ExperimentRecord {
            schema: SCHEMA_VERSION,
            n: 101,
            q: 4,
            model: Model::Multiplicative,
            trial_index: trial,
            seed: Some(trial * 7),
            omega: 5,
            optimal: true,
            upper_bound: 5,
            witness: vec![1, 2, 3, 4, 5],
            nodes_expanded: 10,
            all_small_primes_positive: Some(false),
            elapsed_ms: None,
        }
    }

    #[test]
    fn round_trip() {
        let rs = vec![rec(0), rec(1)];
        let mut buf = Vec::new();
        write_jsonl(&mut buf, &rs).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.lines().next().unwrap().starts_with(r#"{"schema":1,"N":101,"Q":4,"model":"multiplicative""#));
        assert!(!text.contains("elapsed_ms"));
        assert_eq!(read_jsonl(buf.as_slice()).unwrap(), rs);
    }

    #[test]
    fn rejects_other_schema() {
        let line = serde_json::to_string(&ExperimentRecord { schema: 2, ..rec(0) }).unwrap();
        assert!(read_jsonl(line.as_bytes()).is_err());
    }

    #[test]
    fn sidecars() {
        assert_eq!(sidecar_path(Path::new("/tmp/a/runs.jsonl"), "meta.json"), PathBuf::from("/tmp/a/runs.meta.json"));
    }
}
