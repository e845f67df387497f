//! Deterministic artifact writing.
//!
//! Identical run configurations must produce byte-identical files: JSON maps
//! are BTree-backed (sorted keys), floats go through the shortest-roundtrip
//! formatter, and nothing time- or path-dependent is ever written.

use anyhow::{Context, Result};
use serde::Serialize;
use std::fs;
use std::path::{Path, PathBuf};

pub const SCHEMA_VERSION: u32 = 1;

/// Envelope every JSON report shares.
#[derive(Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub construction: String,
    pub seed: u64,
    pub params: serde_json::Value,
    pub verdict: String,
    pub statistics: serde_json::Value,
}

impl Report {
    pub fn new(
        construction: &str,
        seed: u64,
        params: serde_json::Value,
        passed: bool,
        statistics: serde_json::Value,
    ) -> Self {
        Report {
            schema_version: SCHEMA_VERSION,
            construction: construction.to_string(),
            seed,
            params,
            verdict: if passed { "pass" } else { "fail" }.to_string(),
            statistics,
        }
    }
}

pub struct OutputDir {
    dir: PathBuf,
}

impl OutputDir {
    pub fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir)
            .with_context(|| format!("creating output directory {}", dir.display()))?;
        Ok(OutputDir {
            dir: dir.to_path_buf(),
        })
    }

    pub fn write_json<T: Serialize>(&self, name: &str, value: &T) -> Result<PathBuf> {
        let path = self.dir.join(name);
        let mut bytes = serde_json::to_vec_pretty(value)?;
        bytes.push(b'\n');
        fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }

    /// CSV with the walk schema `n,S_n[,S_n_mod_m]`.
    pub fn write_walk_csv(
        &self,
        name: &str,
        start_n: u64,
        sums: &[i64],
        reduced: Option<&[u32]>,
    ) -> Result<PathBuf> {
        let path = self.dir.join(name);
        let mut body = String::new();
        match reduced {
            None => {
                body.push_str("n,S_n\n");
                for (i, s) in sums.iter().enumerate() {
                    body.push_str(&format!("{},{}\n", start_n + i as u64, s));
                }
            }
            Some(track) => {
                body.push_str("n,S_n,S_n_mod_m\n");
                for (i, (s, r)) in sums.iter().zip(track.iter()).enumerate() {
                    body.push_str(&format!("{},{},{}\n", start_n + i as u64, s, r));
                }
            }
        }
        fs::write(&path, body).with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }

    /// Generic small CSV: a header row plus stringified records.
    pub fn write_csv(&self, name: &str, header: &str, rows: &[Vec<String>]) -> Result<PathBuf> {
        let path = self.dir.join(name);
        let mut body = String::with_capacity(rows.len() * 16 + header.len() + 1);
        body.push_str(header);
        body.push('\n');
        for row in rows {
            body.push_str(&row.join(","));
            body.push('\n');
        }
        fs::write(&path, body).with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }
}
