//! Per-run bookkeeping: which tasks finished, which files they produced
//! and the checksums those files had when written.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::format::{sha256_hex, write_atomic};
use crate::{Error, Result};

pub const MANIFEST_FILE: &str = "manifest";
pub const CONFIG_FILE: &str = "config.toml";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaskStatus {
    Pending,
    Complete,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileRecord {
    /// Relative to the run directory, `/`-separated.
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

impl FileRecord {
    pub fn write(root: &Path, rel: &str, bytes: &[u8]) -> Result<Self> {
        write_atomic(&root.join(rel), bytes)?;
        Ok(FileRecord {
            path: rel.to_owned(),
            sha256: sha256_hex(bytes),
            bytes: bytes.len() as u64,
        })
    }

    pub fn verify(&self, root: &Path) -> bool {
        fs::read(root.join(&self.path))
            .is_ok_and(|b| b.len() as u64 == self.bytes && sha256_hex(&b) == self.sha256)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskRecord {
    pub status: TaskStatus,
    #[serde(default)]
    pub files: Vec<FileRecord>,
    #[serde(default)]
    pub error: Option<String>,
    #[serde(default)]
    pub wall_seconds: f64,
}

impl TaskRecord {
    pub fn pending() -> Self {
        TaskRecord {
            status: TaskStatus::Pending,
            files: Vec::new(),
            error: None,
            wall_seconds: 0.0,
        }
    }

    /// Complete, with every file present and matching its checksum.
    pub fn is_done(&self, root: &Path) -> bool {
        self.status == TaskStatus::Complete && self.files.iter().all(|f| f.verify(root))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub config_hash: String,
    pub code_version: String,
    /// How random numbers were drawn, for anyone reproducing the run
    /// outside this tool.
    pub rng: String,
    pub seed: u64,
    pub tasks: BTreeMap<String, TaskRecord>,
    #[serde(default)]
    pub wall_seconds: f64,
}

impl Manifest {
    pub fn new(config_hash: String, seed: u64, task_ids: impl IntoIterator<Item = String>) -> Self {
        Manifest {
            config_hash,
            code_version: env!("CARGO_PKG_VERSION").to_owned(),
            rng: "ChaCha8 seeded from u64, one stream per trajectory index".to_owned(),
            seed,
            tasks: task_ids
                .into_iter()
                .map(|id| (id, TaskRecord::pending()))
                .collect(),
            wall_seconds: 0.0,
        }
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST_FILE);
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::format(&path, e.to_string()))
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self).expect("manifest always serialises");
        text.push('\n');
        write_atomic(&dir.join(MANIFEST_FILE), text.as_bytes())
    }

    pub fn is_complete(&self, root: &Path) -> bool {
        self.tasks.values().all(|t| t.is_done(root))
    }

    pub fn failed(&self) -> usize {
        self.tasks
            .values()
            .filter(|t| t.status == TaskStatus::Failed)
            .count()
    }

    /// Copy with every timing field zeroed, for comparing runs.
    pub fn without_timing(&self) -> Self {
        let mut m = self.clone();
        m.wall_seconds = 0.0;
        for t in m.tasks.values_mut() {
            t.wall_seconds = 0.0;
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn checksums_detect_corruption() {
        let dir = tempfile::tempdir().unwrap();
        let rec = FileRecord::write(dir.path(), "a/b.txt", b"hello").unwrap();
        assert!(rec.verify(dir.path()));
        fs::write(dir.path().join("a/b.txt"), b"hellO").unwrap();
        assert!(!rec.verify(dir.path()));
        fs::remove_file(dir.path().join("a/b.txt")).unwrap();
        assert!(!rec.verify(dir.path()));
    }

    #[test]
    fn save_and_load() {
        let dir = tempfile::tempdir().unwrap();
        let mut m = Manifest::new("abc".into(), 7, ["quantum/1.45".to_owned()]);
        m.tasks.get_mut("quantum/1.45").unwrap().wall_seconds = 3.0;
        m.save(dir.path()).unwrap();
        let back = Manifest::load(dir.path()).unwrap();
        assert_eq!(back, m);
        assert_eq!(
            back.without_timing().tasks["quantum/1.45"].wall_seconds,
            0.0
        );
        assert!(!back.is_complete(dir.path()));
    }
}
