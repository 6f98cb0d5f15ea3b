//! The reproducibility manifest: configuration hash, per-task summaries and
//! pass/fail flags, and a checksum for every emitted file.

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Flag {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    /// "le", "lt", "ge", or "bool" (value 1.0 means true).
    pub cmp: String,
    pub pass: bool,
}

impl Flag {
    pub fn le(name: &str, value: f64, threshold: f64) -> Flag {
        Flag {
            name: name.to_string(),
            value,
            threshold,
            cmp: "le".into(),
            pass: evaluate_cmp(value, threshold, "le"),
        }
    }

    pub fn lt(name: &str, value: f64, threshold: f64) -> Flag {
        Flag {
            name: name.to_string(),
            value,
            threshold,
            cmp: "lt".into(),
            pass: evaluate_cmp(value, threshold, "lt"),
        }
    }

    pub fn boolean(name: &str, ok: bool) -> Flag {
        Flag {
            name: name.to_string(),
            value: if ok { 1.0 } else { 0.0 },
            threshold: 1.0,
            cmp: "bool".into(),
            pass: ok,
        }
    }
}

pub fn evaluate_cmp(value: f64, threshold: f64, cmp: &str) -> bool {
    match cmp {
        "le" => value <= threshold,
        "lt" => value < threshold,
        "ge" => value >= threshold,
        "bool" => value == 1.0,
        _ => false,
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TaskRecord {
    pub name: String,
    pub wall_ms: u64,
    pub summary: Value,
    pub flags: Vec<Flag>,
    pub error: Option<String>,
}

impl TaskRecord {
    pub fn passed(&self) -> bool {
        self.error.is_none() && self.flags.iter().all(|f| f.pass)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FileRecord {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub config_hash: String,
    pub tasks: Vec<TaskRecord>,
    pub files: Vec<FileRecord>,
}

impl RunManifest {
    pub fn all_passed(&self) -> bool {
        self.tasks.iter().all(TaskRecord::passed)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut out = String::with_capacity(64);
    for b in digest {
        out.push_str(&format!("{b:02x}"));
    }
    out
}
