use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use crate::Command;

pub const MANIFEST: &str = "manifest.json";

/// Record of one command run. `command` holds the fully resolved arguments
/// (defaults and the seed filled in), so replaying it reproduces every output
/// file byte for byte.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: Command,
    pub seed: Option<u64>,
    pub tool_version: String,
    /// Output files, relative to the output directory.
    pub outputs: Vec<String>,
    pub exit_code: i32,
    pub wall_clock_secs: f64,
}

impl RunManifest {
    pub fn write_as(&self, dir: &Path, name: &str) -> Result<()> {
        let path = dir.join(name);
        fs::write(&path, serde_json::to_string_pretty(self)? + "\n")
            .with_context(|| format!("cannot write {}", path.display()))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("{} is not a run manifest", path.display()))
    }
}
