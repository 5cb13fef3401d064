//! Run manifests recording how a set of artifacts was produced.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub argv: Vec<String>,
    pub version: String,
    /// SHA-256 of the effective configuration, empty when the command has
    /// none.
    pub config_digest: String,
    pub seed: Option<u64>,
    pub inputs: Vec<PathBuf>,
    pub output_dir: PathBuf,
    /// Files written by the run, relative to `output_dir`.
    pub outputs: Vec<PathBuf>,
    /// Seconds since the Unix epoch.
    pub started_at: u64,
    pub finished_at: u64,
}

fn now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

impl RunManifest {
    pub fn start(command: &str, argv: Vec<String>, output_dir: impl Into<PathBuf>) -> Self {
        RunManifest {
            command: command.to_string(),
            argv,
            version: env!("CARGO_PKG_VERSION").to_string(),
            output_dir: output_dir.into(),
            started_at: now(),
            ..RunManifest::default()
        }
    }

    pub fn record_output(&mut self, relative: impl Into<PathBuf>) {
        self.outputs.push(relative.into());
    }

    /// Stamps the finish time and writes `manifest.json` into the output
    /// directory.
    pub fn finish(&mut self) -> io::Result<PathBuf> {
        self.finished_at = now();
        let path = self.output_dir.join(MANIFEST_FILE);
        let json = serde_json::to_string_pretty(self).map_err(io::Error::other)?;
        fs::write(&path, json + "\n")?;
        Ok(path)
    }

    pub fn load(path: impl AsRef<Path>) -> io::Result<Self> {
        let text = fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))
    }
}
