//! Run manifests written next to every output file.

use std::path::{Path, PathBuf};
use std::time::Duration;

use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Default)]
pub struct RunManifest {
    pub command: String,
    pub config: Map<String, Value>,
    pub inputs: Vec<(String, String)>,
    pub outputs: Vec<(String, String)>,
    pub seed: Option<u64>,
}

impl RunManifest {
    pub fn new(command: &str) -> Self {
        Self {
            command: command.to_string(),
            ..Self::default()
        }
    }

    pub fn set(&mut self, key: &str, value: impl Into<Value>) {
        self.config.insert(key.to_string(), value.into());
    }

    pub fn input(&mut self, path: &Path, bytes: &[u8]) {
        self.inputs.push((path.display().to_string(), sha256_hex(bytes)));
    }

    pub fn output(&mut self, path: &Path, bytes: &[u8]) {
        self.outputs.push((path.display().to_string(), sha256_hex(bytes)));
    }

    pub fn to_json(&self, wall: Duration) -> Value {
        let digests = |list: &[(String, String)]| {
            list.iter()
                .map(|(p, d)| (p.clone(), Value::String(format!("sha256:{d}"))))
                .collect::<Map<_, _>>()
        };
        json!({
            "command": self.command,
            "config": self.config,
            "inputs": digests(&self.inputs),
            "outputs": digests(&self.outputs),
            "version": env!("CARGO_PKG_VERSION"),
            "wall_time_s": wall.as_secs_f64(),
            "seed": self.seed,
        })
    }
}

/// `<out>.manifest.json`
pub fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}
