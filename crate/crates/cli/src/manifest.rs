use std::collections::BTreeMap;
use std::path::Path;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::Config;

#[derive(Debug, Serialize)]
pub struct OutputDigest {
    pub path: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Debug, Serialize)]
pub struct WallClock {
    pub started_unix: u64,
    pub elapsed_ms: u128,
}

/// One per run; `wall_clock` is the only field allowed to differ between reruns.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: Vec<String>,
    pub config: Config,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub schedule: BTreeMap<String, serde_json::Value>,
    pub derived: BTreeMap<String, serde_json::Value>,
    pub precision_cap: u32,
    pub outputs: Vec<OutputDigest>,
    pub wall_clock: WallClock,
}

pub struct Run {
    pub manifest: RunManifest,
    started: Instant,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let d = Sha256::digest(bytes);
    d.iter().map(|b| format!("{b:02x}")).collect()
}

impl Run {
    pub fn start(command: Vec<String>, config: Config) -> Run {
        let started_unix = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        Run {
            manifest: RunManifest {
                tool: "baire".into(),
                version: env!("CARGO_PKG_VERSION").into(),
                command,
                precision_cap: config.precision_cap,
                config,
                schedule: BTreeMap::new(),
                derived: BTreeMap::new(),
                outputs: Vec::new(),
                wall_clock: WallClock { started_unix, elapsed_ms: 0 },
            },
            started: Instant::now(),
        }
    }

    pub fn derived(&mut self, key: &str, v: impl Serialize) {
        self.manifest.derived.insert(key.into(), serde_json::to_value(v).expect("serializable"));
    }

    pub fn schedule(&mut self, key: &str, v: impl Serialize) {
        self.manifest.schedule.insert(key.into(), serde_json::to_value(v).expect("serializable"));
    }

    /// Writes to `path`, or stdout when it is absent or "-".
    pub fn emit(&mut self, path: Option<&Path>, bytes: &[u8]) -> Result<()> {
        let name = match path {
            Some(p) if p != Path::new("-") => {
                std::fs::write(p, bytes).with_context(|| format!("writing {}", p.display()))?;
                p.display().to_string()
            }
            _ => {
                use std::io::Write;
                std::io::stdout().write_all(bytes)?;
                "-".into()
            }
        };
        self.manifest.outputs.push(OutputDigest { path: name, sha256: sha256_hex(bytes), bytes: bytes.len() });
        Ok(())
    }

    pub fn emit_json(&mut self, path: Option<&Path>, v: &impl Serialize) -> Result<()> {
        let mut s = serde_json::to_string_pretty(v)?;
        s.push('\n');
        self.emit(path, s.as_bytes())
    }

    /// Writes the manifest to `path`, else to stderr as one JSON line.
    pub fn finish(mut self, path: Option<&Path>) -> Result<()> {
        self.manifest.wall_clock.elapsed_ms = self.started.elapsed().as_millis();
        match path {
            Some(p) => {
                let s = serde_json::to_string_pretty(&self.manifest)? + "\n";
                std::fs::write(p, s).with_context(|| format!("writing manifest {}", p.display()))?;
            }
            None => eprintln!("{}", serde_json::to_string(&self.manifest)?),
        }
        Ok(())
    }
}
