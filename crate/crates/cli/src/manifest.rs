//! Run manifests: enough to re-run a command and get the same output.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::failure::Failure;

pub const MANIFEST_FORMAT: &str = "kxp-manifest";
pub const MANIFEST_VERSION: u32 = 1;
pub const DIMACS_PREFIX: &str = "c manifest ";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub format: String,
    pub version: u32,
    pub tool_version: String,
    pub command: String,
    /// Arguments as given, without the program name.
    pub args: Vec<String>,
    pub inputs: Vec<InputDigest>,
    pub outputs: Vec<String>,
    pub seeds: BTreeMap<String, u64>,
    pub limits: BTreeMap<String, Value>,
    pub formats: BTreeMap<String, u32>,
    /// Set when a time or count limit cut the run short.
    #[serde(default)]
    pub truncated: bool,
    /// Empty when timings are suppressed.
    pub timings_ms: BTreeMap<String, u64>,
}

impl RunManifest {
    pub fn new(command: &str, args: &[String]) -> RunManifest {
        RunManifest {
            format: MANIFEST_FORMAT.into(),
            version: MANIFEST_VERSION,
            tool_version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            args: args.to_vec(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            seeds: BTreeMap::new(),
            limits: BTreeMap::new(),
            formats: BTreeMap::new(),
            truncated: false,
            timings_ms: BTreeMap::new(),
        }
    }

    pub fn input(&mut self, path: &Path) -> Result<(), Failure> {
        let bytes = std::fs::read(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
        self.inputs.push(InputDigest {
            path: path.display().to_string(),
            sha256: hex(&Sha256::digest(&bytes)),
            bytes: bytes.len() as u64,
        });
        Ok(())
    }

    pub fn output(&mut self, path: &Path) {
        self.outputs.push(path.display().to_string());
    }

    pub fn seed(&mut self, name: &str, seed: u64) {
        self.seeds.insert(name.into(), seed);
    }

    pub fn limit(&mut self, name: &str, value: impl Serialize) {
        self.limits.insert(name.into(), serde_json::to_value(value).expect("limit values serialize"));
    }

    pub fn format(&mut self, name: &str, version: u32) {
        self.formats.insert(name.into(), version);
    }

    /// Checks that every recorded input still has the recorded digest.
    pub fn verify_inputs(&self) -> Result<(), Failure> {
        for i in &self.inputs {
            let bytes = std::fs::read(&i.path).map_err(|e| Failure::input(format!("{}: {e}", i.path)))?;
            if hex(&Sha256::digest(&bytes)) != i.sha256 {
                return Err(Failure::input(format!("{} changed since the recorded run", i.path)));
            }
        }
        Ok(())
    }

    /// Reads a manifest from a manifest file or from any output file that
    /// embeds one (JSON object, first JSON line with a `manifest` key, or a
    /// leading `c manifest` comment in DIMACS output).
    pub fn read_from(path: &Path) -> Result<RunManifest, Failure> {
        let text = std::fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
        let first = text.lines().next().unwrap_or("");
        let first = first.strip_prefix(DIMACS_PREFIX).unwrap_or(first);
        let value: Value = serde_json::from_str(&text)
            .or_else(|_| serde_json::from_str(first))
            .map_err(|e| Failure::input(format!("{}: not JSON: {e}", path.display())))?;
        let m = match value.get("manifest") {
            Some(m) => m.clone(),
            None => value,
        };
        let m: RunManifest =
            serde_json::from_value(m).map_err(|e| Failure::input(format!("{}: no run manifest: {e}", path.display())))?;
        if m.format != MANIFEST_FORMAT || m.version != MANIFEST_VERSION {
            return Err(Failure::input(format!("{}: unsupported manifest {} v{}", path.display(), m.format, m.version)));
        }
        Ok(m)
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Wall-clock stopwatch that reads zero when timings are suppressed.
#[derive(Clone, Copy)]
pub struct Clock {
    start: Instant,
    enabled: bool,
}

impl Clock {
    pub fn start(enabled: bool) -> Clock {
        Clock { start: Instant::now(), enabled }
    }

    pub fn ms(&self) -> u64 {
        if self.enabled {
            self.start.elapsed().as_millis() as u64
        } else {
            0
        }
    }

    pub fn ms_f64(&self) -> f64 {
        if self.enabled {
            self.start.elapsed().as_secs_f64() * 1e3
        } else {
            0.0
        }
    }

    pub fn record(&self, manifest: &mut RunManifest, name: &str) {
        if self.enabled {
            manifest.timings_ms.insert(name.into(), self.ms());
        }
    }
}
