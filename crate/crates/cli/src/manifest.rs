//! Run manifests and manifest-stamped output files.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::CliError;

/// Digest of an input file.
#[derive(Clone, Debug, Serialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

/// Provenance of one command invocation.
///
/// `hash` covers the command, configuration, seed, version and input digests
/// only, so reruns with the same inputs carry the same hash; timing lives
/// in this file alone.
#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config: Value,
    pub seed: Option<u64>,
    pub version: String,
    pub inputs: Vec<InputDigest>,
    pub outputs: Vec<String>,
    pub hash: String,
    pub started_unix: f64,
    pub wall_clock_seconds: f64,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

impl RunManifest {
    pub fn new(command: &str, config: Value, seed: Option<u64>, inputs: Vec<InputDigest>) -> Self {
        let version = env!("CARGO_PKG_VERSION").to_string();
        let digests: Vec<&str> = inputs.iter().map(|i| i.sha256.as_str()).collect();
        // serde_json maps are ordered by key, so this encoding is canonical
        let key = json!({
            "command": command,
            "config": config,
            "seed": seed,
            "version": version,
            "inputs": digests,
        });
        let hash = sha256_hex(&serde_json::to_vec(&key).expect("manifest key serializes"));
        let started_unix = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map_or(0.0, |d| d.as_secs_f64());
        Self {
            command: command.into(),
            config,
            seed,
            version,
            inputs,
            outputs: Vec::new(),
            hash,
            started_unix,
            wall_clock_seconds: 0.0,
        }
    }
}

#[derive(Serialize)]
struct Stamped<'a, T: Serialize> {
    manifest: &'a str,
    #[serde(flatten)]
    body: &'a T,
}

/// Output directory whose files all carry the manifest hash.
pub struct Outputs {
    dir: PathBuf,
    manifest: RunManifest,
    started: Instant,
}

impl Outputs {
    pub fn create(dir: &Path, manifest: RunManifest) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            manifest,
            started: Instant::now(),
        })
    }

    pub fn hash(&self) -> &str {
        &self.manifest.hash
    }

    /// Writes `body` as pretty JSON with a leading `manifest` field.
    pub fn json<T: Serialize>(&mut self, name: &str, body: &T) -> Result<PathBuf, CliError> {
        let stamped = Stamped {
            manifest: &self.manifest.hash,
            body,
        };
        let mut text = serde_json::to_string_pretty(&stamped)
            .map_err(|e| CliError::usage(format!("cannot serialize {name}: {e}")))?;
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    /// Writes CSV produced by `fill` after a `# manifest <hash>` line.
    pub fn csv<F>(&mut self, name: &str, fill: F) -> Result<PathBuf, CliError>
    where
        F: FnOnce(&mut Vec<u8>) -> std::io::Result<()>,
    {
        let mut buf = format!("# manifest {}\n", self.manifest.hash).into_bytes();
        fill(&mut buf).map_err(|e| CliError::io(&self.dir.join(name), e))?;
        self.write(name, &buf)
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf, CliError> {
        let path = self.dir.join(name);
        let mut f = fs::File::create(&path).map_err(|e| CliError::io(&path, e))?;
        f.write_all(bytes).map_err(|e| CliError::io(&path, e))?;
        self.manifest.outputs.push(name.to_string());
        Ok(path)
    }

    /// Writes `manifest.json` with the elapsed time.
    pub fn finish(mut self) -> Result<RunManifest, CliError> {
        self.manifest.wall_clock_seconds = self.started.elapsed().as_secs_f64();
        let mut text = serde_json::to_string_pretty(&self.manifest)
            .map_err(|e| CliError::usage(format!("cannot serialize manifest: {e}")))?;
        text.push('\n');
        let path = self.dir.join("manifest.json");
        fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
        Ok(self.manifest)
    }
}

/// Digest of a file read as input.
pub fn digest_file(path: &Path) -> Result<InputDigest, CliError> {
    let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
    Ok(InputDigest {
        path: path.display().to_string(),
        sha256: sha256_hex(&bytes),
    })
}
