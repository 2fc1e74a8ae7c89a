use std::fs;
use std::path::{Path, PathBuf};

use chrono::{SecondsFormat, Utc};
use nwp_fairness::data::sha256_hex;
use serde::Serialize;

use crate::error::{CliError, CliResult};

#[derive(Debug, Serialize)]
pub struct Artifact {
    pub file: String,
    pub bytes: usize,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config: Option<PathBuf>,
    pub inputs: Vec<PathBuf>,
    pub output_dir: PathBuf,
    pub seed: u64,
    pub started_at: String,
    pub finished_at: String,
    pub artifacts: Vec<Artifact>,
}

pub fn now() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true)
}

/// Collects artifacts as they are written.
pub struct OutputDir {
    dir: PathBuf,
    artifacts: Vec<Artifact>,
}

impl OutputDir {
    pub fn create(dir: &Path) -> CliResult<Self> {
        fs::create_dir_all(dir)
            .map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", dir.display())))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            artifacts: Vec::new(),
        })
    }

    pub fn write(&mut self, file: &str, bytes: &[u8]) -> CliResult<()> {
        let path = self.dir.join(file);
        fs::write(&path, bytes)
            .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))?;
        progress!(
            "artifact={file} bytes={} sha256={}",
            bytes.len(),
            sha256_hex(bytes)
        );
        self.artifacts.push(Artifact {
            file: file.to_string(),
            bytes: bytes.len(),
            sha256: sha256_hex(bytes),
        });
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, file: &str, value: &T) -> CliResult<()> {
        let mut bytes = serde_json::to_vec_pretty(value)
            .map_err(|e| CliError::Runtime(format!("cannot encode {file}: {e}")))?;
        bytes.push(b'\n');
        self.write(file, &bytes)
    }

    /// Writes `manifest.json` listing everything written so far.
    pub fn finish(
        self,
        command: &str,
        config: Option<PathBuf>,
        inputs: Vec<PathBuf>,
        seed: u64,
        started_at: String,
    ) -> CliResult<()> {
        let manifest = RunManifest {
            command: command.to_string(),
            config,
            inputs,
            output_dir: self.dir.clone(),
            seed,
            started_at,
            finished_at: now(),
            artifacts: self.artifacts,
        };
        let mut bytes = serde_json::to_vec_pretty(&manifest)
            .map_err(|e| CliError::Runtime(format!("cannot encode manifest: {e}")))?;
        bytes.push(b'\n');
        let path = self.dir.join("manifest.json");
        fs::write(&path, bytes)
            .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))?;
        progress!("manifest={}", path.display());
        Ok(())
    }
}
