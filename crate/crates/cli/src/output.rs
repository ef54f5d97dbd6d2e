//! Output-directory plumbing: CSV/JSON emission and the run manifest.
//! Every file written through [`OutputDir`] is checksummed, and `finish`
//! closes the run by writing a manifest covering all of them.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    let mut out = String::with_capacity(64);
    for byte in digest {
        out.push_str(&format!("{byte:02x}"));
    }
    out
}

#[derive(Serialize)]
pub struct ManifestEntry {
    pub file: String,
    pub sha256: String,
    pub bytes: usize,
}

/// Everything needed to reproduce the run and check its outputs.
#[derive(Serialize)]
pub struct RunManifest {
    pub command: String,
    pub tool_version: String,
    pub master_seed: u64,
    pub config_sha256: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input_sha256: Option<String>,
    pub unix_seconds: u64,
    pub outputs: Vec<ManifestEntry>,
}

pub struct OutputDir {
    root: PathBuf,
    entries: Vec<ManifestEntry>,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self> {
        std::fs::create_dir_all(root)
            .map_err(|e| CliError::io(&format!("cannot create {}", root.display()), e))?;
        Ok(OutputDir {
            root: root.to_path_buf(),
            entries: Vec::new(),
        })
    }

    pub fn path(&self) -> &Path {
        &self.root
    }

    pub fn write_bytes(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.root.join(name);
        std::fs::write(&path, bytes)
            .map_err(|e| CliError::io(&format!("cannot write {}", path.display()), e))?;
        self.entries.push(ManifestEntry {
            file: name.to_string(),
            sha256: sha256_hex(bytes),
            bytes: bytes.len(),
        });
        Ok(())
    }

    /// Write a CSV file from a header and preformatted rows.
    pub fn write_csv(&mut self, name: &str, header: &str, rows: &[String]) -> Result<()> {
        let mut body = String::with_capacity(rows.len() * 16 + header.len() + 1);
        body.push_str(header);
        body.push('\n');
        for row in rows {
            body.push_str(row);
            body.push('\n');
        }
        self.write_bytes(name, body.as_bytes())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut body = serde_json::to_string_pretty(value)
            .map_err(|e| CliError::Io(format!("cannot serialize {name}: {e}")))?;
        body.push('\n');
        self.write_bytes(name, body.as_bytes())
    }

    /// Write the manifest and consume the directory handle.
    pub fn finish(
        self,
        command: &str,
        master_seed: u64,
        config_bytes: &[u8],
        input_sha256: Option<String>,
    ) -> Result<()> {
        let manifest = RunManifest {
            command: command.to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            master_seed,
            config_sha256: sha256_hex(config_bytes),
            input_sha256,
            unix_seconds: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            outputs: self.entries,
        };
        let mut body = serde_json::to_string_pretty(&manifest)
            .map_err(|e| CliError::Io(format!("cannot serialize manifest: {e}")))?;
        body.push('\n');
        let path = self.root.join("manifest.json");
        std::fs::write(&path, body.as_bytes())
            .map_err(|e| CliError::io(&format!("cannot write {}", path.display()), e))
    }
}

/// Shortest-roundtrip float formatting, shared by every CSV writer so
/// reruns are byte-identical.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "NaN".to_string()
    } else {
        format!("{v}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sha256_matches_known_vector() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn float_formatting_round_trips() {
        for v in [0.1, -3.25, 1e-9, 12345.678901234567] {
            assert_eq!(fmt_f64(v).parse::<f64>().unwrap(), v);
        }
    }
}
