use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputEntry {
    pub file: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command_line: String,
    pub config_sha256: String,
    pub inputs: BTreeMap<String, String>,
    pub version: String,
    pub timestamp: String,
    pub outputs: Vec<OutputEntry>,
}

/// Collects the files a run writes into its output directory, then records
/// them in `manifest.json`.
#[derive(Debug)]
pub struct RunOutputs {
    dir: PathBuf,
    written: Vec<String>,
    inputs: BTreeMap<String, String>,
}

pub const MANIFEST_NAME: &str = "manifest.json";

fn atomic_write(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let tmp = path.with_extension(format!(
        "{}.tmp",
        path.extension().and_then(|e| e.to_str()).unwrap_or("")
    ));
    fs::write(&tmp, bytes).map_err(|e| CliError::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| CliError::io(path, e))
}

impl RunOutputs {
    pub fn new(dir: &Path) -> CliResult<Self> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        Ok(RunOutputs {
            dir: dir.to_path_buf(),
            written: Vec::new(),
            inputs: BTreeMap::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// Reads an input file and records its digest.
    pub fn read_input(&mut self, path: &Path) -> CliResult<String> {
        let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
        self.inputs.insert(path.display().to_string(), sha256_hex(&bytes));
        String::from_utf8(bytes).map_err(|e| CliError::io(path, std::io::Error::new(std::io::ErrorKind::InvalidData, e)))
    }

    pub fn write(&mut self, name: &str, bytes: impl AsRef<[u8]>) -> CliResult<()> {
        atomic_write(&self.dir.join(name), bytes.as_ref())?;
        if !self.written.iter().any(|w| w == name) {
            self.written.push(name.to_string());
        }
        log::info!("wrote {}", self.dir.join(name).display());
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> CliResult<()> {
        let mut text = serde_json::to_string_pretty(value).expect("serializable output");
        text.push('\n');
        self.write(name, text)
    }

    pub fn finish(self, config_json: &str) -> CliResult<RunManifest> {
        let mut outputs = Vec::with_capacity(self.written.len());
        for name in &self.written {
            let path = self.dir.join(name);
            let bytes = fs::read(&path).map_err(|e| CliError::io(&path, e))?;
            outputs.push(OutputEntry {
                file: name.clone(),
                bytes: bytes.len() as u64,
                sha256: sha256_hex(&bytes),
            });
        }
        let manifest = RunManifest {
            command_line: std::env::args().collect::<Vec<_>>().join(" "),
            config_sha256: sha256_hex(config_json.as_bytes()),
            inputs: self.inputs,
            version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            outputs,
        };
        let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        text.push('\n');
        atomic_write(&self.dir.join(MANIFEST_NAME), text.as_bytes())?;
        Ok(manifest)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_of_abc() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn manifest_lists_every_output() {
        let dir = tempfile::tempdir().unwrap();
        let input = dir.path().join("in.txt");
        fs::write(&input, "abc").unwrap();
        let mut out = RunOutputs::new(&dir.path().join("run")).unwrap();
        assert_eq!(out.read_input(&input).unwrap(), "abc");
        out.write("a.txt", "one").unwrap();
        out.write("b.txt", "two").unwrap();
        out.write("a.txt", "uno").unwrap();
        let m = out.finish("{}").unwrap();
        assert_eq!(m.outputs.len(), 2);
        assert_eq!(m.outputs[0].sha256, sha256_hex(b"uno"));
        assert_eq!(m.inputs.values().next().unwrap(), &sha256_hex(b"abc"));
        let on_disk: RunManifest =
            serde_json::from_str(&fs::read_to_string(dir.path().join("run/manifest.json")).unwrap()).unwrap();
        assert_eq!(on_disk, m);
        assert!(fs::read_dir(dir.path().join("run"))
            .unwrap()
            .all(|e| !e.unwrap().file_name().to_string_lossy().ends_with(".tmp")));
    }
}
