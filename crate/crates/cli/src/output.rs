//! Output directory handling and the reproducibility manifest.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::{RunConfig, KEYS};
use crate::error::{CliError, CliResult};

/// Files written during one command. Unless [`Outputs::commit`] is
/// called, everything written is removed again on drop.
pub struct Outputs {
    dir: PathBuf,
    written: Vec<PathBuf>,
    committed: bool,
}

fn io_error(path: &Path, e: std::io::Error) -> CliError {
    CliError::data(format!("cannot write {}: {e}", path.display()))
}

impl Outputs {
    pub fn create(dir: &Path) -> CliResult<Self> {
        fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
        Ok(Outputs {
            dir: dir.to_path_buf(),
            written: Vec::new(),
            committed: false,
        })
    }

    pub fn write(&mut self, name: &str, contents: impl AsRef<[u8]>) -> CliResult<PathBuf> {
        let path = self.dir.join(name);
        self.written.push(path.clone());
        fs::write(&path, contents).map_err(|e| io_error(&path, e))?;
        log::info!("wrote {}", path.display());
        Ok(path)
    }

    /// Builds a CSV in memory with `fill` and writes it.
    pub fn write_csv<F>(&mut self, name: &str, fill: F) -> CliResult<PathBuf>
    where
        F: FnOnce(&mut csv::Writer<Vec<u8>>) -> csv::Result<()>,
    {
        let mut w = csv::Writer::from_writer(Vec::new());
        fill(&mut w).map_err(|e| CliError::data(format!("{name}: {e}")))?;
        let bytes = w
            .into_inner()
            .map_err(|e| CliError::data(format!("{name}: {e}")))?;
        self.write(name, bytes)
    }

    pub fn names(&self) -> Vec<String> {
        self.written
            .iter()
            .filter_map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
            .collect()
    }

    pub fn commit(mut self) {
        self.committed = true;
    }
}

impl Drop for Outputs {
    fn drop(&mut self) {
        if self.committed {
            return;
        }
        for p in &self.written {
            if fs::remove_file(p).is_ok() {
                log::warn!("removed partial output {}", p.display());
            }
        }
    }
}

#[derive(Debug, Serialize)]
pub struct InputRecord {
    pub role: String,
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

pub fn checksum(role: &str, path: &Path) -> CliResult<InputRecord> {
    let bytes = fs::read(path).map_err(|e| CliError::data(format!("cannot read {}: {e}", path.display())))?;
    Ok(InputRecord {
        role: role.to_string(),
        path: path.display().to_string(),
        bytes: bytes.len() as u64,
        sha256: hex::encode(Sha256::digest(&bytes)),
    })
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    config: serde_json::Map<String, serde_json::Value>,
    config_sha256: String,
    seed: u64,
    threads: usize,
    inputs: &'a [InputRecord],
    outputs: Vec<String>,
}

/// Writes `manifest.json`: the resolved config, its hash, the seed and
/// checksums of every input file.
pub fn write_manifest(out: &mut Outputs, command: &str, config: &RunConfig, inputs: &[InputRecord]) -> CliResult<()> {
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        command,
        config: KEYS
            .iter()
            .map(|k| (k.to_string(), serde_json::Value::String(config.get(k))))
            .collect(),
        config_sha256: config.sha256(),
        seed: config.seed,
        threads: rayon::current_num_threads(),
        inputs,
        outputs: out.names(),
    };
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    out.write("manifest.json", text + "\n")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uncommitted_outputs_are_removed() {
        let dir = tempfile::tempdir().unwrap();
        {
            let mut out = Outputs::create(dir.path()).unwrap();
            out.write("a.txt", "x").unwrap();
            assert!(dir.path().join("a.txt").exists());
        }
        assert!(!dir.path().join("a.txt").exists());
        let mut out = Outputs::create(dir.path()).unwrap();
        out.write("b.txt", "y").unwrap();
        out.commit();
        assert!(dir.path().join("b.txt").exists());
    }

    #[test]
    fn checksum_of_known_bytes() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("f");
        fs::write(&p, "abc").unwrap();
        let r = checksum("input", &p).unwrap();
        assert_eq!(r.sha256, "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
        assert_eq!(r.bytes, 3);
    }
}
