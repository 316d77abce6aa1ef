//! File output and run manifests.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes through a sibling temporary file and a rename, so readers never see partial output.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = path.with_file_name(format!(".{name}.tmp-{}", std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)
}

/// Inputs, configuration and outputs of one invocation; contains nothing that varies between
/// identical runs.
#[derive(Debug, Default)]
pub struct Manifest {
    pub subcommand: String,
    inputs: Map<String, Value>,
    config: Map<String, Value>,
    outputs: Vec<(String, String)>,
}

impl Manifest {
    pub fn new(subcommand: &str) -> Self {
        Manifest {
            subcommand: subcommand.to_string(),
            ..Default::default()
        }
    }

    pub fn input(&mut self, role: &str, origin: &str, bytes: &[u8]) {
        self.inputs.insert(
            role.to_string(),
            json!({ "origin": origin, "sha256": sha256_hex(bytes) }),
        );
    }

    pub fn config(&mut self, key: &str, value: impl Into<Value>) {
        self.config.insert(key.to_string(), value.into());
    }

    pub fn write_output(&mut self, path: &Path, bytes: &[u8]) -> std::io::Result<()> {
        write_atomic(path, bytes)?;
        self.outputs.push((path.display().to_string(), sha256_hex(bytes)));
        Ok(())
    }

    pub fn to_json(&self, status: &str) -> String {
        let outputs: Vec<Value> = self
            .outputs
            .iter()
            .map(|(p, h)| json!({ "path": p, "sha256": h }))
            .collect();
        let v = json!({
            "tool": "glupoly",
            "version": env!("CARGO_PKG_VERSION"),
            "subcommand": self.subcommand,
            "inputs": self.inputs,
            "config": self.config,
            "outputs": outputs,
            "status": status,
        });
        let mut s = serde_json::to_string_pretty(&v).expect("manifest serializes");
        s.push('\n');
        s
    }
}

/// `dir/manifest.json` for directory outputs, `file.manifest.json` next to file outputs.
pub fn manifest_path(out: &Path, is_dir: bool) -> PathBuf {
    if is_dir {
        out.join("manifest.json")
    } else {
        let name = out.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        out.with_file_name(format!("{name}.manifest.json"))
    }
}
