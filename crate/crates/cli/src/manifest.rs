//! Run manifests: a small JSON record written next to each subcommand's
//! primary output, after every other file. Its presence marks a completed
//! run, and downstream commands can read parameters (like the train/test
//! split boundary) back out of it.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub subcommand: String,
    pub inputs: BTreeMap<String, String>,
    pub outputs: BTreeMap<String, String>,
    pub params: BTreeMap<String, String>,
}

/// `<primary output>.manifest.json`
pub fn manifest_path(primary_output: &Path) -> PathBuf {
    let mut name = primary_output.as_os_str().to_os_string();
    name.push(".manifest.json");
    PathBuf::from(name)
}

impl RunManifest {
    pub fn new(subcommand: &str) -> Self {
        RunManifest {
            tool: "radarcal".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            subcommand: subcommand.into(),
            inputs: BTreeMap::new(),
            outputs: BTreeMap::new(),
            params: BTreeMap::new(),
        }
    }

    pub fn input(mut self, role: &str, path: &Path) -> Self {
        self.inputs.insert(role.into(), path.display().to_string());
        self
    }

    pub fn output(mut self, role: &str, path: &Path) -> Self {
        self.outputs.insert(role.into(), path.display().to_string());
        self
    }

    pub fn param(mut self, key: &str, value: impl ToString) -> Self {
        self.params.insert(key.into(), value.to_string());
        self
    }

    /// Writes the manifest next to the primary output, listing itself among
    /// the outputs.
    pub fn write_for(mut self, primary_output: &Path) -> Result<PathBuf, CliError> {
        let path = manifest_path(primary_output);
        self.outputs
            .insert("manifest".into(), path.display().to_string());
        let mut json = serde_json::to_string_pretty(&self).expect("manifest serializes");
        json.push('\n');
        std::fs::write(&path, json)
            .map_err(|e| CliError::Core(radarcal_core::Error::io(&path, e)))?;
        Ok(path)
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Core(radarcal_core::Error::io(path, e)))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("malformed manifest {}: {e}", path.display())))
    }
}
