//! Run manifests: the completion marker and provenance record of a command.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use crate::CliResult;

/// Provenance of one command run. The manifest is written after every data
/// file, so its presence signals a complete run; it lists exactly the files
/// the run produced. Parameters are kept as ordered strings so the record
/// is stable and diff-friendly. Duration is wall-clock and therefore the
/// one field exempt from byte-determinism.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub inputs: Vec<String>,
    pub parameters: BTreeMap<String, String>,
    pub outputs: Vec<String>,
    pub tool_version: String,
    pub duration_seconds: f64,
}

/// Collects manifest entries while a command runs, then writes the manifest
/// as the final artifact.
pub struct ManifestBuilder {
    started: Instant,
    command: String,
    inputs: Vec<String>,
    parameters: BTreeMap<String, String>,
    outputs: Vec<String>,
}

impl ManifestBuilder {
    pub fn new(command: &str) -> Self {
        Self {
            started: Instant::now(),
            command: command.to_string(),
            inputs: Vec::new(),
            parameters: BTreeMap::new(),
            outputs: Vec::new(),
        }
    }

    pub fn input(&mut self, path: &Path) {
        self.inputs.push(path.display().to_string());
    }

    pub fn param(&mut self, key: &str, value: impl ToString) {
        self.parameters.insert(key.to_string(), value.to_string());
    }

    /// Records a produced file; call once per written data file.
    pub fn output(&mut self, path: &Path) {
        self.outputs.push(path.display().to_string());
    }

    /// Writes the manifest next to the primary output (`<primary>.manifest.json`).
    pub fn write_for(self, primary_output: &Path) -> CliResult<PathBuf> {
        let mut name = primary_output.as_os_str().to_owned();
        name.push(".manifest.json");
        let path = PathBuf::from(name);
        self.write_to(&path)?;
        Ok(path)
    }

    /// Writes the manifest to an explicit path (used by directory-shaped
    /// commands).
    pub fn write_to(self, path: &Path) -> CliResult<()> {
        let manifest = RunManifest {
            command: self.command,
            inputs: self.inputs,
            parameters: self.parameters,
            outputs: self.outputs,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            duration_seconds: self.started.elapsed().as_secs_f64(),
        };
        crate::io::write_atomic(path, &crate::io::pretty_json(&manifest))
    }
}
