//! Run manifests written next to every output file.

use std::path::{Path, PathBuf};

use engel_core::bvp::ShootingOptions;
use engel_core::IntegratorConfig;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    /// Arguments after the program name; replaying them reproduces the
    /// outputs.
    pub args: Vec<String>,
    /// Resolved parameters of the run.
    pub parameters: serde_json::Value,
    pub integrator: Option<IntegratorConfig>,
    pub shooting: Option<ShootingOptions>,
    pub version: String,
    pub duration_seconds: f64,
    pub outputs: Vec<PathBuf>,
}

impl RunManifest {
    pub fn new(command: &str, args: &[String], parameters: serde_json::Value) -> Self {
        Self {
            command: command.to_string(),
            args: args.to_vec(),
            parameters,
            integrator: None,
            shooting: None,
            version: env!("CARGO_PKG_VERSION").to_string(),
            duration_seconds: 0.0,
            outputs: Vec::new(),
        }
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    }

    /// Writes `<output>.manifest.json`.
    pub fn write_beside(&self, output: &Path) -> Result<PathBuf, CliError> {
        let path = manifest_path(output);
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        std::fs::write(&path, text + "\n").map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Ok(path)
    }
}

pub fn manifest_path(output: &Path) -> PathBuf {
    let mut name = output.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    output.with_file_name(name)
}
