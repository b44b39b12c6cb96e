//! Run configuration: defaults, optional JSON config file, CLI overrides.
//! The effective configuration is echoed into every output's metadata.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Contents of `--config <path>`; every field is optional so the file can
/// pin just the knobs it cares about.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub format: Option<Format>,
    pub limit_dp_extended: Option<bool>,
}

/// Fully resolved configuration.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct RunConfig {
    pub seed: u64,
    pub workers: usize,
    pub format: Format,
    pub limit_dp_extended: bool,
}

impl RunConfig {
    pub fn resolve(
        file: Option<&Path>,
        seed: Option<u64>,
        workers: Option<usize>,
        format: Option<Format>,
        extended_dp: bool,
    ) -> Result<Self, CliError> {
        let from_file = match file {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| {
                    CliError::Io(format!("cannot read config {}: {e}", path.display()))
                })?;
                serde_json::from_str::<ConfigFile>(&text).map_err(|e| {
                    CliError::Usage(format!("invalid config {}: {e}", path.display()))
                })?
            }
            None => ConfigFile::default(),
        };
        let workers = workers
            .or(from_file.workers)
            .unwrap_or_else(|| {
                std::thread::available_parallelism()
                    .map(|n| n.get())
                    .unwrap_or(1)
            })
            .max(1);
        Ok(RunConfig {
            seed: seed.or(from_file.seed).unwrap_or(0),
            workers,
            format: format.or(from_file.format).unwrap_or(Format::Csv),
            limit_dp_extended: extended_dp || from_file.limit_dp_extended.unwrap_or(false),
        })
    }

    pub fn format_name(&self) -> &'static str {
        match self.format {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}
