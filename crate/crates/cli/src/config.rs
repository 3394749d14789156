//! Config precedence: command-line flags, then the `--config` TOML file,
//! then built-in defaults.
//!
//! ```toml
//! [sampling]
//! overlap = 0.25
//!
//! [postprocess]
//! threshold = 0.8
//! ```

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{CliError, Result};

pub const SECTIONS: [&str; 4] = ["sim", "sampling", "postprocess", "pseudo"];

#[derive(Clone, Debug, Default, PartialEq)]
pub struct FileConfig {
    table: toml::Table,
}

impl FileConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let table: toml::Table = text.parse().map_err(|e| CliError::config(format!("config file: {e}")))?;
        for (key, value) in &table {
            if !SECTIONS.contains(&key.as_str()) {
                return Err(CliError::config(format!("config file: unknown section [{key}], expected one of {SECTIONS:?}")));
            }
            if !value.is_table() {
                return Err(CliError::config(format!("config file: [{key}] must be a table")));
            }
        }
        Ok(FileConfig { table })
    }

    pub fn load(path: Option<&Path>) -> Result<Self> {
        match path {
            None => Ok(FileConfig::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| CliError::io(p, e))?;
                Self::parse(&text)
            }
        }
    }

    /// Overlays section `name` onto `base`. Unknown keys are rejected.
    pub fn layer<T: Serialize + DeserializeOwned>(&self, name: &str, base: T) -> Result<T> {
        let Some(section) = self.table.get(name).and_then(toml::Value::as_table) else {
            return Ok(base);
        };
        let mut merged = toml::Table::try_from(&base).map_err(CliError::config)?;
        for (k, v) in section {
            merged.insert(k.clone(), v.clone());
        }
        toml::Value::Table(merged).try_into().map_err(|e| CliError::config(format!("config file [{name}]: {e}")))
    }
}

/// Overwrites `target` when a flag was given.
pub fn flag<T>(target: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *target = v;
    }
}
