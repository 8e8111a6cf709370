//! Flat TOML configuration with one table per command. Keys are the long
//! flag names with `-` replaced by `_`; flags given on the command line win.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::{CliError, CliResult};

pub fn load(path: &Path) -> CliResult<toml::Table> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
    text.parse::<toml::Table>().map_err(|e| CliError::config(format!("{}: {e}", path.display())))
}

/// Overlays the non-empty `flags` on the `section` table of `file`.
pub fn merge<T: Serialize + DeserializeOwned>(file: Option<&toml::Table>, section: &str, flags: &T) -> CliResult<T> {
    let Value::Object(flag_map) = serde_json::to_value(flags).map_err(|e| CliError::config(e.to_string()))? else {
        return Err(CliError::config("flags must serialize to a table"));
    };
    let mut merged = Map::new();
    if let Some(table) = file.and_then(|f| f.get(section)) {
        let toml::Value::Table(table) = table else {
            return Err(CliError::config(format!("config entry [{section}] must be a table")));
        };
        for (key, value) in table {
            if !flag_map.contains_key(key) {
                let known: Vec<&str> = flag_map.keys().map(String::as_str).collect();
                return Err(CliError::config(format!("unknown key '{key}' in [{section}]; expected one of {}", known.join(", "))));
            }
            let v = serde_json::to_value(value).map_err(|e| CliError::config(e.to_string()))?;
            merged.insert(key.clone(), v);
        }
    }
    for (key, value) in flag_map {
        if !value.is_null() {
            merged.insert(key, value);
        }
    }
    serde_json::from_value(Value::Object(merged)).map_err(|e| CliError::config(format!("[{section}]: {e}")))
}
