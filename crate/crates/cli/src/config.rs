//! Layered configuration: defaults, then a JSON file, then command-line flags.

use std::fmt;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

/// Anything wrong with the configuration itself (exit code 3).
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid config: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn as_object(v: Value, what: &str) -> Result<Map<String, Value>, ConfigError> {
    match v {
        Value::Object(m) => Ok(m),
        _ => Err(ConfigError(format!("{what} must be a JSON object"))),
    }
}

/// Read a config file; it must hold a JSON object.
pub fn load_file(path: &Path) -> Result<Map<String, Value>, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
    let v: Value = serde_json::from_str(&text)
        .map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
    as_object(v, "config file")
}

/// Merge `defaults <- file <- flags` and deserialize. Unknown keys and type
/// mismatches surface as [`ConfigError`]s naming the offending key.
///
/// Flags that serialize to `null` (options not given) are ignored.
pub fn resolve<C, F>(file: Option<&Map<String, Value>>, flags: &F) -> Result<C, ConfigError>
where
    C: Serialize + DeserializeOwned + Default,
    F: Serialize,
{
    let err = |e: serde_json::Error| ConfigError(e.to_string());
    let mut merged = as_object(serde_json::to_value(C::default()).map_err(err)?, "defaults")?;
    if let Some(file) = file {
        merged.extend(file.clone());
    }
    let flags = as_object(serde_json::to_value(flags).map_err(err)?, "flags")?;
    merged.extend(flags.into_iter().filter(|(_, v)| !v.is_null()));
    serde_json::from_value(Value::Object(merged)).map_err(|e| ConfigError(e.to_string()))
}
