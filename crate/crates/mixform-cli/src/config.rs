//! Fail-closed `key = value` configuration files.
//!
//! Every run is driven by a flat text config: one `key = value` per line,
//! `#` comments, blank lines ignored, and a mandatory
//! `schema = mixform-config-v1` line. Unknown keys are rejected instead of
//! silently ignored, so a typo cannot fall back to a default.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use mixform::{Error, Result};

/// The one schema tag this build understands.
pub const SCHEMA: &str = "mixform-config-v1";

/// Parsed configuration restricted to a command's allowed key set.
#[derive(Debug)]
pub struct Config {
    map: BTreeMap<String, String>,
}

impl Config {
    pub fn load(path: &Path, allowed: &[&str]) -> Result<Config> {
        let text = std::fs::read_to_string(path)?;
        Config::parse(&text, allowed)
    }

    pub fn parse(text: &str, allowed: &[&str]) -> Result<Config> {
        let mut map = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::ConfigError {
                detail: format!("line {}: expected 'key = value', got '{}'", idx + 1, line),
            })?;
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if key != "schema" && !allowed.contains(&key.as_str()) {
                return Err(Error::ConfigError {
                    detail: format!(
                        "line {}: unknown key '{}'; allowed keys: {}",
                        idx + 1,
                        key,
                        allowed.join(", ")
                    ),
                });
            }
            if map.insert(key.clone(), value).is_some() {
                return Err(Error::ConfigError {
                    detail: format!("line {}: duplicate key '{}'", idx + 1, key),
                });
            }
        }
        match map.get("schema").map(String::as_str) {
            Some(SCHEMA) => {}
            Some(other) => {
                return Err(Error::ConfigError {
                    detail: format!("unsupported schema '{}'; expected '{}'", other, SCHEMA),
                })
            }
            None => {
                return Err(Error::ConfigError {
                    detail: format!("missing 'schema = {}' line", SCHEMA),
                })
            }
        }
        Ok(Config { map })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.map.get(key).map(String::as_str)
    }

    pub fn require(&self, key: &str) -> Result<&str> {
        self.get(key).ok_or_else(|| Error::ConfigError {
            detail: format!("missing required key '{}'", key),
        })
    }

    /// Typed value, or the default when the key is absent.
    pub fn get_or<T: FromStr>(&self, key: &str, default: T) -> Result<T> {
        match self.get(key) {
            None => Ok(default),
            Some(s) => s.parse().map_err(|_| Error::ConfigError {
                detail: format!("key '{}': cannot parse value '{}'", key, s),
            }),
        }
    }
}
