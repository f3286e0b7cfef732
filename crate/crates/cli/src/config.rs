//! Layered run configuration: built-in defaults, then the TOML file (top-level
//! keys first, then the subcommand's table), then command-line flags.
//!
//! ```toml
//! seed = 7
//! jobs = 4
//!
//! [select]
//! order = 4
//! max-states = 6
//! variant = "B"
//! ```
//!
//! Keys use the same kebab-case names as the flags. Unknown keys are
//! rejected so a typo cannot silently fall back to a default.

use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

/// Top-level keys shared by every subcommand.
const SHARED_KEYS: [&str; 1] = ["seed"];

/// Keys that steer execution but never change results.
pub const EXECUTION_KEYS: [&str; 1] = ["jobs"];

pub struct ConfigFile {
    root: Map<String, Value>,
}

impl ConfigFile {
    pub fn empty() -> Self {
        Self { root: Map::new() }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in config {}", path.display()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let table: toml::Table = toml::from_str(text)?;
        match serde_json::to_value(table)? {
            Value::Object(root) => Ok(Self { root }),
            _ => unreachable!("a TOML document is a table"),
        }
    }

    pub fn jobs(&self) -> Result<Option<usize>> {
        match self.root.get("jobs") {
            None => Ok(None),
            Some(v) => match v.as_u64() {
                Some(j) if j > 0 => Ok(Some(j as usize)),
                _ => bail!("`jobs` must be a positive integer"),
            },
        }
    }

    /// Merge defaults, file values and flag overrides for `section` into a
    /// resolved config. `flags` serializes with `None` for unset flags.
    pub fn resolve<C, F>(&self, section: &str, flags: &F) -> Result<C>
    where
        C: Default + Serialize + DeserializeOwned,
        F: Serialize,
    {
        let mut merged = as_object(serde_json::to_value(C::default())?);
        for key in SHARED_KEYS {
            if let Some(v) = self.root.get(key) {
                merged.insert(key.to_string(), v.clone());
            }
        }
        match self.root.get(section) {
            None => {}
            Some(Value::Object(table)) => {
                for (k, v) in table {
                    merged.insert(k.clone(), v.clone());
                }
            }
            Some(_) => bail!("config entry `{section}` must be a table"),
        }
        for (k, v) in as_object(serde_json::to_value(flags)?) {
            if !v.is_null() {
                merged.insert(k, v);
            }
        }
        serde_json::from_value(Value::Object(merged)).with_context(|| format!("invalid `{section}` configuration"))
    }

    /// Top-level keys that are neither shared, execution-only nor a known
    /// subcommand table.
    pub fn check_keys(&self, sections: &[&str]) -> Result<()> {
        for key in self.root.keys() {
            let k = key.as_str();
            if !SHARED_KEYS.contains(&k) && !EXECUTION_KEYS.contains(&k) && !sections.contains(&k) {
                bail!("unknown config key `{key}`");
            }
        }
        Ok(())
    }
}

fn as_object(v: Value) -> Map<String, Value> {
    match v {
        Value::Object(m) => m,
        _ => Map::new(),
    }
}
