//! Flat `key = value` run configuration.
//!
//! Lines are `key = value`; `#` starts a comment. A line `[section]` makes
//! the following keys read as `section.key` until the next header.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn err<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

#[derive(Debug, Clone, Default)]
pub struct RunConfig {
    entries: BTreeMap<String, String>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut entries = BTreeMap::new();
        let mut section = String::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                let name = name.trim();
                if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
                    return err(format!("line {}: bad section name {name:?}", lineno + 1));
                }
                section = format!("{name}.");
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return err(format!("line {}: expected key = value", lineno + 1));
            };
            let key = format!("{section}{}", k.trim());
            let value = v.trim().to_string();
            if k.trim().is_empty() || value.is_empty() {
                return err(format!("line {}: empty key or value", lineno + 1));
            }
            if entries.insert(key.clone(), value).is_some() {
                return err(format!("line {}: duplicate key {key}", lineno + 1));
            }
        }
        Ok(Self { entries })
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    /// Rejects every key outside `allowed`.
    pub fn check_keys(&self, allowed: &[&str]) -> Result<(), ConfigError> {
        let allowed: BTreeSet<&str> = allowed.iter().copied().collect();
        let unknown: Vec<&str> = self.keys().filter(|k| !allowed.contains(k)).collect();
        if !unknown.is_empty() {
            return err(format!("unknown configuration keys: {}", unknown.join(", ")));
        }
        Ok(())
    }

    pub fn str(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn require_str(&self, key: &str) -> Result<&str, ConfigError> {
        self.str(key).ok_or_else(|| ConfigError(format!("missing required key {key}")))
    }

    pub fn f64(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        self.str(key).map(|v| parse_f64(key, v)).transpose()
    }

    pub fn require_f64(&self, key: &str) -> Result<f64, ConfigError> {
        self.f64(key)?.ok_or_else(|| ConfigError(format!("missing required key {key}")))
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64, ConfigError> {
        Ok(self.f64(key)?.unwrap_or(default))
    }

    pub fn positive_or(&self, key: &str, default: f64) -> Result<f64, ConfigError> {
        let v = self.f64_or(key, default)?;
        if v <= 0.0 {
            return err(format!("{key} must be positive, got {v}"));
        }
        Ok(v)
    }

    pub fn usize_or(&self, key: &str, default: usize) -> Result<usize, ConfigError> {
        match self.str(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| ConfigError(format!("{key}: expected a non-negative integer, got {v:?}"))),
        }
    }

    pub fn list_f64(&self, key: &str) -> Result<Option<Vec<f64>>, ConfigError> {
        self.str(key).map(|v| v.split(',').map(|s| parse_f64(key, s.trim())).collect()).transpose()
    }
}

fn parse_f64(key: &str, v: &str) -> Result<f64, ConfigError> {
    match v.parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        _ => err(format!("{key}: expected a finite number, got {v:?}")),
    }
}
