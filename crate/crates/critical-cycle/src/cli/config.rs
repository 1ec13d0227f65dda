//! Plain-text key-value run configuration with flag overrides.
//!
//! A config file holds `key = value` lines (`#` starts a comment). Values are
//! scalars, comma-separated lists, or `logspace(start, stop, count)` grids.
//! Flags override file entries; the resolved map is what gets hashed into the
//! output metadata, so a run is reproducible from its artifact alone.

use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

/// Resolved configuration: defaults, then file entries, then flag overrides.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub subcommand: &'static str,
    entries: BTreeMap<String, String>,
}

impl RunConfig {
    pub fn new(
        subcommand: &'static str,
        defaults: &[(&str, &str)],
        file: Option<&Path>,
        overrides: &[(&str, String)],
    ) -> Result<Self, ConfigError> {
        let mut entries: BTreeMap<String, String> = defaults
            .iter()
            .map(|&(k, v)| (k.to_string(), v.to_string()))
            .collect();
        if let Some(path) = file {
            let text = std::fs::read_to_string(path)
                .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
            for (lineno, raw) in text.lines().enumerate() {
                let line = raw.split('#').next().unwrap_or("").trim();
                if line.is_empty() {
                    continue;
                }
                let (key, value) = line.split_once('=').ok_or_else(|| {
                    ConfigError(format!(
                        "{}:{}: expected `key = value`, got `{raw}`",
                        path.display(),
                        lineno + 1
                    ))
                })?;
                let key = key.trim();
                if !entries.contains_key(key) {
                    return Err(ConfigError(format!(
                        "{}:{}: unknown key `{key}` for subcommand `{subcommand}`",
                        path.display(),
                        lineno + 1
                    )));
                }
                entries.insert(key.to_string(), value.trim().to_string());
            }
        }
        for (key, value) in overrides {
            entries.insert(key.to_string(), value.clone());
        }
        Ok(RunConfig {
            subcommand,
            entries,
        })
    }

    pub fn get(&self, key: &str) -> &str {
        self.entries
            .get(key)
            .unwrap_or_else(|| panic!("key `{key}` missing from defaults"))
    }

    pub fn f64(&self, key: &str) -> Result<f64, ConfigError> {
        parse_f64(self.get(key)).map_err(|e| ConfigError(format!("key `{key}`: {e}")))
    }

    pub fn usize(&self, key: &str) -> Result<usize, ConfigError> {
        self.get(key)
            .parse::<usize>()
            .map_err(|e| ConfigError(format!("key `{key}`: {e}")))
    }

    pub fn format(&self) -> Result<OutputFormat, ConfigError> {
        match self.get("format") {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(ConfigError(format!(
                "key `format`: `{other}` is not one of csv, json"
            ))),
        }
    }

    /// Parse a comma list or `logspace(start, stop, count)` into a grid.
    pub fn f64_list(&self, key: &str) -> Result<Vec<f64>, ConfigError> {
        let raw = self.get(key);
        let values = parse_f64_values(raw).map_err(|e| ConfigError(format!("key `{key}`: {e}")))?;
        if values.is_empty() {
            return Err(ConfigError(format!("key `{key}`: empty range")));
        }
        Ok(values)
    }

    /// SHA-256 over the canonical resolved entries that define the physics;
    /// `out` and `workers` are excluded so reruns and worker counts cannot
    /// perturb the artifact bytes.
    pub fn hash(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.subcommand.as_bytes());
        hasher.update(b"\n");
        for (k, v) in &self.entries {
            if k == "out" || k == "workers" {
                continue;
            }
            hasher.update(k.as_bytes());
            hasher.update(b"=");
            hasher.update(v.as_bytes());
            hasher.update(b"\n");
        }
        let digest = hasher.finalize();
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

fn parse_f64(raw: &str) -> Result<f64, String> {
    match raw {
        "inf" => Ok(f64::INFINITY),
        _ => raw
            .parse::<f64>()
            .map_err(|e| format!("`{raw}` is not a number: {e}")),
    }
}

fn parse_f64_values(raw: &str) -> Result<Vec<f64>, String> {
    let raw = raw.trim();
    if let Some(body) = raw
        .strip_prefix("logspace(")
        .and_then(|s| s.strip_suffix(')'))
    {
        let parts: Vec<&str> = body.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(format!("`{raw}`: logspace wants (start, stop, count)"));
        }
        let start = parse_f64(parts[0])?;
        let stop = parse_f64(parts[1])?;
        let count: usize = parts[2]
            .parse()
            .map_err(|e| format!("`{raw}`: bad count: {e}"))?;
        if !(start > 0.0 && stop > start && count >= 2) {
            return Err(format!(
                "`{raw}`: need 0 < start < stop and count >= 2"
            ));
        }
        let (l0, l1) = (start.ln(), stop.ln());
        return Ok((0..count)
            .map(|i| (l0 + (l1 - l0) * i as f64 / (count - 1) as f64).exp())
            .collect());
    }
    raw.split(',').map(|p| parse_f64(p.trim())).collect()
}
