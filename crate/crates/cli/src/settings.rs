//! Flat `key = value` settings shared by flags and config files.
//!
//! Keys are the long flag names (`auto-eps`, `b0`, ...); underscores are
//! accepted in files. Blank lines and lines starting with `#` are ignored.
//! Explicit flags override file values; anything left unset falls back to the
//! auto configuration or a built-in default.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use crate::error::{CliError, CliResult};

pub const KEYS: &[&str] = &[
    "problem",
    "algo",
    "algos",
    "auto-eps",
    "b0",
    "eta",
    "mu",
    "inner",
    "epochs",
    "directions",
    "batch",
    "iterations",
    "step-schedule",
    "budget",
    "gap",
    "stride",
    "resolution",
    "preset",
    "seeds",
    "out",
    "threshold",
    "trace-dir",
];

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings {
    values: BTreeMap<&'static str, String>,
}

fn known_key(raw: &str) -> Option<&'static str> {
    let key = raw.trim().replace('_', "-");
    KEYS.iter().copied().find(|k| *k == key)
}

impl Settings {
    pub fn parse_config(text: &str) -> CliResult<Self> {
        let mut settings = Settings::default();
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::Data(format!(
                    "config line {}: expected `key = value`",
                    idx + 1
                )));
            };
            let key = known_key(key)
                .ok_or_else(|| CliError::usage(format!("config line {}: unknown key `{}`", idx + 1, key.trim())))?;
            settings.values.insert(key, value.trim().to_string());
        }
        Ok(settings)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse_config(&text)
    }

    /// Set `key` when `value` is present, replacing any file value.
    pub fn set(&mut self, key: &'static str, value: Option<String>) {
        debug_assert!(KEYS.contains(&key), "unknown settings key {key}");
        if let Some(v) = value {
            self.values.insert(key, v);
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn parse<T: FromStr>(&self, key: &str) -> CliResult<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match self.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse()
                .map(Some)
                .map_err(|e| CliError::usage(format!("invalid value `{raw}` for `{key}`: {e}"))),
        }
    }

    pub fn require<T: FromStr>(&self, key: &str) -> CliResult<T>
    where
        T::Err: std::fmt::Display,
    {
        self.parse(key)?
            .ok_or_else(|| CliError::usage(format!("`{key}` is required")))
    }
}

/// Seed lists: `7`, `1,4,9` or the inclusive range `1..5`. Sorted and deduplicated.
pub fn parse_seeds(raw: &str) -> CliResult<Vec<u64>> {
    let bad = || {
        CliError::usage(format!(
            "invalid seed list `{raw}` (expected e.g. `3`, `1,2,5` or `1..5`)"
        ))
    };
    let mut seeds = Vec::new();
    for part in raw.split(',') {
        let part = part.trim();
        if let Some((lo, hi)) = part.split_once("..") {
            let lo: u64 = lo.trim().parse().map_err(|_| bad())?;
            let hi: u64 = hi.trim().parse().map_err(|_| bad())?;
            if lo > hi || hi - lo >= 100_000 {
                return Err(bad());
            }
            seeds.extend(lo..=hi);
        } else {
            seeds.push(part.parse().map_err(|_| bad())?);
        }
    }
    seeds.sort_unstable();
    seeds.dedup();
    Ok(seeds)
}
