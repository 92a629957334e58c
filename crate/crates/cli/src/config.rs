//! Flat `key = value` run configuration.
//!
//! Keys are the long flag names (`selection-offset`, `n-fft`, ...); `_` and
//! `-` are interchangeable. `#` and `;` start comments, `[section]` lines are
//! ignored. Command-line flags override file values.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::str::FromStr;

use serde_json::{Map, Value};

use crate::CliError;

#[derive(Debug, Default)]
pub struct ConfigFile {
    entries: BTreeMap<String, String>,
}

fn normalize(key: &str) -> String {
    key.trim().to_ascii_lowercase().replace('_', "-")
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut entries = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split(['#', ';']).next().unwrap_or("").trim();
            if line.is_empty() || (line.starts_with('[') && line.ends_with(']')) {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Usage(format!("config line {}: expected key = value", lineno + 1))
            })?;
            entries.insert(normalize(key), value.trim().to_string());
        }
        Ok(Self { entries })
    }

    /// Removes and parses `key`.
    pub fn take<T>(&mut self, key: &str) -> Result<Option<T>, CliError>
    where
        T: FromStr,
        T::Err: Display,
    {
        match self.entries.remove(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse()
                .map(Some)
                .map_err(|e| CliError::Usage(format!("config key {key}: {e}"))),
        }
    }

    /// Fails on keys nobody consumed.
    pub fn finish(self) -> Result<(), CliError> {
        match self.entries.keys().next() {
            None => Ok(()),
            Some(key) => Err(CliError::Usage(format!("unknown config key {key:?}"))),
        }
    }
}

/// Flag value, else file value, else default.
pub fn resolve<T>(
    flag: Option<T>,
    file: &mut ConfigFile,
    key: &str,
    default: T,
) -> Result<T, CliError>
where
    T: FromStr,
    T::Err: Display,
{
    let from_file = file.take(key)?;
    Ok(flag.or(from_file).unwrap_or(default))
}

pub fn resolve_opt<T>(
    flag: Option<T>,
    file: &mut ConfigFile,
    key: &str,
) -> Result<Option<T>, CliError>
where
    T: FromStr,
    T::Err: Display,
{
    let from_file = file.take(key)?;
    Ok(flag.or(from_file))
}

/// The fully resolved parameters of a run, in insertion order. Written next
/// to the outputs so a run can be replayed with `--config`.
#[derive(Debug, Default, Clone)]
pub struct Resolved {
    entries: Vec<(String, Value)>,
}

impl Resolved {
    pub fn new(command: &str) -> Self {
        let mut r = Self::default();
        r.set("command", command);
        r
    }

    pub fn set(&mut self, key: &str, value: impl Into<Value>) {
        self.entries.push((key.to_string(), value.into()));
    }

    pub fn to_ini(&self) -> String {
        self.entries
            .iter()
            .map(|(k, v)| match v {
                Value::String(s) => format!("{k} = {s}\n"),
                other => format!("{k} = {other}\n"),
            })
            .collect()
    }

    pub fn to_json(&self) -> Value {
        Value::Object(self.entries.iter().cloned().collect::<Map<_, _>>())
    }
}
