//! Flat sectioned `key = value` documents.
//!
//! ```text
//! # comment
//! [name]
//! experiment = operator_identities
//! lambdas = 0, 0.1
//! ```

use std::collections::BTreeMap;

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct Section {
    pub name: String,
    pub line: usize,
    pub entries: BTreeMap<String, String>,
}

pub fn parse(text: &str) -> Result<Vec<Section>, CliError> {
    let err = |line: usize, msg: String| CliError::Config(format!("line {line}: {msg}"));
    let mut sections: Vec<Section> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
            continue;
        }
        if let Some(rest) = line.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| err(lineno, format!("unterminated section header `{line}`")))?
                .trim();
            if name.is_empty() {
                return Err(err(lineno, "empty section name".into()));
            }
            if sections.iter().any(|s| s.name == name) {
                return Err(err(lineno, format!("duplicate section `{name}`")));
            }
            sections.push(Section { name: name.into(), line: lineno, entries: BTreeMap::new() });
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| err(lineno, format!("expected `key = value`, got `{line}`")))?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() {
            return Err(err(lineno, "empty key".into()));
        }
        let section = sections.last_mut().ok_or_else(|| err(lineno, format!("key `{k}` outside any section")))?;
        if section.entries.insert(k.into(), v.into()).is_some() {
            return Err(err(lineno, format!("duplicate key `{k}` in [{}]", section.name)));
        }
    }
    Ok(sections)
}

/// Typed access to a section's keys; [`Params::finish`] rejects any key that
/// was never read.
#[derive(Debug)]
pub struct Params {
    section: String,
    entries: BTreeMap<String, String>,
}

impl Params {
    pub fn new(section: &str, entries: BTreeMap<String, String>) -> Self {
        Params { section: section.into(), entries }
    }

    fn bad(&self, key: &str, value: &str, want: &str) -> CliError {
        CliError::Config(format!("[{}] {key} = {value}: expected {want}", self.section))
    }

    pub fn f64(&mut self, key: &str, default: f64) -> Result<f64, CliError> {
        match self.entries.remove(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| self.bad(key, &v, "a number")),
        }
    }

    pub fn usize(&mut self, key: &str, default: usize) -> Result<usize, CliError> {
        match self.entries.remove(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| self.bad(key, &v, "a nonnegative integer")),
        }
    }

    pub fn u64(&mut self, key: &str, default: u64) -> Result<u64, CliError> {
        match self.entries.remove(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| self.bad(key, &v, "a nonnegative integer")),
        }
    }

    pub fn list(&mut self, key: &str, default: &[f64]) -> Result<Vec<f64>, CliError> {
        match self.entries.remove(key) {
            None => Ok(default.to_vec()),
            Some(v) => v
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|_| self.bad(key, &v, "a comma-separated list of numbers")),
        }
    }

    pub fn finish(self) -> Result<(), CliError> {
        match self.entries.keys().next() {
            None => Ok(()),
            Some(k) => Err(CliError::Config(format!("[{}] unknown key `{k}`", self.section))),
        }
    }
}
