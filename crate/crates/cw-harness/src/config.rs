//! Flat key-value experiment configuration with `[section]` headers.
//!
//! Grammar, per line: blank, `# comment`, `[section]`, or `key = value`.
//! Repeating a key within a section appends (used for `group`). Values are
//! whitespace-separated tokens; typed accessors parse them and report the
//! defining line on error.

use cw_core::{GroupSpec, IntervalConstants, ModelSpec};
use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("missing key `{key}` in section [{section}]")]
    MissingKey { section: String, key: String },
    #[error("line {line}: key `{key}`: {message}")]
    BadValue {
        line: usize,
        key: String,
        message: String,
    },
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Debug, Default)]
pub struct ConfigFile {
    /// section -> key -> list of (value string, line number)
    sections: BTreeMap<String, BTreeMap<String, Vec<(String, usize)>>>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut sections: BTreeMap<String, BTreeMap<String, Vec<(String, usize)>>> =
            BTreeMap::new();
        let mut current = String::from("global");
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            }
            .trim();
            if content.is_empty() {
                continue;
            }
            if let Some(name) = content.strip_prefix('[') {
                let name = name.strip_suffix(']').ok_or_else(|| ConfigError::Syntax {
                    line,
                    message: "unterminated section header".into(),
                })?;
                current = name.trim().to_string();
                sections.entry(current.clone()).or_default();
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line,
                message: format!("expected `key = value`, got `{content}`"),
            })?;
            sections
                .entry(current.clone())
                .or_default()
                .entry(key.trim().to_string())
                .or_default()
                .push((value.trim().to_string(), line));
        }
        Ok(Self { sections })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    fn entry(&self, section: &str, key: &str) -> Option<&(String, usize)> {
        self.sections.get(section)?.get(key)?.last()
    }

    /// Override a key (used for CLI flags taking precedence over the file).
    pub fn set(&mut self, section: &str, key: &str, value: &str) {
        self.sections
            .entry(section.to_string())
            .or_default()
            .insert(key.to_string(), vec![(value.to_string(), 0)]);
    }

    pub fn get_str(&self, section: &str, key: &str) -> Result<&str, ConfigError> {
        self.entry(section, key)
            .map(|(v, _)| v.as_str())
            .ok_or_else(|| ConfigError::MissingKey {
                section: section.into(),
                key: key.into(),
            })
    }

    pub fn opt_str(&self, section: &str, key: &str) -> Option<&str> {
        self.entry(section, key).map(|(v, _)| v.as_str())
    }

    pub fn get<T>(&self, section: &str, key: &str) -> Result<T, ConfigError>
    where
        T: std::str::FromStr,
        T::Err: fmt::Display,
    {
        let (value, line) = self
            .entry(section, key)
            .ok_or_else(|| ConfigError::MissingKey {
                section: section.into(),
                key: key.into(),
            })?;
        value.parse().map_err(|e: T::Err| ConfigError::BadValue {
            line: *line,
            key: key.into(),
            message: e.to_string(),
        })
    }

    pub fn opt<T>(&self, section: &str, key: &str) -> Result<Option<T>, ConfigError>
    where
        T: std::str::FromStr,
        T::Err: fmt::Display,
    {
        match self.entry(section, key) {
            None => Ok(None),
            Some(_) => self.get(section, key).map(Some),
        }
    }

    /// Whitespace-separated list value.
    pub fn get_list<T>(&self, section: &str, key: &str) -> Result<Vec<T>, ConfigError>
    where
        T: std::str::FromStr,
        T::Err: fmt::Display,
    {
        let (value, line) = self
            .entry(section, key)
            .ok_or_else(|| ConfigError::MissingKey {
                section: section.into(),
                key: key.into(),
            })?;
        value
            .split_whitespace()
            .map(|tok| {
                tok.parse().map_err(|e: T::Err| ConfigError::BadValue {
                    line: *line,
                    key: key.into(),
                    message: format!("token `{tok}`: {e}"),
                })
            })
            .collect()
    }

    pub fn opt_list<T>(&self, section: &str, key: &str) -> Result<Option<Vec<T>>, ConfigError>
    where
        T: std::str::FromStr,
        T::Err: fmt::Display,
    {
        match self.entry(section, key) {
            None => Ok(None),
            Some(_) => self.get_list(section, key).map(Some),
        }
    }

    /// All occurrences of a repeatable key, in file order.
    pub fn get_all(&self, section: &str, key: &str) -> Vec<(&str, usize)> {
        self.sections
            .get(section)
            .and_then(|s| s.get(key))
            .map(|v| v.iter().map(|(s, l)| (s.as_str(), *l)).collect())
            .unwrap_or_default()
    }

    /// Model from repeated `group = <beta> <n_pop> <k_obs>` lines.
    pub fn model(&self) -> Result<ModelSpec, ConfigError> {
        let lines = self.get_all("model", "group");
        if lines.is_empty() {
            return Err(ConfigError::MissingKey {
                section: "model".into(),
                key: "group".into(),
            });
        }
        let mut groups = Vec::new();
        for (value, line) in lines {
            let toks: Vec<&str> = value.split_whitespace().collect();
            if toks.len() != 3 {
                return Err(ConfigError::BadValue {
                    line,
                    key: "group".into(),
                    message: "expected `<beta> <n_pop> <k_obs>`".into(),
                });
            }
            let bad = |message: String| ConfigError::BadValue {
                line,
                key: "group".into(),
                message,
            };
            let beta: f64 = toks[0].parse().map_err(|e| bad(format!("beta: {e}")))?;
            let n_pop: u32 = toks[1].parse().map_err(|e| bad(format!("n_pop: {e}")))?;
            let k_obs: u32 = toks[2].parse().map_err(|e| bad(format!("k_obs: {e}")))?;
            groups.push(GroupSpec::new(beta, n_pop, k_obs).map_err(|e| bad(e.to_string()))?);
        }
        ModelSpec::new(groups).map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    /// Interval parameters: `b1`, `b2` required; constants and alpha
    /// optional (constants default to the calibrated values).
    pub fn intervals(&self) -> Result<IntervalSettings, ConfigError> {
        let defaults = IntervalConstants::default();
        Ok(IntervalSettings {
            b1: self.get("intervals", "b1")?,
            b2: self.get("intervals", "b2")?,
            constants: IntervalConstants {
                c_high: self.opt("intervals", "c_high")?.unwrap_or(defaults.c_high),
                c_low: self.opt("intervals", "c_low")?.unwrap_or(defaults.c_low),
                d_high: self.opt("intervals", "d_high")?.unwrap_or(defaults.d_high),
                d_low: self.opt("intervals", "d_low")?.unwrap_or(defaults.d_low),
            },
            alpha: self.opt_list("intervals", "alpha")?,
        })
    }

    /// Flattened `section.key = value` view embedded into every report.
    pub fn resolved(&self) -> BTreeMap<String, String> {
        let mut out = BTreeMap::new();
        for (section, keys) in &self.sections {
            for (key, values) in keys {
                if values.len() == 1 {
                    out.insert(format!("{section}.{key}"), values[0].0.clone());
                } else {
                    for (i, (v, _)) in values.iter().enumerate() {
                        out.insert(format!("{section}.{key}.{i}"), v.clone());
                    }
                }
            }
        }
        out
    }
}

/// Parsed `[intervals]` section.
#[derive(Clone, Debug)]
pub struct IntervalSettings {
    pub b1: f64,
    pub b2: f64,
    pub constants: IntervalConstants,
    pub alpha: Option<Vec<f64>>,
}
