//! Flat `dotted.key = value` text format.
//!
//! One entry per line, `#` starts a comment line, blank lines are ignored.
//! Keys are lowercase words joined by dots. Values are taken verbatim (trimmed)
//! and typed later against the schema.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::CliError;

/// Raw value with the line it came from (0 for values set programmatically).
#[derive(Clone, Debug, PartialEq)]
pub struct Entry {
    pub value: String,
    pub line: usize,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Config {
    pub source: String,
    entries: BTreeMap<String, Entry>,
}

fn valid_key(key: &str) -> bool {
    !key.is_empty()
        && key.split('.').all(|part| {
            !part.is_empty() && part.chars().all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
        })
}

impl Config {
    /// Parses `text`; `source` names the input in error messages.
    pub fn parse(text: &str, source: &str) -> Result<Config, CliError> {
        let mut cfg = Config { source: source.to_string(), entries: BTreeMap::new() };
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let Some((key, value)) = trimmed.split_once('=') else {
                return Err(cfg.error(line, format!("expected `key = value`, found `{trimmed}`")));
            };
            let key = key.trim();
            if !valid_key(key) {
                return Err(cfg.error(line, format!("malformed key `{key}`")));
            }
            if let Some(prev) = cfg.entries.get(key) {
                return Err(cfg.error(line, format!("duplicate key `{key}` (first set on line {})", prev.line)));
            }
            cfg.entries.insert(key.to_string(), Entry { value: value.trim().to_string(), line });
        }
        Ok(cfg)
    }

    pub fn error(&self, line: usize, message: impl Into<String>) -> CliError {
        CliError::Config { file: self.source.clone(), line, message: message.into() }
    }

    pub fn get(&self, key: &str) -> Option<&Entry> {
        self.entries.get(key)
    }

    /// Inserts or replaces an entry.
    pub fn set(&mut self, key: &str, value: impl fmt::Display) -> Result<(), CliError> {
        if !valid_key(key) {
            return Err(self.error(0, format!("malformed key `{key}`")));
        }
        self.entries.insert(key.to_string(), Entry { value: value.to_string(), line: 0 });
        Ok(())
    }

    pub fn remove(&mut self, key: &str) -> Option<Entry> {
        self.entries.remove(key)
    }

    pub fn entries(&self) -> impl Iterator<Item = (&String, &Entry)> {
        self.entries.iter()
    }

    /// Keys below `prefix.`, with the prefix stripped.
    pub fn section<'a>(&'a self, prefix: &'a str) -> impl Iterator<Item = (&'a str, &'a Entry)> + 'a {
        self.entries.iter().filter_map(move |(k, e)| {
            k.strip_prefix(prefix).and_then(|rest| rest.strip_prefix('.')).map(|rest| (rest, e))
        })
    }
}

impl fmt::Display for Config {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, e) in &self.entries {
            writeln!(f, "{k} = {}", e.value)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_anchors_errors() {
        let cfg = Config::parse("# c\n\na.b = 1\nc = x y\n", "t").unwrap();
        assert_eq!(cfg.get("a.b").unwrap().value, "1");
        assert_eq!(cfg.get("c").unwrap().line, 4);
        for (text, line) in [("a = 1\nB = 2\n", 2), ("a = 1\na = 2\n", 2), ("x\n", 1), ("a..b = 1", 1)] {
            match Config::parse(text, "t") {
                Err(CliError::Config { line: l, .. }) => assert_eq!(l, line, "{text:?}"),
                other => panic!("{text:?}: {other:?}"),
            }
        }
    }
}
