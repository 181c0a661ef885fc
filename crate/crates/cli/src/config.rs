//! Flat key-value run configuration with `[section]` headers.
//!
//! Keys are addressed as `section.key`. Values are bare strings; `#` starts
//! a comment. Every recognized key is documented in `docs/config.md`.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use anyhow::{bail, Context, Result};

pub struct Config {
    values: BTreeMap<String, String>,
    path: String,
}

impl Config {
    pub fn load(path: &Path) -> Result<Config> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        let mut values = BTreeMap::new();
        let mut section = String::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
                section = name.trim().to_string();
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                bail!(
                    "{}:{}: expected `key = value` or `[section]`, got {raw:?}",
                    path.display(),
                    lineno + 1
                );
            };
            let full = if section.is_empty() {
                key.trim().to_string()
            } else {
                format!("{section}.{}", key.trim())
            };
            values.insert(full, value.trim().to_string());
        }
        Ok(Config {
            values,
            path: path.display().to_string(),
        })
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn require(&self, key: &str) -> Result<&str> {
        self.raw(key)
            .with_context(|| format!("{}: missing required key `{key}`", self.path))
    }

    pub fn get<T>(&self, key: &str, default: T) -> Result<T>
    where
        T: FromStr,
        T::Err: Display,
    {
        match self.raw(key) {
            None => Ok(default),
            Some(s) => s
                .parse()
                .map_err(|e| anyhow::anyhow!("{}: key `{key}` = {s:?}: {e}", self.path)),
        }
    }

    /// Parses a truncation list: either comma-separated values or an
    /// inclusive range `lo..hi`.
    pub fn get_list(&self, key: &str, default: &[usize]) -> Result<Vec<usize>> {
        let Some(s) = self.raw(key) else {
            return Ok(default.to_vec());
        };
        if let Some((lo, hi)) = s.split_once("..") {
            let lo: usize = lo.trim().parse().context("range start")?;
            let hi: usize = hi.trim().parse().context("range end")?;
            if hi < lo {
                bail!("{}: key `{key}`: empty range {s:?}", self.path);
            }
            return Ok((lo..=hi).collect());
        }
        s.split(',')
            .map(|t| {
                t.trim()
                    .parse()
                    .map_err(|e| anyhow::anyhow!("{}: key `{key}` item {t:?}: {e}", self.path))
            })
            .collect()
    }
}
