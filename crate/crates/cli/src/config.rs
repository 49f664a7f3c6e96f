//! Run configuration: a plain `key = value` file overlaid by command-line
//! flags.
//!
//! The file path comes from `--config` or, failing that, the
//! `MAXBOUND_CONFIG` environment variable. Lines starting with `#` are
//! comments. Every value a command actually reads is recorded, with its
//! default filled in, and that record is what gets echoed and hashed.

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{Context, Result};
use sha2::{Digest, Sha256};

use crate::usage;

/// Environment variable naming the config file.
pub const CONFIG_ENV: &str = "MAXBOUND_CONFIG";

/// Every key the tool understands.
pub const KNOWN_KEYS: &[&str] = &[
    "seed",
    "grid_width",
    "n_max",
    "c1",
    "p",
    "out",
    "format",
    "suite",
    "functions",
    "points",
    "max_refinements",
    "pieces",
    "iterations",
    "tol",
    "t_min",
    "t_max",
    "t_points",
];

#[derive(Debug, Default)]
pub struct RunConfig {
    raw: BTreeMap<String, String>,
    used: RefCell<BTreeMap<String, String>>,
}

impl RunConfig {
    /// Parses `key = value` lines.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return usage(format!(
                    "config line {}: expected key = value, got {line:?}",
                    lineno + 1
                ));
            };
            if let Err(e) = cfg.set(key.trim(), value.trim()) {
                return usage(format!("config line {}: {e}", lineno + 1));
            }
        }
        Ok(cfg)
    }

    /// Reads the file named by `explicit`, else by `MAXBOUND_CONFIG`, else
    /// starts empty.
    pub fn load(explicit: Option<&Path>) -> Result<Self> {
        let path: Option<PathBuf> = match explicit {
            Some(p) => Some(p.to_path_buf()),
            None => std::env::var_os(CONFIG_ENV)
                .filter(|v| !v.is_empty())
                .map(PathBuf::from),
        };
        match path {
            Some(path) => {
                let text = std::fs::read_to_string(&path)
                    .with_context(|| format!("reading config file {}", path.display()))?;
                Self::parse(&text)
            }
            None => Ok(Self::default()),
        }
    }

    /// Sets one key, replacing any earlier value. Keys may use `-` or `_`.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.replace('-', "_");
        if !KNOWN_KEYS.contains(&key.as_str()) {
            return usage(format!("unknown config key {key:?}"));
        }
        self.raw.insert(key, value.to_string());
        Ok(())
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.raw.get(key).map(String::as_str)
    }

    /// Typed value with a default; the effective value is recorded.
    pub fn get<T: FromStr + ToString>(&self, key: &str, default: T) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        let value = match self.raw.get(key) {
            Some(s) => match s.parse::<T>() {
                Ok(v) => v,
                Err(e) => return usage(format!("invalid value for {key}: {s:?} ({e})")),
            },
            None => default,
        };
        self.record(key, value.to_string());
        Ok(value)
    }

    /// Comma-separated list with a default.
    pub fn get_list<T: FromStr + ToString + Clone>(
        &self,
        key: &str,
        default: &[T],
    ) -> Result<Vec<T>>
    where
        T::Err: std::fmt::Display,
    {
        let values = match self.raw.get(key) {
            Some(s) => s
                .split(',')
                .map(str::trim)
                .filter(|x| !x.is_empty())
                .map(|x| {
                    x.parse::<T>()
                        .or_else(|e| usage(format!("invalid value in {key}: {x:?} ({e})")))
                })
                .collect::<Result<Vec<T>>>()?,
            None => default.to_vec(),
        };
        self.record(
            key,
            values
                .iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>()
                .join(","),
        );
        Ok(values)
    }

    /// Records a value that is part of a run's identity but not read
    /// through [`RunConfig::get`].
    pub fn record(&self, key: &str, value: String) {
        self.used.borrow_mut().insert(key.to_string(), value);
    }

    /// The values read so far, sorted by key.
    pub fn effective(&self) -> BTreeMap<String, String> {
        self.used.borrow().clone()
    }

    /// SHA-256 over the sorted `key=value` lines of the effective values.
    pub fn hash(&self) -> String {
        let mut hasher = Sha256::new();
        for (k, v) in self.used.borrow().iter() {
            hasher.update(k.as_bytes());
            hasher.update(b"=");
            hasher.update(v.as_bytes());
            hasher.update(b"\n");
        }
        format!("{:x}", hasher.finalize())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_whitespace() {
        let cfg = RunConfig::parse("# hello\n seed = 7 \n\np=1.5, 2\n").unwrap();
        assert_eq!(cfg.get("seed", 42u64).unwrap(), 7);
        assert_eq!(cfg.get_list("p", &[3.0f64]).unwrap(), vec![1.5, 2.0]);
    }

    #[test]
    fn later_values_override() {
        let mut cfg = RunConfig::parse("seed=1\n").unwrap();
        cfg.set("seed", "9").unwrap();
        assert_eq!(cfg.get("seed", 0u64).unwrap(), 9);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_lines() {
        assert!(RunConfig::parse("colour=blue").is_err());
        assert!(RunConfig::parse("seed").is_err());
        let cfg = RunConfig::parse("seed=abc").unwrap();
        assert!(cfg.get("seed", 1u64).is_err());
    }

    #[test]
    fn dashes_are_accepted_in_keys() {
        let cfg = RunConfig::parse("n-max = 12").unwrap();
        assert_eq!(cfg.get("n_max", 1usize).unwrap(), 12);
    }

    #[test]
    fn hash_depends_only_on_effective_values() {
        let a = RunConfig::parse("seed=5\ntol=1e-3").unwrap();
        let b = RunConfig::parse("seed=5").unwrap();
        a.get("seed", 0u64).unwrap();
        b.get("seed", 0u64).unwrap();
        assert_eq!(a.hash(), b.hash());
        let c = RunConfig::parse("seed=6").unwrap();
        c.get("seed", 0u64).unwrap();
        assert_ne!(a.hash(), c.hash());
    }
}
