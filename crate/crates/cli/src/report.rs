//! Output artifacts with a reproducibility header.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::Value;

use crate::config::RunConfig;

pub const TOOL: &str = "maxbound";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Header carried by every artifact. `timestamp` is left out of
/// `config_hash` and is the only field that differs between identical runs.
#[derive(Clone, Debug, Serialize)]
pub struct Meta {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub seed: u64,
    pub config_hash: String,
    pub config: std::collections::BTreeMap<String, String>,
    pub timestamp: u64,
}

impl Meta {
    pub fn new(command: &str, seed: u64, cfg: &RunConfig) -> Self {
        cfg.record("command", command.to_string());
        Self {
            tool: TOOL,
            version: VERSION,
            command: command.to_string(),
            seed,
            config_hash: cfg.hash(),
            config: cfg.effective(),
            timestamp: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map_or(0, |d| d.as_secs()),
        }
    }

    /// `#`-prefixed CSV preamble. No timestamp, so CSV output is
    /// reproducible byte for byte.
    fn csv_preamble(&self) -> String {
        let mut out = format!(
            "# {} {}\n# command: {}\n# seed: {}\n# config_hash: {}\n",
            self.tool, self.version, self.command, self.seed, self.config_hash
        );
        for (k, v) in &self.config {
            out.push_str(&format!("# config: {k}={v}\n"));
        }
        out
    }
}

#[derive(Debug)]
pub enum Artifact {
    Csv { name: String, body: String },
    Json { name: String, value: Value },
}

impl Artifact {
    /// CSV text: the header preamble, a header row, then the records.
    pub fn csv(name: &str, meta: &Meta, header: &[&str], rows: Vec<Vec<String>>) -> Result<Self> {
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer.write_record(header)?;
        for row in rows {
            writer.write_record(&row)?;
        }
        let table = String::from_utf8(writer.into_inner().context("flushing CSV")?)?;
        Ok(Self::Csv {
            name: format!("{name}.csv"),
            body: meta.csv_preamble() + &table,
        })
    }

    /// JSON object with `meta` first, then the fields of `body`.
    pub fn json<T: Serialize>(name: &str, meta: &Meta, body: &T) -> Result<Self> {
        let mut map = serde_json::Map::new();
        map.insert("meta".into(), serde_json::to_value(meta)?);
        match serde_json::to_value(body)? {
            Value::Object(fields) => map.extend(fields),
            other => {
                map.insert("data".into(), other);
            }
        }
        Ok(Self::Json {
            name: format!("{name}.json"),
            value: Value::Object(map),
        })
    }

    pub fn file_name(&self) -> &str {
        match self {
            Self::Csv { name, .. } | Self::Json { name, .. } => name,
        }
    }

    pub fn render(&self) -> Result<String> {
        Ok(match self {
            Self::Csv { body, .. } => body.clone(),
            Self::Json { value, .. } => serde_json::to_string_pretty(value)? + "\n",
        })
    }

    /// Writes into `dir` (created if needed) and returns the file path.
    pub fn write_to(&self, dir: &Path) -> Result<PathBuf> {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let path = dir.join(self.file_name());
        std::fs::write(&path, self.render()?)
            .with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }
}

/// Formats a float with the shortest round-trip representation.
pub fn num(x: f64) -> String {
    format!("{x}")
}

pub fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}
