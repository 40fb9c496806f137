//! Flat `key = value` configuration file. Command-line flags take
//! precedence over the file, which takes precedence over built-in defaults.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context, Result};

const PATH_KEYS: &[&str] = &["embeddings", "lexicon", "markers", "polarity", "negators", "stopwords", "inflections"];

const VALUE_KEYS: &[&str] = &[
    "seed",
    "split_fraction",
    "marker_threshold",
    "marker_min_count",
    "near_threshold",
    "svm_c",
    "svr_c",
    "svr_epsilon",
    "cnn_max_len",
    "cnn_batch_size",
    "cnn_epochs",
    "cnn_patience",
    "cnn_lr",
    "cnn_val_fraction",
];

pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_SPLIT_FRACTION: f64 = 0.85;
pub const DEFAULT_VAL_FRACTION: f64 = 0.1;

#[derive(Debug, Clone, Default)]
pub struct Config {
    values: BTreeMap<String, String>,
    origin: Option<PathBuf>,
}

impl Config {
    pub fn load(path: &Path) -> Result<Self> {
        let body = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let mut config = Self::parse(&body).with_context(|| format!("in config {}", path.display()))?;
        config.origin = Some(path.to_path_buf());
        config.validate()?;
        Ok(config)
    }

    pub fn load_optional(path: Option<&Path>) -> Result<Self> {
        path.map_or_else(|| Ok(Config::default()), Config::load)
    }

    pub fn parse(body: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (i, raw) in body.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                bail!("line {}: expected key = value", i + 1);
            };
            let key = key.trim();
            if !PATH_KEYS.contains(&key) && !VALUE_KEYS.contains(&key) {
                bail!("line {}: unknown key {key:?}", i + 1);
            }
            if values.insert(key.to_string(), value.trim().to_string()).is_some() {
                bail!("line {}: key {key:?} given twice", i + 1);
            }
        }
        Ok(Config { values, origin: None })
    }

    fn where_(&self) -> String {
        self.origin.as_ref().map_or_else(|| "config".to_string(), |p| p.display().to_string())
    }

    /// Checks ranges and that every referenced file exists. Relative paths
    /// are resolved against the working directory.
    pub fn validate(&self) -> Result<()> {
        for key in PATH_KEYS {
            if let Some(p) = self.values.get(*key) {
                if !Path::new(p).exists() {
                    bail!("{}: {key} = {p} does not exist", self.where_());
                }
            }
        }
        let unit = |key: &str, lo_open: bool| -> Result<()> {
            if let Some(v) = self.get::<f64>(key)? {
                let ok = if lo_open { v > 0.0 && v < 1.0 } else { v > 0.0 && v <= 1.0 };
                if !ok {
                    bail!("{}: {key} = {v} is out of range", self.where_());
                }
            }
            Ok(())
        };
        unit("split_fraction", true)?;
        unit("cnn_val_fraction", true)?;
        unit("marker_threshold", false)?;
        if let Some(v) = self.get::<f64>("near_threshold")? {
            if !(-1.0..=1.0).contains(&v) {
                bail!("{}: near_threshold = {v} must be in [-1, 1]", self.where_());
            }
        }
        for key in ["svm_c", "svr_c", "cnn_lr"] {
            if let Some(v) = self.get::<f64>(key)? {
                if !(v > 0.0 && v.is_finite()) {
                    bail!("{}: {key} = {v} must be positive", self.where_());
                }
            }
        }
        for key in ["marker_min_count", "cnn_batch_size", "cnn_epochs", "cnn_patience", "cnn_max_len"] {
            if self.get::<usize>(key)? == Some(0) {
                bail!("{}: {key} must be at least 1", self.where_());
            }
        }
        let _ = self.get::<u64>("seed")?;
        let _ = self.get::<f64>("svr_epsilon")?;
        Ok(())
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match self.values.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse()
                .map(Some)
                .map_err(|e| anyhow::anyhow!("{}: bad value for {key} ({raw:?}): {e}", self.where_())),
        }
    }

    pub fn path(&self, key: &str) -> Option<PathBuf> {
        self.values.get(key).map(PathBuf::from)
    }

    /// Flag, then file, then default.
    pub fn pick<T: FromStr>(&self, flag: Option<T>, key: &str, default: T) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        match flag {
            Some(v) => Ok(v),
            None => Ok(self.get(key)?.unwrap_or(default)),
        }
    }

    pub fn pick_path(&self, flag: Option<PathBuf>, key: &str) -> Option<PathBuf> {
        flag.or_else(|| self.path(key))
    }

    pub fn require_path(&self, flag: Option<PathBuf>, key: &str) -> Result<PathBuf> {
        self.pick_path(flag, key)
            .with_context(|| format!("--{} is required (or set `{key}` in the config file)", key.replace('_', "-")))
    }

    pub fn seed(&self, flag: Option<u64>) -> Result<u64> {
        self.pick(flag, "seed", DEFAULT_SEED)
    }
}
