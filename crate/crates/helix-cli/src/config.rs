//! Key-value run configuration: `key = value` lines, `#` comments.
//! Command-line flags override file values; every effective parameter is
//! echoed into the output metadata.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};

#[derive(Debug, Default, Clone)]
pub struct ConfigMap {
    entries: BTreeMap<String, String>,
}

fn normalize(key: &str) -> String {
    key.trim().to_ascii_lowercase().replace('-', "_")
}

impl ConfigMap {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("config {}: cannot read", path.display()))?;
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("config {}: line {}: expected `key = value`", path.display(), i + 1))?;
            entries.insert(normalize(k), v.trim().to_string());
        }
        Ok(ConfigMap { entries })
    }

    /// Effective value of `key`: the flag wins, then the config file.
    pub fn resolve<T>(&self, key: &str, flag: Option<T>) -> Result<Option<T>>
    where
        T: FromStr,
        T::Err: Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.entries.get(&normalize(key)) {
            None => Ok(None),
            Some(raw) => raw
                .parse::<T>()
                .map(Some)
                .map_err(|e| anyhow!("config key `{key}`: {e}")),
        }
    }

    /// Like [`resolve`](Self::resolve) but the parameter must end up set.
    pub fn require<T>(&self, key: &str, flag: Option<T>) -> Result<T>
    where
        T: FromStr,
        T::Err: Display,
    {
        self.resolve(key, flag)?
            .ok_or_else(|| anyhow!("missing required parameter `{key}` (flag or config)"))
    }
}

/// Comma-separated ascending level list, e.g. `100,1000,10000`.
#[derive(Debug, Clone)]
pub struct LevelList(pub Vec<u32>);

impl FromStr for LevelList {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let levels: std::result::Result<Vec<u32>, _> = s
            .split(',')
            .map(|t| t.trim().parse::<u32>().map_err(|e| format!("level `{t}`: {e}")))
            .collect();
        let levels = levels?;
        if levels.is_empty() {
            return Err("empty level list".into());
        }
        Ok(LevelList(levels))
    }
}

impl Display for LevelList {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|l| l.to_string()).collect();
        write!(f, "{}", parts.join(","))
    }
}

/// Closed interval given as `lo,hi`, e.g. `-3,3`.
#[derive(Debug, Clone, Copy)]
pub struct Interval(pub f64, pub f64);

impl FromStr for Interval {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let (lo, hi) = s.split_once(',').ok_or("expected `lo,hi`")?;
        let lo: f64 = lo.trim().parse().map_err(|e| format!("lo: {e}"))?;
        let hi: f64 = hi.trim().parse().map_err(|e| format!("hi: {e}"))?;
        if lo > hi {
            return Err(format!("empty interval [{lo}, {hi}]"));
        }
        Ok(Interval(lo, hi))
    }
}

impl Display for Interval {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{},{}", self.0, self.1)
    }
}

/// Output format selector for tabular commands.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format `{other}` (csv|json)")),
        }
    }
}

impl Display for Format {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Format::Csv => write!(f, "csv"),
            Format::Json => write!(f, "json"),
        }
    }
}

/// Validate a probability-like parameter, naming it in the diagnostic.
pub fn check_range(name: &str, value: f64, lo: f64, hi: f64, lo_open: bool, hi_open: bool) -> Result<f64> {
    let low_ok = if lo_open { value > lo } else { value >= lo };
    let high_ok = if hi_open { value < hi } else { value <= hi };
    if !(low_ok && high_ok) || value.is_nan() {
        let lb = if lo_open { '(' } else { '[' };
        let hb = if hi_open { ')' } else { ']' };
        bail!("parameter `{name}` = {value} outside {lb}{lo}, {hi}{hb}");
    }
    Ok(value)
}
