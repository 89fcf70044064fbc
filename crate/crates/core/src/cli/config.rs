//! Flat `key = value` system configuration.

use std::path::Path;

use num_rational::Ratio;
use thiserror::Error;

use crate::reliability::StorageSystemParams;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("reading config {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("config line {line}: expected key = value, got {text:?}")]
    Syntax { line: usize, text: String },
    #[error("config line {line}: unknown key {key:?}")]
    UnknownKey { line: usize, key: String },
    #[error("config line {line}: {key} = {value:?} is not a number")]
    InvalidValue { line: usize, key: String, value: String },
    #[error("config line {line}: duplicate key {key:?}")]
    DuplicateKey { line: usize, key: String },
    #[error("invalid system parameters: {0}")]
    Params(String),
    #[error("rate must be a fraction p/q strictly between 0 and 1, got {0:?}")]
    InvalidRate(String),
    #[error("{0}")]
    InvalidArgument(String),
}

/// Parses a config file. Keys: `C`, `B`, `N_disk`, `S`, `r_node`, `T_t`, `mttf`.
///
/// Sizes are bytes, `r_node` is bits per second, `T_t` and `mttf` are seconds.
/// Missing keys keep their default cluster values; `#` starts a comment.
pub fn parse_config(text: &str) -> Result<StorageSystemParams, ConfigError> {
    let mut params = StorageSystemParams::reference_cluster(1.0);
    let mut seen = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let Some((key, value)) = body.split_once('=') else {
            return Err(ConfigError::Syntax { line, text: raw.to_string() });
        };
        let (key, value) = (key.trim(), value.trim());
        if seen.contains(&key) {
            return Err(ConfigError::DuplicateKey { line, key: key.into() });
        }
        seen.push(key);
        let number = || {
            value.parse::<f64>().map_err(|_| ConfigError::InvalidValue {
                line,
                key: key.into(),
                value: value.into(),
            })
        };
        match key {
            "C" => params.total_data = number()?,
            "B" => params.block_size = number()?,
            "N_disk" => {
                params.disk_count = value.parse().map_err(|_| ConfigError::InvalidValue {
                    line,
                    key: key.into(),
                    value: value.into(),
                })?
            }
            "S" => params.disk_capacity = number()?,
            "r_node" => params.node_bandwidth = number()?,
            "T_t" => params.trigger_time = number()?,
            "mttf" => params.mttf = number()?,
            _ => return Err(ConfigError::UnknownKey { line, key: key.into() }),
        }
    }
    params.validate().map_err(|e| ConfigError::Params(e.to_string()))?;
    Ok(params)
}

pub fn load_config(path: &Path) -> Result<StorageSystemParams, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
    parse_config(&text)
}

/// Parses `p/q` with `0 < p/q < 1`. Decimal notation is rejected.
pub fn parse_rate(s: &str) -> Result<Ratio<u64>, ConfigError> {
    let bad = || ConfigError::InvalidRate(s.to_string());
    let (p, q) = s.trim().split_once('/').ok_or_else(bad)?;
    let p: u64 = p.trim().parse().map_err(|_| bad())?;
    let q: u64 = q.trim().parse().map_err(|_| bad())?;
    if q == 0 || p == 0 || p >= q {
        return Err(bad());
    }
    Ok(Ratio::new(p, q))
}
