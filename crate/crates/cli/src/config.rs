//! Flat key=value configuration files for simulation campaigns.
//!
//! Recognized keys: `p0`, `p_r` (comma-separated list), `batch`, `cap`,
//! `alpha`, `n_draws`, `method`, `n_trials`, `seed`, `adaptive_h`. Only
//! `p0` and `p_r` are required; the rest fall back to the engine defaults.
//! Blank lines and lines starting with `#` are ignored.

use std::fmt::Display;
use std::str::FromStr;

use seqab_core::engine::{ConfigError, ExperimentConfig, Method};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigFileError {
    #[error("line {0}: expected key=value")]
    BadLine(usize),
    #[error("unknown config key '{0}'")]
    UnknownKey(String),
    #[error("duplicate config key '{0}'")]
    DuplicateKey(String),
    #[error("config key '{key}': {message}")]
    BadValue { key: String, message: String },
    #[error("missing required config key '{0}'")]
    MissingKey(&'static str),
    #[error(transparent)]
    Invalid(#[from] ConfigError),
}

fn parse_value<T>(key: &str, value: &str) -> Result<T, ConfigFileError>
where
    T: FromStr,
    T::Err: Display,
{
    value.parse().map_err(|err: T::Err| ConfigFileError::BadValue {
        key: key.to_string(),
        message: err.to_string(),
    })
}

fn store<T>(slot: &mut Option<T>, key: &str, value: T) -> Result<(), ConfigFileError> {
    if slot.is_some() {
        return Err(ConfigFileError::DuplicateKey(key.to_string()));
    }
    *slot = Some(value);
    Ok(())
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigFileError> {
    let mut p0 = None;
    let mut p_r: Option<Vec<f64>> = None;
    let mut batch = None;
    let mut cap = None;
    let mut alpha = None;
    let mut n_draws = None;
    let mut method: Option<Method> = None;
    let mut n_trials = None;
    let mut seed = None;
    let mut adaptive_h = None;

    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or(ConfigFileError::BadLine(idx + 1))?;
        let key = key.trim();
        let value = value.trim();
        match key {
            "p0" => store(&mut p0, key, parse_value::<f64>(key, value)?)?,
            "p_r" => {
                let rates = value
                    .split(',')
                    .map(|item| parse_value::<f64>(key, item.trim()))
                    .collect::<Result<Vec<f64>, _>>()?;
                store(&mut p_r, key, rates)?;
            }
            "batch" => store(&mut batch, key, parse_value::<u64>(key, value)?)?,
            "cap" => store(&mut cap, key, parse_value::<u64>(key, value)?)?,
            "alpha" => store(&mut alpha, key, parse_value::<f64>(key, value)?)?,
            "n_draws" => store(&mut n_draws, key, parse_value::<usize>(key, value)?)?,
            "method" => {
                let parsed = Method::from_str(value).map_err(|message| {
                    ConfigFileError::BadValue { key: key.to_string(), message }
                })?;
                store(&mut method, key, parsed)?;
            }
            "n_trials" => store(&mut n_trials, key, parse_value::<usize>(key, value)?)?,
            "seed" => store(&mut seed, key, parse_value::<u64>(key, value)?)?,
            "adaptive_h" => store(&mut adaptive_h, key, parse_value::<f64>(key, value)?)?,
            other => return Err(ConfigFileError::UnknownKey(other.to_string())),
        }
    }

    let mut config = ExperimentConfig::new(
        p0.ok_or(ConfigFileError::MissingKey("p0"))?,
        p_r.ok_or(ConfigFileError::MissingKey("p_r"))?,
    );
    if let Some(batch) = batch {
        config.batch = batch;
    }
    if let Some(cap) = cap {
        config.cap = cap;
    }
    if let Some(alpha) = alpha {
        config.alpha = alpha;
    }
    if let Some(n_draws) = n_draws {
        config.n_draws = n_draws;
    }
    if let Some(method) = method {
        config.method = method;
    }
    if let Some(n_trials) = n_trials {
        config.n_trials = n_trials;
    }
    if let Some(seed) = seed {
        config.seed = seed;
    }
    config.adaptive_h = adaptive_h;

    config.validate()?;
    Ok(config)
}
