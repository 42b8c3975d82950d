//! Loading tracker and scenario configs and applying flag overrides.

use std::path::Path;

use pacetrack::sim::ScenarioSpec;
use pacetrack::{Selection, TrackerConfig};

use crate::error::{io_error, CliError};

/// Keys accepted by `--ablate` and by the override flags.
pub const KEYS: [&str; 14] = [
    "lambda0", "mu", "stages", "xi", "eta", "beta1", "beta2", "alpha", "capacity", "interval", "acs-iters", "kind",
    "patch", "sigma",
];

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, CliError>
where
    T::Err: std::fmt::Display,
{
    value.parse().map_err(|e| CliError::Config(format!("invalid value `{value}` for {key}: {e}")))
}

/// Sets one named field. The result is not validated.
pub fn apply(config: &mut TrackerConfig, key: &str, value: &str) -> Result<(), CliError> {
    match key {
        "lambda0" => config.schedule.lambda0 = parse(key, value)?,
        "mu" => config.schedule.mu = parse(key, value)?,
        "stages" => config.schedule.stages = parse(key, value)?,
        "xi" => config.schedule.xi = parse(key, value)?,
        "eta" => config.eta = parse(key, value)?,
        "beta1" => config.confidence.beta1 = parse(key, value)?,
        "beta2" => config.confidence.beta2 = parse(key, value)?,
        "alpha" => config.alpha = parse(key, value)?,
        "capacity" => config.capacity = parse(key, value)?,
        "interval" => config.update_interval = parse(key, value)?,
        "acs-iters" => config.acs_iters = parse(key, value)?,
        "kind" => config.selection = value.parse::<Selection>()?,
        "patch" => config.patch_size = parse(key, value)?,
        "sigma" => config.sigma = Some(parse(key, value)?),
        other => {
            return Err(CliError::Config(format!("unknown parameter `{other}`; expected one of {}", KEYS.join(", "))))
        }
    }
    Ok(())
}

pub fn load_tracker(path: Option<&Path>) -> Result<TrackerConfig, CliError> {
    match path {
        None => Ok(TrackerConfig::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| io_error(p, e))?;
            TrackerConfig::from_toml(&text).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))
        }
    }
}

pub fn load_scenario(path: Option<&Path>, seed: Option<u64>) -> Result<ScenarioSpec, CliError> {
    let mut spec = match path {
        None => ScenarioSpec::default_suite(seed.unwrap_or(1)),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| io_error(p, e))?;
            ScenarioSpec::from_toml(&text).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?
        }
    };
    if let Some(seed) = seed {
        spec.seed = seed;
    }
    Ok(spec)
}

/// A `key=v1,v2,...` sweep. Numeric values are sorted ascending so the
/// report reads monotonically along the swept axis.
#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub key: String,
    pub values: Vec<String>,
}

impl Sweep {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let (key, list) = text
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("--ablate expects key=v1,v2,..., got `{text}`")))?;
        let key = key.trim().to_string();
        if !KEYS.contains(&key.as_str()) {
            return Err(CliError::Config(format!("cannot sweep `{key}`; expected one of {}", KEYS.join(", "))));
        }
        let mut values: Vec<String> = list.split(',').map(|v| v.trim().to_string()).filter(|v| !v.is_empty()).collect();
        if values.is_empty() {
            return Err(CliError::Config(format!("--ablate {key}: no values given")));
        }
        let numeric: Option<Vec<f64>> = values.iter().map(|v| v.parse().ok()).collect();
        if let Some(nums) = numeric {
            let mut paired: Vec<(f64, String)> = nums.into_iter().zip(values).collect();
            paired.sort_by(|a, b| a.0.total_cmp(&b.0));
            paired.dedup_by(|a, b| a.0 == b.0);
            values = paired.into_iter().map(|(_, v)| v).collect();
        }
        Ok(Sweep { key, values })
    }

    /// One validated config per value.
    pub fn configs(&self, base: &TrackerConfig) -> Result<Vec<TrackerConfig>, CliError> {
        self.values
            .iter()
            .map(|v| {
                let mut c = base.clone();
                apply(&mut c, &self.key, v)?;
                c.validate()?;
                Ok(c)
            })
            .collect()
    }
}
