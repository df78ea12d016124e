//! On-disk cache of Monte-Carlo rate tables.

use std::path::{Path, PathBuf};

use pilotplan::channel::estimate_depth_rates;
use pilotplan::{DepthRates, RateProvenance};
use serde::{Deserialize, Serialize};

use crate::config::ScenarioConfig;
use crate::CliError;

pub const CACHE_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DepthEntry {
    pub mean: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateCacheFile {
    pub schema_version: u32,
    #[serde(rename = "L")]
    pub cells: u64,
    pub gamma: f64,
    pub hole_ratio: f64,
    pub trials: u64,
    pub seed: u64,
    pub depths: Vec<DepthEntry>,
}

impl RateCacheFile {
    pub fn from_rates(cfg: &ScenarioConfig, rates: &DepthRates) -> Self {
        RateCacheFile {
            schema_version: CACHE_SCHEMA_VERSION,
            cells: cfg.cells,
            gamma: cfg.channel.gamma,
            hole_ratio: cfg.channel.hole_ratio,
            trials: cfg.channel.trials,
            seed: cfg.channel.seed,
            depths: rates
                .rates()
                .iter()
                .zip(rates.std_errors())
                .map(|(&mean, &std_error)| DepthEntry { mean, std_error })
                .collect(),
        }
    }

    /// Same generation parameters as `cfg`.
    pub fn matches(&self, cfg: &ScenarioConfig) -> bool {
        self.schema_version == CACHE_SCHEMA_VERSION
            && self.cells == cfg.cells
            && self.gamma == cfg.channel.gamma
            && self.hole_ratio == cfg.channel.hole_ratio
            && self.trials == cfg.channel.trials
            && self.seed == cfg.channel.seed
    }

    pub fn to_rates(&self) -> Result<DepthRates, CliError> {
        let provenance = RateProvenance::MonteCarlo {
            cells: self.cells,
            gamma: self.gamma,
            hole_ratio: self.hole_ratio,
            trials: self.trials,
            seed: self.seed,
        };
        Ok(DepthRates::new(
            self.depths.iter().map(|d| d.mean).collect(),
            self.depths.iter().map(|d| d.std_error).collect(),
            provenance,
        )?)
    }
}

/// Cache file name for the generation parameters of `cfg`.
pub fn cache_path(dir: &Path, cfg: &ScenarioConfig) -> PathBuf {
    let c = &cfg.channel;
    dir.join(format!("rates-L{}-g{}-h{}-n{}-s{}.json", cfg.cells, c.gamma, c.hole_ratio, c.trials, c.seed))
}

/// Outcome of a cached lookup.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CacheStatus {
    Hit,
    Miss,
    /// The file existed but could not be used and was rewritten.
    Regenerated,
    Disabled,
}

/// Estimates the rate table for `cfg`, reusing `dir` when given.
/// Warnings about unusable cache files are pushed to `warnings`.
pub fn monte_carlo_rates(
    cfg: &ScenarioConfig,
    dir: Option<&Path>,
    warnings: &mut Vec<String>,
) -> Result<(DepthRates, CacheStatus), CliError> {
    let compute = || -> Result<DepthRates, CliError> {
        Ok(estimate_depth_rates(&cfg.grid()?, &cfg.channel_params()?)?)
    };
    let Some(dir) = dir else {
        return Ok((compute()?, CacheStatus::Disabled));
    };
    let path = cache_path(dir, cfg);
    let mut status = CacheStatus::Miss;
    if path.exists() {
        let loaded = std::fs::read_to_string(&path)
            .map_err(|e| e.to_string())
            .and_then(|text| serde_json::from_str::<RateCacheFile>(&text).map_err(|e| e.to_string()))
            .and_then(|file| {
                if !file.matches(cfg) {
                    return Err("generation parameters differ".to_string());
                }
                file.to_rates().map_err(|e| e.to_string())
            });
        match loaded {
            Ok(rates) => return Ok((rates, CacheStatus::Hit)),
            Err(e) => {
                warnings.push(format!("ignoring rate cache {}: {e}; regenerating", path.display()));
                status = CacheStatus::Regenerated;
            }
        }
    }
    let rates = compute()?;
    std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    let text = serde_json::to_string_pretty(&RateCacheFile::from_rates(cfg, &rates)).expect("cache serializes");
    std::fs::write(&path, text + "\n").map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    Ok((rates, status))
}
