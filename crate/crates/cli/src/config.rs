//! Scenario files.
//!
//! A scenario is a JSON document naming the cell count, users per cell,
//! the priority groups (ratios and weights as `"num/den"` strings), the
//! channel settings and optionally a coherence-time range:
//!
//! ```json
//! {
//!   "cells": 81,
//!   "users": 10,
//!   "groups": [{"alpha": "1/5", "omega": "7/10"}, {"alpha": "4/5", "omega": "3/10"}],
//!   "channel": {"gamma": 3.7, "hole_ratio": 0.14, "cell_radius": 500.0, "trials": 100000, "seed": 1},
//!   "n_coh_range": {"start": 10.0, "stop": 300.0, "step": 1.0}
//! }
//! ```

use std::path::Path;

use pilotplan::assignment::partition_depths;
use pilotplan::{CellGrid, ChannelParams, IncrementRule, MultiGroupConfig, TwoGroupConfig, Weight};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupSpec {
    pub alpha: Weight,
    pub omega: Weight,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChannelSpec {
    pub gamma: f64,
    pub hole_ratio: f64,
    pub cell_radius: f64,
    pub trials: u64,
    pub seed: u64,
}

impl Default for ChannelSpec {
    fn default() -> Self {
        ChannelSpec { gamma: 3.7, hole_ratio: 0.14, cell_radius: 500.0, trials: 100_000, seed: 1 }
    }
}

/// `start, start + step, ...` up to and including `stop`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NcohRange {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl NcohRange {
    /// Parses `a:b:step`.
    pub fn parse(s: &str) -> Result<Self, CliError> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || CliError::Config(format!("expected a:b:step, got {s:?}"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let v: Vec<f64> = parts.iter().map(|p| p.trim().parse::<f64>()).collect::<Result<_, _>>().map_err(|_| bad())?;
        Ok(NcohRange { start: v[0], stop: v[1], step: v[2] })
    }

    pub fn points(&self) -> Result<Vec<f64>, CliError> {
        let ok = [self.start, self.stop, self.step].iter().all(|x| x.is_finite()) && self.step > 0.0;
        if !ok || self.stop < self.start {
            return Err(CliError::EmptyRange(format!("{}:{}:{}", self.start, self.stop, self.step)));
        }
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize;
        Ok((0..=n).map(|i| self.start + i as f64 * self.step).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub cells: u64,
    pub users: u64,
    pub groups: Vec<GroupSpec>,
    #[serde(default)]
    pub channel: ChannelSpec,
    /// How the greedy multi-group allocator compares gains.
    #[serde(default = "default_rule")]
    pub increment_rule: IncrementRule,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_coh_range: Option<NcohRange>,
}

fn default_rule() -> IncrementRule {
    IncrementRule::Measured
}

/// Which optimizer a command uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupMode {
    Two,
    Many,
}

fn w(n: i64, d: i64) -> Weight {
    Weight::new(n, d).expect("constant fraction")
}

impl ScenarioConfig {
    fn base(cells: u64, shares: &[(Weight, Weight)]) -> Self {
        ScenarioConfig {
            cells,
            users: 10,
            groups: shares.iter().map(|&(alpha, omega)| GroupSpec { alpha, omega }).collect(),
            channel: ChannelSpec::default(),
            increment_rule: IncrementRule::Measured,
            n_coh_range: None,
        }
    }

    /// Two groups, 81 cells, 10 users, ratio 1/5, weight 7/10.
    pub fn table3() -> Self {
        Self::base(81, &[(w(1, 5), w(7, 10)), (w(4, 5), w(3, 10))])
    }

    /// Three groups on 27 cells compared with the linear rule.
    pub fn table4() -> Self {
        let mut cfg = Self::base(27, &[(w(1, 5), w(1, 2)), (w(3, 10), w(3, 10)), (w(1, 2), w(1, 5))]);
        cfg.increment_rule = IncrementRule::Linear;
        cfg
    }

    /// Two groups on 81 cells with ratio `alpha` and weight `omega`.
    pub fn two_group(alpha: Weight, omega: Weight) -> Self {
        let mut cfg = Self::base(81, &[(alpha, omega), (alpha.complement().unwrap(), omega.complement().unwrap())]);
        cfg.n_coh_range = Some(NcohRange { start: 1.0, stop: 300.0, step: 1.0 });
        cfg
    }

    pub fn fig3() -> Self {
        Self::two_group(w(1, 5), w(9, 10))
    }

    pub fn fig4() -> Vec<Self> {
        vec![Self::two_group(w(1, 5), w(4, 5)), Self::two_group(w(1, 5), w(3, 5)), Self::two_group(w(2, 5), w(4, 5))]
    }

    pub fn fig5() -> Self {
        let mut cfg = Self::base(27, &[(w(1, 10), w(7, 10)), (w(2, 5), w(1, 5)), (w(1, 2), w(1, 10))]);
        cfg.n_coh_range = Some(NcohRange { start: 1.0, stop: 300.0, step: 1.0 });
        cfg
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let cfg: ScenarioConfig =
            serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        partition_depths(self.cells)?;
        self.grid()?;
        self.channel_params()?;
        if self.groups.len() == 2 {
            self.two_group_config()?;
        }
        self.multi_group_config()?;
        Ok(())
    }

    pub fn order(&self) -> Result<u32, CliError> {
        Ok(partition_depths(self.cells)? as u32)
    }

    pub fn grid(&self) -> Result<CellGrid, CliError> {
        Ok(CellGrid::new(self.order()?, self.channel.cell_radius, self.channel.hole_ratio)?)
    }

    pub fn channel_params(&self) -> Result<ChannelParams, CliError> {
        Ok(ChannelParams::new(self.channel.gamma, self.channel.trials, self.channel.seed)?)
    }

    pub fn two_group_config(&self) -> Result<TwoGroupConfig, CliError> {
        if self.groups.len() != 2 {
            return Err(CliError::Config(format!("two-group mode needs exactly 2 groups, got {}", self.groups.len())));
        }
        let [a, b] = [self.groups[0], self.groups[1]];
        if a.alpha.complement()? != b.alpha || a.omega.complement()? != b.omega {
            return Err(CliError::Config("group ratios and weights must each sum to 1".into()));
        }
        Ok(TwoGroupConfig::new(self.cells, self.users, a.alpha, a.omega)?)
    }

    pub fn multi_group_config(&self) -> Result<MultiGroupConfig, CliError> {
        let shares: Vec<(Weight, Weight)> = self.groups.iter().map(|g| (g.alpha, g.omega)).collect();
        Ok(MultiGroupConfig::new(self.cells, self.users, &shares)?)
    }

    /// Two-group optimizer for two groups, greedy otherwise, unless forced.
    pub fn mode(&self, forced: Option<GroupMode>) -> Result<GroupMode, CliError> {
        match forced {
            Some(GroupMode::Two) => self.two_group_config().map(|_| GroupMode::Two),
            Some(GroupMode::Many) => Ok(GroupMode::Many),
            None if self.groups.len() == 2 => Ok(GroupMode::Two),
            None => Ok(GroupMode::Many),
        }
    }

    /// SHA-256 of the canonical JSON encoding.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(bytes))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_are_valid() {
        for cfg in [ScenarioConfig::table3(), ScenarioConfig::table4(), ScenarioConfig::fig3(), ScenarioConfig::fig5()]
            .into_iter()
            .chain(ScenarioConfig::fig4())
        {
            cfg.validate().unwrap();
        }
        assert_eq!(ScenarioConfig::table3().mode(None).unwrap(), GroupMode::Two);
        assert_eq!(ScenarioConfig::table4().mode(None).unwrap(), GroupMode::Many);
        assert!(ScenarioConfig::table4().mode(Some(GroupMode::Two)).is_err());
    }

    #[test]
    fn json_round_trip_and_hash() {
        let cfg = ScenarioConfig::table3();
        let text = serde_json::to_string(&cfg).unwrap();
        assert!(text.contains("\"alpha\":\"1/5\""));
        let back: ScenarioConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.hash(), cfg.hash());
        let mut other = cfg.clone();
        other.channel.seed = 2;
        assert_ne!(other.hash(), cfg.hash());
    }

    #[test]
    fn minimal_document_gets_defaults() {
        let cfg: ScenarioConfig = serde_json::from_str(
            r#"{"cells": 27, "users": 4, "groups": [{"alpha": "1/2", "omega": "3/4"}, {"alpha": "1/2", "omega": "1/4"}]}"#,
        )
        .unwrap();
        assert_eq!(cfg.channel, ChannelSpec::default());
        cfg.validate().unwrap();
    }

    #[test]
    fn rejects_bad_documents() {
        let bad = [
            r#"{"cells": 80, "users": 10, "groups": [{"alpha": "1/5", "omega": "7/10"}, {"alpha": "4/5", "omega": "3/10"}]}"#,
            r#"{"cells": 81, "users": 10, "groups": [{"alpha": "1/3", "omega": "7/10"}, {"alpha": "2/3", "omega": "3/10"}]}"#,
            r#"{"cells": 81, "users": 10, "groups": [{"alpha": "1/5", "omega": "7/10"}, {"alpha": "4/5", "omega": "2/10"}]}"#,
            r#"{"cells": 81, "users": 10, "groups": [{"alpha": "1/5", "omega": "7/10"}, {"alpha": "4/5", "omega": "3/10"}], "channel": {"gamma": 5.0}}"#,
        ];
        for text in bad {
            let cfg: ScenarioConfig = serde_json::from_str(text).unwrap();
            assert!(cfg.validate().is_err(), "{text}");
        }
        assert!(serde_json::from_str::<ScenarioConfig>(r#"{"cells": 81}"#).is_err());
    }

    #[test]
    fn ranges() {
        assert_eq!(NcohRange::parse("1:3:0.5").unwrap().points().unwrap(), vec![1.0, 1.5, 2.0, 2.5, 3.0]);
        assert_eq!(NcohRange::parse("5:5:1").unwrap().points().unwrap(), vec![5.0]);
        assert!(matches!(NcohRange::parse("5:4:1").unwrap().points(), Err(CliError::EmptyRange(_))));
        assert!(matches!(NcohRange::parse("1:4:0").unwrap().points(), Err(CliError::EmptyRange(_))));
        assert!(NcohRange::parse("1:4").is_err());
    }
}
