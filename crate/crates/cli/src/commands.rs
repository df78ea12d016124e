//! `rates`, `optimize` and `sweep`.

use std::fmt::Write as _;
use std::path::Path;

use pilotplan::channel::linear_rate_model;
use pilotplan::{DepthRates, IncrementRule, MultiGroupConfig, RateProvenance, Thresholds, TwoGroupConfig};
use rayon::prelude::*;
use serde::Serialize;

use crate::cache::{monte_carlo_rates, CacheStatus, RateCacheFile};
use crate::config::{GroupMode, NcohRange, ScenarioConfig};
use crate::CliError;

pub const SWEEP_SCHEMA: &str = "pilotplan-sweep/1";

/// Where rate tables come from.
#[derive(Debug, Clone, PartialEq)]
pub enum RateSource<'a> {
    Linear { c0: f64, slope: f64 },
    MonteCarlo { cache_dir: Option<&'a Path> },
}

/// Parses `c0,slope`.
pub fn parse_linear(s: &str) -> Result<(f64, f64), CliError> {
    let bad = || CliError::Config(format!("expected c0,slope, got {s:?}"));
    let (a, b) = s.split_once(',').ok_or_else(bad)?;
    Ok((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?))
}

pub fn resolve_rates(cfg: &ScenarioConfig, source: &RateSource, warnings: &mut Vec<String>) -> Result<DepthRates, CliError> {
    match *source {
        RateSource::Linear { c0, slope } => Ok(linear_rate_model(c0, slope, cfg.order()? as usize)?),
        RateSource::MonteCarlo { cache_dir } => Ok(monte_carlo_rates(cfg, cache_dir, warnings)?.0),
    }
}

/// Estimates (or loads) the rate table of `cfg`.
pub fn cmd_rates(
    cfg: &ScenarioConfig,
    cache_dir: Option<&Path>,
    warnings: &mut Vec<String>,
) -> Result<(RateCacheFile, CacheStatus), CliError> {
    let (rates, status) = monte_carlo_rates(cfg, cache_dir, warnings)?;
    Ok((RateCacheFile::from_rates(cfg, &rates), status))
}

pub fn format_rates(file: &RateCacheFile) -> String {
    let mut out = String::new();
    for (i, d) in file.depths.iter().enumerate() {
        let _ = writeln!(out, "C_{i} = {:.4} +/- {:.4}", d.mean, d.std_error);
    }
    out
}

/// Optimal assignment for one coherence time, in either mode.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Plan {
    pub total: u64,
    pub lengths: Vec<u64>,
    pub vectors: Vec<Vec<u64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_index: Option<usize>,
    pub wsr: f64,
    pub net_wsr: f64,
    pub group_sum_rates: Vec<f64>,
    pub feasible: bool,
}

pub enum Planner {
    Two { cfg: TwoGroupConfig, thresholds: Thresholds },
    Many { cfg: MultiGroupConfig, rule: IncrementRule },
}

impl Planner {
    pub fn new(cfg: &ScenarioConfig, rates: &DepthRates, mode: GroupMode) -> Result<Self, CliError> {
        Ok(match mode {
            GroupMode::Two => {
                let two = cfg.two_group_config()?;
                let thresholds = two.thresholds(rates)?;
                Planner::Two { cfg: two, thresholds }
            }
            GroupMode::Many => Planner::Many { cfg: cfg.multi_group_config()?, rule: cfg.increment_rule },
        })
    }

    pub fn users(&self) -> u64 {
        match self {
            Planner::Two { cfg, .. } => cfg.users(),
            Planner::Many { cfg, .. } => cfg.users(),
        }
    }

    pub fn tie_break(&self) -> &'static str {
        match self {
            Planner::Two { .. } => {
                "group 1 gets the smallest optimal length; a coherence time on a threshold takes the larger total"
            }
            Planner::Many { .. } => "equal gains go to the earlier group; equal net-WSR keeps the smaller total",
        }
    }

    pub fn thresholds(&self) -> Option<&Thresholds> {
        match self {
            Planner::Two { thresholds, .. } => Some(thresholds),
            Planner::Many { .. } => None,
        }
    }

    pub fn optimize(&self, n_coh: f64, rates: &DepthRates) -> Result<Plan, CliError> {
        Ok(match self {
            Planner::Two { cfg, thresholds } => two_plan(cfg.optimize_with(n_coh, rates, thresholds)?),
            Planner::Many { cfg, rule } => many_plan(cfg.optimize(n_coh, rates, *rule)?),
        })
    }

    pub fn at_total(&self, total: u64, n_coh: f64, rates: &DepthRates) -> Result<Plan, CliError> {
        Ok(match self {
            Planner::Two { cfg, .. } => two_plan(cfg.solve_total(total, rates, n_coh)?),
            Planner::Many { cfg, rule } => many_plan(cfg.solve_total(total, rates, *rule, n_coh)?),
        })
    }
}

fn two_plan(s: pilotplan::TwoGroupSolution) -> Plan {
    Plan {
        total: s.total,
        lengths: vec![s.p1.n_pil(), s.p2.n_pil()],
        vectors: vec![s.p1.entries().to_vec(), s.p2.entries().to_vec()],
        rho: Some(s.rho),
        n_index: Some(s.n_index),
        wsr: s.wsr,
        net_wsr: s.net_wsr,
        group_sum_rates: s.group_sum_rates.to_vec(),
        feasible: s.feasible,
    }
}

fn many_plan(s: pilotplan::MultiGroupSolution) -> Plan {
    Plan {
        total: s.total,
        vectors: s.vectors.iter().map(|p| p.entries().to_vec()).collect(),
        lengths: s.lengths,
        rho: None,
        n_index: None,
        wsr: s.wsr,
        net_wsr: s.net_wsr,
        group_sum_rates: s.group_sum_rates,
        feasible: s.feasible,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolutionRecord {
    pub config: ScenarioConfig,
    pub config_hash: String,
    pub mode: &'static str,
    pub n_coh: f64,
    pub n_coh_per_user: f64,
    #[serde(rename = "T")]
    pub total: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p1: Option<Vec<u64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p2: Option<Vec<u64>>,
    pub lengths: Vec<u64>,
    pub vectors: Vec<Vec<u64>>,
    pub wsr: f64,
    pub net_wsr: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_index: Option<usize>,
    pub feasible: bool,
    pub group_sum_rates: Vec<f64>,
    pub rates: Vec<f64>,
    pub rates_provenance: RateProvenance,
    pub tie_break: &'static str,
}

fn check_ncoh(n_coh: f64) -> Result<(), CliError> {
    if n_coh.is_finite() && n_coh > 0.0 {
        Ok(())
    } else {
        Err(CliError::Infeasible(format!("N_coh must be positive, got {n_coh}")))
    }
}

/// Net-WSR optimal assignment for `n_coh`. A coherence time that cannot
/// hold more than `K` pilots falls back to full reuse with a warning.
pub fn cmd_optimize(
    cfg: &ScenarioConfig,
    rates: &DepthRates,
    n_coh: f64,
    mode: GroupMode,
    warnings: &mut Vec<String>,
) -> Result<SolutionRecord, CliError> {
    check_ncoh(n_coh)?;
    let planner = Planner::new(cfg, rates, mode)?;
    let plan = if n_coh <= cfg.users as f64 {
        warnings.push(format!(
            "N_coh = {n_coh} leaves no data time for K = {} users; falling back to full reuse",
            cfg.users
        ));
        planner.at_total(cfg.users, n_coh, rates)?
    } else {
        planner.optimize(n_coh, rates)?
    };
    let two = mode == GroupMode::Two;
    Ok(SolutionRecord {
        config: cfg.clone(),
        config_hash: cfg.hash(),
        mode: if two { "two-group" } else { "multi-group" },
        n_coh,
        n_coh_per_user: n_coh / cfg.users as f64,
        total: plan.total,
        rho: plan.rho,
        p1: two.then(|| plan.vectors[0].clone()),
        p2: two.then(|| plan.vectors[1].clone()),
        lengths: plan.lengths,
        vectors: plan.vectors,
        wsr: plan.wsr,
        net_wsr: plan.net_wsr,
        n_index: plan.n_index,
        feasible: plan.feasible,
        group_sum_rates: plan.group_sum_rates,
        rates: rates.rates().to_vec(),
        rates_provenance: rates.provenance().clone(),
        tie_break: planner.tie_break(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub n_coh: f64,
    pub n_coh_per_user: f64,
    pub total: u64,
    pub lengths: Vec<u64>,
    pub wsr: f64,
    pub net_wsr: f64,
    pub conventional_net_wsr: f64,
    /// `net_wsr / conventional_net_wsr - 1` in percent; absent while the
    /// baseline is not positive.
    pub gain_pct: Option<f64>,
    /// Per-cell sum rate of each group divided by its users per cell.
    pub per_user_rates: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sweep {
    pub schema: &'static str,
    pub config_hash: String,
    pub rates: Vec<f64>,
    pub rates_provenance: RateProvenance,
    pub tie_break: &'static str,
    pub rows: Vec<SweepRow>,
}

/// Optimal and full-reuse net-WSR over a coherence-time range.
pub fn cmd_sweep(cfg: &ScenarioConfig, rates: &DepthRates, range: &NcohRange, mode: GroupMode) -> Result<Sweep, CliError> {
    let points = range.points()?;
    if let Some(&bad) = points.iter().find(|&&x| !(x > 0.0)) {
        return Err(CliError::Infeasible(format!("N_coh must be positive, got {bad}")));
    }
    let planner = Planner::new(cfg, rates, mode)?;
    let users: Vec<u64> = cfg.multi_group_config()?.groups().iter().map(|g| g.users).collect();
    let k = cfg.users as f64;
    let rows = points
        .par_iter()
        .map(|&n_coh| {
            let plan = planner.optimize(n_coh, rates)?;
            let conventional = planner.at_total(cfg.users, n_coh, rates)?.net_wsr;
            Ok(SweepRow {
                n_coh,
                n_coh_per_user: n_coh / k,
                total: plan.total,
                gain_pct: (conventional > 0.0).then(|| 100.0 * (plan.net_wsr / conventional - 1.0)),
                per_user_rates: plan.group_sum_rates.iter().zip(&users).map(|(s, &u)| s / u as f64).collect(),
                lengths: plan.lengths,
                wsr: plan.wsr,
                net_wsr: plan.net_wsr,
                conventional_net_wsr: conventional,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(Sweep {
        schema: SWEEP_SCHEMA,
        config_hash: cfg.hash(),
        rates: rates.rates().to_vec(),
        rates_provenance: rates.provenance().clone(),
        tie_break: planner.tie_break(),
        rows,
    })
}

/// CSV with a leading `# schema=...` line and a header row.
pub fn sweep_csv(sweep: &Sweep) -> String {
    let groups = sweep.rows.first().map_or(0, |r| r.lengths.len());
    let mut out = format!("# schema={} config_hash={}\n", sweep.schema, sweep.config_hash);
    let mut header = vec!["n_coh".to_string(), "n_coh_per_user".into(), "total".into()];
    header.extend((1..=groups).map(|i| format!("length_{i}")));
    header.extend(["wsr", "net_wsr", "conventional_net_wsr", "gain_pct"].map(String::from));
    header.extend((1..=groups).map(|i| format!("per_user_rate_{i}")));
    out.push_str(&header.join(","));
    out.push('\n');
    for r in &sweep.rows {
        let mut cells = vec![r.n_coh.to_string(), r.n_coh_per_user.to_string(), r.total.to_string()];
        cells.extend(r.lengths.iter().map(|l| l.to_string()));
        cells.extend([r.wsr, r.net_wsr, r.conventional_net_wsr].map(|x| x.to_string()));
        cells.push(r.gain_pct.map_or(String::new(), |g| g.to_string()));
        cells.extend(r.per_user_rates.iter().map(|x| x.to_string()));
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}
