//! `verify`: exhaustive certification of the closed forms on small
//! instances.

use std::collections::BTreeSet;

use pilotplan::assignment::pilot_lengths;
use pilotplan::oracle::{brute_fixed_length, brute_ncoh, brute_two_group, count_valid, enumerate_valid, SearchReport};
use pilotplan::{DepthRates, TwoGroupConfig, Weight};
use serde::Serialize;

use crate::CliError;

pub const OMEGAS: [(i64, i64); 5] = [(1, 2), (3, 5), (7, 10), (3, 4), (9, 10)];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    /// Nine cells only.
    Small,
    /// Nine and 27 cells.
    FullSmallGrid,
}

impl Scale {
    fn cells(self) -> &'static [u64] {
        match self {
            Scale::Small => &[9],
            Scale::FullSmallGrid => &[9, 27],
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Tally {
    pub instances: u64,
    pub candidates: u64,
    pub disagreements: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub fixed_length: Tally,
    pub two_group: Tally,
    /// Instances whose maximizer set differs from `{rho, ..., mu}` (or from
    /// `{rho}` when ties cannot occur).
    pub tie_sets: Tally,
    pub n_coh: Tally,
    /// Enumerated candidates equal the independent count everywhere.
    pub counts_agree: bool,
    /// Reports of every disagreeing instance.
    pub failures: Vec<SearchReport>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.counts_agree
            && [&self.fixed_length, &self.two_group, &self.tie_sets, &self.n_coh].iter().all(|t| t.disagreements == 0)
    }
}

fn record(t: &mut Tally, report: &SearchReport, counts_agree: &mut bool, failures: &mut Vec<SearchReport>) {
    t.instances += 1;
    t.candidates += report.candidates;
    *counts_agree &= report.expected_candidates == Some(report.candidates);
    if !report.agrees {
        t.disagreements += 1;
        failures.push(report.clone());
    }
}

/// Runs every sweep with `rates_for(cells)` as the rate table.
pub fn cmd_verify(scale: Scale, rates_for: impl Fn(u64) -> Result<DepthRates, CliError>) -> Result<VerifyReport, CliError> {
    let mut report = VerifyReport {
        fixed_length: Tally::default(),
        two_group: Tally::default(),
        tie_sets: Tally::default(),
        n_coh: Tally::default(),
        counts_agree: true,
        failures: Vec::new(),
    };
    for &cells in scale.cells() {
        let rates = rates_for(cells)?;
        for users in 1..=4 {
            report.counts_agree &=
                enumerate_valid(cells, users, None, false)?.count() as u64 == count_valid(cells, users, None)?;
            for n in pilot_lengths(users, cells) {
                let r = brute_fixed_length(n, users, cells, &rates, false)?;
                record(&mut report.fixed_length, &r, &mut report.counts_agree, &mut report.failures);
            }
        }
        for users in 2..=4i64 {
            for k1 in 1..users {
                for (num, den) in OMEGAS {
                    let cfg = TwoGroupConfig::new(cells, users as u64, Weight::new(k1, users)?, Weight::new(num, den)?)?;
                    for total in cfg.totals() {
                        let r = brute_two_group(total, &cfg, &rates, false)?;
                        record(&mut report.two_group, &r, &mut report.counts_agree, &mut report.failures);
                        let splits: BTreeSet<u64> = r.witnesses.iter().map(|w| w.vectors[0].iter().sum()).collect();
                        let rho = cfg.rho(total)?;
                        let want: BTreeSet<u64> = if cfg.has_integral_log_weight() {
                            (rho..=cfg.mu(total)?).step_by(2).collect()
                        } else {
                            BTreeSet::from([rho])
                        };
                        report.tie_sets.instances += 1;
                        if splits != want {
                            report.tie_sets.disagreements += 1;
                            report.failures.push(r);
                        }
                    }
                }
            }
        }
    }
    // Coherence-time optimum on the nine-cell instance with ratio 1/2,
    // weight 7/10, at 200 points spanning every threshold interval.
    let rates = rates_for(9)?;
    let cfg = TwoGroupConfig::new(9, 2, Weight::new(1, 2)?, Weight::new(7, 10)?)?;
    for x in ncoh_samples(&cfg, &rates, 200)? {
        let r = brute_ncoh(x, &cfg, &rates, false)?;
        record(&mut report.n_coh, &r, &mut report.counts_agree, &mut report.failures);
    }
    Ok(report)
}

/// `count` coherence times from just above 0 to 1.5 times the last finite
/// threshold.
pub fn ncoh_samples(cfg: &TwoGroupConfig, rates: &DepthRates, count: usize) -> Result<Vec<f64>, CliError> {
    let th = cfg.thresholds(rates)?;
    let hi = th.values[th.values.len() - 2] * cfg.users() as f64 * 1.5;
    Ok((0..count).map(|i| 0.5 + (hi - 0.5) * i as f64 / (count - 1) as f64).collect())
}
