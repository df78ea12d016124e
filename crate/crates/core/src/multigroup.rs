//! Greedy pilot allocation for any number of priority groups.
//!
//! Starting from full reuse, each extra pair of pilots goes to the
//! unsaturated group whose weighted marginal gain
//! `w_i 3^-d_i (C_{d_i+1} - C_{d_i})` is largest, where `d_i` is the leading
//! depth of that group's current assignment. Ties go to the group listed
//! first (the higher priority).

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::assignment::{check_ncoh, chi_unchecked, max_pilot_length, optimal_fixed_length, partition_depths, PilotAssignmentVector};
use crate::channel::DepthRates;
use crate::weight::{pow3, Weight};
use crate::{Error, Result};

/// How marginal gains are compared.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IncrementRule {
    /// Equal rate increments at every depth; gains compare as `w_i 3^-d_i`
    /// in exact arithmetic.
    Linear,
    /// Actual rate differences from the supplied table.
    Measured,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupShare {
    pub alpha: Weight,
    pub omega: Weight,
    pub users: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiGroupConfig {
    cells: u64,
    users: u64,
    groups: Vec<GroupShare>,
    depths: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiGroupSolution {
    pub lengths: Vec<u64>,
    pub vectors: Vec<PilotAssignmentVector>,
    pub total: u64,
    pub wsr: f64,
    pub net_wsr: f64,
    pub group_sum_rates: Vec<f64>,
    pub feasible: bool,
}

impl MultiGroupConfig {
    /// `shares` lists `(alpha_i, omega_i)` from highest to lowest priority.
    pub fn new(cells: u64, users: u64, shares: &[(Weight, Weight)]) -> Result<Self> {
        let depths = partition_depths(cells)?;
        if shares.len() < 2 {
            return Err(Error::InvalidParameter("at least two groups are required".into()));
        }
        let sum = |f: fn(&(Weight, Weight)) -> Ratio<i64>| shares.iter().map(f).sum::<Ratio<i64>>();
        if sum(|s| s.0.ratio()) != Ratio::from_integer(1) {
            return Err(Error::InvalidParameter("group ratios must sum to 1".into()));
        }
        if sum(|s| s.1.ratio()) != Ratio::from_integer(1) {
            return Err(Error::InvalidParameter("group weights must sum to 1".into()));
        }
        if shares.windows(2).any(|p| p[1].1 >= p[0].1) {
            return Err(Error::InvalidParameter("weights must strictly decrease with priority".into()));
        }
        let mut groups = Vec::with_capacity(shares.len());
        for &(alpha, omega) in shares {
            let k = alpha
                .times_integer(users)
                .filter(|&k| k >= 1)
                .ok_or_else(|| Error::InvalidParameter(format!("{alpha} of {users} users is not a positive integer")))?;
            groups.push(GroupShare { alpha, omega, users: k });
        }
        Ok(MultiGroupConfig { cells, users, groups, depths })
    }

    pub fn cells(&self) -> u64 {
        self.cells
    }

    pub fn users(&self) -> u64 {
        self.users
    }

    pub fn groups(&self) -> &[GroupShare] {
        &self.groups
    }

    pub fn max_total(&self) -> u64 {
        max_pilot_length(self.users, self.cells)
    }

    pub fn totals(&self) -> impl Iterator<Item = u64> {
        (self.users..=self.max_total()).step_by(2)
    }

    fn check_total(&self, total: u64) -> Result<()> {
        if total < self.users || total > self.max_total() || (total - self.users) % 2 != 0 {
            return Err(Error::InvalidLength { length: total, users: self.users, cells: self.cells });
        }
        Ok(())
    }

    /// Index of the group receiving the next two pilots, if any can grow.
    pub fn next_group(&self, lengths: &[u64], rates: &DepthRates, rule: IncrementRule) -> Option<usize> {
        let open = |i: usize| lengths[i] < max_pilot_length(self.groups[i].users, self.cells);
        let depth = |i: usize| chi_unchecked(lengths[i], self.groups[i].users);
        match rule {
            IncrementRule::Linear => {
                let mut best: Option<(usize, Ratio<i64>)> = None;
                for i in (0..self.groups.len()).filter(|&i| open(i)) {
                    let gain = self.groups[i].omega.ratio() * pow3(-(depth(i) as i32));
                    if best.is_none_or(|(_, b)| gain > b) {
                        best = Some((i, gain));
                    }
                }
                best.map(|(i, _)| i)
            }
            IncrementRule::Measured => {
                let mut best: Option<(usize, f64)> = None;
                for i in (0..self.groups.len()).filter(|&i| open(i)) {
                    let d = depth(i);
                    let gain = self.groups[i].omega.to_f64() * rates.increment(d)? / 3f64.powi(d as i32);
                    if best.is_none_or(|(_, b)| gain > b) {
                        best = Some((i, gain));
                    }
                }
                best.map(|(i, _)| i)
            }
        }
    }

    /// Per-group pilot lengths for a total of `total` pilots.
    pub fn greedy_allocate(&self, total: u64, rates: &DepthRates, rule: IncrementRule) -> Result<Vec<u64>> {
        self.check_total(total)?;
        if rates.depths() != self.depths {
            return Err(Error::Shape { expected: self.depths, got: rates.depths() });
        }
        let mut lengths: Vec<u64> = self.groups.iter().map(|g| g.users).collect();
        for _ in 0..(total - self.users) / 2 {
            let i = self
                .next_group(&lengths, rates, rule)
                .ok_or_else(|| Error::Domain("every group is saturated".into()))?;
            lengths[i] += 2;
        }
        Ok(lengths)
    }

    /// `sum_i w_i C_sum(p_i)` with per-group sum rates.
    pub fn c_wsr(&self, vectors: &[PilotAssignmentVector], rates: &DepthRates) -> Result<(f64, Vec<f64>)> {
        if vectors.len() != self.groups.len() {
            return Err(Error::Shape { expected: self.groups.len(), got: vectors.len() });
        }
        let mut wsr = 0.0;
        let mut sums = Vec::with_capacity(vectors.len());
        for (p, g) in vectors.iter().zip(&self.groups) {
            if p.users() != g.users {
                return Err(Error::GroupMismatch { expected: g.users, got: p.users() });
            }
            let s = p.c_sum(rates)?;
            wsr += g.omega.to_f64() * s;
            sums.push(s);
        }
        Ok((wsr, sums))
    }

    pub fn solve_total(&self, total: u64, rates: &DepthRates, rule: IncrementRule, n_coh: f64) -> Result<MultiGroupSolution> {
        check_ncoh(n_coh)?;
        let lengths = self.greedy_allocate(total, rates, rule)?;
        let vectors = lengths
            .iter()
            .zip(&self.groups)
            .map(|(&len, g)| optimal_fixed_length(len, g.users, self.cells))
            .collect::<Result<Vec<_>>>()?;
        let (wsr, group_sum_rates) = self.c_wsr(&vectors, rates)?;
        Ok(MultiGroupSolution {
            net_wsr: (n_coh - total as f64) / n_coh * wsr,
            wsr,
            total,
            lengths,
            vectors,
            group_sum_rates,
            feasible: n_coh > total as f64,
        })
    }

    /// Net-WSR maximizing total and allocation; ties go to the smaller total.
    pub fn optimize(&self, n_coh: f64, rates: &DepthRates, rule: IncrementRule) -> Result<MultiGroupSolution> {
        check_ncoh(n_coh)?;
        let mut best: Option<MultiGroupSolution> = None;
        for total in self.totals() {
            let sol = self.solve_total(total, rates, rule, n_coh)?;
            if best.as_ref().is_none_or(|b| sol.net_wsr > b.net_wsr) {
                best = Some(sol);
            }
        }
        Ok(best.expect("at least one feasible total"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::linear_rate_model;

    fn w(n: i64, d: i64) -> Weight {
        Weight::new(n, d).unwrap()
    }

    fn table4() -> MultiGroupConfig {
        MultiGroupConfig::new(27, 10, &[(w(1, 5), w(1, 2)), (w(3, 10), w(3, 10)), (w(1, 2), w(1, 5))]).unwrap()
    }

    #[test]
    fn validation() {
        let bad_sum = MultiGroupConfig::new(27, 10, &[(w(1, 5), w(1, 2)), (w(3, 10), w(1, 2))]);
        assert!(bad_sum.is_err());
        let not_decreasing = MultiGroupConfig::new(27, 10, &[(w(1, 2), w(1, 2)), (w(1, 2), w(1, 2))]);
        assert!(not_decreasing.is_err());
        let fractional = MultiGroupConfig::new(27, 10, &[(w(1, 3), w(2, 3)), (w(2, 3), w(1, 3))]);
        assert!(fractional.is_err());
        let single = MultiGroupConfig::new(27, 10, &[(w(1, 1), w(1, 1))]);
        assert!(single.is_err());
        assert_eq!(table4().groups().iter().map(|g| g.users).collect::<Vec<_>>(), vec![2, 3, 5]);
    }

    #[test]
    fn greedy_examples() {
        let cfg = table4();
        let rates = linear_rate_model(2.0, 6.0, 3).unwrap();
        assert_eq!(cfg.greedy_allocate(10, &rates, IncrementRule::Linear).unwrap(), vec![2, 3, 5]);
        assert_eq!(cfg.greedy_allocate(12, &rates, IncrementRule::Linear).unwrap(), vec![4, 3, 5]);
        assert_eq!(cfg.greedy_allocate(42, &rates, IncrementRule::Linear).unwrap(), vec![18, 9, 15]);
        assert_eq!(cfg.greedy_allocate(90, &rates, IncrementRule::Linear).unwrap(), vec![18, 27, 45]);
        assert!(cfg.greedy_allocate(11, &rates, IncrementRule::Linear).is_err());
        assert!(cfg.greedy_allocate(92, &rates, IncrementRule::Linear).is_err());
    }

    #[test]
    fn measured_rule_matches_linear_on_linear_rates() {
        let cfg = table4();
        let rates = linear_rate_model(2.0, 6.0, 3).unwrap();
        for t in cfg.totals() {
            assert_eq!(
                cfg.greedy_allocate(t, &rates, IncrementRule::Linear).unwrap(),
                cfg.greedy_allocate(t, &rates, IncrementRule::Measured).unwrap()
            );
        }
    }

    #[test]
    fn large_coherence_time_saturates() {
        let cfg = table4();
        let rates = linear_rate_model(2.0, 6.0, 3).unwrap();
        let sol = cfg.optimize(1e9, &rates, IncrementRule::Linear).unwrap();
        assert_eq!(sol.total, 90);
        assert_eq!(sol.lengths, vec![18, 27, 45]);
        assert!(cfg.optimize(0.0, &rates, IncrementRule::Linear).is_err());
    }
}
