//! Two-group weighted-sum-rate optimizer.
//!
//! For a total pilot length `T`, group 1 receives `t` pilots and group 2
//! `T - t`, each arranged by [`optimal_fixed_length`]. The comparison
//! between neighboring splits `t` and `t + 2` reduces to the sign of
//! `g_T(t) - 1` with `g_T(t) = 3^(chi(t, K1) - chi(T - t - 2, K2)) (1-w)/w`,
//! decided here in exact rational arithmetic. The optimal total `T` for a
//! coherence time `N_coh` follows from the threshold sequence `Delta_n`.

use num_rational::Ratio;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::assignment::{
    check_ncoh, chi_unchecked, max_pilot_length, optimal_fixed_length, partition_depths,
    PilotAssignmentVector,
};
use crate::channel::DepthRates;
use crate::weight::{pow3, Weight};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoGroupConfig {
    cells: u64,
    users: u64,
    alpha: Weight,
    omega: Weight,
    k1: u64,
    k2: u64,
    depths: usize,
}

/// `B(T)` and `F(T)`: the smallest and largest feasible group-1 lengths.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bounds {
    pub lower: u64,
    pub upper: u64,
}

impl Bounds {
    /// `S_0(T) = {B, B+2, ..., F}`.
    pub fn s0(&self) -> impl Iterator<Item = u64> {
        (self.lower..=self.upper).step_by(2)
    }

    /// `S_1(T) = S_0(T) \ {F}`.
    pub fn s1(&self) -> impl Iterator<Item = u64> {
        (self.lower..self.upper).step_by(2)
    }

    pub fn s1_is_empty(&self) -> bool {
        self.lower >= self.upper
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoGroupSolution {
    pub p1: PilotAssignmentVector,
    pub p2: PilotAssignmentVector,
    pub total: u64,
    pub rho: u64,
    pub wsr: f64,
    pub net_wsr: f64,
    pub n_index: usize,
    /// Per-cell sum rate of each group.
    pub group_sum_rates: [f64; 2],
    /// False when the pilots use the whole coherence time or more.
    pub feasible: bool,
}

/// `Delta_0 = 0, Delta_1, ..., Delta_{N_L}, Delta_{N_L+1} = inf`, in units
/// of `N_coh / K`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub values: Vec<f64>,
    /// Indices `n` with `Delta_{n+1} < Delta_n`.
    pub violations: Vec<usize>,
}

impl Thresholds {
    pub fn is_nondecreasing(&self) -> bool {
        self.violations.is_empty()
    }

    /// Largest `n` with `Delta_n <= x`. For a nondecreasing sequence this is
    /// the half-open interval `[Delta_n, Delta_{n+1})` containing `x`.
    pub fn interval(&self, x: f64) -> usize {
        self.values.iter().rposition(|&d| d <= x).unwrap_or(0)
    }
}

impl TwoGroupConfig {
    pub fn new(cells: u64, users: u64, alpha: Weight, omega: Weight) -> Result<Self> {
        let depths = partition_depths(cells)?;
        if alpha <= Weight::zero() || alpha >= Weight::one() {
            return Err(Error::InvalidParameter(format!("group ratio must lie in (0, 1), got {alpha}")));
        }
        if omega < Weight::new(1, 2)? || omega >= Weight::one() {
            return Err(Error::InvalidParameter(format!("weight must lie in [1/2, 1), got {omega}")));
        }
        let k1 = alpha.times_integer(users).ok_or_else(|| {
            Error::InvalidParameter(format!("{alpha} of {users} users is not an integer"))
        })?;
        let k2 = users - k1;
        if k1 == 0 || k2 == 0 {
            return Err(Error::InvalidParameter("both groups need at least one user".into()));
        }
        Ok(TwoGroupConfig { cells, users, alpha, omega, k1, k2, depths })
    }

    pub fn cells(&self) -> u64 {
        self.cells
    }

    pub fn users(&self) -> u64 {
        self.users
    }

    pub fn alpha(&self) -> Weight {
        self.alpha
    }

    pub fn omega(&self) -> Weight {
        self.omega
    }

    pub fn k1(&self) -> u64 {
        self.k1
    }

    pub fn k2(&self) -> u64 {
        self.k2
    }

    pub fn depths(&self) -> usize {
        self.depths
    }

    /// Largest total pilot length, `L K / 3`.
    pub fn max_total(&self) -> u64 {
        max_pilot_length(self.users, self.cells)
    }

    /// Feasible totals `K, K+2, ..., LK/3`.
    pub fn totals(&self) -> impl Iterator<Item = u64> {
        (self.users..=self.max_total()).step_by(2)
    }

    /// `N_L = (LK/3 - K) / 2`.
    pub fn n_levels(&self) -> usize {
        ((self.max_total() - self.users) / 2) as usize
    }

    fn check_total(&self, total: u64) -> Result<()> {
        if total < self.users || total > self.max_total() || (total - self.users) % 2 != 0 {
            return Err(Error::InvalidLength { length: total, users: self.users, cells: self.cells });
        }
        Ok(())
    }

    fn omega_ratio(&self) -> Ratio<i64> {
        self.omega.ratio()
    }

    /// `(1 - w) / w`.
    fn weight_ratio(&self) -> Ratio<i64> {
        (Ratio::one() - self.omega_ratio()) / self.omega_ratio()
    }

    /// `s = ceil(log3(w / (1 - w)))`, computed exactly.
    pub fn s(&self) -> u32 {
        let w = self.omega_ratio();
        let mut s = 0;
        while pow3(s as i32) * (Ratio::one() - w) < w {
            s += 1;
        }
        s
    }

    /// Whether `log3(w / (1 - w))` is an integer, i.e. ties between splits
    /// are possible.
    pub fn has_integral_log_weight(&self) -> bool {
        let w = self.omega_ratio();
        pow3(self.s() as i32) * (Ratio::one() - w) == w
    }

    pub fn bounds(&self, total: u64) -> Result<Bounds> {
        self.check_total(total)?;
        let cap1 = max_pilot_length(self.k1, self.cells);
        let cap2 = max_pilot_length(self.k2, self.cells);
        let lower = self.k1.max(total.saturating_sub(cap2));
        let upper = (total - self.k2).min(cap1);
        Ok(Bounds { lower, upper })
    }

    fn g_exponent(&self, t: u64, total: u64) -> i32 {
        chi_unchecked(t, self.k1) as i32 - chi_unchecked(total - t - 2, self.k2) as i32
    }

    /// `g_T(t)` for `t` in `S_1(T)`.
    pub fn g(&self, t: u64, total: u64) -> Result<Weight> {
        let b = self.bounds(total)?;
        if t < b.lower || t >= b.upper || (t - b.lower) % 2 != 0 {
            return Err(Error::Domain(format!("split {t} is not in S1({total}) = [{}, {})", b.lower, b.upper)));
        }
        let g = pow3(self.g_exponent(t, total)) * self.weight_ratio();
        Weight::new(*g.numer(), *g.denom())
    }

    /// `rho(T)`: the smallest WSR-optimal group-1 length.
    pub fn rho(&self, total: u64) -> Result<u64> {
        let b = self.bounds(total)?;
        let one = Weight::one();
        if b.s1_is_empty() || self.g(b.lower, total)? > one {
            return Ok(b.lower);
        }
        if self.g(b.upper - 2, total)? < one {
            return Ok(b.upper);
        }
        for t in b.s1() {
            if self.g(t, total)? >= one {
                return Ok(t);
            }
        }
        unreachable!("g(F - 2) >= 1 guarantees a crossing in S1")
    }

    /// `mu(T)`: the largest WSR-optimal group-1 length. Only defined when
    /// `log3(w / (1 - w))` is an integer.
    pub fn mu(&self, total: u64) -> Result<u64> {
        if !self.has_integral_log_weight() {
            return Err(Error::Domain(format!(
                "log3(w / (1 - w)) is not an integer for w = {}",
                self.omega
            )));
        }
        let b = self.bounds(total)?;
        let one = Weight::one();
        if b.s1_is_empty() || self.g(b.lower, total)? > one {
            return Ok(b.lower);
        }
        if self.g(b.upper - 2, total)? < one {
            return Ok(b.upper);
        }
        let mut last = b.lower;
        for t in b.s1() {
            if self.g(t, total)? <= one {
                last = t;
            }
        }
        Ok(last + 2)
    }

    /// `rho(T)` through the piecewise expression in `s`, `phi(T)` and `V(T)`.
    pub fn rho_closed_form(&self, total: u64) -> Result<u64> {
        self.check_total(total)?;
        let (k1, k2, l) = (self.k1, self.k2, self.cells);
        let cap1 = l * k1 / 3;
        if total == self.users {
            return Ok(k1);
        }
        if total == self.max_total() {
            return Ok(cap1);
        }
        let s = self.s();
        let p3 = |e: u32| 3u64.pow(e);
        if 3 * p3(s) >= l {
            return Ok(if total <= k2 + cap1 { total - k2 } else { cap1 });
        }
        if total <= k2 + p3(s) * k1 {
            return Ok(total - k2);
        }
        // LK1/3 + LK2/3^(s+1), exact because 3^(s+1) divides L here.
        if total >= cap1 + l * k2 / p3(s + 1) {
            return Ok(cap1);
        }
        let m = self.depths as u32;
        let v = (0..=m - 1 - s)
            .find(|&i| total <= p3(s + i) * k1 + p3(i) * k2)
            .ok_or_else(|| Error::Domain(format!("V({total}) is undefined")))?;
        let pivot = p3(v + s - 1) * k1;
        Ok(if total <= pivot + p3(v) * k2 { pivot } else { total - p3(v) * k2 })
    }

    fn check_pair(&self, p1: &PilotAssignmentVector, p2: &PilotAssignmentVector) -> Result<()> {
        for (p, k) in [(p1, self.k1), (p2, self.k2)] {
            if p.users() != k {
                return Err(Error::GroupMismatch { expected: k, got: p.users() });
            }
            if p.cells() != self.cells {
                return Err(Error::InvalidParameter(format!(
                    "vector built for {} cells used with {} cells",
                    p.cells(),
                    self.cells
                )));
            }
        }
        Ok(())
    }

    /// `w C_sum(p1) + (1 - w) C_sum(p2)`.
    pub fn c_wsr(&self, p1: &PilotAssignmentVector, p2: &PilotAssignmentVector, rates: &DepthRates) -> Result<f64> {
        self.check_pair(p1, p2)?;
        let w = self.omega.to_f64();
        Ok(w * p1.c_sum(rates)? + (1.0 - w) * p2.c_sum(rates)?)
    }

    pub fn c_net_wsr(
        &self,
        p1: &PilotAssignmentVector,
        p2: &PilotAssignmentVector,
        rates: &DepthRates,
        n_coh: f64,
    ) -> Result<f64> {
        check_ncoh(n_coh)?;
        let total = (p1.n_pil() + p2.n_pil()) as f64;
        Ok((n_coh - total) / n_coh * self.c_wsr(p1, p2, rates)?)
    }

    /// The WSR-optimal pair for a total length, split at `rho(T)`.
    pub fn optimal_pair(&self, total: u64) -> Result<(PilotAssignmentVector, PilotAssignmentVector)> {
        let rho = self.rho(total)?;
        Ok((
            optimal_fixed_length(rho, self.k1, self.cells)?,
            optimal_fixed_length(total - rho, self.k2, self.cells)?,
        ))
    }

    /// Best WSR achievable with exactly `total` pilots.
    pub fn wsr_bar(&self, total: u64, rates: &DepthRates) -> Result<f64> {
        let (p1, p2) = self.optimal_pair(total)?;
        self.c_wsr(&p1, &p2, rates)
    }

    /// Gain `wsr_bar(T + 2) - wsr_bar(T)` predicted from the rate increments
    /// at the current leading depths of each group.
    pub fn delta(&self, total: u64, rates: &DepthRates) -> Result<f64> {
        self.check_total(total)?;
        if total == self.max_total() {
            return Err(Error::Domain(format!("no larger total than {total}")));
        }
        if rates.depths() != self.depths {
            return Err(Error::Shape { expected: self.depths, got: rates.depths() });
        }
        let rho = self.rho(total)?;
        let w = self.omega.to_f64();
        let gain = |weight: f64, length: u64, users: u64| {
            if length >= max_pilot_length(users, self.cells) {
                return None;
            }
            let d = chi_unchecked(length, users);
            Some(weight * rates.increment(d)? / 3f64.powi(d as i32))
        };
        let first = gain(w, rho, self.k1);
        let second = gain(1.0 - w, total - rho, self.k2);
        let s = self.s();
        let spread = (self.cells / 3u64.pow(s + 1)).max(1);
        let cap = self.cells * self.k1 / 3 + spread * self.k2;
        let value = match (first, second) {
            (_, Some(b)) if total >= cap => Some(b),
            (Some(a), Some(b)) => Some(a.max(b)),
            (a, b) => a.or(b),
        };
        value.ok_or_else(|| Error::Domain(format!("no group can grow beyond total {total}")))
    }

    /// Coherence-time thresholds where the optimal total steps by two.
    ///
    /// `Delta_n` is the crossing of the net-WSR curves for totals
    /// `2n + K - 2` and `2n + K`: `(2n + K + 2 wsr_bar(2n+K-2) / delta(2n+K-2)) / K`.
    pub fn thresholds(&self, rates: &DepthRates) -> Result<Thresholds> {
        let k = self.users as f64;
        let mut values = vec![0.0];
        for n in 1..=self.n_levels() {
            let prev = self.users + 2 * n as u64 - 2;
            let crossing = (prev as f64 + 2.0 + 2.0 * self.wsr_bar(prev, rates)? / self.delta(prev, rates)?) / k;
            values.push(crossing);
        }
        values.push(f64::INFINITY);
        let violations = (0..values.len() - 1).filter(|&n| values[n + 1] < values[n]).collect();
        Ok(Thresholds { values, violations })
    }

    /// Solution for a given total pilot length.
    pub fn solve_total(&self, total: u64, rates: &DepthRates, n_coh: f64) -> Result<TwoGroupSolution> {
        check_ncoh(n_coh)?;
        let rho = self.rho(total)?;
        let (p1, p2) = self.optimal_pair(total)?;
        let w = self.omega.to_f64();
        let s1 = p1.c_sum(rates)?;
        let s2 = p2.c_sum(rates)?;
        let wsr = w * s1 + (1.0 - w) * s2;
        Ok(TwoGroupSolution {
            net_wsr: (n_coh - total as f64) / n_coh * wsr,
            wsr,
            rho,
            total,
            n_index: ((total - self.users) / 2) as usize,
            group_sum_rates: [s1, s2],
            feasible: n_coh > total as f64,
            p1,
            p2,
        })
    }

    /// Net-WSR optimal assignment for `n_coh`.
    pub fn optimize(&self, n_coh: f64, rates: &DepthRates) -> Result<TwoGroupSolution> {
        check_ncoh(n_coh)?;
        let thresholds = self.thresholds(rates)?;
        self.optimize_with(n_coh, rates, &thresholds)
    }

    /// [`TwoGroupConfig::optimize`] with precomputed thresholds.
    pub fn optimize_with(&self, n_coh: f64, rates: &DepthRates, thresholds: &Thresholds) -> Result<TwoGroupSolution> {
        check_ncoh(n_coh)?;
        let n = thresholds.interval(n_coh / self.users as f64).min(self.n_levels());
        self.solve_total(self.users + 2 * n as u64, rates, n_coh)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::linear_rate_model;

    fn w(n: i64, d: i64) -> Weight {
        Weight::new(n, d).unwrap()
    }

    fn table3() -> TwoGroupConfig {
        TwoGroupConfig::new(81, 10, w(1, 5), w(7, 10)).unwrap()
    }

    #[test]
    fn config_validation() {
        assert_eq!(table3().k1(), 2);
        assert_eq!(table3().k2(), 8);
        assert!(TwoGroupConfig::new(81, 10, w(1, 3), w(7, 10)).is_err());
        assert!(TwoGroupConfig::new(81, 10, w(1, 5), w(2, 5)).is_err());
        assert!(TwoGroupConfig::new(81, 10, w(1, 5), w(1, 1)).is_err());
        assert!(TwoGroupConfig::new(81, 10, w(0, 1), w(7, 10)).is_err());
        assert!(TwoGroupConfig::new(80, 10, w(1, 5), w(7, 10)).is_err());
        assert!(TwoGroupConfig::new(81, 10, w(1, 20), w(7, 10)).is_err());
    }

    #[test]
    fn bounds_examples() {
        let cfg = table3();
        let b = cfg.bounds(16).unwrap();
        assert_eq!((b.lower, b.upper), (2, 8));
        assert_eq!(b.s0().collect::<Vec<_>>(), vec![2, 4, 6, 8]);
        assert_eq!(b.s1().collect::<Vec<_>>(), vec![2, 4, 6]);
        let b = cfg.bounds(10).unwrap();
        assert_eq!((b.lower, b.upper), (2, 2));
        assert!(b.s1_is_empty());
        let b = cfg.bounds(270).unwrap();
        assert_eq!((b.lower, b.upper), (54, 54));
        assert!(b.s1_is_empty());
        assert!(cfg.bounds(11).is_err());
        assert!(cfg.bounds(272).is_err());
    }

    #[test]
    fn s1_empty_only_at_the_ends() {
        for cells in [9, 27, 81] {
            for users in 2..=9 {
                for a in 1..users {
                    let cfg = TwoGroupConfig::new(cells, users, w(a as i64, users as i64), w(7, 10)).unwrap();
                    for t in cfg.totals() {
                        let empty = cfg.bounds(t).unwrap().s1_is_empty();
                        assert_eq!(empty, t == users || t == cfg.max_total(), "L={cells} K={users} T={t}");
                    }
                }
            }
        }
    }

    #[test]
    fn g_examples() {
        let cfg = table3();
        assert_eq!(cfg.g(6, 16).unwrap(), w(9, 7));
        assert_eq!(cfg.g(2, 16).unwrap(), w(3, 7));
        assert_eq!(cfg.g(4, 16).unwrap(), w(3, 7));
        assert!(matches!(cfg.g(8, 16), Err(Error::Domain(_))));
        assert!(matches!(cfg.g(3, 16), Err(Error::Domain(_))));
    }

    #[test]
    fn rho_examples() {
        let cfg = table3();
        assert_eq!(cfg.rho(10).unwrap(), 2);
        assert_eq!(cfg.rho(12).unwrap(), 4);
        assert_eq!(cfg.rho(14).unwrap(), 6);
        assert_eq!(cfg.rho(16).unwrap(), 6);
        assert_eq!(cfg.rho(18).unwrap(), 6);
        assert_eq!(cfg.rho(270).unwrap(), 54);
    }

    #[test]
    fn closed_form_step_through() {
        let cfg = table3();
        assert_eq!(cfg.s(), 1);
        assert_eq!(cfg.rho_closed_form(16).unwrap(), 6);
        assert_eq!(cfg.rho_closed_form(10).unwrap(), 2);
        // w = 9/10 gives s = 2; with L = 27, 3^s >= L/3.
        let heavy = TwoGroupConfig::new(27, 10, w(1, 5), w(9, 10)).unwrap();
        assert_eq!(heavy.s(), 2);
        assert_eq!(heavy.rho_closed_form(8 + 18 + 2).unwrap(), 18);
        assert_eq!(heavy.rho_closed_form(90).unwrap(), 18);
    }

    #[test]
    fn integral_log_weights() {
        let even = TwoGroupConfig::new(9, 2, w(1, 2), w(1, 2)).unwrap();
        assert!(even.has_integral_log_weight());
        assert_eq!(even.s(), 0);
        let three = TwoGroupConfig::new(9, 2, w(1, 2), w(3, 4)).unwrap();
        assert!(three.has_integral_log_weight());
        assert_eq!(three.s(), 1);
        let nine = TwoGroupConfig::new(9, 2, w(1, 2), w(9, 10)).unwrap();
        assert!(nine.has_integral_log_weight());
        assert!(!table3().has_integral_log_weight());
        assert!(matches!(table3().mu(12), Err(Error::Domain(_))));
    }

    #[test]
    fn mu_at_least_rho() {
        let cfg = TwoGroupConfig::new(27, 4, w(1, 2), w(1, 2)).unwrap();
        for t in cfg.totals() {
            assert!(cfg.mu(t).unwrap() >= cfg.rho(t).unwrap());
        }
        assert_eq!(cfg.mu(4).unwrap(), cfg.rho(4).unwrap());
    }

    #[test]
    fn wsr_examples() {
        let cfg = table3();
        let rates = linear_rate_model(2.0, 6.0, 4).unwrap();
        let p1 = PilotAssignmentVector::new(vec![2, 0, 0, 0], 2, 81).unwrap();
        let p2 = PilotAssignmentVector::new(vec![8, 0, 0, 0], 8, 81).unwrap();
        assert!((cfg.c_wsr(&p1, &p2, &rates).unwrap() - 7.6).abs() < 1e-12);
        assert!(matches!(cfg.c_wsr(&p2, &p1, &rates), Err(Error::GroupMismatch { .. })));
        assert_eq!(cfg.c_net_wsr(&p1, &p2, &rates, 10.0).unwrap(), 0.0);
        assert!(cfg.c_net_wsr(&p1, &p2, &rates, -1.0).is_err());
        assert!((cfg.wsr_bar(10, &rates).unwrap() - (0.7 * 2.0 * 2.0 + 0.3 * 8.0 * 2.0)).abs() < 1e-12);
        let (a, b) = cfg.optimal_pair(12).unwrap();
        let net = cfg.c_net_wsr(&a, &b, &rates, 20.0).unwrap();
        assert!((net - 0.4 * cfg.c_wsr(&a, &b, &rates).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn delta_example() {
        let cfg = table3();
        let rates = linear_rate_model(2.0, 6.0, 4).unwrap();
        // Both groups lead at depth 0: max(0.7, 0.3) * 6.
        assert!((cfg.delta(10, &rates).unwrap() - 4.2).abs() < 1e-12);
        assert!(cfg.delta(270, &rates).is_err());
    }

    #[test]
    fn optimize_table3_rows() {
        let cfg = table3();
        let rates = linear_rate_model(3.9, 6.0, 4).unwrap();
        let sol = cfg.optimize(5.0, &rates).unwrap();
        assert_eq!(sol.total, 10);
        assert!(!sol.feasible);
        assert_eq!(sol.p1.entries(), &[2, 0, 0, 0]);
        let sol = cfg.optimize(1e9, &rates).unwrap();
        assert_eq!(sol.total, 270);
        assert_eq!(sol.p1.entries(), &[0, 0, 0, 54]);
        assert_eq!(sol.p2.entries(), &[0, 0, 0, 216]);
        assert!(cfg.optimize(0.0, &rates).is_err());
    }

    #[test]
    fn thresholds_boundaries() {
        let cfg = TwoGroupConfig::new(9, 2, w(1, 2), w(7, 10)).unwrap();
        let rates = linear_rate_model(2.0, 6.0, 2).unwrap();
        let th = cfg.thresholds(&rates).unwrap();
        assert_eq!(th.values.len(), cfg.n_levels() + 2);
        assert_eq!(th.values[0], 0.0);
        assert!(th.values.last().unwrap().is_infinite());
        assert_eq!(th.interval(0.5 * th.values[1]), 0);
        assert_eq!(th.interval(th.values[1]), 1);
    }
}
