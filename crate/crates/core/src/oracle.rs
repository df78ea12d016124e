//! Exhaustive search over pilot assignment vectors.
//!
//! These enumerators share no logic with the closed forms they certify:
//! they walk every valid vector, evaluate the objective directly and keep
//! all maximizers.

use serde::{Deserialize, Serialize};

use crate::assignment::{optimal_fixed_length, partition_depths, PilotAssignmentVector};
use crate::channel::DepthRates;
use crate::wsr2::TwoGroupConfig;
use crate::weight::Weight;
use crate::{Error, Result};

/// Relative tolerance for calling two objective values equal.
pub const REL_TOL: f64 = 1e-9;

pub fn approx_eq(a: f64, b: f64) -> bool {
    (a - b).abs() <= REL_TOL * a.abs().max(b.abs()).max(1e-12)
}

fn guard(cells: u64, users: u64, allow_large: bool) -> Result<()> {
    if allow_large || (matches!(cells, 9 | 27) && users <= 6) {
        Ok(())
    } else {
        Err(Error::Size(format!("L = {cells}, K = {users} exceeds L in {{9, 27}}, K <= 6")))
    }
}

/// Lexicographic walk over all valid vectors for `(L, K)`.
#[derive(Debug, Clone)]
pub struct ValidVectors {
    entries: Vec<u64>,
    weights: Vec<u64>,
    caps: Vec<u64>,
    target: u64,
    users: u64,
    cells: u64,
    length: Option<u64>,
    done: bool,
}

impl ValidVectors {
    fn new(cells: u64, users: u64, length: Option<u64>) -> Result<Self> {
        let m = partition_depths(cells)?;
        let weights: Vec<u64> = (0..m).map(|i| 3u64.pow((m - 1 - i) as u32)).collect();
        let caps: Vec<u64> = (0..m).map(|i| users * 3u64.pow(i as u32)).collect();
        let target = users * weights[0];
        let mut entries = vec![0; m];
        entries[m - 1] = target;
        Ok(ValidVectors { entries, weights, caps, target, users, cells, length, done: false })
    }

    /// Moves to the next vector; the last entry always absorbs the remainder.
    fn advance(&mut self) {
        let m = self.entries.len();
        for j in (0..m - 1).rev() {
            let used: u64 = (0..j).map(|i| self.entries[i] * self.weights[i]).sum();
            let room = (self.target - used) / self.weights[j];
            if self.entries[j] < self.caps[j].min(room) {
                self.entries[j] += 1;
                for e in &mut self.entries[j + 1..] {
                    *e = 0;
                }
                let used: u64 = (0..=j).map(|i| self.entries[i] * self.weights[i]).sum();
                self.entries[m - 1] = self.target - used;
                return;
            }
        }
        self.done = true;
    }
}

impl Iterator for ValidVectors {
    type Item = PilotAssignmentVector;

    fn next(&mut self) -> Option<Self::Item> {
        while !self.done {
            let current = self.entries.clone();
            self.advance();
            let n: u64 = current.iter().sum();
            if self.length.is_none_or(|l| l == n) {
                return Some(
                    PilotAssignmentVector::new(current, self.users, self.cells).expect("shape fixed at construction"),
                );
            }
        }
        None
    }
}

/// Every valid vector for `(L, K)`, optionally only those using `length`
/// pilots. Instances beyond `L in {9, 27}, K <= 6` need `allow_large`.
pub fn enumerate_valid(cells: u64, users: u64, length: Option<u64>, allow_large: bool) -> Result<ValidVectors> {
    guard(cells, users, allow_large)?;
    if users == 0 {
        return Err(Error::InvalidParameter("at least one user is required".into()));
    }
    ValidVectors::new(cells, users, length)
}

/// Number of valid vectors (optionally with a given pilot count) by dynamic
/// programming over the scaled leaf-weight sum.
pub fn count_valid(cells: u64, users: u64, length: Option<u64>) -> Result<u64> {
    let m = partition_depths(cells)?;
    let target = (users * 3u64.pow(m as u32 - 1)) as usize;
    let max_len = (cells * users / 3) as usize;
    // ways[s][n]: vectors over the processed depths with scaled sum s and n pilots.
    let mut ways = vec![vec![0u64; max_len + 1]; target + 1];
    ways[0][0] = 1;
    for i in 0..m {
        let weight = 3usize.pow((m - 1 - i) as u32);
        let cap = users as usize * 3usize.pow(i as u32);
        let mut next = vec![vec![0u64; max_len + 1]; target + 1];
        for s in 0..=target {
            for n in 0..=max_len {
                let w = ways[s][n];
                if w == 0 {
                    continue;
                }
                for p in 0..=cap {
                    let (s2, n2) = (s + p * weight, n + p);
                    if s2 > target || n2 > max_len {
                        break;
                    }
                    next[s2][n2] += w;
                }
            }
        }
        ways = next;
    }
    Ok(match length {
        Some(l) => ways[target].get(l as usize).copied().unwrap_or(0),
        None => ways[target].iter().sum(),
    })
}

/// One candidate: the vectors of every group.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub total: u64,
    pub vectors: Vec<Vec<u64>>,
}

impl Witness {
    fn of(vectors: &[&PilotAssignmentVector]) -> Self {
        Witness {
            total: vectors.iter().map(|p| p.n_pil()).sum(),
            vectors: vectors.iter().map(|p| p.entries().to_vec()).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub cells: u64,
    pub users: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub group_users: Option<[u64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega: Option<Weight>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub length: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_coh: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchReport {
    pub kind: String,
    pub instance: Instance,
    pub best_value: f64,
    /// Every candidate within [`REL_TOL`] of the best value.
    pub witnesses: Vec<Witness>,
    pub candidates: u64,
    pub expected_candidates: Option<u64>,
    pub closed_form_value: f64,
    pub closed_form_witness: Witness,
    /// The closed form attains the exhaustive optimum.
    pub agrees: bool,
}

struct Best {
    value: f64,
    witnesses: Vec<(Witness, f64)>,
    candidates: u64,
}

impl Best {
    fn new() -> Self {
        Best { value: f64::NEG_INFINITY, witnesses: Vec::new(), candidates: 0 }
    }

    fn offer(&mut self, value: f64, witness: impl FnOnce() -> Witness) {
        self.candidates += 1;
        if approx_eq(value, self.value) {
            self.witnesses.push((witness(), value));
            self.value = self.value.max(value);
        } else if value > self.value {
            self.value = value;
            self.witnesses = vec![(witness(), value)];
        }
    }

    /// Maximizers, dropping any that fell out of tolerance as the maximum
    /// crept up.
    fn maximizers(&self) -> Vec<Witness> {
        self.witnesses.iter().filter(|(_, v)| approx_eq(*v, self.value)).map(|(w, _)| w.clone()).collect()
    }
}

/// Argmax of the sum rate over all vectors with `length` pilots.
pub fn brute_fixed_length(length: u64, users: u64, cells: u64, rates: &DepthRates, allow_large: bool) -> Result<SearchReport> {
    let mut best = Best::new();
    for p in enumerate_valid(cells, users, Some(length), allow_large)? {
        best.offer(p.c_sum(rates)?, || Witness::of(&[&p]));
    }
    if best.candidates == 0 {
        return Err(Error::InvalidLength { length, users, cells });
    }
    let closed = optimal_fixed_length(length, users, cells)?;
    let closed_value = closed.c_sum(rates)?;
    Ok(SearchReport {
        kind: "fixed-length".into(),
        instance: Instance { cells, users, group_users: None, omega: None, length: Some(length), n_coh: None },
        agrees: approx_eq(closed_value, best.value),
        best_value: best.value,
        witnesses: best.maximizers(),
        candidates: best.candidates,
        expected_candidates: Some(count_valid(cells, users, Some(length))?),
        closed_form_value: closed_value,
        closed_form_witness: Witness::of(&[&closed]),
    })
}

/// All pairs `(p1, p2)` of valid vectors with `n_pil(p1) + n_pil(p2) = total`.
fn pairs(cfg: &TwoGroupConfig, total: u64, allow_large: bool) -> Result<Vec<(PilotAssignmentVector, PilotAssignmentVector)>> {
    guard(cfg.cells(), cfg.users(), allow_large)?;
    let first: Vec<_> = enumerate_valid(cfg.cells(), cfg.k1(), None, true)?.collect();
    let second: Vec<_> = enumerate_valid(cfg.cells(), cfg.k2(), None, true)?.collect();
    let mut out = Vec::new();
    for a in &first {
        for b in second.iter().filter(|b| a.n_pil() + b.n_pil() == total) {
            out.push((a.clone(), b.clone()));
        }
    }
    Ok(out)
}

fn pair_instance(cfg: &TwoGroupConfig, length: Option<u64>, n_coh: Option<f64>) -> Instance {
    Instance {
        cells: cfg.cells(),
        users: cfg.users(),
        group_users: Some([cfg.k1(), cfg.k2()]),
        omega: Some(cfg.omega()),
        length,
        n_coh,
    }
}

fn expected_pairs(cfg: &TwoGroupConfig, total: u64) -> Result<u64> {
    let mut count = 0;
    for t in crate::assignment::pilot_lengths(cfg.k1(), cfg.cells()) {
        if t > total {
            break;
        }
        count += count_valid(cfg.cells(), cfg.k1(), Some(t))? * count_valid(cfg.cells(), cfg.k2(), Some(total - t))?;
    }
    Ok(count)
}

/// Maximum WSR over every pair using `total` pilots, with all maximizers.
pub fn brute_two_group(total: u64, cfg: &TwoGroupConfig, rates: &DepthRates, allow_large: bool) -> Result<SearchReport> {
    let candidates = pairs(cfg, total, allow_large)?;
    if candidates.is_empty() {
        return Err(Error::InvalidLength { length: total, users: cfg.users(), cells: cfg.cells() });
    }
    let mut best = Best::new();
    for (a, b) in &candidates {
        best.offer(cfg.c_wsr(a, b, rates)?, || Witness::of(&[a, b]));
    }
    let (p1, p2) = cfg.optimal_pair(total)?;
    let closed_value = cfg.c_wsr(&p1, &p2, rates)?;
    Ok(SearchReport {
        kind: "two-group".into(),
        instance: pair_instance(cfg, Some(total), None),
        agrees: approx_eq(closed_value, best.value),
        best_value: best.value,
        witnesses: best.maximizers(),
        candidates: best.candidates,
        expected_candidates: Some(expected_pairs(cfg, total)?),
        closed_form_value: closed_value,
        closed_form_witness: Witness::of(&[&p1, &p2]),
    })
}

/// Global maximum of the net WSR over every total and every pair.
pub fn brute_ncoh(n_coh: f64, cfg: &TwoGroupConfig, rates: &DepthRates, allow_large: bool) -> Result<SearchReport> {
    crate::assignment::check_ncoh(n_coh)?;
    let mut best = Best::new();
    let mut expected = 0;
    for total in cfg.totals() {
        expected += expected_pairs(cfg, total)?;
        for (a, b) in pairs(cfg, total, allow_large)? {
            best.offer(cfg.c_net_wsr(&a, &b, rates, n_coh)?, || Witness::of(&[&a, &b]));
        }
    }
    let sol = cfg.optimize(n_coh, rates)?;
    Ok(SearchReport {
        kind: "n-coh".into(),
        instance: pair_instance(cfg, None, Some(n_coh)),
        agrees: approx_eq(sol.net_wsr, best.value),
        best_value: best.value,
        witnesses: best.maximizers(),
        candidates: best.candidates,
        expected_candidates: Some(expected),
        closed_form_value: sol.net_wsr,
        closed_form_witness: Witness::of(&[&sol.p1, &sol.p2]),
    })
}
