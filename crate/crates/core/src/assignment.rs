//! Pilot assignment vectors.
//!
//! Entry `p_i` counts the depth-`i` leaves of the partition tree, i.e. the
//! pilots reused by `L 3^-i` cells each. A vector serving `K` users per cell
//! is valid when `0 <= p_i <= K 3^i` and `sum p_i 3^-i = K`; the second
//! condition is checked in integers after scaling by `3^(m-1)`.

use serde::{Deserialize, Serialize};

use crate::channel::DepthRates;
use crate::{Error, Result};

/// Number of partition depths `m` for `cells = 3^m` (at least 9 cells).
pub fn partition_depths(cells: u64) -> Result<usize> {
    let mut m = 0;
    let mut n = cells;
    while n > 1 && n % 3 == 0 {
        n /= 3;
        m += 1;
    }
    if n != 1 || m < 2 {
        return Err(Error::InvalidCellCount(cells));
    }
    Ok(m)
}

/// Largest pilot length a group of `users` can use, `L K / 3`.
pub fn max_pilot_length(users: u64, cells: u64) -> u64 {
    cells * users / 3
}

/// Feasible pilot lengths `K, K+2, ..., LK/3`.
pub fn pilot_lengths(users: u64, cells: u64) -> impl Iterator<Item = u64> {
    (users..=max_pilot_length(users, cells)).step_by(2)
}

fn check_length(length: u64, users: u64, cells: u64) -> Result<()> {
    partition_depths(cells)?;
    let ok = users >= 1
        && length >= users
        && length <= max_pilot_length(users, cells)
        && (length - users) % 2 == 0;
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidLength { length, users, cells })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PilotAssignmentVector {
    entries: Vec<u64>,
    users: u64,
    cells: u64,
}

impl PilotAssignmentVector {
    /// Wraps `entries` for `users` per cell on `cells` cells. Only the shape
    /// is checked here; see [`PilotAssignmentVector::is_valid`].
    pub fn new(entries: Vec<u64>, users: u64, cells: u64) -> Result<Self> {
        let m = partition_depths(cells)?;
        if entries.len() != m {
            return Err(Error::Shape { expected: m, got: entries.len() });
        }
        Ok(PilotAssignmentVector { entries, users, cells })
    }

    pub fn entries(&self) -> &[u64] {
        &self.entries
    }

    pub fn users(&self) -> u64 {
        self.users
    }

    pub fn cells(&self) -> u64 {
        self.cells
    }

    /// Membership in the set of valid vectors for `(L, K)`.
    pub fn is_valid(&self) -> bool {
        let m = self.entries.len() as u32;
        let mut scaled = 0u64;
        for (i, &p) in self.entries.iter().enumerate() {
            if p > self.users * 3u64.pow(i as u32) {
                return false;
            }
            scaled += p * 3u64.pow(m - 1 - i as u32);
        }
        scaled == self.users * 3u64.pow(m - 1)
    }

    /// Number of pilots used, `sum p_i`.
    pub fn n_pil(&self) -> u64 {
        self.entries.iter().sum()
    }

    fn ensure_valid(&self) -> Result<()> {
        if self.is_valid() {
            Ok(())
        } else {
            Err(Error::InvalidVector(self.entries.clone()))
        }
    }

    /// Per-cell sum rate `sum 3^-i p_i C_i`.
    pub fn c_sum(&self, rates: &DepthRates) -> Result<f64> {
        self.ensure_valid()?;
        if rates.depths() != self.entries.len() {
            return Err(Error::Shape { expected: self.entries.len(), got: rates.depths() });
        }
        Ok(self
            .entries
            .iter()
            .zip(rates.rates())
            .enumerate()
            .map(|(i, (&p, &c))| p as f64 * c / 3f64.powi(i as i32))
            .sum())
    }

    /// Sum rate discounted by the fraction of `n_coh` spent on pilots. The
    /// result is negative when the pilots do not fit in `n_coh`.
    pub fn c_net(&self, rates: &DepthRates, n_coh: f64) -> Result<f64> {
        check_ncoh(n_coh)?;
        Ok((n_coh - self.n_pil() as f64) / n_coh * self.c_sum(rates)?)
    }
}

pub(crate) fn check_ncoh(n_coh: f64) -> Result<()> {
    if n_coh.is_finite() && n_coh > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("normalized coherence time must be positive, got {n_coh}")))
    }
}

/// Smallest `k` with `sum_{i<=k} K 3^i > (n - K) / 2`, for any `n >= K`.
pub(crate) fn chi_unchecked(length: u64, users: u64) -> usize {
    let half = (length - users) / 2;
    let mut acc = 0u64;
    let mut k = 0;
    loop {
        acc += users * 3u64.pow(k as u32);
        if acc > half {
            return k;
        }
        k += 1;
    }
}

/// Depth of the shallowest leaf of the optimal fixed-length assignment.
pub fn chi(length: u64, users: u64, cells: u64) -> Result<usize> {
    check_length(length, users, cells)?;
    Ok(chi_unchecked(length, users))
}

/// The sum-rate maximizing assignment among vectors using exactly `length`
/// pilots. Only depths `chi` and `chi + 1` are occupied.
pub fn optimal_fixed_length(length: u64, users: u64, cells: u64) -> Result<PilotAssignmentVector> {
    check_length(length, users, cells)?;
    let m = partition_depths(cells)?;
    let half = (length - users) / 2;
    let k = chi_unchecked(length, users);
    // prefix[j] = sum_{t<j} K 3^t
    let prefix = |j: usize| users * (3u64.pow(j as u32) - 1) / 2;
    let mut entries = vec![0u64; m];
    entries[k] = prefix(k + 1) - half;
    let deeper = 3 * (half - prefix(k));
    if k + 1 < m {
        entries[k + 1] = deeper;
    } else {
        debug_assert_eq!(deeper, 0);
    }
    PilotAssignmentVector::new(entries, users, cells)
}
