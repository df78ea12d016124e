//! Slow-fading path loss, the pilot-contaminated asymptotic rate, and the
//! Monte-Carlo estimator of the per-depth rate table `C_0 < ... < C_{m-1}`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::lattice::{sample_unit_offset, CellGrid};
use crate::{Error, Result};

/// `distance^-gamma`.
pub fn slow_fading(distance: f64, gamma: f64) -> Result<f64> {
    if !(distance > 0.0) {
        return Err(Error::DegenerateGeometry(distance));
    }
    Ok(distance.powf(-gamma))
}

/// Rate of a user whose pilot is reused by `interferers`, in the limit of
/// infinitely many base-station antennas: `log2(1 + b_home^2 / sum b_l^2)`.
pub fn asymptotic_rate(beta_home: f64, interferers: &[f64]) -> Result<f64> {
    if interferers.is_empty() {
        return Err(Error::Monopoly);
    }
    if !(beta_home > 0.0) || interferers.iter().any(|&b| !(b > 0.0)) {
        return Err(Error::InvalidParameter("slow-fading coefficients must be positive".into()));
    }
    // Normalize by the home coefficient so that large exponents do not
    // underflow the squared terms.
    let interference: f64 = interferers.iter().map(|&b| (b / beta_home).powi(2)).sum();
    Ok((1.0 + 1.0 / interference).log2())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    pub gamma: f64,
    pub trials: u64,
    pub seed: u64,
}

impl ChannelParams {
    pub fn new(gamma: f64, trials: u64, seed: u64) -> Result<Self> {
        if !(2.0..=4.0).contains(&gamma) {
            return Err(Error::InvalidParameter(format!("path-loss exponent must lie in [2, 4], got {gamma}")));
        }
        if trials == 0 {
            return Err(Error::InvalidParameter("at least one trial is required".into()));
        }
        Ok(ChannelParams { gamma, trials, seed })
    }
}

/// Where a rate table came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum RateProvenance {
    MonteCarlo { cells: u64, gamma: f64, hole_ratio: f64, trials: u64, seed: u64 },
    LinearModel { c0: f64, slope: f64 },
    Supplied,
}

/// Per-depth asymptotic user rates in bits/s/Hz, strictly increasing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DepthRates {
    rates: Vec<f64>,
    std_errors: Vec<f64>,
    provenance: RateProvenance,
}

impl DepthRates {
    pub fn new(rates: Vec<f64>, std_errors: Vec<f64>, provenance: RateProvenance) -> Result<Self> {
        if rates.len() < 2 {
            return Err(Error::InvalidParameter("a rate table needs at least two depths".into()));
        }
        if std_errors.len() != rates.len() {
            return Err(Error::Shape { expected: rates.len(), got: std_errors.len() });
        }
        if rates.iter().any(|&c| !(c.is_finite() && c > 0.0)) {
            return Err(Error::InvalidParameter(format!("rates must be finite and positive: {rates:?}")));
        }
        if rates.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter(format!("rates must be strictly increasing: {rates:?}")));
        }
        Ok(DepthRates { rates, std_errors, provenance })
    }

    /// Rates given directly, without error estimates.
    pub fn from_values(rates: Vec<f64>) -> Result<Self> {
        let n = rates.len();
        Self::new(rates, vec![0.0; n], RateProvenance::Supplied)
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    pub fn std_errors(&self) -> &[f64] {
        &self.std_errors
    }

    pub fn provenance(&self) -> &RateProvenance {
        &self.provenance
    }

    pub fn depths(&self) -> usize {
        self.rates.len()
    }

    /// `C_{d+1} - C_d`.
    pub fn increment(&self, depth: usize) -> Option<f64> {
        Some(self.rates.get(depth + 1)? - self.rates.get(depth)?)
    }
}

/// `C_i = c0 + slope * i` for `i < depths`.
pub fn linear_rate_model(c0: f64, slope: f64, depths: usize) -> Result<DepthRates> {
    if depths < 2 {
        return Err(Error::InvalidParameter(format!("at least two depths are required, got {depths}")));
    }
    if !(slope > 0.0) {
        return Err(Error::InvalidParameter(format!("slope must be positive, got {slope}")));
    }
    let rates = (0..depths).map(|i| c0 + slope * i as f64).collect();
    DepthRates::new(rates, vec![0.0; depths], RateProvenance::LinearModel { c0, slope })
}

/// Random stream for one trial. Streams are keyed by `(seed, depth, trial)`
/// so results do not depend on how trials are spread over workers.
pub fn trial_rng(seed: u64, depth: usize, trial: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&(depth as u64).to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(trial);
    rng
}

/// Rate of the home user (cell 0) at `depth` for one draw of user
/// positions. Geometry is evaluated in units of the cell radius, so the
/// result is independent of the radius.
pub fn single_trial(grid: &CellGrid, depth: usize, gamma: f64, rng: &mut ChaCha8Rng) -> Result<f64> {
    let home = grid.cells()[0];
    let group = grid.pilot_group(home, depth)?;
    let home_bs = grid.unit_center(home);
    let hole = grid.hole_ratio();

    let user = sample_unit_offset(hole, rng);
    let beta_home = slow_fading(user.norm(), gamma)?;
    let mut interferers = Vec::with_capacity(group.len() - 1);
    for &cell in group.iter().filter(|&&c| c != home) {
        let offset = sample_unit_offset(hole, rng);
        let center = grid.unit_center(cell);
        let pos = crate::lattice::Point2D::new(center.x + offset.x, center.y + offset.y);
        interferers.push(slow_fading(grid.unit_distance(pos, home_bs), gamma)?);
    }
    asymptotic_rate(beta_home, &interferers)
}

/// Monte-Carlo estimate of `C_i` for every depth, with standard errors.
pub fn estimate_depth_rates(grid: &CellGrid, params: &ChannelParams) -> Result<DepthRates> {
    let mut means = Vec::with_capacity(grid.depths());
    let mut errors = Vec::with_capacity(grid.depths());
    for depth in 0..grid.depths() {
        let samples = (0..params.trials)
            .into_par_iter()
            .map(|trial| {
                let mut rng = trial_rng(params.seed, depth, trial);
                single_trial(grid, depth, params.gamma, &mut rng)
            })
            .collect::<Result<Vec<f64>>>()?;
        let (mean, se) = mean_and_std_error(&samples);
        means.push(mean);
        errors.push(se);
    }
    let provenance = RateProvenance::MonteCarlo {
        cells: grid.num_cells() as u64,
        gamma: params.gamma,
        hole_ratio: grid.hole_ratio(),
        trials: params.trials,
        seed: params.seed,
    };
    DepthRates::new(means, errors, provenance)
}

/// Sequential sums in trial order.
fn mean_and_std_error(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    if samples.len() < 2 {
        return (mean, 0.0);
    }
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}
