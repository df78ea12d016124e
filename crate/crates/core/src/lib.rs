//! Pilot reuse planning for multi-cell massive MIMO networks with
//! prioritized user groups.
//!
//! The crate is organized bottom-up:
//!
//! * [`lattice`]: the hexagonal cell torus and its hierarchical 3-way
//!   partition into pilot-sharing groups.
//! * [`channel`]: path-loss, the pilot-contaminated asymptotic rate and the
//!   Monte-Carlo estimator of the per-depth rate table.
//! * [`assignment`]: pilot assignment vectors and the closed-form optimum
//!   for a fixed pilot length.
//! * [`wsr2`]: the two-group weighted-sum-rate optimizer.
//! * [`multigroup`]: greedy marginal allocation for three or more groups.
//! * [`oracle`]: exhaustive enumerators used to certify the closed forms.

pub mod assignment;
pub mod channel;
mod error;
pub mod lattice;
pub mod multigroup;
pub mod oracle;
pub mod weight;
pub mod wsr2;

pub use assignment::PilotAssignmentVector;
pub use channel::{ChannelParams, DepthRates, RateProvenance};
pub use error::{Error, Result};
pub use lattice::{CellCoord, CellGrid, Point2D};
pub use multigroup::{IncrementRule, MultiGroupConfig, MultiGroupSolution};
pub use weight::Weight;
pub use wsr2::{Thresholds, TwoGroupConfig, TwoGroupSolution};
