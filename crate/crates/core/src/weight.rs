//! Exact rational weights and ratios.
//!
//! Group weights and population ratios are kept as exact fractions so that
//! comparisons such as `3^k (1 - w) >= w` are decided without rounding.

use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::{Error, Result};

/// A nonnegative exact fraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Weight(Ratio<i64>);

impl Weight {
    pub fn new(numer: i64, denom: i64) -> Result<Self> {
        if denom == 0 {
            return Err(Error::InvalidParameter("zero denominator".into()));
        }
        let r = Ratio::new(numer, denom);
        if r.is_negative() {
            return Err(Error::InvalidParameter(format!("negative fraction {r}")));
        }
        Ok(Weight(r))
    }

    pub fn zero() -> Self {
        Weight(Ratio::zero())
    }

    pub fn one() -> Self {
        Weight(Ratio::one())
    }

    pub fn numer(&self) -> i64 {
        *self.0.numer()
    }

    pub fn denom(&self) -> i64 {
        *self.0.denom()
    }

    pub fn ratio(&self) -> Ratio<i64> {
        self.0
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    /// `1 - self`; fails when `self > 1`.
    pub fn complement(&self) -> Result<Self> {
        let c = Ratio::one() - self.0;
        if c.is_negative() {
            return Err(Error::InvalidParameter(format!("{self} exceeds 1")));
        }
        Ok(Weight(c))
    }

    /// `self * n` when it is an integer.
    pub fn times_integer(&self, n: u64) -> Option<u64> {
        let v = self.0 * Ratio::from_integer(n as i64);
        v.is_integer().then(|| *v.numer() as u64)
    }
}

/// `3^k` as an exact ratio, `k` may be negative.
pub(crate) fn pow3(k: i32) -> Ratio<i64> {
    let p = 3i64.pow(k.unsigned_abs());
    if k >= 0 {
        Ratio::from_integer(p)
    } else {
        Ratio::new(1, p)
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numer(), self.denom())
    }
}

impl FromStr for Weight {
    type Err = Error;

    /// Accepts `"num/den"`, an integer, or a plain decimal such as `"0.7"`
    /// (converted exactly).
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::InvalidParameter(format!("cannot parse fraction {s:?}"));
        if let Some((n, d)) = s.split_once('/') {
            let n: i64 = n.trim().parse().map_err(|_| bad())?;
            let d: i64 = d.trim().parse().map_err(|_| bad())?;
            return Weight::new(n, d);
        }
        if let Some((int, frac)) = s.split_once('.') {
            if frac.is_empty() || frac.len() > 12 || !frac.bytes().all(|b| b.is_ascii_digit()) {
                return Err(bad());
            }
            let int: i64 = if int.is_empty() { 0 } else { int.parse().map_err(|_| bad())? };
            let den = 10i64.pow(frac.len() as u32);
            let num: i64 = frac.parse().map_err(|_| bad())?;
            return Weight::new(int * den + num, den);
        }
        let n: i64 = s.parse().map_err(|_| bad())?;
        Weight::new(n, 1)
    }
}

impl Serialize for Weight {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Weight {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
