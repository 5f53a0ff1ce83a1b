//! Validated scalar parameters shared by every module.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A probability in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Probability(f64);

impl Probability {
    pub const ZERO: Probability = Probability(0.0);
    pub const ONE: Probability = Probability(1.0);

    pub fn new(p: f64) -> Result<Self> {
        if p.is_finite() && (0.0..=1.0).contains(&p) {
            Ok(Probability(p))
        } else {
            Err(Error::parameter("probability", format!("{p} is outside [0, 1]")))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for Probability {
    type Error = Error;
    fn try_from(p: f64) -> Result<Self> {
        Probability::new(p)
    }
}

impl From<Probability> for f64 {
    fn from(p: Probability) -> f64 {
        p.0
    }
}

impl fmt::Display for Probability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Charging efficiency: the fraction of a banked unit still usable when it is
/// spent later. Lies in `(0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Efficiency(f64);

impl Efficiency {
    /// Lithium cells charged from weak harvesters rarely exceed 75%.
    pub const DEFAULT: Efficiency = Efficiency(0.75);

    pub fn new(eta: f64) -> Result<Self> {
        if eta.is_finite() && eta > 0.0 && eta <= 1.0 {
            Ok(Efficiency(eta))
        } else {
            Err(Error::parameter("eta", format!("{eta} is outside (0, 1]")))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl Default for Efficiency {
    fn default() -> Self {
        Efficiency::DEFAULT
    }
}

impl TryFrom<f64> for Efficiency {
    type Error = Error;
    fn try_from(eta: f64) -> Result<Self> {
        Efficiency::new(eta)
    }
}

impl From<Efficiency> for f64 {
    fn from(eta: Efficiency) -> f64 {
        eta.0
    }
}

impl fmt::Display for Efficiency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}
