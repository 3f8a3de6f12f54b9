use serde::{Deserialize, Serialize};

use crate::error::{PumpError, Result};

/// Inverse temperature used when none is given.
pub const DEFAULT_BETA: f64 = 1e3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum DistributionMode {
    #[serde(rename = "finite_T")]
    FiniteT,
    #[default]
    #[serde(rename = "zero_T")]
    ZeroT,
}

impl std::fmt::Display for DistributionMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            DistributionMode::FiniteT => "finite_T",
            DistributionMode::ZeroT => "zero_T",
        })
    }
}

impl std::str::FromStr for DistributionMode {
    type Err = PumpError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "finite_T" | "finite_t" => Ok(DistributionMode::FiniteT),
            "zero_T" | "zero_t" => Ok(DistributionMode::ZeroT),
            _ => Err(PumpError::invalid("mode", format!("unknown mode {s:?}"))),
        }
    }
}

/// Fermi occupation `1/(e^{beta (E - e_max)} + 1)`.
///
/// For pairs `e_max` is the maximum pair energy; for one-body problems it is
/// the Fermi level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FermiDistribution {
    pub e_max: f64,
    pub beta: f64,
    pub mode: DistributionMode,
}

pub type PairDistribution = FermiDistribution;

impl FermiDistribution {
    pub fn zero_t(e_max: f64) -> Result<Self> {
        Self::new(e_max, DEFAULT_BETA, DistributionMode::ZeroT)
    }

    pub fn finite_t(e_max: f64, beta: f64) -> Result<Self> {
        Self::new(e_max, beta, DistributionMode::FiniteT)
    }

    pub fn new(e_max: f64, beta: f64, mode: DistributionMode) -> Result<Self> {
        if !e_max.is_finite() {
            return Err(PumpError::invalid("maximum energy", format!("{e_max}")));
        }
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(PumpError::invalid("beta", format!("{beta} must be positive")));
        }
        Ok(FermiDistribution { e_max, beta, mode })
    }

    pub fn occupation(&self, energy: f64) -> f64 {
        match self.mode {
            DistributionMode::ZeroT => {
                if energy < self.e_max {
                    1.0
                } else if energy > self.e_max {
                    0.0
                } else {
                    0.5
                }
            }
            DistributionMode::FiniteT => fermi(self.beta * (energy - self.e_max)),
        }
    }

    /// `-dF/dE`, a normalised bump of width `~1/beta` around `e_max`.
    pub fn minus_derivative(&self, energy: f64) -> f64 {
        let x = self.beta * (energy - self.e_max);
        let f = fermi(x);
        self.beta * f * (1.0 - f)
    }
}

fn fermi(x: f64) -> f64 {
    if x > 0.0 {
        let e = (-x).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + x.exp())
    }
}
