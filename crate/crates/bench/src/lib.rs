//! Shared inputs for the benchmarks.

use pump_core::{LatticeModel, PairDistribution, PumpCycle};

/// Reference square cycle `[0.5, 4]^2`.
pub fn reference_square() -> PumpCycle {
    PumpCycle::square(0.5, 4.0, 1.0).expect("valid square")
}

pub fn model(m: u32) -> LatticeModel {
    LatticeModel::new(m).expect("m >= 1")
}

pub fn zero_t(e_max: f64) -> PairDistribution {
    PairDistribution::zero_t(e_max).expect("finite energy")
}

pub fn finite_t(e_max: f64, beta: f64) -> PairDistribution {
    PairDistribution::finite_t(e_max, beta).expect("positive beta")
}
