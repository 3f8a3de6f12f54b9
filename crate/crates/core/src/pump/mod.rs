//! Pumped singlets per cycle and the one-body reduction.

pub mod adiabatic;
pub mod cycle;
pub mod distribution;
pub mod engine;
pub mod single_particle;
pub mod sweep;

pub use adiabatic::{adiabaticity_check, one_body_adiabaticity_check, AdiabaticityReport};
pub use cycle::{Orientation, PumpCycle};
pub use distribution::{DistributionMode, FermiDistribution, PairDistribution};
pub use engine::{
    loop_kernel_integral, pumped_singlets, pumped_singlets_timeparam, Diagnostics, EnergyRecord,
    LegRecord, PumpConfig, PumpResult, Schedule,
};
pub use single_particle::single_particle_pumped_charge;
pub use sweep::{energy_sweep, footprint_sweep, EnergyCell, FootprintCell};
