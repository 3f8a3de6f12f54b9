//! Adiabatic pumping of spin-singlet electron pairs through two on-site
//! interaction impurities on a tight-binding chain.
//!
//! The pipeline runs lattice Green's functions ([`lattice_green`]) into the
//! impurity T-matrices and pumping kernel ([`impurity`]), which the
//! [`pump`] engine integrates around a cycle in parameter space. The
//! [`oracle`] module holds brute-force finite-lattice checks and
//! [`acceptance`] bundles them into a pass/fail suite.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too; the
// Gauss-Kronrod nodes are quoted at their published precision.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod acceptance;
pub mod error;
pub mod impurity;
pub mod lattice_green;
pub mod oracle;
pub mod pump;
pub mod quadrature;

pub use error::{PumpError, Result};
pub use impurity::{GreenConvention, ImpurityState, KernelConfig, KernelValue, SignPairing};
pub use lattice_green::{ComplexEnergy, EvanescentBranch, GreenConfig, GreenSet, LatticeModel};
pub use pump::{
    DistributionMode, FermiDistribution, PairDistribution, PumpConfig, PumpCycle, PumpResult,
    Schedule,
};
pub use quadrature::Tolerance;
