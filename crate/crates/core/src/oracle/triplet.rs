//! Pauli exclusion of the on-site interaction from the triplet sector.

use nalgebra::DMatrix;

use crate::error::Result;
use crate::impurity::ImpurityState;
use crate::oracle::lattice::{FiniteLattice, Sector, TwoParticleBasis};

/// Interaction strengths compared against the free Hamiltonian.
pub const PROBE_INTERACTIONS: (f64, f64) = (5.0, 3.0);

fn bitwise_equal(a: &DMatrix<f64>, b: &DMatrix<f64>) -> bool {
    a.shape() == b.shape() && a.iter().zip(b.iter()).all(|(x, y)| x.to_bits() == y.to_bits())
}

/// Whether the Hamiltonian of `sector` with `interactions` on `(+/-m)` is
/// bit-for-bit the free one.
pub fn sector_unaffected(
    lat: &FiniteLattice,
    sector: Sector,
    interactions: &ImpurityState,
    m: u32,
) -> Result<bool> {
    let basis = TwoParticleBasis::new(lat, sector);
    let free = basis.hamiltonian(lat, &ImpurityState::new(0.0, 0.0)?, m)?;
    let with = basis.hamiltonian(lat, interactions, m)?;
    Ok(bitwise_equal(&free, &with))
}

/// `true` iff the antisymmetric-sector Hamiltonian with `interactions` is
/// identical, entry for entry, to the free one.
pub fn triplet_exclusion_check(
    lat: &FiniteLattice,
    interactions: &ImpurityState,
    m: u32,
) -> Result<bool> {
    sector_unaffected(lat, Sector::Antisymmetric, interactions, m)
}
