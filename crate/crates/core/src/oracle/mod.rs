//! Brute-force validators, independent of the quadrature pipeline.

pub mod brouwer;
pub mod lattice;
pub mod resolvent;
pub mod slater;
pub mod triplet;

pub use brouwer::{brouwer_pumped_charge, scattering_matrix};
pub use lattice::{Boundary, FiniteLattice, Sector, TwoParticleBasis};
pub use resolvent::{default_oracle_eta, extract_t_matrix, resolvent_element, ResolventMethod};
pub use slater::{slater_sea_evolution, SlaterConfig, SlaterOutcome};
pub use triplet::triplet_exclusion_check;
