//! Two-particle resolvent `(z - H)^{-1}` of a finite chain, by dense LU or
//! by an exact mode sum.
//!
//! The mode sum uses the closed-form one-body eigenmodes `phi_a` of the
//! chain; the free two-particle resolvent between product states is
//!
//! ```text
//! G0(ij, kl) = sum_ab phi_a(i) phi_a(k) phi_b(j) phi_b(l) / (z - e_a - e_b)
//! ```
//!
//! The Hubbard terms live on two doubly occupied states, so the interacting
//! resolvent follows from the free one by a rank-two Woodbury update. Both
//! are exact for the finite lattice; the mode sum costs `O(N^2)` per element
//! and needs no storage, which makes lattices of thousands of sites cheap.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{PumpError, Result};
use crate::impurity::ImpurityState;
use crate::lattice_green::ComplexEnergy;
use crate::oracle::lattice::{FiniteLattice, Sector, TwoParticleBasis};

/// Smallest broadening accepted by the finite-lattice oracle.
pub const MIN_ORACLE_ETA: f64 = 1e-4;

/// Broadening large enough to wash out the level spacing of `n_sites`.
pub fn default_oracle_eta(n_sites: usize) -> f64 {
    1e-3f64.max(20.0 / (n_sites as f64).powi(2))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResolventMethod {
    /// Dense LU of the full two-particle Hamiltonian.
    Dense,
    /// Mode sum plus Woodbury update.
    Spectral,
    /// Dense for small bases, spectral otherwise.
    #[default]
    Auto,
}

/// Largest basis handled densely under [`ResolventMethod::Auto`].
const AUTO_DENSE_LIMIT: usize = 1200;

/// Two-particle element `<row| (z - H)^{-1} |col>` between (symmetrised or
/// antisymmetrised) two-particle states given by physical coordinates.
#[allow(clippy::too_many_arguments)]
pub fn resolvent_element(
    lat: &FiniteLattice,
    sector: Sector,
    interactions: &ImpurityState,
    m: u32,
    e: ComplexEnergy,
    row: (i64, i64),
    col: (i64, i64),
    method: ResolventMethod,
) -> Result<Complex64> {
    if e.eta() < MIN_ORACLE_ETA {
        return Err(PumpError::invalid(
            "oracle eta",
            format!("{} is below {MIN_ORACLE_ETA}; the finite lattice needs level broadening", e.eta()),
        ));
    }
    let r = (lat.index(row.0)?, lat.index(row.1)?);
    let c = (lat.index(col.0)?, lat.index(col.1)?);
    if sector == Sector::Antisymmetric && (r.0 == r.1 || c.0 == c.1) {
        return Err(PumpError::invalid(
            "antisymmetric state",
            "both particles on one site",
        ));
    }
    let dim = match sector {
        Sector::Symmetric => lat.n_sites * (lat.n_sites + 1) / 2,
        Sector::Antisymmetric => lat.n_sites * (lat.n_sites - 1) / 2,
    };
    let dense = match method {
        ResolventMethod::Dense => true,
        ResolventMethod::Spectral => false,
        ResolventMethod::Auto => dim <= AUTO_DENSE_LIMIT,
    };
    if dense {
        dense_element(lat, sector, interactions, m, e, r, c)
    } else {
        spectral_element(lat, sector, interactions, m, e, r, c)
    }
}

fn dense_element(
    lat: &FiniteLattice,
    sector: Sector,
    interactions: &ImpurityState,
    m: u32,
    e: ComplexEnergy,
    r: (usize, usize),
    c: (usize, usize),
) -> Result<Complex64> {
    let basis = TwoParticleBasis::new(lat, sector);
    let h = basis.hamiltonian(lat, interactions, m)?;
    let dim = basis.dim();
    let z = e.z();
    let a = DMatrix::from_fn(dim, dim, |i, j| {
        let d = if i == j { z } else { Complex64::new(0.0, 0.0) };
        d - h[(i, j)]
    });
    let row = basis.position(r.0, r.1).expect("row state is in the basis");
    let col = basis.position(c.0, c.1).expect("col state is in the basis");
    let mut rhs = nalgebra::DVector::zeros(dim);
    rhs[col] = Complex64::new(1.0, 0.0);
    let lu = a.lu();
    let x = lu
        .solve(&rhs)
        .ok_or(PumpError::SingularSolve { energy: e.re() })?;
    if !x[row].is_finite() {
        return Err(PumpError::SingularSolve { energy: e.re() });
    }
    // Account for the ordering of the requested pair inside the state.
    Ok(x[row] * orientation_sign(sector, r) * orientation_sign(sector, c))
}

/// Antisymmetric states `|q p>` with `q > p` are `-|p q>`.
fn orientation_sign(sector: Sector, s: (usize, usize)) -> f64 {
    if sector == Sector::Antisymmetric && s.0 > s.1 {
        -1.0
    } else {
        1.0
    }
}

/// Product-state expansion of `|p q>` in the given sector, keeping the
/// requested order `(p, q)` as the positive component.
fn expansion(sector: Sector, s: (usize, usize)) -> Vec<(f64, usize, usize)> {
    let (p, q) = s;
    let h = std::f64::consts::FRAC_1_SQRT_2;
    match (sector, p == q) {
        (Sector::Symmetric, true) => vec![(1.0, p, p)],
        (Sector::Symmetric, false) => vec![(h, p, q), (h, q, p)],
        (Sector::Antisymmetric, _) => vec![(h, p, q), (-h, q, p)],
    }
}

/// Free resolvent between two product states, by the mode sum.
fn free_product(lat: &FiniteLattice, z: Complex64, i: usize, j: usize, k: usize, l: usize) -> Result<Complex64> {
    let n = lat.mode_count();
    let energies: Vec<f64> = (0..n).map(|a| lat.mode_energy(a)).collect();
    let first: Vec<f64> = (0..n)
        .map(|a| lat.mode_amplitude(a, i) * lat.mode_amplitude(a, k))
        .collect();
    let second: Vec<f64> = (0..n)
        .map(|b| lat.mode_amplitude(b, j) * lat.mode_amplitude(b, l))
        .collect();
    let eta = z.im;
    let eta2 = eta * eta;
    let mut total = Complex64::new(0.0, 0.0);
    for a in 0..n {
        if first[a] == 0.0 {
            continue;
        }
        let shifted = z.re - energies[a];
        let (mut re, mut im) = (0.0, 0.0);
        for b in 0..n {
            // 1/(d + i eta) = (d - i eta)/(d^2 + eta^2)
            let d = shifted - energies[b];
            let den = d * d + eta2;
            if den < 1e-24 {
                return Err(PumpError::SingularSolve { energy: z.re });
            }
            let w = second[b] / den;
            re += w * d;
            im -= w * eta;
        }
        total += Complex64::new(re, im) * first[a];
    }
    Ok(total)
}

fn free_element(
    lat: &FiniteLattice,
    sector: Sector,
    z: Complex64,
    r: (usize, usize),
    c: (usize, usize),
) -> Result<Complex64> {
    let mut total = Complex64::new(0.0, 0.0);
    for (cr, i, j) in expansion(sector, r) {
        for (cc, k, l) in expansion(sector, c) {
            total += free_product(lat, z, i, j, k, l)? * (cr * cc);
        }
    }
    Ok(total)
}

fn spectral_element(
    lat: &FiniteLattice,
    sector: Sector,
    interactions: &ImpurityState,
    m: u32,
    e: ComplexEnergy,
    r: (usize, usize),
    c: (usize, usize),
) -> Result<Complex64> {
    let z = e.z();
    let g_rc = free_element(lat, sector, z, r, c)?;
    if sector == Sector::Antisymmetric {
        // Hubbard terms have no matrix elements between antisymmetric states.
        return Ok(g_rc);
    }
    let mut sites = Vec::new();
    for (x, u) in [(-(m as i64), interactions.u_minus), (m as i64, interactions.u_plus)] {
        if u != 0.0 {
            let i = lat.index(x)?;
            sites.push(((i, i), u));
        }
    }
    if sites.is_empty() {
        return Ok(g_rc);
    }
    // G = G0 + G0_{rP} V (1 - G0_PP V)^{-1} G0_{Pc}
    let k = sites.len();
    let mut g_pp = DMatrix::zeros(k, k);
    for (a, &(sa, _)) in sites.iter().enumerate() {
        for (b, &(sb, _)) in sites.iter().enumerate() {
            g_pp[(a, b)] = free_element(lat, sector, z, sa, sb)?;
        }
    }
    let v = DMatrix::from_fn(k, k, |a, b| {
        if a == b {
            Complex64::new(sites[a].1, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let inner = DMatrix::identity(k, k) - &g_pp * &v;
    let inv = inner
        .try_inverse()
        .ok_or(PumpError::SingularSolve { energy: e.re() })?;
    let row: Vec<Complex64> = sites
        .iter()
        .map(|&(s, _)| free_element(lat, sector, z, r, s))
        .collect::<Result<_>>()?;
    let col: Vec<Complex64> = sites
        .iter()
        .map(|&(s, _)| free_element(lat, sector, z, s, c))
        .collect::<Result<_>>()?;
    let middle = &v * inv;
    let mut correction = Complex64::new(0.0, 0.0);
    for a in 0..k {
        for b in 0..k {
            correction += row[a] * middle[(a, b)] * col[b];
        }
    }
    Ok(g_rc + correction)
}

/// T-matrix of a single on-site interaction `u` at the chain centre,
/// extracted from `G = G0 + G0 T G0` on the doubly occupied centre state.
/// Independent of the Green's-function sign convention.
pub fn extract_t_matrix(
    lat: &FiniteLattice,
    u: f64,
    e: ComplexEnergy,
    method: ResolventMethod,
) -> Result<Complex64> {
    // A single impurity: m = 0 puts both U_- and U_+ on the centre, so use
    // only one of them.
    let free = ImpurityState::new(0.0, 0.0)?;
    let with = ImpurityState::new(0.0, u)?;
    let g0 = resolvent_element(lat, Sector::Symmetric, &free, 0, e, (0, 0), (0, 0), method)?;
    let g = resolvent_element(lat, Sector::Symmetric, &with, 0, e, (0, 0), (0, 0), method)?;
    Ok((g - g0) / (g0 * g0))
}
