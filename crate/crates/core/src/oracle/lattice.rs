//! Finite chains and two-particle bases for brute-force checks.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{PumpError, Result};
use crate::impurity::ImpurityState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    Open,
    Periodic,
}

/// Chain of `n_sites` sites. Physical coordinate `x` sits at index
/// `n_sites / 2 + x`, so the impurities at `+/-m` are centred.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiniteLattice {
    pub n_sites: usize,
    pub boundary: Boundary,
}

impl FiniteLattice {
    pub fn new(n_sites: usize, boundary: Boundary) -> Result<Self> {
        if n_sites < 3 {
            return Err(PumpError::invalid("lattice size", format!("{n_sites} < 3")));
        }
        Ok(FiniteLattice { n_sites, boundary })
    }

    pub fn open(n_sites: usize) -> Result<Self> {
        Self::new(n_sites, Boundary::Open)
    }

    pub fn periodic(n_sites: usize) -> Result<Self> {
        Self::new(n_sites, Boundary::Periodic)
    }

    pub fn center(&self) -> usize {
        self.n_sites / 2
    }

    pub fn index(&self, x: i64) -> Result<usize> {
        let i = self.center() as i64 + x;
        if i < 0 || i >= self.n_sites as i64 {
            return Err(PumpError::invalid(
                "site",
                format!("{x} lies outside a lattice of {} sites", self.n_sites),
            ));
        }
        Ok(i as usize)
    }

    /// Impurities at `+/-m` must sit well away from the boundaries.
    pub fn check_room_for(&self, m: u32) -> Result<()> {
        let need = 4 * m as usize + 20;
        if self.n_sites < need {
            return Err(PumpError::invalid(
                "lattice size",
                format!("{} sites is too small for m = {m}; need >= {need}", self.n_sites),
            ));
        }
        Ok(())
    }

    /// Nearest-neighbour bonds `(i, j)` with `i < j`.
    pub fn bonds(&self) -> Vec<(usize, usize)> {
        let n = self.n_sites;
        let mut b: Vec<(usize, usize)> = (0..n - 1).map(|i| (i, i + 1)).collect();
        if self.boundary == Boundary::Periodic {
            b.push((0, n - 1));
        }
        b
    }

    /// One-body hopping matrix `-sum |i><j|` over bonds.
    pub fn hopping_matrix(&self) -> DMatrix<f64> {
        let n = self.n_sites;
        let mut h = DMatrix::zeros(n, n);
        for (i, j) in self.bonds() {
            h[(i, j)] = -1.0;
            h[(j, i)] = -1.0;
        }
        h
    }

    /// Number of one-body eigenmodes.
    pub fn mode_count(&self) -> usize {
        self.n_sites
    }

    /// Wavenumber and normalisation of mode `a`, plus whether it is a sine.
    fn mode_shape(&self, a: usize) -> (f64, f64, bool) {
        let n = self.n_sites;
        let nf = n as f64;
        let pi = std::f64::consts::PI;
        match self.boundary {
            Boundary::Open => ((a + 1) as f64 * pi / (nf + 1.0), (2.0 / (nf + 1.0)).sqrt(), true),
            Boundary::Periodic => {
                // Real standing waves: cos for a <= n/2, sin for the partners.
                if a > n / 2 {
                    (2.0 * pi * (n - a) as f64 / nf, (2.0 / nf).sqrt(), true)
                } else if a == 0 || 2 * a == n {
                    (2.0 * pi * a as f64 / nf, (1.0 / nf).sqrt(), false)
                } else {
                    (2.0 * pi * a as f64 / nf, (2.0 / nf).sqrt(), false)
                }
            }
        }
    }

    /// Energy of mode `a`, `-2 cos q`.
    pub fn mode_energy(&self, a: usize) -> f64 {
        -2.0 * self.mode_shape(a).0.cos()
    }

    /// Real amplitude of mode `a` on lattice index `i`.
    pub fn mode_amplitude(&self, a: usize, i: usize) -> f64 {
        let (q, norm, sine) = self.mode_shape(a);
        match (self.boundary, sine) {
            (Boundary::Open, _) => norm * (q * (i + 1) as f64).sin(),
            (Boundary::Periodic, true) => norm * (q * i as f64).sin(),
            (Boundary::Periodic, false) => norm * (q * i as f64).cos(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sector {
    /// Symmetric spatial part (spin singlet).
    Symmetric,
    /// Antisymmetric spatial part (spin triplets).
    Antisymmetric,
}

/// Two-particle states `|p q>` with `p <= q` (symmetric) or `p < q`
/// (antisymmetric), as lattice indices.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoParticleBasis {
    pub sector: Sector,
    pub n_sites: usize,
    pub states: Vec<(usize, usize)>,
}

impl TwoParticleBasis {
    pub fn new(lat: &FiniteLattice, sector: Sector) -> Self {
        let n = lat.n_sites;
        let mut states = Vec::new();
        for p in 0..n {
            let start = if sector == Sector::Symmetric { p } else { p + 1 };
            for q in start..n {
                states.push((p, q));
            }
        }
        TwoParticleBasis {
            sector,
            n_sites: n,
            states,
        }
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    /// Position of `|p q>` (order-insensitive); `None` for `p == q` in the
    /// antisymmetric sector.
    pub fn position(&self, p: usize, q: usize) -> Option<usize> {
        let (p, q) = if p <= q { (p, q) } else { (q, p) };
        if q >= self.n_sites || (self.sector == Sector::Antisymmetric && p == q) {
            return None;
        }
        let n = self.n_sites;
        // Rows before p hold n - r (symmetric) or n - r - 1 states each.
        let pos = match self.sector {
            Sector::Symmetric => p * n - p * p.saturating_sub(1) / 2 + (q - p),
            Sector::Antisymmetric => p * (2 * n - p - 1) / 2 + (q - p - 1),
        };
        Some(pos)
    }

    /// Product-state expansion `sum c |i>|j>` of basis state `k`.
    pub fn components(&self, k: usize) -> Vec<(f64, usize, usize)> {
        let (p, q) = self.states[k];
        let s = std::f64::consts::FRAC_1_SQRT_2;
        match (self.sector, p == q) {
            (Sector::Symmetric, true) => vec![(1.0, p, p)],
            (Sector::Symmetric, false) => vec![(s, p, q), (s, q, p)],
            (Sector::Antisymmetric, _) => vec![(s, p, q), (-s, q, p)],
        }
    }

    /// Dense two-particle Hamiltonian: hopping of both particles plus
    /// `U_-` and `U_+` on the doubly occupied sites `(-m,-m)` and `(m,m)`.
    pub fn hamiltonian(
        &self,
        lat: &FiniteLattice,
        interactions: &ImpurityState,
        m: u32,
    ) -> Result<DMatrix<f64>> {
        let minus = lat.index(-(m as i64))?;
        let plus = lat.index(m as i64)?;
        let dim = self.dim();
        let mut neighbours = vec![Vec::new(); lat.n_sites];
        for (i, j) in lat.bonds() {
            neighbours[i].push(j);
            neighbours[j].push(i);
        }
        let mut h = DMatrix::zeros(dim, dim);
        for col in 0..dim {
            // Apply H to the product-state expansion, then project.
            let mut image: Vec<(f64, usize, usize)> = Vec::new();
            for (c, i, j) in self.components(col) {
                for &i2 in &neighbours[i] {
                    image.push((-c, i2, j));
                }
                for &j2 in &neighbours[j] {
                    image.push((-c, i, j2));
                }
                if i == j {
                    // Both terms add up when m = 0 puts them on one site.
                    let mut u = 0.0;
                    if i == minus {
                        u += interactions.u_minus;
                    }
                    if i == plus {
                        u += interactions.u_plus;
                    }
                    if u != 0.0 {
                        image.push((c * u, i, j));
                    }
                }
            }
            for (c, i, j) in image {
                let Some(row) = self.position(i, j) else {
                    continue;
                };
                // <row| i j> for the row's own expansion.
                let overlap: f64 = self
                    .components(row)
                    .iter()
                    .filter(|&&(_, a, b)| a == i && b == j)
                    .map(|&(w, _, _)| w)
                    .sum();
                h[(row, col)] += overlap * c;
            }
        }
        Ok(h)
    }
}
