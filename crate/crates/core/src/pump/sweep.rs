//! Parameter sweeps behind the footprint and energy figures. Cells run in
//! parallel; each result is stored under its grid key, so the output order
//! never depends on scheduling. A failing cell is recorded and the sweep
//! carries on.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{PumpError, Result};
use crate::lattice_green::LatticeModel;
use crate::pump::cycle::PumpCycle;
use crate::pump::distribution::PairDistribution;
use crate::pump::engine::{pumped_singlets, PumpConfig, PumpResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FootprintCell {
    pub u_min: f64,
    pub u_max: f64,
    /// `NaN` when the cell failed.
    pub q_singlets: f64,
    pub error_estimate: f64,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyCell {
    pub e_max: f64,
    pub m: u32,
    pub q_singlets: f64,
    pub error_estimate: f64,
    pub error: Option<String>,
}

fn check_grid(what: &'static str, grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(PumpError::invalid(what, "grid is empty"));
    }
    if grid.iter().any(|x| !x.is_finite()) {
        return Err(PumpError::invalid(what, "grid values must be finite"));
    }
    Ok(())
}

fn split(r: Result<PumpResult>) -> (f64, f64, Option<String>) {
    match r {
        Ok(r) => (r.q_singlets, r.error_estimate, None),
        Err(e) => (f64::NAN, f64::NAN, Some(e.to_string())),
    }
}

/// `Q_S` of the square cycle `[u_min, u_max]^2` for every grid pair with
/// `u_min <= u_max`. Diagonal cells enclose no area and are exactly zero.
pub fn footprint_sweep(
    u_min_grid: &[f64],
    u_max_grid: &[f64],
    model: &LatticeModel,
    dist: &PairDistribution,
    cfg: &PumpConfig,
) -> Result<Vec<FootprintCell>> {
    check_grid("u_min", u_min_grid)?;
    check_grid("u_max", u_max_grid)?;
    let keys: Vec<(usize, usize)> = (0..u_min_grid.len())
        .flat_map(|i| (0..u_max_grid.len()).map(move |j| (i, j)))
        .filter(|&(i, j)| u_min_grid[i] <= u_max_grid[j])
        .collect();

    let table: BTreeMap<(usize, usize), FootprintCell> = keys
        .par_iter()
        .map(|&(i, j)| {
            let (a, b) = (u_min_grid[i], u_max_grid[j]);
            let (q, err, error) = if a == b {
                (0.0, 0.0, None)
            } else {
                split(
                    PumpCycle::square(a, b, 1.0)
                        .and_then(|c| pumped_singlets(&c, model, dist, cfg)),
                )
            };
            let cell = FootprintCell {
                u_min: a,
                u_max: b,
                q_singlets: q,
                error_estimate: err,
                error,
            };
            ((i, j), cell)
        })
        .collect();
    Ok(table.into_values().collect())
}

/// `Q_S(E_max)` of a fixed cycle for each impurity separation in `m_list`.
/// The temperature and mode are taken from `base`.
pub fn energy_sweep(
    e_max_grid: &[f64],
    m_list: &[u32],
    cycle: &PumpCycle,
    base: &PairDistribution,
    cfg: &PumpConfig,
) -> Result<Vec<EnergyCell>> {
    check_grid("e_max", e_max_grid)?;
    if let Some(e) = e_max_grid.iter().find(|e| e.abs() > 5.0) {
        return Err(PumpError::invalid("e_max", format!("{e} outside [-5, 5]")));
    }
    if m_list.is_empty() {
        return Err(PumpError::invalid("m list", "is empty"));
    }
    let models = m_list
        .iter()
        .map(|&m| LatticeModel::new(m))
        .collect::<Result<Vec<_>>>()?;

    let keys: Vec<(usize, usize)> = (0..models.len())
        .flat_map(|a| (0..e_max_grid.len()).map(move |b| (a, b)))
        .collect();
    let table: BTreeMap<(usize, usize), EnergyCell> = keys
        .par_iter()
        .map(|&(a, b)| {
            let e_max = e_max_grid[b];
            let r = PairDistribution::new(e_max, base.beta, base.mode)
                .and_then(|d| pumped_singlets(cycle, &models[a], &d, cfg));
            let (q, err, error) = split(r);
            let cell = EnergyCell {
                e_max,
                m: models[a].m(),
                q_singlets: q,
                error_estimate: err,
                error,
            };
            ((a, b), cell)
        })
        .collect();
    Ok(table.into_values().collect())
}
