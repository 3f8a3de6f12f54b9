//! Run configuration: a TOML file whose every key is optional, with the
//! physics defaults collected in [`defaults`].

use serde::{Deserialize, Serialize};

use pump_core::acceptance::{FOOTPRINT_ENERGY, SuiteConfig, T_MATRIX_SITES};
use pump_core::{
    DistributionMode, EvanescentBranch, GreenConfig, KernelConfig, PairDistribution, PumpConfig,
    PumpCycle, SignPairing, Tolerance,
};

use crate::error::CliError;

/// Every physics default in one place.
pub mod defaults {
    pub const M: u32 = 1;
    /// Retarded shift of the pair energy.
    pub const ETA: f64 = pump_core::lattice_green::DEFAULT_ETA;
    pub const BETA: f64 = pump_core::pump::distribution::DEFAULT_BETA;
    pub const E_MAX: f64 = 0.0;

    pub const GREEN_ABS_TOL: f64 = 1e-9;
    pub const GREEN_REL_TOL: f64 = 1e-10;
    pub const GREEN_MAX_EVALS: usize = 1_000_000;
    pub const LEG_ABS_TOL: f64 = 1e-13;
    pub const LEG_REL_TOL: f64 = 1e-8;
    pub const LEG_MAX_EVALS: usize = 200_000;
    pub const ENERGY_ABS_TOL: f64 = 1e-6;
    pub const ENERGY_REL_TOL: f64 = 1e-6;
    pub const ENERGY_MAX_EVALS: usize = 20_000;
    /// Central-difference step of `d/dE` at finite temperature.
    pub const DERIVATIVE_STEP: f64 = 1e-4;

    pub const U_MIN: f64 = 0.5;
    pub const U_MAX: f64 = 4.0;
    /// Cycle period; enters only the adiabaticity report.
    pub const PERIOD: f64 = 1e4;

    /// Finite lattice of the Green's-function comparison. The broadening
    /// must exceed the level spacing near the band edges, which at 400
    /// sites takes `eta ~ 0.05`.
    pub const ORACLE_SITES: usize = 400;
    pub const ORACLE_ETA: f64 = 0.05;
    pub const ORACLE_T_ETA: f64 = 1e-3;
}

/// Either an explicit list or `count` evenly spaced points in
/// `[start, stop]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    List(Vec<f64>),
    Range { start: f64, stop: f64, count: usize },
}

impl Grid {
    pub fn range(start: f64, stop: f64, count: usize) -> Self {
        Grid::Range { start, stop, count }
    }

    pub fn points(&self) -> Vec<f64> {
        match self {
            Grid::List(v) => v.clone(),
            Grid::Range { count: 0, .. } => Vec::new(),
            Grid::Range { start, count: 1, .. } => vec![*start],
            Grid::Range { start, stop, count } => (0..*count)
                .map(|i| start + (stop - start) * i as f64 / (*count - 1) as f64)
                .collect(),
        }
    }

    fn check(&self, what: &str) -> Result<Vec<f64>, CliError> {
        let p = self.points();
        if p.is_empty() {
            return Err(CliError::Usage(format!("{what} grid is empty")));
        }
        if p.iter().any(|x| !x.is_finite()) {
            return Err(CliError::Usage(format!("{what} grid has non-finite values")));
        }
        Ok(p)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    pub m: u32,
    pub eta: f64,
    pub green_abs_tol: f64,
    pub green_rel_tol: f64,
    pub green_max_evals: usize,
    pub leg_abs_tol: f64,
    pub leg_rel_tol: f64,
    pub leg_max_evals: usize,
    pub energy_abs_tol: f64,
    pub energy_rel_tol: f64,
    pub energy_max_evals: usize,
    pub derivative_step: f64,
    pub eta_extrapolation: bool,
}

impl Default for ModelSection {
    fn default() -> Self {
        use defaults::*;
        ModelSection {
            m: M,
            eta: ETA,
            green_abs_tol: GREEN_ABS_TOL,
            green_rel_tol: GREEN_REL_TOL,
            green_max_evals: GREEN_MAX_EVALS,
            leg_abs_tol: LEG_ABS_TOL,
            leg_rel_tol: LEG_REL_TOL,
            leg_max_evals: LEG_MAX_EVALS,
            energy_abs_tol: ENERGY_ABS_TOL,
            energy_rel_tol: ENERGY_REL_TOL,
            energy_max_evals: ENERGY_MAX_EVALS,
            derivative_step: DERIVATIVE_STEP,
            eta_extrapolation: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CycleSection {
    pub u_min: f64,
    pub u_max: f64,
    pub period: f64,
    /// Explicit closed polygon; overrides the square when present.
    pub vertices: Option<Vec<[f64; 2]>>,
}

impl Default for CycleSection {
    fn default() -> Self {
        CycleSection {
            u_min: defaults::U_MIN,
            u_max: defaults::U_MAX,
            period: defaults::PERIOD,
            vertices: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DistributionSection {
    pub e_max: f64,
    pub beta: f64,
    pub mode: DistributionMode,
}

impl Default for DistributionSection {
    fn default() -> Self {
        DistributionSection {
            e_max: defaults::E_MAX,
            beta: defaults::BETA,
            mode: DistributionMode::ZeroT,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GreenSection {
    pub energies: Grid,
}

impl Default for GreenSection {
    fn default() -> Self {
        GreenSection {
            energies: Grid::range(-5.0, 5.0, 21),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Fig2bSection {
    pub u_min: Grid,
    pub u_max: Grid,
    /// Pair energy at which the footprint is evaluated.
    pub e_max: f64,
}

impl Default for Fig2bSection {
    fn default() -> Self {
        Fig2bSection {
            u_min: Grid::range(0.0, 5.0, 21),
            u_max: Grid::range(0.0, 5.0, 21),
            e_max: FOOTPRINT_ENERGY,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Fig3Section {
    pub e_max: Grid,
    pub m: Vec<u32>,
}

impl Default for Fig3Section {
    fn default() -> Self {
        Fig3Section {
            e_max: Grid::range(-4.0, 4.0, 33),
            m: vec![1, 2],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleSection {
    pub n_sites: usize,
    /// Broadening of the Green's-function comparison (also used by
    /// `green --with-oracle`).
    pub eta: f64,
    pub t_sites: usize,
    pub t_eta: f64,
    pub t_u: Vec<f64>,
    pub t_energies: Vec<f64>,
    /// Fermi levels of the one-body scattering-state vs Brouwer rows.
    pub fermi_levels: Vec<f64>,
}

impl Default for OracleSection {
    fn default() -> Self {
        OracleSection {
            n_sites: defaults::ORACLE_SITES,
            eta: defaults::ORACLE_ETA,
            t_sites: T_MATRIX_SITES,
            t_eta: defaults::ORACLE_T_ETA,
            t_u: vec![-2.0, 0.5, 2.0],
            t_energies: vec![-1.0, 0.0, 1.5],
            fermi_levels: vec![-1.5, -1.0, -0.5, 0.5, 1.0, 1.5],
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SensitivitySection {
    pub sign_pairing: SignPairing,
    pub evanescent_branch: EvanescentBranch,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub green: Option<String>,
    pub pump: Option<String>,
    pub fig2b: Option<String>,
    pub fig3: Option<String>,
    pub oracle: Option<String>,
    pub validate: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelSection,
    pub cycle: CycleSection,
    pub distribution: DistributionSection,
    pub green: GreenSection,
    pub fig2b: Fig2bSection,
    pub fig3: Fig3Section,
    pub oracle: OracleSection,
    pub sensitivity: SensitivitySection,
    pub output: OutputSection,
}

fn positive(what: &str, x: f64) -> Result<(), CliError> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(CliError::Config(format!("{what} must be positive, got {x}")))
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let m = &self.model;
        for (what, x) in [
            ("model.eta", m.eta),
            ("model.green_abs_tol", m.green_abs_tol),
            ("model.green_rel_tol", m.green_rel_tol),
            ("model.leg_abs_tol", m.leg_abs_tol),
            ("model.leg_rel_tol", m.leg_rel_tol),
            ("model.energy_abs_tol", m.energy_abs_tol),
            ("model.energy_rel_tol", m.energy_rel_tol),
            ("model.derivative_step", m.derivative_step),
            ("distribution.beta", self.distribution.beta),
            ("cycle.period", self.cycle.period),
            ("oracle.eta", self.oracle.eta),
            ("oracle.t_eta", self.oracle.t_eta),
        ] {
            positive(what, x)?;
        }
        if m.m == 0 {
            return Err(CliError::Config("model.m must be at least 1".into()));
        }
        if self.fig3.m.contains(&0) {
            return Err(CliError::Config("fig3.m entries must be at least 1".into()));
        }
        Ok(())
    }

    pub fn pump_config(&self) -> PumpConfig {
        let m = &self.model;
        PumpConfig {
            kernel: KernelConfig {
                green: GreenConfig {
                    tolerance: Tolerance::new(m.green_abs_tol, m.green_rel_tol, m.green_max_evals),
                    evanescent: self.sensitivity.evanescent_branch,
                    eta_extrapolation: m.eta_extrapolation,
                },
                pairing: self.sensitivity.sign_pairing,
                ..KernelConfig::default()
            },
            eta: m.eta,
            leg_tolerance: Tolerance::new(m.leg_abs_tol, m.leg_rel_tol, m.leg_max_evals),
            energy_tolerance: Tolerance::new(m.energy_abs_tol, m.energy_rel_tol, m.energy_max_evals),
            derivative_step: m.derivative_step,
            ..PumpConfig::default()
        }
    }

    pub fn suite_config(&self) -> SuiteConfig {
        SuiteConfig {
            pump: self.pump_config(),
        }
    }

    pub fn cycle(&self) -> Result<PumpCycle, CliError> {
        let c = &self.cycle;
        let cycle = match &c.vertices {
            Some(v) => PumpCycle::new(v.iter().map(|p| (p[0], p[1])).collect(), c.period),
            None => PumpCycle::square(c.u_min, c.u_max, c.period),
        };
        cycle.map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn distribution(&self, e_max: f64) -> Result<PairDistribution, CliError> {
        let d = &self.distribution;
        PairDistribution::new(e_max, d.beta, d.mode).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn green_energies(&self) -> Result<Vec<f64>, CliError> {
        self.green.energies.check("green.energies")
    }

    pub fn fig2b_grids(&self) -> Result<(Vec<f64>, Vec<f64>), CliError> {
        Ok((self.fig2b.u_min.check("fig2b.u_min")?, self.fig2b.u_max.check("fig2b.u_max")?))
    }

    pub fn fig3_grid(&self) -> Result<Vec<f64>, CliError> {
        if self.fig3.m.is_empty() {
            return Err(CliError::Usage("fig3.m list is empty".into()));
        }
        self.fig3.e_max.check("fig3.e_max")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        assert_eq!(RunConfig::parse("").unwrap(), RunConfig::default());
    }

    #[test]
    fn grids_accept_lists_and_ranges() {
        let cfg = RunConfig::parse(
            "[green]\nenergies = [-6.0, 1.0]\n[fig3]\ne_max = { start = -1.0, stop = 1.0, count = 3 }\n",
        )
        .unwrap();
        assert_eq!(cfg.green_energies().unwrap(), vec![-6.0, 1.0]);
        assert_eq!(cfg.fig3_grid().unwrap(), vec![-1.0, 0.0, 1.0]);
    }

    #[test]
    fn defaults_reach_the_engine() {
        let cfg = RunConfig::default().pump_config();
        assert_eq!(cfg, PumpConfig::default());
    }

    #[test]
    fn bad_values_are_config_errors() {
        for text in [
            "[model]\neta = -1.0\n",
            "[model]\nm = 0\n",
            "[distribution]\nmode = \"lukewarm\"\n",
            "[model]\nunknown = 1\n",
            "not toml at all [",
        ] {
            assert!(matches!(RunConfig::parse(text), Err(CliError::Config(_))), "{text}");
        }
    }

    #[test]
    fn empty_grid_is_a_usage_error() {
        let cfg = RunConfig::parse("[green]\nenergies = []\n").unwrap();
        assert!(matches!(cfg.green_energies(), Err(CliError::Usage(_))));
    }
}
