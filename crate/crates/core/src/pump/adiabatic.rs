//! Adiabaticity of a pumping cycle: the period must be long compared with
//! the dwell time `d / v` spent crossing the scattering region.

use serde::{Deserialize, Serialize};

use crate::error::{PumpError, Result};
use crate::lattice_green::LatticeModel;
use crate::pump::distribution::PairDistribution;

/// Ratios `tau / dwell` below this are flagged.
pub const ADIABATIC_RATIO: f64 = 100.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdiabaticityReport {
    /// Scattering-region length `2m + 1` in sites.
    pub dwell_length: f64,
    pub velocity: f64,
    pub dwell_time: f64,
    pub ratio: f64,
    pub adiabatic: bool,
    pub warning: Option<String>,
}

/// Largest group velocity available to a pair whose total energy is
/// `energy`: both particles share the energy and the faster one sets the
/// dwell time. Each particle has `v = sqrt(4 - eps^2)`, so the maximum is 2
/// while `|E| <= 2` (one particle at the band centre) and
/// `sqrt(4 - (|E| - 2)^2)` beyond.
pub fn pair_max_velocity(energy: f64) -> f64 {
    let a = energy.abs();
    if a <= 2.0 {
        2.0
    } else {
        (4.0 - (a - 2.0).powi(2)).max(0.0).sqrt()
    }
}

/// One-body group velocity `sqrt(4 - E^2)` (zero outside the band).
pub fn one_body_velocity(energy: f64) -> f64 {
    (4.0 - energy * energy).max(0.0).sqrt()
}

fn report(tau: f64, model: &LatticeModel, velocity: f64) -> Result<AdiabaticityReport> {
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(PumpError::invalid("period", format!("{tau} must be positive")));
    }
    let d = model.scattering_length() as f64;
    let dwell = if velocity > 0.0 { d / velocity } else { f64::INFINITY };
    let ratio = tau / dwell;
    let adiabatic = ratio >= ADIABATIC_RATIO;
    let warning = (!adiabatic).then(|| {
        format!("period/dwell time = {ratio:.3e} is below {ADIABATIC_RATIO}; driving is not adiabatic")
    });
    Ok(AdiabaticityReport {
        dwell_length: d,
        velocity,
        dwell_time: dwell,
        ratio,
        adiabatic,
        warning,
    })
}

/// Dwell-time check for pairs at the distribution's maximum energy.
pub fn adiabaticity_check(
    tau: f64,
    model: &LatticeModel,
    dist: &PairDistribution,
) -> Result<AdiabaticityReport> {
    report(tau, model, pair_max_velocity(dist.e_max))
}

/// Dwell-time check for the one-body turnstile at the Fermi level.
pub fn one_body_adiabaticity_check(
    tau: f64,
    model: &LatticeModel,
    e_fermi: f64,
) -> Result<AdiabaticityReport> {
    report(tau, model, one_body_velocity(e_fermi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thresholds() {
        let model = LatticeModel::new(1).unwrap();
        let dist = PairDistribution::zero_t(0.0).unwrap();
        let dwell = 3.0 / 2.0;
        let slow = adiabaticity_check(1e4 * dwell, &model, &dist).unwrap();
        assert!(slow.adiabatic && slow.warning.is_none());
        assert!((slow.ratio - 1e4).abs() < 1e-9);
        let fast = adiabaticity_check(10.0 * dwell, &model, &dist).unwrap();
        assert!(!fast.adiabatic);
        assert!(fast.warning.is_some());
        assert_eq!(fast.dwell_length, 3.0);
        assert!(adiabaticity_check(0.0, &model, &dist).is_err());
    }

    #[test]
    fn velocities() {
        assert_eq!(pair_max_velocity(1.0), 2.0);
        assert!((pair_max_velocity(3.0) - 3f64.sqrt()).abs() < 1e-15);
        assert_eq!(pair_max_velocity(4.5), 0.0);
        assert_eq!(one_body_velocity(0.0), 2.0);
        let model = LatticeModel::new(2).unwrap();
        let r = one_body_adiabaticity_check(1.0, &model, 3.0).unwrap();
        assert!(r.dwell_time.is_infinite() && !r.adiabatic);
    }
}
