//! Pumped singlets per cycle as a line integral of the kernel around the
//! cycle:
//!
//! ```text
//! Q_S = -(1/2pi) int dE F(E) d/dE Phi(E),    Phi(E) = loop int (K_- dU_- + K_+ dU_+)
//! ```
//!
//! At zero temperature the energy integral collapses onto the boundary term
//! `Q_S = -Phi(E_max) / 2pi` (the kernel vanishes below the band bottom and
//! `F` vanishes above `E_max`).

use std::cell::RefCell;

use serde::{Deserialize, Serialize};

use crate::error::{PumpError, Result};
use crate::impurity::{kernel_from_greens, ImpurityState, KernelConfig, KernelGreens};
use crate::lattice_green::{green_set, ComplexEnergy, LatticeModel, DEFAULT_ETA};
use crate::pump::cycle::PumpCycle;
use crate::pump::distribution::{DistributionMode, PairDistribution};
use crate::quadrature::{integrate, Tolerance};

/// Lowest energy included in finite-temperature integrals; the two-particle
/// band starts at -4.
pub const ENERGY_FLOOR: f64 = -4.5;

/// Fermi tail cut-off in units of `1/beta` (`e^{-40} ~ 4e-18`).
const TAIL_WIDTHS: f64 = 40.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PumpConfig {
    pub kernel: KernelConfig,
    /// Imaginary shift of the retarded energy.
    pub eta: f64,
    /// Adaptive quadrature along each leg.
    pub leg_tolerance: Tolerance,
    /// Finite-temperature energy integral.
    pub energy_tolerance: Tolerance,
    /// Central-difference step for `d/dE`.
    pub derivative_step: f64,
    /// Combine steps `h` and `h/2` to cancel the `O(h^2)` error.
    pub richardson: bool,
}

impl Default for PumpConfig {
    fn default() -> Self {
        PumpConfig {
            kernel: KernelConfig::default(),
            eta: DEFAULT_ETA,
            leg_tolerance: Tolerance::new(1e-13, 1e-8, 200_000),
            energy_tolerance: Tolerance::new(1e-6, 1e-6, 20_000),
            derivative_step: 1e-4,
            richardson: true,
        }
    }
}

impl PumpConfig {
    /// Every tolerance divided by `factor`.
    pub fn tightened(&self, factor: f64) -> Self {
        let mut cfg = *self;
        cfg.leg_tolerance = self.leg_tolerance.tightened(factor);
        cfg.energy_tolerance = self.energy_tolerance.tightened(factor);
        cfg.kernel.green.tolerance = self.kernel.green.tolerance.tightened(factor);
        cfg
    }
}

/// How the parameters move along each leg in time. The cycle period is
/// split evenly between legs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Schedule {
    /// Constant speed along each leg.
    Uniform,
    /// Fraction of the leg covered grows as `(t / t_leg)^2`.
    Quadratic,
    /// Parameters held at the first vertex for the whole period.
    Frozen,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LegRecord {
    pub index: usize,
    pub start: (f64, f64),
    pub end: (f64, f64),
    /// Contribution to `loop int K . dU` at the reference energy.
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyRecord {
    pub energy: f64,
    pub occupation: f64,
    /// `d Phi / dE`.
    pub derivative: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Per-leg breakdown at `E_max` (zero-T) or at `E_max` for reference
    /// (finite-T).
    pub legs: Vec<LegRecord>,
    /// Energy samples of the finite-temperature integrand, sorted by energy.
    pub energies: Vec<EnergyRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PumpResult {
    pub q_singlets: f64,
    pub error_estimate: f64,
    pub mode: DistributionMode,
    pub diagnostics: Diagnostics,
}

#[derive(Debug, Clone, Copy)]
enum Path {
    Line,
    Timed(Schedule, f64),
}

struct LoopIntegral {
    value: f64,
    error: f64,
    legs: Vec<LegRecord>,
}

/// Values of `U` on a leg where `1 + U g0` is smallest; used as breakpoints.
fn resonance_fraction(a: f64, b: f64, g0: num_complex::Complex64) -> Option<f64> {
    let n = g0.norm_sqr();
    if a == b || n == 0.0 {
        return None;
    }
    let u_star = -g0.re / n;
    let x = (u_star - a) / (b - a);
    (x > 0.0 && x < 1.0).then_some(x)
}

fn loop_integral(
    cycle: &PumpCycle,
    greens: &KernelGreens,
    kcfg: &KernelConfig,
    path: Path,
    tol: Tolerance,
) -> Result<LoopIntegral> {
    let mut legs = Vec::with_capacity(cycle.leg_count());
    let mut value = 0.0;
    let mut error = 0.0;
    let origin = cycle.vertices()[0];

    for (index, (start, end)) in cycle.legs().enumerate() {
        let delta = (end.0 - start.0, end.1 - start.1);
        let mut record = LegRecord {
            index,
            start,
            end,
            value: 0.0,
            error: 0.0,
            evaluations: 0,
        };
        if delta == (0.0, 0.0) {
            legs.push(record);
            continue;
        }

        let failure = RefCell::new(None);
        let kernel_at = |u: (f64, f64)| -> Option<(f64, f64)> {
            let state = ImpurityState {
                u_minus: u.0,
                u_plus: u.1,
            };
            match kernel_from_greens(&state, greens, kcfg.pairing, kcfg.pole_threshold) {
                Ok(k) => Some((k.k_minus, k.k_plus)),
                Err(e) => {
                    failure.borrow_mut().get_or_insert(e);
                    None
                }
            }
        };
        let at_fraction = |x: f64| (start.0 + x * delta.0, start.1 + x * delta.1);

        let mut fractions: Vec<f64> = [
            resonance_fraction(start.0, end.0, greens.g0),
            resonance_fraction(start.1, end.1, greens.g0),
        ]
        .into_iter()
        .flatten()
        .collect();
        fractions.sort_by(f64::total_cmp);

        let result = match path {
            Path::Line => {
                let mut points = vec![0.0];
                points.extend(&fractions);
                points.push(1.0);
                integrate(
                    |x| match kernel_at(at_fraction(x)) {
                        Some((km, kp)) => km * delta.0 + kp * delta.1,
                        None => 0.0,
                    },
                    &points,
                    tol,
                )
            }
            Path::Timed(schedule, t_leg) => {
                let mut points = vec![0.0];
                points.extend(fractions.iter().map(|&x| match schedule {
                    Schedule::Quadratic => x.sqrt() * t_leg,
                    _ => x * t_leg,
                }));
                points.push(t_leg);
                integrate(
                    |t| {
                        let s = t / t_leg;
                        let (u, rate) = match schedule {
                            Schedule::Uniform => (at_fraction(s), 1.0 / t_leg),
                            Schedule::Quadratic => (at_fraction(s * s), 2.0 * s / t_leg),
                            Schedule::Frozen => (origin, 0.0),
                        };
                        match kernel_at(u) {
                            Some((km, kp)) => {
                                let udot = (delta.0 * rate, delta.1 * rate);
                                km * udot.0 + kp * udot.1
                            }
                            None => 0.0,
                        }
                    },
                    &points,
                    tol,
                )
            }
        };
        if let Some(e) = failure.into_inner() {
            return Err(e);
        }
        let result = result.require("leg line integral")?;
        record.value = result.value;
        record.error = result.error;
        record.evaluations = result.evaluations;
        value += result.value;
        error += result.error;
        legs.push(record);
    }
    Ok(LoopIntegral { value, error, legs })
}

fn greens_at(model: &LatticeModel, energy: f64, cfg: &PumpConfig) -> Result<(KernelGreens, f64)> {
    let e = ComplexEnergy::new(energy, cfg.eta)?;
    let set = green_set(model, e, &cfg.kernel.green)?;
    Ok((KernelGreens::from_set(&set, cfg.kernel.convention), set.error))
}

/// Rough propagation of the Green's-function quadrature error: the kernel
/// is O(1) in the Green's elements, so scale by the path length.
fn path_length(cycle: &PumpCycle) -> f64 {
    cycle
        .legs()
        .map(|(a, b)| (b.0 - a.0).abs() + (b.1 - a.1).abs())
        .sum()
}

fn evaluate(
    cycle: &PumpCycle,
    model: &LatticeModel,
    dist: &PairDistribution,
    cfg: &PumpConfig,
    path: Path,
) -> Result<PumpResult> {
    let scale = -1.0 / (2.0 * std::f64::consts::PI);
    match dist.mode {
        DistributionMode::ZeroT => {
            let (greens, green_err) = greens_at(model, dist.e_max, cfg)?;
            let lp = loop_integral(cycle, &greens, &cfg.kernel, path, cfg.leg_tolerance)?;
            Ok(PumpResult {
                q_singlets: scale * lp.value,
                error_estimate: (lp.error + green_err * path_length(cycle)) / (2.0 * std::f64::consts::PI),
                mode: dist.mode,
                diagnostics: Diagnostics {
                    legs: lp.legs,
                    energies: Vec::new(),
                },
            })
        }
        DistributionMode::FiniteT => finite_temperature(cycle, model, dist, cfg, path),
    }
}

fn finite_temperature(
    cycle: &PumpCycle,
    model: &LatticeModel,
    dist: &PairDistribution,
    cfg: &PumpConfig,
    path: Path,
) -> Result<PumpResult> {
    if !(cfg.derivative_step > 0.0) {
        return Err(PumpError::invalid("derivative step", "must be positive"));
    }
    let phi = |energy: f64| -> Result<f64> {
        let (greens, _) = greens_at(model, energy, cfg)?;
        Ok(loop_integral(cycle, &greens, &cfg.kernel, path, cfg.leg_tolerance)?.value)
    };
    let central = |energy: f64, h: f64| -> Result<f64> {
        Ok((phi(energy + h)? - phi(energy - h)?) / (2.0 * h))
    };
    let derivative = |energy: f64| -> Result<f64> {
        let h = cfg.derivative_step;
        let coarse = central(energy, h)?;
        if !cfg.richardson {
            return Ok(coarse);
        }
        let fine = central(energy, h / 2.0)?;
        Ok((4.0 * fine - coarse) / 3.0)
    };

    let hi = dist.e_max + TAIL_WIDTHS / dist.beta;
    let lo = ENERGY_FLOOR;
    let reference = loop_integral(
        cycle,
        &greens_at(model, dist.e_max, cfg)?.0,
        &cfg.kernel,
        path,
        cfg.leg_tolerance,
    )?;
    if hi <= lo {
        return Ok(PumpResult {
            q_singlets: 0.0,
            error_estimate: 0.0,
            mode: dist.mode,
            diagnostics: Diagnostics {
                legs: reference.legs,
                energies: Vec::new(),
            },
        });
    }

    let mut points = vec![lo, hi];
    let width = 5.0 / dist.beta;
    for p in [-4.0, 0.0, 4.0, dist.e_max - width, dist.e_max, dist.e_max + width] {
        if p > lo && p < hi {
            points.push(p);
        }
    }
    points.sort_by(f64::total_cmp);
    points.dedup();

    let failure = RefCell::new(None);
    let samples = RefCell::new(Vec::new());
    let result = integrate(
        |energy| {
            if failure.borrow().is_some() {
                return 0.0;
            }
            let occupation = dist.occupation(energy);
            if occupation == 0.0 {
                return 0.0;
            }
            match derivative(energy) {
                Ok(d) => {
                    samples.borrow_mut().push(EnergyRecord {
                        energy,
                        occupation,
                        derivative: d,
                    });
                    occupation * d
                }
                Err(e) => {
                    *failure.borrow_mut() = Some(e);
                    0.0
                }
            }
        },
        &points,
        cfg.energy_tolerance,
    );
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    let result = result.require("finite-temperature energy integral")?;
    let mut energies = samples.into_inner();
    energies.sort_by(|a, b| a.energy.total_cmp(&b.energy));

    let two_pi = 2.0 * std::f64::consts::PI;
    Ok(PumpResult {
        q_singlets: -result.value / two_pi,
        error_estimate: result.error / two_pi,
        mode: dist.mode,
        diagnostics: Diagnostics {
            legs: reference.legs,
            energies,
        },
    })
}

/// Pumped singlets per cycle, with time eliminated in favour of the line
/// integral over the cycle in `(U_-, U_+)`.
pub fn pumped_singlets(
    cycle: &PumpCycle,
    model: &LatticeModel,
    dist: &PairDistribution,
    cfg: &PumpConfig,
) -> Result<PumpResult> {
    evaluate(cycle, model, dist, cfg, Path::Line)
}

/// Same quantity from the explicit time integral `int dt K . dU/dt` under a
/// given schedule; equal to [`pumped_singlets`] for every monotone schedule.
pub fn pumped_singlets_timeparam(
    cycle: &PumpCycle,
    schedule: Schedule,
    model: &LatticeModel,
    dist: &PairDistribution,
    cfg: &PumpConfig,
) -> Result<PumpResult> {
    let t_leg = cycle.period() / cycle.leg_count() as f64;
    evaluate(cycle, model, dist, cfg, Path::Timed(schedule, t_leg))
}

/// Loop integral `loop int K . dU` at a single energy; the quantity whose
/// energy derivative is weighted by the pair distribution.
pub fn loop_kernel_integral(
    cycle: &PumpCycle,
    model: &LatticeModel,
    energy: f64,
    cfg: &PumpConfig,
) -> Result<f64> {
    let (greens, _) = greens_at(model, energy, cfg)?;
    Ok(loop_integral(cycle, &greens, &cfg.kernel, Path::Line, cfg.leg_tolerance)?.value)
}
