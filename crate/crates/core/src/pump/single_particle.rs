//! One-body turnstile: potentials `v_-`, `v_+` on sites `-m`, `+m` of the
//! chain. The pumped charge reduces to
//!
//! ```text
//! Q = (1/2pi) loop int sum_x |psi(x)|^2 dv_x / v(E_F)
//! ```
//!
//! with `psi` the instantaneous scattering state incoming from the right
//! lead and `v = 2 sin k` the group velocity, the lattice counterpart of the
//! continuum `m/(hbar^2 k)` factor. `Q` counts electrons entering the right
//! lead per cycle.

use num_complex::Complex64;

use crate::error::{PumpError, Result};
use crate::lattice_green::{single_green, ComplexEnergy, LatticeModel};
use crate::pump::cycle::PumpCycle;
use crate::pump::distribution::{DistributionMode, FermiDistribution};
use crate::quadrature::{integrate, Tolerance};

/// Half-width of the one-body band.
pub const ONE_BODY_BAND_EDGE: f64 = 2.0;

/// Energies closer than this to a band edge are rejected.
pub const BAND_EDGE_MARGIN: f64 = 1e-3;

/// Scattering state `psi(-m), psi(m)` for a wave `e^{-ikn}` incoming from
/// the right, from the two-site Lippmann-Schwinger equation
/// `psi = phi + G V psi`.
pub fn right_incoming_state(
    v_minus: f64,
    v_plus: f64,
    model: &LatticeModel,
    energy: f64,
) -> Result<[Complex64; 2]> {
    let (k, _) = wavevector(energy)?;
    let e = ComplexEnergy::on_shell(energy)?;
    let m = model.m() as i64;
    let g0 = single_green(0, e)?.value;
    let g2 = single_green(2 * m, e)?.value;
    let phi = |n: i64| Complex64::from_polar(1.0, -k * n as f64);
    let one = Complex64::new(1.0, 0.0);
    let (a, b) = (one - g0 * v_minus, -g2 * v_plus);
    let (c, d) = (-g2 * v_minus, one - g0 * v_plus);
    let det = a * d - b * c;
    if det.norm() < 1e-14 {
        return Err(PumpError::SingularSolve { energy });
    }
    let (p1, p2) = (phi(-m), phi(m));
    Ok([(d * p1 - b * p2) / det, (a * p2 - c * p1) / det])
}

/// `(k, v)` with `E = -2 cos k`, `v = dE/dk = 2 sin k`.
fn wavevector(energy: f64) -> Result<(f64, f64)> {
    if (energy.abs() - ONE_BODY_BAND_EDGE).abs() < BAND_EDGE_MARGIN {
        return Err(PumpError::BandEdge { energy });
    }
    if energy.abs() > ONE_BODY_BAND_EDGE {
        return Err(PumpError::invalid("energy", format!("{energy} outside the band")));
    }
    let k = (-energy / 2.0).acos();
    Ok((k, 2.0 * k.sin()))
}

/// Charge per cycle for electrons at a single energy inside the band.
pub fn pumped_charge_at(
    cycle: &PumpCycle,
    model: &LatticeModel,
    energy: f64,
    tol: Tolerance,
) -> Result<f64> {
    let (_, velocity) = wavevector(energy)?;
    let mut total = 0.0;
    for (start, end) in cycle.legs() {
        let delta = (end.0 - start.0, end.1 - start.1);
        if delta == (0.0, 0.0) {
            continue;
        }
        let mut failure = None;
        let r = integrate(
            |x| {
                let (vm, vp) = (start.0 + x * delta.0, start.1 + x * delta.1);
                match right_incoming_state(vm, vp, model, energy) {
                    Ok([a, b]) => a.norm_sqr() * delta.0 + b.norm_sqr() * delta.1,
                    Err(e) => {
                        failure.get_or_insert(e);
                        0.0
                    }
                }
            },
            &[0.0, 1.0],
            tol,
        );
        if let Some(e) = failure {
            return Err(e);
        }
        total += r.require("one-body leg integral")?.value;
    }
    Ok(total / (2.0 * std::f64::consts::PI * velocity))
}

/// Pumped charge per cycle of the one-body turnstile. At zero temperature
/// only the Fermi level contributes; at finite temperature the
/// single-energy charge is averaged with `-df/dE`.
pub fn single_particle_pumped_charge(
    cycle: &PumpCycle,
    model: &LatticeModel,
    fermi: &FermiDistribution,
) -> Result<f64> {
    let tol = Tolerance::new(1e-13, 1e-10, 200_000);
    let e_f = fermi.e_max;
    match fermi.mode {
        DistributionMode::ZeroT => {
            if (e_f.abs() - ONE_BODY_BAND_EDGE).abs() < BAND_EDGE_MARGIN {
                return Err(PumpError::BandEdge { energy: e_f });
            }
            if e_f.abs() > ONE_BODY_BAND_EDGE {
                return Ok(0.0);
            }
            pumped_charge_at(cycle, model, e_f, tol)
        }
        DistributionMode::FiniteT => {
            let edge = ONE_BODY_BAND_EDGE - BAND_EDGE_MARGIN;
            let width = 40.0 / fermi.beta;
            let lo = (e_f - width).max(-edge);
            let hi = (e_f + width).min(edge);
            if hi <= lo {
                return Ok(0.0);
            }
            let mut points = vec![lo, hi];
            let core = 5.0 / fermi.beta;
            for p in [e_f - core, e_f, e_f + core] {
                if p > lo && p < hi {
                    points.push(p);
                }
            }
            points.sort_by(f64::total_cmp);
            let inner = Tolerance::new(1e-15, 1e-13, 200_000);
            let mut failure = None;
            let r = integrate(
                |e| match pumped_charge_at(cycle, model, e, inner) {
                    Ok(q) => fermi.minus_derivative(e) * q,
                    Err(err) => {
                        failure.get_or_insert(err);
                        0.0
                    }
                },
                &points,
                Tolerance::new(1e-10, 1e-7, 100_000),
            );
            if let Some(e) = failure {
                return Err(e);
            }
            Ok(r.require("one-body thermal average")?.value)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model() -> LatticeModel {
        LatticeModel::new(1).unwrap()
    }

    #[test]
    fn free_state_is_the_plane_wave() {
        let psi = right_incoming_state(0.0, 0.0, &model(), 0.3).unwrap();
        let k = (-0.15f64).acos();
        assert!((psi[0] - Complex64::from_polar(1.0, k)).norm() < 1e-14);
        assert!((psi[1] - Complex64::from_polar(1.0, -k)).norm() < 1e-14);
    }

    #[test]
    fn state_satisfies_schroedinger_equation() {
        // Propagate the exact solution outwards and check the recursion
        // psi(n+1) + psi(n-1) = (v_n - E) psi(n) at the impurity sites,
        // building the free parts from the transmitted/reflected waves.
        let (vm, vp, energy) = (1.3, -0.7, -0.4);
        let m = model();
        let psi = right_incoming_state(vm, vp, &m, energy).unwrap();
        let e = ComplexEnergy::on_shell(energy).unwrap();
        let k = (-energy / 2.0).acos();
        let wave = |n: i64| -> Complex64 {
            let g = |d: i64| single_green(d, e).unwrap().value;
            Complex64::from_polar(1.0, -k * n as f64)
                + g(n + 1) * vm * psi[0]
                + g(n - 1) * vp * psi[1]
        };
        for (n, v) in [(-1i64, vm), (1, vp)] {
            let lhs = wave(n + 1) + wave(n - 1);
            let rhs = wave(n) * (v - energy);
            assert!((lhs - rhs).norm() < 1e-12, "site {n}");
        }
        assert!((wave(0) * (0.0 - energy) - wave(1) - wave(-1)).norm() < 1e-12);
    }

    #[test]
    fn zero_area_and_reversal() {
        let fermi = FermiDistribution::zero_t(-1.0).unwrap();
        let line = PumpCycle::new(vec![(0.5, 0.5), (4.0, 1.0), (0.5, 0.5)], 1.0).unwrap();
        assert!(single_particle_pumped_charge(&line, &model(), &fermi).unwrap().abs() < 1e-12);
        let sq = PumpCycle::square(0.5, 4.0, 1.0).unwrap();
        let a = single_particle_pumped_charge(&sq, &model(), &fermi).unwrap();
        let b = single_particle_pumped_charge(&sq.reversed(), &model(), &fermi).unwrap();
        assert!(a.abs() > 0.1);
        assert!((a + b).abs() < 1e-12);
        let c = single_particle_pumped_charge(&sq.mirrored(), &model(), &fermi).unwrap();
        assert!((a + c).abs() < 1e-9);
    }

    #[test]
    fn band_edges() {
        let sq = PumpCycle::square(0.5, 4.0, 1.0).unwrap();
        let at_edge = FermiDistribution::zero_t(1.9995).unwrap();
        assert!(matches!(
            single_particle_pumped_charge(&sq, &model(), &at_edge),
            Err(PumpError::BandEdge { .. })
        ));
        let outside = FermiDistribution::zero_t(-2.5).unwrap();
        assert_eq!(single_particle_pumped_charge(&sq, &model(), &outside).unwrap(), 0.0);
    }

    #[test]
    fn thermal_average_tends_to_fermi_level_value() {
        let sq = PumpCycle::square(0.5, 4.0, 1.0).unwrap();
        let zero = single_particle_pumped_charge(&sq, &model(), &FermiDistribution::zero_t(-1.0).unwrap())
            .unwrap();
        let warm = single_particle_pumped_charge(
            &sq,
            &model(),
            &FermiDistribution::finite_t(-1.0, 1e3).unwrap(),
        )
        .unwrap();
        assert!((warm - zero).abs() < 1e-4 * zero.abs(), "{warm} vs {zero}");
    }
}
