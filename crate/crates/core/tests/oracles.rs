//! Agreement between the quadrature pipeline and the brute-force oracles
//! in regimes where the finite systems are converged.

use pump_core::impurity::t_matrix;
use pump_core::lattice_green::green_set;
use pump_core::oracle::{
    brouwer_pumped_charge, extract_t_matrix, resolvent_element, slater_sea_evolution, FiniteLattice,
    ResolventMethod, Sector, SlaterConfig,
};
use pump_core::pump::single_particle_pumped_charge;
use pump_core::{ComplexEnergy, FermiDistribution, GreenConfig, ImpurityState, KernelConfig, LatticeModel, PumpCycle};

fn model(m: u32) -> LatticeModel {
    LatticeModel::new(m).unwrap()
}

/// Worst relative error of the onsite and offdiagonal elements over 20
/// energies in `[-5, 5]`.
fn green_error(n: usize, eta: f64, m: u32) -> f64 {
    let lat = FiniteLattice::open(n).unwrap();
    let free = ImpurityState::new(0.0, 0.0).unwrap();
    let s = m as i64;
    let mut worst: f64 = 0.0;
    for i in 0..20 {
        let z = ComplexEnergy::new(-5.0 + 10.0 * i as f64 / 19.0, eta).unwrap();
        let set = green_set(&model(m), z, &GreenConfig::default()).unwrap();
        for (q, col) in [(set.onsite, (s, s)), (set.offdiag, (-s, -s))] {
            let r = resolvent_element(&lat, Sector::Symmetric, &free, m, z, (s, s), col, ResolventMethod::Spectral)
                .unwrap();
            worst = worst.max((q - r).norm() / r.norm());
        }
    }
    worst
}

#[test]
fn green_matches_broadened_lattice() {
    for m in [1, 2] {
        let err = green_error(400, 0.05, m);
        assert!(err < 1e-4, "m = {m}: {err:e}");
    }
}

#[test]
fn green_error_shrinks_with_lattice_size() {
    let errs: Vec<f64> = [100, 200, 400].iter().map(|&n| green_error(n, 0.05, 1)).collect();
    assert!(errs[0] > errs[1] && errs[1] > errs[2], "{errs:?}");
}

#[test]
fn t_matrix_matches_lattice_extraction() {
    let lat = FiniteLattice::open(4000).unwrap();
    for u in [-3.0, 0.5, 2.0, 8.0] {
        for e in [-3.0, -1.0, 0.7, 2.5, 5.0] {
            let z = ComplexEnergy::new(e, 0.01).unwrap();
            let t = t_matrix(u, z, &KernelConfig::default()).unwrap();
            let x = extract_t_matrix(&lat, u, z, ResolventMethod::Spectral).unwrap();
            assert!((t - x).norm() < 1e-6 * x.norm().max(1.0), "u = {u}, E = {e}: {t} vs {x}");
        }
    }
}

#[test]
fn scattering_states_match_brouwer() {
    let cycles = [
        PumpCycle::square(0.5, 4.0, 1.0).unwrap(),
        PumpCycle::new(vec![(0.0, 0.0), (2.0, 0.5), (1.0, 3.0), (0.0, 0.0)], 1.0).unwrap(),
        PumpCycle::new(vec![(-1.0, 2.0), (1.5, -0.5), (3.0, 3.0), (-1.0, 2.0)], 1.0).unwrap(),
    ];
    for m in [1, 2] {
        for c in &cycles {
            for e in [-1.7, -1.0, -0.3, 0.0, 0.4, 1.2, 1.9] {
                let ls = single_particle_pumped_charge(c, &model(m), &FermiDistribution::zero_t(e).unwrap()).unwrap();
                let b = brouwer_pumped_charge(c, &model(m), e).unwrap();
                assert!((ls - b).abs() < 1e-9, "m = {m}, E = {e}: {ls} vs {b}");
            }
        }
    }
}

fn ring_charge(n: usize, tau: f64, dt: f64, fermi: f64) -> f64 {
    let c = PumpCycle::square(0.5, 4.0, tau).unwrap();
    let cfg = SlaterConfig {
        fermi_level: fermi,
        steps: (tau / dt).round() as usize,
    };
    slater_sea_evolution(&FiniteLattice::periodic(n).unwrap(), &model(1), &c, &cfg)
        .unwrap()
        .transferred_charge
}

#[test]
fn ring_time_step_is_converged() {
    let coarse = ring_charge(600, 75.0, 0.05, -1.0);
    let fine = ring_charge(600, 75.0, 0.025, -1.0);
    assert!((coarse - fine).abs() < 1e-4, "{coarse} vs {fine}");
}

/// With the period short of the ring transit time, the ring behaves as an
/// open system; the remaining `1/tau` non-adiabatic correction is removed
/// by extrapolating from `tau` and `2 tau`.
#[test]
fn ring_reaches_the_open_lead_limit() {
    let exact = single_particle_pumped_charge(
        &PumpCycle::square(0.5, 4.0, 1.0).unwrap(),
        &model(1),
        &FermiDistribution::zero_t(-1.0).unwrap(),
    )
    .unwrap();
    assert!((exact - 10.0 / 21.0).abs() < 1e-12);
    let q1 = ring_charge(1200, 150.0, 0.2, -1.0);
    let q2 = ring_charge(1200, 300.0, 0.2, -1.0);
    assert!((q2 - exact).abs() < (q1 - exact).abs());
    let limit = 2.0 * q2 - q1;
    assert!((limit - exact).abs() < 0.01 * exact, "{q1} {q2} -> {limit} vs {exact}");
}
