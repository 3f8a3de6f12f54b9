//! Single-impurity T-matrices and the energy-resolved pumping kernel of the
//! two-impurity turnstile.
//!
//! With `g0 = G0(0)`, `g2 = G0(2m)` and the forced-branch elements `g+`,
//! `g-`, the kernel multiplying `dU_s` is
//!
//! ```text
//! K_+ = |a_+|^2 [Im g0 (1 + |T_- g2|^2) + 2 Im(T_- g2 g+)] / |1 - T_- T_+ g2^2|^2
//! K_- = |a_-|^2 [Im g0 (1 + |T_+ g2|^2) - 2 Im(T_+ g2 g-)] / |1 - T_- T_+ g2^2|^2
//! ```
//!
//! where `T_s = U_s / (1 + U_s g0)` and `a_s = T_s / U_s = 1 / (1 + U_s g0)`,
//! so `U_s = 0` is regular.
//!
//! The T-matrix `1/(1/U + g0)` is the Dyson resummation for Green's
//! functions defined as `(H - z)^{-1}`, i.e. with the opposite overall sign
//! to the resolvent returned by [`crate::lattice_green`]. The default
//! [`GreenConvention`] applies that sign before assembling the kernel.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{PumpError, Result};
use crate::lattice_green::{green_set, ComplexEnergy, GreenConfig, GreenSet, LatticeModel};

/// Sign convention of the Green's functions fed into the T-matrix and kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GreenConvention {
    /// `G = (H - z)^{-1}`: the convention under which `1/(1/U + G0)` is the
    /// T-matrix of an on-site interaction.
    #[default]
    HamiltonianMinusEnergy,
    /// `G = (z - H)^{-1}`, the plain resolvent, fed in unchanged.
    EnergyMinusHamiltonian,
}

impl GreenConvention {
    pub fn sign(self) -> f64 {
        match self {
            GreenConvention::HamiltonianMinusEnergy => -1.0,
            GreenConvention::EnergyMinusHamiltonian => 1.0,
        }
    }
}

/// Which forced-branch element enters the cross term of each summand.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignPairing {
    /// `K_+` uses `G0^+`, `K_-` uses `G0^-`.
    #[default]
    Printed,
    /// `K_+` uses `G0^-`, `K_-` uses `G0^+`.
    Alternate,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelConfig {
    pub green: GreenConfig,
    pub convention: GreenConvention,
    pub pairing: SignPairing,
    /// Smallest accepted `|1 - T_- T_+ g2^2|^2`.
    pub pole_threshold: f64,
}

impl Default for KernelConfig {
    fn default() -> Self {
        KernelConfig {
            green: GreenConfig::default(),
            convention: GreenConvention::default(),
            pairing: SignPairing::default(),
            pole_threshold: 1e-30,
        }
    }
}

/// Instantaneous interaction strengths at `(-m,-m)` and `(m,m)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImpurityState {
    pub u_minus: f64,
    pub u_plus: f64,
}

impl ImpurityState {
    pub fn new(u_minus: f64, u_plus: f64) -> Result<Self> {
        if !u_minus.is_finite() || !u_plus.is_finite() {
            return Err(PumpError::invalid(
                "interaction strengths",
                format!("({u_minus}, {u_plus}) must be finite"),
            ));
        }
        Ok(ImpurityState { u_minus, u_plus })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TMatrixPair {
    pub t_minus: Complex64,
    pub t_plus: Complex64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelValue {
    pub k_minus: f64,
    pub k_plus: f64,
}

/// Green's elements at one energy with the convention sign applied.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelGreens {
    pub energy: f64,
    pub g0: Complex64,
    pub g2: Complex64,
    pub plus: Complex64,
    pub minus: Complex64,
}

impl KernelGreens {
    pub fn from_set(set: &GreenSet, convention: GreenConvention) -> Self {
        let s = convention.sign();
        KernelGreens {
            energy: set.energy.re(),
            g0: set.onsite * s,
            g2: set.offdiag * s,
            plus: set.plus * s,
            minus: set.minus * s,
        }
    }
}

/// `1/(1 + U g0)`; equals `T/U` and stays regular at `U = 0`.
fn reduced_t(u: f64, g0: Complex64, energy: f64) -> Result<Complex64> {
    let d = Complex64::new(1.0, 0.0) + g0 * u;
    if d.norm() <= 1e-13 * (1.0 + (g0 * u).norm()) {
        return Err(PumpError::TMatrixPole { u, energy });
    }
    Ok(d.inv())
}

fn t_from_green(u: f64, g0: Complex64, energy: f64) -> Result<Complex64> {
    if u == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    Ok(reduced_t(u, g0, energy)? * u)
}

/// Single-impurity T-matrix `1/(1/U + G0(0))`.
pub fn t_matrix(u: f64, e: ComplexEnergy, cfg: &KernelConfig) -> Result<Complex64> {
    if !u.is_finite() {
        return Err(PumpError::invalid("interaction strength", format!("{u}")));
    }
    if u == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let g0 = crate::lattice_green::g0_onsite(e, &cfg.green)?.value * cfg.convention.sign();
    t_from_green(u, g0, e.re())
}

pub fn t_matrices(state: &ImpurityState, greens: &KernelGreens) -> Result<TMatrixPair> {
    Ok(TMatrixPair {
        t_minus: t_from_green(state.u_minus, greens.g0, greens.energy)?,
        t_plus: t_from_green(state.u_plus, greens.g0, greens.energy)?,
    })
}

/// Kernel from precomputed Green's elements; the hot path of the pump engine.
pub fn kernel_from_greens(
    state: &ImpurityState,
    greens: &KernelGreens,
    pairing: SignPairing,
    pole_threshold: f64,
) -> Result<KernelValue> {
    let KernelGreens { g0, g2, .. } = *greens;
    let a_minus = reduced_t(state.u_minus, g0, greens.energy)?;
    let a_plus = reduced_t(state.u_plus, g0, greens.energy)?;
    let t_minus = a_minus * state.u_minus;
    let t_plus = a_plus * state.u_plus;

    let den = (Complex64::new(1.0, 0.0) - t_minus * t_plus * g2 * g2).norm_sqr();
    if !(den > pole_threshold) {
        return Err(PumpError::KernelPole {
            u_minus: state.u_minus,
            u_plus: state.u_plus,
            energy: greens.energy,
            denominator: den,
        });
    }

    let (cross_plus, cross_minus) = match pairing {
        SignPairing::Printed => (greens.plus, greens.minus),
        SignPairing::Alternate => (greens.minus, greens.plus),
    };
    let tg_minus = t_minus * g2;
    let tg_plus = t_plus * g2;
    let k_plus = a_plus.norm_sqr()
        * (g0.im * (1.0 + tg_minus.norm_sqr()) + 2.0 * (tg_minus * cross_plus).im)
        / den;
    let k_minus = a_minus.norm_sqr()
        * (g0.im * (1.0 + tg_plus.norm_sqr()) - 2.0 * (tg_plus * cross_minus).im)
        / den;
    Ok(KernelValue { k_minus, k_plus })
}

/// Pumping kernel `(K_-, K_+)` at one energy.
pub fn pump_kernel(
    state: &ImpurityState,
    e: ComplexEnergy,
    model: &LatticeModel,
    cfg: &KernelConfig,
) -> Result<KernelValue> {
    let set = green_set(model, e, &cfg.green)?;
    let greens = KernelGreens::from_set(&set, cfg.convention);
    kernel_from_greens(state, &greens, cfg.pairing, cfg.pole_threshold)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice_green::g0_onsite;
    use proptest::prelude::*;

    fn cfg() -> KernelConfig {
        KernelConfig::default()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn t_matrix_limits() {
        let e = ComplexEnergy::new(0.0, 1e-6).unwrap();
        assert_eq!(t_matrix(0.0, e, &cfg()).unwrap(), c(0.0, 0.0));
        let g0 = -g0_onsite(e, &cfg().green).unwrap().value;
        let hard = t_matrix(1e12, e, &cfg()).unwrap();
        assert!((hard - g0.inv()).norm() / g0.inv().norm() < 1e-9);
        assert!(t_matrix(f64::NAN, e, &cfg()).is_err());
    }

    #[test]
    fn t_matrix_pole_is_flagged() {
        let g0 = c(-0.25, 0.0);
        assert!(matches!(
            t_from_green(4.0, g0, -5.0),
            Err(PumpError::TMatrixPole { .. })
        ));
        assert!(t_from_green(3.9, g0, -5.0).is_ok());
    }

    #[test]
    fn convention_flips_green_sign() {
        let e = ComplexEnergy::new(0.3, 1e-4).unwrap();
        let resolvent = cfg();
        let plain = KernelConfig {
            convention: GreenConvention::EnergyMinusHamiltonian,
            ..cfg()
        };
        let g0 = g0_onsite(e, &resolvent.green).unwrap().value;
        let a = t_matrix(2.0, e, &resolvent).unwrap();
        let b = t_matrix(2.0, e, &plain).unwrap();
        assert!((a - 1.0 / (0.5 - g0)).norm() < 1e-12);
        assert!((b - 1.0 / (0.5 + g0)).norm() < 1e-12);
    }

    #[test]
    fn kernel_at_zero_coupling_is_im_g0() {
        let model = LatticeModel::new(1).unwrap();
        let e = ComplexEnergy::new(0.7, 1e-6).unwrap();
        let k = pump_kernel(&ImpurityState::new(0.0, 0.0).unwrap(), e, &model, &cfg()).unwrap();
        let im_g0 = -g0_onsite(e, &cfg().green).unwrap().im();
        assert!(im_g0 > 0.0);
        assert!((k.k_plus - im_g0).abs() < 1e-12);
        assert!((k.k_minus - im_g0).abs() < 1e-12);
    }

    #[test]
    fn kernel_vanishes_below_band() {
        let eta = 1e-6;
        for m in 1..=2 {
            let model = LatticeModel::new(m).unwrap();
            for &en in &[-6.0, -4.5, -4.1] {
                let e = ComplexEnergy::new(en, eta).unwrap();
                for &(a, b) in &[(0.5, 4.0), (1.0, 3.0), (2.0, 2.0), (0.0, 1.0)] {
                    let k = pump_kernel(&ImpurityState::new(a, b).unwrap(), e, &model, &cfg())
                        .unwrap();
                    assert!(k.k_plus.abs() < 10.0 * eta, "E={en} {k:?}");
                    assert!(k.k_minus.abs() < 10.0 * eta, "E={en} {k:?}");
                }
            }
        }
    }

    #[test]
    fn kernel_continuous_at_zero_coupling() {
        let model = LatticeModel::new(1).unwrap();
        let e = ComplexEnergy::new(-1.0, 1e-6).unwrap();
        let set = green_set(&model, e, &cfg().green).unwrap();
        let g = KernelGreens::from_set(&set, cfg().convention);
        let at = |um: f64, up: f64| {
            kernel_from_greens(&ImpurityState::new(um, up).unwrap(), &g, SignPairing::Printed, 1e-30)
                .unwrap()
        };
        let zero = at(0.0, 2.0);
        let near = at(1e-9, 2.0);
        assert!((zero.k_minus - near.k_minus).abs() < 1e-7);
        assert!((zero.k_plus - near.k_plus).abs() < 1e-7);
        let zero = at(1.5, 0.0);
        let near = at(1.5, -1e-9);
        assert!((zero.k_minus - near.k_minus).abs() < 1e-7);
        assert!((zero.k_plus - near.k_plus).abs() < 1e-7);
    }

    #[test]
    fn kernel_pole_is_flagged() {
        // Choose g2 so that T_- T_+ g2^2 = 1 exactly.
        let g = KernelGreens {
            energy: 1.0,
            g0: c(0.0, 0.0),
            g2: c(0.5, 0.0),
            plus: c(0.1, 0.1),
            minus: c(0.1, -0.1),
        };
        let r = kernel_from_greens(&ImpurityState::new(2.0, 2.0).unwrap(), &g, SignPairing::Printed, 1e-30);
        assert!(matches!(r, Err(PumpError::KernelPole { .. })));
    }

    #[test]
    fn pairing_swaps_cross_terms() {
        let g = KernelGreens {
            energy: 0.0,
            g0: c(0.1, 0.4),
            g2: c(-0.2, 0.3),
            plus: c(0.05, 0.2),
            minus: c(-0.3, 0.1),
        };
        let swapped = KernelGreens {
            plus: g.minus,
            minus: g.plus,
            ..g
        };
        let s = ImpurityState::new(1.0, 3.0).unwrap();
        let alt = kernel_from_greens(&s, &g, SignPairing::Alternate, 1e-30).unwrap();
        let printed = kernel_from_greens(&s, &swapped, SignPairing::Printed, 1e-30).unwrap();
        assert_eq!(alt, printed);
    }

    #[test]
    fn pinned_kernel_regression() {
        let model = LatticeModel::new(1).unwrap();
        let e = ComplexEnergy::new(0.0, 1e-6).unwrap();
        let k = pump_kernel(&ImpurityState::new(1.0, 3.0).unwrap(), e, &model, &cfg()).unwrap();
        assert!((k.k_minus - 3.831_840_404).abs() < 1e-6, "{k:?}");
        assert!((k.k_plus - 0.442_719_236).abs() < 1e-6, "{k:?}");
    }

    fn greens_strategy() -> impl Strategy<Value = KernelGreens> {
        let cplx = || (-1.0..1.0f64, -1.0..1.0f64).prop_map(|(a, b)| Complex64::new(a, b));
        (cplx(), cplx(), cplx(), cplx()).prop_map(|(g0, g2, plus, minus)| KernelGreens {
            energy: 0.0,
            g0: Complex64::new(g0.re, g0.im.abs()),
            g2,
            plus,
            minus,
        })
    }

    proptest! {
        #[test]
        fn exchange_symmetry(g in greens_strategy(), a in -5.0..5.0f64, b in -5.0..5.0f64) {
            // K_+ with (U-, U+) = (b, a) equals K_- with (U-, U+) = (a, b)
            // once the forced-branch elements are exchanged with a sign flip.
            let mirrored = KernelGreens { plus: -g.minus, minus: -g.plus, ..g };
            let lhs = kernel_from_greens(&ImpurityState::new(b, a).unwrap(), &g, SignPairing::Printed, 1e-30);
            let rhs = kernel_from_greens(&ImpurityState::new(a, b).unwrap(), &mirrored, SignPairing::Printed, 1e-30);
            if let (Ok(l), Ok(r)) = (lhs, rhs) {
                let scale = 1.0 + l.k_plus.abs();
                prop_assert!((l.k_plus - r.k_minus).abs() < 1e-10 * scale);
            }
        }

        #[test]
        fn kernel_finite_off_poles(g in greens_strategy(), a in -5.0..5.0f64, b in -5.0..5.0f64) {
            if let Ok(k) = kernel_from_greens(&ImpurityState::new(a, b).unwrap(), &g, SignPairing::Printed, 1e-30) {
                prop_assert!(k.k_minus.is_finite());
                prop_assert!(k.k_plus.is_finite());
            }
        }

        #[test]
        fn t_vanishes_with_u(g0re in -1.0..1.0f64, g0im in 0.0..1.0f64, u in -1e-6..1e-6f64) {
            let t = t_from_green(u, Complex64::new(g0re, g0im), 0.0).unwrap();
            prop_assert!(t.norm() <= 2.0 * u.abs());
        }
    }
}
