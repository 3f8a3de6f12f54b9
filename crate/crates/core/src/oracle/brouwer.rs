//! Pumped charge of the one-body turnstile from the parametric derivatives
//! of its scattering matrix:
//!
//! ```text
//! Q_R = (1/pi) int_A dv_- dv_+ sum_b Im( conj(dS_Rb/dv_+) dS_Rb/dv_- )
//! ```
//!
//! over the area enclosed by the cycle (signed by orientation in the
//! `(v_-, v_+)` plane). `S` comes from transfer matrices through the two
//! impurity sites, with the derivatives taken analytically.

use num_complex::Complex64;

use crate::error::{PumpError, Result};
use crate::lattice_green::LatticeModel;
use crate::pump::cycle::PumpCycle;
use crate::pump::single_particle::{BAND_EDGE_MARGIN, ONE_BODY_BAND_EDGE};
use crate::quadrature::{integrate, Tolerance};

type M2 = [[Complex64; 2]; 2];

fn mul(a: &M2, b: &M2) -> M2 {
    let mut c = [[Complex64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    c
}

fn real(a: [[f64; 2]; 2]) -> M2 {
    a.map(|row| row.map(|x| Complex64::new(x, 0.0)))
}

/// Scattering matrix `[[r, t'], [t, r']]` (rows: outgoing left/right,
/// columns: incoming left/right) and its derivatives in `v_-` and `v_+`.
#[derive(Debug, Clone, Copy)]
pub struct ScatteringMatrix {
    pub s: M2,
    pub d_minus: M2,
    pub d_plus: M2,
}

/// Plane-wave matrix `P(n)` mapping `(A, B)` in `A e^{ikn} + B e^{-ikn}` to
/// `(psi(n), psi(n-1))`.
fn plane_waves(k: f64, n: i64) -> M2 {
    let e = |x: f64| Complex64::from_polar(1.0, x);
    let (a, b) = (k * n as f64, k * (n - 1) as f64);
    [[e(a), e(-a)], [e(b), e(-b)]]
}

fn inverse(m: &M2) -> M2 {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    [[m[1][1] / det, -m[0][1] / det], [-m[1][0] / det, m[0][0] / det]]
}

/// `S` of potentials `v_-` at `-m` and `v_+` at `+m` at energy `E` inside
/// the band, by transfer matrices `T_n = [[v_n - E, -1], [1, 0]]` acting on
/// `(psi(n), psi(n-1))`.
pub fn scattering_matrix(
    v_minus: f64,
    v_plus: f64,
    model: &LatticeModel,
    energy: f64,
) -> Result<ScatteringMatrix> {
    if (energy.abs() - ONE_BODY_BAND_EDGE).abs() < BAND_EDGE_MARGIN {
        return Err(PumpError::BandEdge { energy });
    }
    if energy.abs() >= ONE_BODY_BAND_EDGE {
        return Err(PumpError::invalid("energy", format!("{energy} outside the band")));
    }
    let k = (-energy / 2.0).acos();
    let m = model.m() as i64;
    let transfer = |v: f64| real([[v - energy, -1.0], [1.0, 0.0]]);
    let free = transfer(0.0);
    let unit = real([[1.0, 0.0], [0.0, 1.0]]);
    let kick = real([[1.0, 0.0], [0.0, 0.0]]);

    // M = T_m ... T_{-m}; the interior sites are free.
    let mut interior = unit;
    for _ in (-m + 1)..m {
        interior = mul(&free, &interior);
    }
    let t_minus = transfer(v_minus);
    let t_plus = transfer(v_plus);
    let total = mul(&t_plus, &mul(&interior, &t_minus));
    let d_total_plus = mul(&kick, &mul(&interior, &t_minus));
    let d_total_minus = mul(&t_plus, &mul(&interior, &kick));

    let left = plane_waves(k, -m);
    let right_inv = inverse(&plane_waves(k, m + 1));
    let w = mul(&right_inv, &mul(&total, &left));
    let dw_plus = mul(&right_inv, &mul(&d_total_plus, &left));
    let dw_minus = mul(&right_inv, &mul(&d_total_minus, &left));

    let s = s_from_w(&w);
    Ok(ScatteringMatrix {
        s,
        d_minus: ds_from_w(&w, &dw_minus),
        d_plus: ds_from_w(&w, &dw_plus),
    })
}

fn s_from_w(w: &M2) -> M2 {
    let det = w[0][0] * w[1][1] - w[0][1] * w[1][0];
    let w22 = w[1][1];
    let r = -w[1][0] / w22;
    let t = det / w22;
    let tp = Complex64::new(1.0, 0.0) / w22;
    let rp = w[0][1] / w22;
    [[r, tp], [t, rp]]
}

fn ds_from_w(w: &M2, dw: &M2) -> M2 {
    let w22 = w[1][1];
    let q = w22 * w22;
    let det = w[0][0] * w[1][1] - w[0][1] * w[1][0];
    let ddet = dw[0][0] * w[1][1] + w[0][0] * dw[1][1] - dw[0][1] * w[1][0] - w[0][1] * dw[1][0];
    let dr = -(dw[1][0] * w22 - w[1][0] * dw[1][1]) / q;
    let dt = (ddet * w22 - det * dw[1][1]) / q;
    let dtp = -dw[1][1] / q;
    let drp = (dw[0][1] * w22 - w[0][1] * dw[1][1]) / q;
    [[dr, dtp], [dt, drp]]
}

/// Brouwer integrand for charge entering the right lead.
pub fn brouwer_density(v_minus: f64, v_plus: f64, model: &LatticeModel, energy: f64) -> Result<f64> {
    let sm = scattering_matrix(v_minus, v_plus, model, energy)?;
    let mut total = 0.0;
    for b in 0..2 {
        total += (sm.d_plus[1][b].conj() * sm.d_minus[1][b]).im;
    }
    Ok(total / std::f64::consts::PI)
}

/// Charge per cycle into the right lead from the area integral of the
/// Brouwer density over the cycle footprint (zero temperature).
pub fn brouwer_pumped_charge(cycle: &PumpCycle, model: &LatticeModel, fermi_level: f64) -> Result<f64> {
    // Fail early on band-edge or out-of-band energies.
    scattering_matrix(0.0, 0.0, model, fermi_level)?;
    let tol_inner = Tolerance::new(1e-14, 1e-11, 100_000);
    let tol_outer = Tolerance::new(1e-13, 1e-10, 100_000);
    let v = cycle.vertices();
    let origin = v[0];
    let mut total = 0.0;
    // Fan triangulation from the first vertex; each triangle carries the
    // sign of its orientation, so the sum is the signed area integral.
    for w in v[1..].windows(2) {
        let (a, b) = (w[0], w[1]);
        let e1 = (a.0 - origin.0, a.1 - origin.1);
        let e2 = (b.0 - a.0, b.1 - a.1);
        let jac = e1.0 * e2.1 - e1.1 * e2.0;
        if jac == 0.0 {
            continue;
        }
        let mut failure = None;
        // Collapsed coordinates: p = origin + s e1 + s t e2, dA = s |jac|.
        let outer = integrate(
            |s| {
                let inner = integrate(
                    |t| {
                        let p = (origin.0 + s * (e1.0 + t * e2.0), origin.1 + s * (e1.1 + t * e2.1));
                        match brouwer_density(p.0, p.1, model, fermi_level) {
                            Ok(d) => d,
                            Err(e) => {
                                failure.get_or_insert(e);
                                0.0
                            }
                        }
                    },
                    &[0.0, 1.0],
                    tol_inner,
                );
                if !inner.converged {
                    failure.get_or_insert(PumpError::NonConvergence {
                        what: "Brouwer inner integral",
                        estimate: inner.value,
                        error: inner.error,
                        evaluations: inner.evaluations,
                    });
                }
                s * inner.value
            },
            &[0.0, 1.0],
            tol_outer,
        );
        if let Some(e) = failure {
            return Err(e);
        }
        total += jac * outer.require("Brouwer area integral")?.value;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model(m: u32) -> LatticeModel {
        LatticeModel::new(m).unwrap()
    }

    #[test]
    fn scattering_matrix_is_unitary_and_symmetric() {
        for &(a, b, e) in &[(0.5, 4.0, 0.0), (-1.2, 0.3, -1.1), (2.0, 2.0, 1.7)] {
            for m in 1..=3 {
                let s = scattering_matrix(a, b, &model(m), e).unwrap().s;
                for i in 0..2 {
                    for j in 0..2 {
                        let dot = s[0][i].conj() * s[0][j] + s[1][i].conj() * s[1][j];
                        let expect = if i == j { 1.0 } else { 0.0 };
                        assert!((dot - expect).norm() < 1e-12, "m={m}: {dot}");
                    }
                }
                // Time reversal: t = t'.
                assert!((s[1][0] - s[0][1]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn free_chain_transmits() {
        let s = scattering_matrix(0.0, 0.0, &model(2), 0.4).unwrap().s;
        assert!(s[0][0].norm() < 1e-13 && s[1][1].norm() < 1e-13);
        assert!((s[1][0].norm() - 1.0).abs() < 1e-13);
    }

    #[test]
    fn analytic_derivatives_match_differences() {
        let (a, b, e) = (0.7, 2.1, -0.6);
        let sm = scattering_matrix(a, b, &model(1), e).unwrap();
        let h = 1e-6;
        let fd = |da: f64, db: f64| {
            let p = scattering_matrix(a + da, b + db, &model(1), e).unwrap().s;
            let q = scattering_matrix(a - da, b - db, &model(1), e).unwrap().s;
            [[(p[0][0] - q[0][0]) / (2.0 * h), (p[0][1] - q[0][1]) / (2.0 * h)],
             [(p[1][0] - q[1][0]) / (2.0 * h), (p[1][1] - q[1][1]) / (2.0 * h)]]
        };
        let (dm, dp) = (fd(h, 0.0), fd(0.0, h));
        for i in 0..2 {
            for j in 0..2 {
                assert!((dm[i][j] - sm.d_minus[i][j]).norm() < 1e-8);
                assert!((dp[i][j] - sm.d_plus[i][j]).norm() < 1e-8);
            }
        }
    }

    #[test]
    fn mirror_and_degenerate_cycles() {
        let sq = PumpCycle::square(0.5, 4.0, 1.0).unwrap();
        let q = brouwer_pumped_charge(&sq, &model(1), -1.0).unwrap();
        let mirror = brouwer_pumped_charge(&sq.mirrored(), &model(1), -1.0).unwrap();
        assert!(q.abs() > 0.1);
        assert!((q + mirror).abs() < 1e-9, "{q} {mirror}");
        let line = PumpCycle::new(vec![(0.5, 0.5), (4.0, 2.0), (0.5, 0.5)], 1.0).unwrap();
        assert_eq!(brouwer_pumped_charge(&line, &model(1), -1.0).unwrap(), 0.0);
    }

    #[test]
    fn band_edge_is_rejected() {
        let sq = PumpCycle::square(0.5, 4.0, 1.0).unwrap();
        assert!(matches!(
            brouwer_pumped_charge(&sq, &model(1), 1.9999),
            Err(PumpError::BandEdge { .. })
        ));
    }
}
