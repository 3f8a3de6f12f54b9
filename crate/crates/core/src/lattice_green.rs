//! Free retarded Green's functions of the infinite 1D tight-binding chain.
//!
//! The two-particle elements between doubly occupied sites are reduced to a
//! single momentum integral: one particle's momentum `k` is integrated
//! numerically while the other particle's chain propagator is summed in
//! closed form, `e^{-|n| lambda} / (2 sinh lambda)` with
//! `cosh lambda = E/2 - cos k`. Folding `k -> -k` onto `[0, pi]` gives
//!
//! ```text
//! G0(m, -m; E) = int_0^pi dk/2pi  cos(2mk) e^{-2m lambda(k)} / sinh lambda(k)
//! ```
//!
//! Energies are in units of the hopping, with zero on-site energy. All
//! elements returned here follow the resolvent convention
//! `G = (E + i eta - H)^{-1}`; the impurity module converts them to the sign
//! convention used by the pumping formula.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{PumpError, Result};
use crate::quadrature::{integrate, Tolerance};

/// Default broadening of the retarded prescription.
pub const DEFAULT_ETA: f64 = 1e-6;

/// Chain conventions: unit hopping, zero on-site energy, impurities at `-m`
/// and `+m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeModel {
    m: u32,
}

impl LatticeModel {
    pub const HOPPING: f64 = 1.0;
    pub const ONSITE: f64 = 0.0;

    pub fn new(m: u32) -> Result<Self> {
        if m == 0 {
            return Err(PumpError::invalid("impurity index m", "must be >= 1"));
        }
        Ok(LatticeModel { m })
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn hopping(&self) -> f64 {
        Self::HOPPING
    }

    pub fn onsite(&self) -> f64 {
        Self::ONSITE
    }

    /// Number of sites spanned by the scattering region, `2m + 1`.
    pub fn scattering_length(&self) -> u32 {
        2 * self.m + 1
    }
}

/// Energy with an infinitesimal imaginary shift. A positive shift is the
/// retarded prescription, a negative one the advanced; zero is the
/// boundary value on the real axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexEnergy {
    re: f64,
    shift: f64,
}

impl ComplexEnergy {
    /// Retarded energy `re + i eta`, `eta > 0`.
    pub fn new(re: f64, eta: f64) -> Result<Self> {
        if !re.is_finite() {
            return Err(PumpError::invalid("energy", format!("{re} is not finite")));
        }
        if !(eta > 0.0) || !eta.is_finite() {
            return Err(PumpError::invalid("eta", format!("{eta} must be positive")));
        }
        Ok(ComplexEnergy { re, shift: eta })
    }

    /// Advanced energy `re - i eta`.
    pub fn advanced(re: f64, eta: f64) -> Result<Self> {
        let e = Self::new(re, eta)?;
        Ok(ComplexEnergy {
            re,
            shift: -e.shift,
        })
    }

    /// Real-axis boundary value (`eta -> 0+` branch where it exists).
    pub fn on_shell(re: f64) -> Result<Self> {
        if !re.is_finite() {
            return Err(PumpError::invalid("energy", format!("{re} is not finite")));
        }
        Ok(ComplexEnergy { re, shift: 0.0 })
    }

    pub fn re(&self) -> f64 {
        self.re
    }

    pub fn eta(&self) -> f64 {
        self.shift.abs()
    }

    pub fn is_advanced(&self) -> bool {
        self.shift < 0.0
    }

    pub fn z(&self) -> Complex64 {
        Complex64::new(self.re, self.shift)
    }

    /// Same prescription with a different broadening.
    pub fn with_eta(&self, eta: f64) -> Result<Self> {
        if self.is_advanced() {
            Self::advanced(self.re, eta)
        } else {
            Self::new(self.re, eta)
        }
    }

    /// Mirror across the real axis (retarded <-> advanced).
    pub fn conjugate(&self) -> Self {
        ComplexEnergy {
            re: self.re,
            shift: -self.shift,
        }
    }
}

/// A complex Green's-function matrix element (dimension 1/energy).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GreenElement {
    pub value: Complex64,
}

impl GreenElement {
    pub fn re(&self) -> f64 {
        self.value.re
    }
    pub fn im(&self) -> f64 {
        self.value.im
    }
}

impl From<Complex64> for GreenElement {
    fn from(value: Complex64) -> Self {
        GreenElement { value }
    }
}

/// Which forced branch `lambda = +/- i|lambda|` to use on propagating momenta.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BranchSign {
    Plus,
    Minus,
}

impl BranchSign {
    fn factor(self) -> f64 {
        match self {
            BranchSign::Plus => 1.0,
            BranchSign::Minus => -1.0,
        }
    }
}

/// Treatment of evanescent momenta (`|E/2 - cos k| > 1`) in the forced-branch
/// elements, where `lambda` is not imaginary and the forced branch is
/// undefined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvanescentBranch {
    /// Keep the decaying `Re lambda > 0` root for both signs.
    #[default]
    Keep,
    /// Drop evanescent momenta from the forced-branch integrals.
    Drop,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreenConfig {
    pub tolerance: Tolerance,
    pub evanescent: EvanescentBranch,
    /// Evaluate at `eta` and `eta/2` and extrapolate linearly to `eta -> 0`.
    pub eta_extrapolation: bool,
}

impl Default for GreenConfig {
    fn default() -> Self {
        GreenConfig {
            tolerance: Tolerance::new(1e-9, 1e-10, 1_000_000),
            evanescent: EvanescentBranch::Keep,
            eta_extrapolation: false,
        }
    }
}

/// All two-particle elements the pumping kernel needs at one energy, in the
/// resolvent convention.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreenSet {
    pub energy: ComplexEnergy,
    pub m: u32,
    /// `G0(m m; m m)`
    pub onsite: Complex64,
    /// `G0(m m; -m -m)`
    pub offdiag: Complex64,
    /// Forced branch `lambda = +i|lambda|`.
    pub plus: Complex64,
    /// Forced branch `lambda = -i|lambda|`.
    pub minus: Complex64,
    /// Quadrature error estimate (max over components).
    pub error: f64,
}

/// Principal `acosh`, which already has `Re >= 0`. On the real axis the
/// real part of a propagating root can come out as `-1e-17`; it is clamped
/// rather than negated, since negation would jump to the advanced branch.
fn decaying_acosh(w: Complex64) -> Complex64 {
    let lambda = w.acosh();
    Complex64::new(lambda.re.max(0.0), lambda.im)
}

/// Root `lambda` of `cosh lambda = E/2 - cos k` with `Re lambda > 0`.
///
/// For a shifted energy the root is unique and continuous in `k`: the
/// argument moves along a horizontal line off the real axis and never
/// crosses the branch cut of the principal `acosh`.
pub fn relative_log(k: f64, e: ComplexEnergy) -> Result<Complex64> {
    if !(0.0..=PI).contains(&k) {
        return Err(PumpError::invalid("momentum", format!("{k} outside [0, pi]")));
    }
    let w = e.z() * 0.5 - k.cos();
    if e.shift == 0.0 && (w.re.abs() - 1.0).abs() <= 4.0 * f64::EPSILON {
        return Err(PumpError::BandEdge { energy: e.re });
    }
    Ok(decaying_acosh(w))
}

/// Momenta in `(0, pi)` where `E/2 - cos k = +/-1` (sinh lambda vanishes).
fn branch_points(energy: f64) -> Vec<f64> {
    let mut pts = Vec::new();
    for c in [energy / 2.0 - 1.0, energy / 2.0 + 1.0] {
        if c > -1.0 && c < 1.0 {
            pts.push(c.acos());
        }
    }
    pts.sort_by(f64::total_cmp);
    pts
}

/// Integrate `kernel(k, lambda, propagating)` over `[0, pi]`, with `1/2pi`
/// included. Each piece between branch points is split in half and mapped
/// with `k = a + (c - a) s^2` towards each end, which removes the inverse
/// square-root singularities of `1/sinh lambda` at the branch points.
fn momentum_integral<const N: usize>(
    e: ComplexEnergy,
    tol: Tolerance,
    kernel: impl Fn(f64, Complex64, bool) -> [Complex64; N],
) -> Result<([Complex64; N], f64)> {
    let mut knots = vec![0.0];
    knots.extend(branch_points(e.re));
    knots.push(PI);
    knots.dedup();

    let pieces: Vec<(f64, f64)> = knots.windows(2).map(|w| (w[0], w[1])).collect();
    let n = pieces.len();
    let half_e = e.z() * 0.5;
    let edge = e.shift == 0.0;

    let mut bad_point = None;
    let integrand = |s: f64| -> [Complex64; N] {
        let j = ((s / 2.0).floor() as usize).min(n - 1);
        let (a, b) = pieces[j];
        let c = 0.5 * (a + b);
        let local = s - 2.0 * j as f64;
        let (k, jac) = if local <= 1.0 {
            (a + (c - a) * local * local, 2.0 * (c - a) * local)
        } else {
            let u = 2.0 - local;
            (b - (b - c) * u * u, 2.0 * (b - c) * u)
        };
        let w = half_e - k.cos();
        if jac == 0.0 || (edge && (w.re.abs() - 1.0).abs() <= 4.0 * f64::EPSILON) {
            if jac != 0.0 {
                bad_point.get_or_insert(k);
            }
            return [Complex64::new(0.0, 0.0); N];
        }
        let lambda = decaying_acosh(w);
        let propagating = w.re.abs() < 1.0;
        let mut v = kernel(k, lambda, propagating);
        let scale = jac / (2.0 * PI);
        for x in v.iter_mut() {
            *x *= scale;
        }
        v
    };

    let breaks: Vec<f64> = (0..=2 * n).map(|i| i as f64).collect();
    let result = integrate(integrand, &breaks, tol);
    if bad_point.is_some() {
        return Err(PumpError::BandEdge { energy: e.re });
    }
    let result = result.require("lattice Green's function quadrature")?;
    Ok((result.value, result.error))
}

fn with_extrapolation<const N: usize>(
    e: ComplexEnergy,
    cfg: &GreenConfig,
    eval: impl Fn(ComplexEnergy) -> Result<([Complex64; N], f64)>,
) -> Result<([Complex64; N], f64)> {
    if !cfg.eta_extrapolation || e.shift == 0.0 {
        return eval(e);
    }
    let (coarse, err_c) = eval(e)?;
    let (fine, err_f) = eval(e.with_eta(e.eta() / 2.0)?)?;
    let mut out = fine;
    for (o, c) in out.iter_mut().zip(coarse) {
        *o = *o * 2.0 - c;
    }
    Ok((out, 2.0 * err_f + err_c))
}

fn offdiag_term(m: u32, k: f64, lambda: Complex64) -> Complex64 {
    let two_m = 2.0 * m as f64;
    (two_m * k).cos() * (-lambda * two_m).exp() / lambda.sinh()
}

fn forced_term(
    m: u32,
    k: f64,
    lambda: Complex64,
    propagating: bool,
    sign: BranchSign,
    evanescent: EvanescentBranch,
) -> Complex64 {
    if propagating {
        let forced = Complex64::new(0.0, sign.factor() * lambda.norm());
        offdiag_term(m, k, forced)
    } else {
        match evanescent {
            EvanescentBranch::Keep => offdiag_term(m, k, lambda),
            EvanescentBranch::Drop => Complex64::new(0.0, 0.0),
        }
    }
}

/// Two-particle element `G0(m m; -m -m)` (separation `2m` in both
/// coordinates). `m = 0` gives the on-site element.
pub fn g0_offdiag(m: u32, e: ComplexEnergy, cfg: &GreenConfig) -> Result<GreenElement> {
    let (v, _) = with_extrapolation(e, cfg, |e| {
        momentum_integral(e, cfg.tolerance, |k, l, _| [offdiag_term(m, k, l)])
    })?;
    Ok(v[0].into())
}

/// Two-particle on-site element `G0(m m; m m)`.
pub fn g0_onsite(e: ComplexEnergy, cfg: &GreenConfig) -> Result<GreenElement> {
    g0_offdiag(0, e, cfg)
}

/// `G0(2m)` evaluated with `lambda` forced to `sign * i|lambda|` on
/// propagating momenta.
pub fn g0_forced_branch(
    m: u32,
    e: ComplexEnergy,
    sign: BranchSign,
    cfg: &GreenConfig,
) -> Result<GreenElement> {
    if m == 0 {
        return Err(PumpError::invalid("forced-branch separation m", "must be >= 1"));
    }
    let (v, _) = with_extrapolation(e, cfg, |e| {
        momentum_integral(e, cfg.tolerance, |k, l, p| {
            [forced_term(m, k, l, p, sign, cfg.evanescent)]
        })
    })?;
    Ok(v[0].into())
}

/// On-site, separated and both forced-branch elements in a single pass.
pub fn green_set(model: &LatticeModel, e: ComplexEnergy, cfg: &GreenConfig) -> Result<GreenSet> {
    let m = model.m();
    let evanescent = cfg.evanescent;
    let (v, error) = with_extrapolation(e, cfg, |e| {
        momentum_integral(e, cfg.tolerance, |k, l, p| {
            let s = l.sinh();
            [
                s.inv(),
                offdiag_term(m, k, l),
                forced_term(m, k, l, p, BranchSign::Plus, evanescent),
                forced_term(m, k, l, p, BranchSign::Minus, evanescent),
            ]
        })
    })?;
    Ok(GreenSet {
        energy: e,
        m,
        onsite: v[0],
        offdiag: v[1],
        plus: v[2],
        minus: v[3],
        error,
    })
}

/// One-particle propagator `<n|(z - H)^{-1}|0>` of the infinite chain with
/// dispersion `-2 cos k`:
///
/// ```text
/// G(n) = (-1)^n e^{-|n| lambda} / (2 sinh lambda),   cosh lambda = z/2
/// ```
pub fn single_green(n: i64, e: ComplexEnergy) -> Result<GreenElement> {
    let w = e.z() * 0.5;
    if e.shift == 0.0 && (w.re.abs() - 1.0).abs() <= 4.0 * f64::EPSILON {
        return Err(PumpError::BandEdge { energy: e.re });
    }
    let lambda = decaying_acosh(w);
    let sign = if n.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    let value = (-lambda * n.unsigned_abs() as f64).exp() / (lambda.sinh() * 2.0) * sign;
    Ok(value.into())
}
