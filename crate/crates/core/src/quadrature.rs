//! Globally adaptive 21-point Gauss–Kronrod quadrature for real, complex and
//! vector-valued integrands.
//!
//! Every Green's-function element, line integral and energy integral in the
//! crate goes through [`integrate`]. Vector values let one pass produce
//! several integrals that share an expensive integrand (all four Green
//! elements share the relative wavevector; all legs of a sweep share the
//! Green elements at an energy).

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;

use crate::error::{PumpError, Result};

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689,
    0.973_906_528_517_171_720_077_964_012_084,
    0.930_157_491_355_708_226_001_207_180_059,
    0.865_063_366_688_984_510_732_096_688_423,
    0.780_817_726_586_416_897_063_717_578_345,
    0.679_409_568_299_024_406_234_327_365_114,
    0.562_757_134_668_604_683_339_000_099_272,
    0.433_395_394_129_247_190_799_265_943_165,
    0.294_392_862_701_460_198_131_126_603_103,
    0.148_874_338_981_631_210_884_826_001_129,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062,
    0.032_558_162_307_964_727_478_818_972_459,
    0.054_755_896_574_351_996_031_381_300_244,
    0.075_039_674_810_919_952_767_043_140_916,
    0.093_125_454_583_697_605_535_065_465_083,
    0.109_387_158_802_297_641_899_210_590_325,
    0.123_491_976_262_065_851_077_600_525_354,
    0.134_709_217_311_473_325_928_054_001_771,
    0.142_775_938_577_060_080_797_094_273_138,
    0.147_739_104_901_338_491_374_841_515_972,
    0.149_445_554_002_916_905_664_936_468_389,
];

// Gauss weights for the odd-indexed Kronrod nodes.
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893,
    0.149_451_349_150_580_593_145_776_339_657,
    0.219_086_362_515_982_043_995_534_934_228,
    0.269_266_719_309_996_355_091_226_921_569,
    0.295_524_224_714_752_870_173_892_994_651,
];

/// Values the integrator can accumulate.
pub trait QuadValue: Clone {
    /// A zero with the same shape as `self`.
    fn zero_like(&self) -> Self;
    /// `self += w * x`
    fn add_scaled(&mut self, w: f64, x: &Self);
    /// Max-abs norm over components.
    fn norm(&self) -> f64;
    /// Max-abs norm of `self - other`.
    fn distance(&self, other: &Self) -> f64;
}

impl QuadValue for f64 {
    fn zero_like(&self) -> Self {
        0.0
    }
    fn add_scaled(&mut self, w: f64, x: &Self) {
        *self += w * x;
    }
    fn norm(&self) -> f64 {
        self.abs()
    }
    fn distance(&self, other: &Self) -> f64 {
        (self - other).abs()
    }
}

impl QuadValue for Complex64 {
    fn zero_like(&self) -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn add_scaled(&mut self, w: f64, x: &Self) {
        *self += x * w;
    }
    fn norm(&self) -> f64 {
        self.re.abs().max(self.im.abs())
    }
    fn distance(&self, other: &Self) -> f64 {
        (self - other).norm()
    }
}

impl<T: QuadValue> QuadValue for Vec<T> {
    fn zero_like(&self) -> Self {
        self.iter().map(QuadValue::zero_like).collect()
    }
    fn add_scaled(&mut self, w: f64, x: &Self) {
        for (a, b) in self.iter_mut().zip(x) {
            a.add_scaled(w, b);
        }
    }
    fn norm(&self) -> f64 {
        self.iter().map(QuadValue::norm).fold(0.0, f64::max)
    }
    fn distance(&self, other: &Self) -> f64 {
        self.iter()
            .zip(other)
            .map(|(a, b)| a.distance(b))
            .fold(0.0, f64::max)
    }
}

impl<T: QuadValue, const N: usize> QuadValue for [T; N] {
    fn zero_like(&self) -> Self {
        std::array::from_fn(|i| self[i].zero_like())
    }
    fn add_scaled(&mut self, w: f64, x: &Self) {
        for (a, b) in self.iter_mut().zip(x) {
            a.add_scaled(w, b);
        }
    }
    fn norm(&self) -> f64 {
        self.iter().map(QuadValue::norm).fold(0.0, f64::max)
    }
    fn distance(&self, other: &Self) -> f64 {
        self.iter()
            .zip(other)
            .map(|(a, b)| a.distance(b))
            .fold(0.0, f64::max)
    }
}

/// Stopping rule: `error <= max(abs, rel * |value|)` or the evaluation
/// budget is exhausted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_evals: usize,
}

impl Tolerance {
    pub fn new(abs: f64, rel: f64, max_evals: usize) -> Self {
        Tolerance {
            abs,
            rel,
            max_evals,
        }
    }

    /// Tighten both tolerances by `factor` (e.g. 10 for a refinement check).
    pub fn tightened(self, factor: f64) -> Self {
        Tolerance {
            abs: self.abs / factor,
            rel: self.rel / factor,
            max_evals: self.max_evals,
        }
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance::new(1e-10, 1e-10, 1_000_000)
    }
}

/// One subinterval of the final partition.
#[derive(Debug, Clone)]
pub struct Segment<V> {
    pub a: f64,
    pub b: f64,
    pub value: V,
    pub error: f64,
}

#[derive(Debug, Clone)]
pub struct Integral<V> {
    pub value: V,
    pub error: f64,
    pub evaluations: usize,
    pub converged: bool,
    /// Final partition, ordered by position.
    pub segments: Vec<Segment<V>>,
}

impl<V: QuadValue> Integral<V> {
    /// Turn a non-converged result into [`PumpError::NonConvergence`].
    pub fn require(self, what: &'static str) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(PumpError::NonConvergence {
                what,
                estimate: self.value.norm(),
                error: self.error,
                evaluations: self.evaluations,
            })
        }
    }
}

fn rescale_error(err: f64, resabs: f64, resasc: f64) -> f64 {
    let mut err = err.abs();
    if resasc != 0.0 && err != 0.0 {
        let scale = (200.0 * err / resasc).powf(1.5);
        err = if scale < 1.0 { resasc * scale } else { resasc };
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * resabs);
    }
    err
}

fn kronrod21<V, F>(f: &mut F, a: f64, b: f64) -> Segment<V>
where
    V: QuadValue,
    F: FnMut(f64) -> V,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let f_center = f(center);

    let mut kronrod = f_center.zero_like();
    let mut gauss = f_center.zero_like();
    kronrod.add_scaled(WGK[10], &f_center);
    let mut resabs = WGK[10] * f_center.norm();

    let mut samples: Vec<(V, V)> = Vec::with_capacity(10);
    for j in 0..10 {
        let dx = half * XGK[j];
        let lo = f(center - dx);
        let hi = f(center + dx);
        kronrod.add_scaled(WGK[j], &lo);
        kronrod.add_scaled(WGK[j], &hi);
        if j % 2 == 1 {
            gauss.add_scaled(WG[j / 2], &lo);
            gauss.add_scaled(WG[j / 2], &hi);
        }
        resabs += WGK[j] * (lo.norm() + hi.norm());
        samples.push((lo, hi));
    }

    // Mean value on the interval, for the "asc" scale of the error estimate.
    let mut mean = kronrod.zero_like();
    mean.add_scaled(0.5, &kronrod);
    let mut resasc = WGK[10] * f_center.distance(&mean);
    for (j, (lo, hi)) in samples.iter().enumerate() {
        resasc += WGK[j] * (lo.distance(&mean) + hi.distance(&mean));
    }

    let abs_half = half.abs();
    let diff = kronrod.distance(&gauss) * abs_half;
    let error = rescale_error(diff, resabs * abs_half, resasc * abs_half);

    let mut value = kronrod.zero_like();
    value.add_scaled(half, &kronrod);
    Segment { a, b, value, error }
}

struct Ranked(f64, usize);

impl PartialEq for Ranked {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Ranked {}
impl PartialOrd for Ranked {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Ranked {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0).then(other.1.cmp(&self.1))
    }
}

/// Integrate `f` over `[points[0], points[last]]`, with the interior points
/// used as initial breakpoints. Points must be non-decreasing; zero-width
/// pieces are skipped.
pub fn integrate<V, F>(mut f: F, points: &[f64], tol: Tolerance) -> Integral<V>
where
    V: QuadValue,
    F: FnMut(f64) -> V,
{
    assert!(points.len() >= 2, "need at least two integration limits");

    let mut segments: Vec<Segment<V>> = Vec::new();
    let mut evaluations = 0usize;
    for w in points.windows(2) {
        if w[1] > w[0] {
            segments.push(kronrod21(&mut f, w[0], w[1]));
            evaluations += 21;
        }
    }
    if segments.is_empty() {
        // Zero-length range: evaluate once only to learn the value's shape.
        let probe = f(points[0]);
        return Integral {
            value: probe.zero_like(),
            error: 0.0,
            evaluations: 1,
            converged: true,
            segments: Vec::new(),
        };
    }

    let mut heap: BinaryHeap<Ranked> = segments
        .iter()
        .enumerate()
        .map(|(i, s)| Ranked(s.error, i))
        .collect();
    let mut alive = vec![true; segments.len()];

    let mut converged = false;
    loop {
        let mut total = segments[0].value.zero_like();
        let mut err = 0.0;
        for (s, _) in segments.iter().zip(&alive).filter(|(_, a)| **a) {
            total.add_scaled(1.0, &s.value);
            err += s.error;
        }
        if err <= tol.abs.max(tol.rel * total.norm()) {
            converged = true;
            break;
        }
        if evaluations + 42 > tol.max_evals {
            break;
        }
        let Some(Ranked(_, worst)) = heap.pop() else {
            break;
        };
        let (a, b) = (segments[worst].a, segments[worst].b);
        let mid = 0.5 * (a + b);
        if !(mid > a && mid < b) || (b - a) < 1e-14 * (1.0 + a.abs().max(b.abs())) {
            // Cannot split any further; the error will not go down.
            break;
        }
        alive[worst] = false;
        for (lo, hi) in [(a, mid), (mid, b)] {
            let seg = kronrod21(&mut f, lo, hi);
            heap.push(Ranked(seg.error, segments.len()));
            segments.push(seg);
            alive.push(true);
        }
        evaluations += 42;
    }

    let mut kept: Vec<Segment<V>> = segments
        .into_iter()
        .zip(alive)
        .filter_map(|(s, a)| a.then_some(s))
        .collect();
    kept.sort_by(|x, y| x.a.total_cmp(&y.a));
    let mut value = kept[0].value.zero_like();
    let mut error = 0.0;
    for s in &kept {
        value.add_scaled(1.0, &s.value);
        error += s.error;
    }
    Integral {
        value,
        error,
        evaluations,
        converged,
        segments: kept,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn polynomial_is_exact() {
        let r = integrate(|x: f64| x.powi(7) - 3.0 * x * x, &[0.0, 2.0], Tolerance::default());
        assert!(r.converged);
        assert!((r.value - (32.0 - 8.0)).abs() < 1e-12);
    }

    #[test]
    fn inverse_sqrt_endpoint() {
        let r = integrate(
            |x: f64| 1.0 / x.sqrt(),
            &[0.0, 1.0],
            Tolerance::new(1e-7, 1e-8, 200_000),
        );
        assert!(r.converged, "{r:?}");
        assert!((r.value - 2.0).abs() < 1e-8);
    }

    #[test]
    fn complex_and_vector_values() {
        let r = integrate(
            |x: f64| [Complex64::new(x.cos(), x.sin()), Complex64::new(1.0, 0.0)],
            &[0.0, PI / 2.0, PI],
            Tolerance::default(),
        );
        assert!(r.converged);
        assert!((r.value[0] - Complex64::new(0.0, 2.0)).norm() < 1e-12);
        assert!((r.value[1].re - PI).abs() < 1e-12);
    }

    #[test]
    fn sharp_lorentzian_with_breakpoint() {
        let w = 1e-6;
        let r = integrate(
            |x: f64| w / (x * x + w * w),
            &[-1.0, 0.0, 1.0],
            Tolerance::new(1e-10, 1e-10, 200_000),
        );
        assert!(r.converged);
        let exact = 2.0 * (1.0 / w).atan();
        assert!((r.value - exact).abs() < 1e-8);
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let r = integrate(
            |x: f64| (1.0 / x).sin() / x,
            &[1e-9, 1.0],
            Tolerance::new(1e-14, 0.0, 500),
        );
        assert!(!r.converged);
        assert!(r.require("oscillatory").is_err());
    }

    #[test]
    fn empty_range_is_zero() {
        let r = integrate(|x: f64| x, &[1.0, 1.0], Tolerance::default());
        assert_eq!(r.value, 0.0);
        assert!(r.converged);
    }
}
