//! Globally adaptive Gauss–Kronrod (10/21-point) integration on finite and
//! infinite intervals.
//!
//! Error estimation follows QUADPACK's QAG/QAGI heuristics. Infinite limits
//! are mapped onto (0, 1] with x = a + (1 − t)/t.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

// 21-point Kronrod abscissae (non-negative half, descending).
#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_208_980_178_826,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

// 10-point Gauss weights for XGK[1], XGK[3], ..., XGK[9].
#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// Result of an integration: value, estimated absolute error and the number
/// of integrand evaluations spent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

/// Tolerances and budget for adaptive integration.
///
/// Subdivision stops once the summed error estimate is at most
/// `max(abs_tol, rel_tol·|value|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for Quadrature {
    fn default() -> Self {
        Quadrature::new(1e-12, 1e-10)
    }
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}

impl Eq for Segment {}

impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

impl Quadrature {
    pub fn new(abs_tol: f64, rel_tol: f64) -> Self {
        Quadrature {
            abs_tol,
            rel_tol,
            max_subdivisions: 500,
        }
    }

    pub fn with_max_subdivisions(mut self, max_subdivisions: usize) -> Self {
        self.max_subdivisions = max_subdivisions.max(1);
        self
    }

    fn tolerance(&self, value: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * value.abs())
    }

    /// ∫_a^b f(x) dx. Either limit may be infinite.
    ///
    /// Fails with [`Error::Convergence`] when the subdivision budget runs
    /// out before the tolerance is met.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, f: F, a: f64, b: f64) -> Result<Estimate> {
        let est = self.integrate_best_effort(f, a, b);
        let tol = self.tolerance(est.value);
        if est.error <= tol && est.value.is_finite() {
            Ok(est)
        } else {
            Err(Error::Convergence {
                estimate: est.error,
                tolerance: tol,
                evaluations: est.evaluations,
            })
        }
    }

    /// Same as [`Quadrature::integrate`] but returns whatever estimate the
    /// budget allowed, without checking it against the tolerance.
    pub fn integrate_best_effort<F: FnMut(f64) -> f64>(&self, mut f: F, a: f64, b: f64) -> Estimate {
        if a.is_nan() || b.is_nan() || a == b {
            return Estimate {
                value: if a == b { 0.0 } else { f64::NAN },
                error: 0.0,
                evaluations: 0,
            };
        }
        if a > b {
            let est = self.integrate_best_effort(f, b, a);
            return Estimate {
                value: -est.value,
                ..est
            };
        }
        match (a.is_finite(), b.is_finite()) {
            (true, true) => self.adapt(&mut f, a, b),
            (true, false) => self.adapt(
                &mut |t: f64| {
                    let s = (1.0 - t) / t;
                    f(a + s) / (t * t)
                },
                0.0,
                1.0,
            ),
            (false, true) => self.adapt(
                &mut |t: f64| {
                    let s = (1.0 - t) / t;
                    f(b - s) / (t * t)
                },
                0.0,
                1.0,
            ),
            (false, false) => self.adapt(
                &mut |t: f64| {
                    let s = (1.0 - t) / t;
                    (f(s) + f(-s)) / (t * t)
                },
                0.0,
                1.0,
            ),
        }
    }

    fn adapt<F: FnMut(f64) -> f64>(&self, f: &mut F, a: f64, b: f64) -> Estimate {
        let first = gauss_kronrod_21(f, a, b);
        let mut evaluations = 21;
        let mut value = first.value;
        let mut error = first.error;
        let mut heap = BinaryHeap::with_capacity(self.max_subdivisions.min(1024));
        heap.push(first);
        while error > self.tolerance(value) && heap.len() < self.max_subdivisions {
            let worst = match heap.pop() {
                Some(seg) => seg,
                None => break,
            };
            let mid = 0.5 * (worst.lo + worst.hi);
            if !(mid > worst.lo && mid < worst.hi) {
                // Interval no longer divisible in floating point.
                heap.push(worst);
                break;
            }
            let left = gauss_kronrod_21(f, worst.lo, mid);
            let right = gauss_kronrod_21(f, mid, worst.hi);
            evaluations += 42;
            value += left.value + right.value - worst.value;
            error += left.error + right.error - worst.error;
            heap.push(left);
            heap.push(right);
            if heap.len() % 64 == 0 {
                // Resum to keep cancellation drift out of the running totals.
                value = heap.iter().map(|s| s.value).sum();
                error = heap.iter().map(|s| s.error).sum();
            }
        }
        value = heap.iter().map(|s| s.value).sum();
        error = heap.iter().map(|s| s.error).sum();
        Estimate {
            value,
            error,
            evaluations,
        }
    }
}

fn gauss_kronrod_21<F: FnMut(f64) -> f64>(f: &mut F, lo: f64, hi: f64) -> Segment {
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let f_center = f(center);
    let mut res_k = WGK[10] * f_center;
    let mut res_g = 0.0;
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[10] * (f_center - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = res_k * half;
    res_abs *= half.abs();
    res_asc *= half.abs();
    let mut error = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && error != 0.0 {
        error = res_asc * (200.0 * error / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * res_abs);
    }
    if !value.is_finite() {
        error = f64::INFINITY;
    }
    Segment {
        lo,
        hi,
        value,
        error,
    }
}
