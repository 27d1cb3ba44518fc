//! Adaptive Gauss-Kronrod (10/21 point) quadrature.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerances for the adaptive quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-15,
            rel_tol: 1e-13,
            max_subdivisions: 2000,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0 && self.max_subdivisions > 0) {
            return Err(Error::Usage(format!(
                "quadrature tolerances must be positive: {self:?}"
            )));
        }
        Ok(())
    }
}

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
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    /// Estimate of `int |f|`, which sets the roundoff floor of `error`.
    magnitude: f64,
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

/// One 21-point Kronrod panel with the QUADPACK error rescaling.
fn kronrod21<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut res_k = WGK[10] * fc;
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
    let mut res_asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let scale = half.abs();
    let value = res_k * half;
    res_abs *= scale;
    res_asc *= scale;
    let mut err = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    Segment {
        a,
        b,
        value,
        error: err,
        magnitude: res_abs,
    }
}

/// Integral estimate with its error bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

/// Adaptive bisection driven by the panel with the largest error.
pub fn integrate<F>(mut f: F, a: f64, b: f64, cfg: &QuadratureConfig) -> Result<Integral>
where
    F: FnMut(f64) -> f64,
{
    if a == b {
        return Ok(Integral {
            value: 0.0,
            error: 0.0,
            evaluations: 0,
        });
    }
    let first = kronrod21(&mut f, a, b);
    let mut evaluations = 21;
    let mut value = first.value;
    let mut error = first.error;
    let mut magnitude = first.magnitude;
    let mut heap = BinaryHeap::new();
    heap.push(first);
    let mut subdivisions = 1;
    loop {
        if !value.is_finite() {
            return Err(Error::Quadrature {
                estimate: value,
                error,
            });
        }
        // panels never report less than 50 eps int |f|; asking for less cannot converge
        let floor = 100.0 * f64::EPSILON * magnitude;
        let tol = cfg.abs_tol.max(cfg.rel_tol * value.abs()).max(floor);
        if error <= tol {
            break;
        }
        if subdivisions >= cfg.max_subdivisions {
            return Err(Error::Quadrature {
                estimate: value,
                error,
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a.min(worst.b) || mid >= worst.a.max(worst.b) {
            // panel cannot be split further in floating point
            heap.push(Segment {
                error: 0.0,
                ..worst
            });
            error -= worst.error;
            continue;
        }
        let left = kronrod21(&mut f, worst.a, mid);
        let right = kronrod21(&mut f, mid, worst.b);
        evaluations += 42;
        subdivisions += 1;
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        magnitude += left.magnitude + right.magnitude - worst.magnitude;
        heap.push(left);
        heap.push(right);
        if subdivisions % 64 == 0 {
            // resum to shed accumulated cancellation in the running totals
            value = heap.iter().map(|s| s.value).sum();
            error = heap.iter().map(|s| s.error).sum();
            magnitude = heap.iter().map(|s| s.magnitude).sum();
        }
    }
    let value = heap.iter().map(|s| s.value).sum();
    Ok(Integral {
        value,
        error,
        evaluations,
    })
}

/// Integrates `f` over `[a, b]` after the substitution `x = c + h sin t`,
/// `t in [-pi/2, pi/2]`. Square-root zeros of the integrand at either
/// endpoint become smooth in `t`.
pub fn integrate_sine_substituted<F>(
    mut f: F,
    a: f64,
    b: f64,
    cfg: &QuadratureConfig,
) -> Result<Integral>
where
    F: FnMut(f64) -> f64,
{
    integrate_sine_window(&mut f, a, b, -std::f64::consts::FRAC_PI_2, std::f64::consts::FRAC_PI_2, cfg)
}

/// Same substitution as [`integrate_sine_substituted`] on the full `[a, b]`
/// map, but integrating only the `t` window `[t_lo, t_hi]`.
pub fn integrate_sine_window<F>(
    f: &mut F,
    a: f64,
    b: f64,
    t_lo: f64,
    t_hi: f64,
    cfg: &QuadratureConfig,
) -> Result<Integral>
where
    F: FnMut(f64) -> f64,
{
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let (lo, hi) = (a.min(b), a.max(b));
    integrate(
        |t: f64| {
            let x = (c + h * t.sin()).clamp(lo, hi);
            f(x) * h * t.cos()
        },
        t_lo,
        t_hi,
        cfg,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kronrod_exact_on_polynomials() {
        let cfg = QuadratureConfig::default();
        for deg in 0..=20 {
            let r = integrate(|x: f64| x.powi(deg), 0.0, 1.0, &cfg).unwrap();
            let exact = 1.0 / (deg as f64 + 1.0);
            assert!((r.value - exact).abs() < 1e-15, "deg {deg}: {}", r.value);
        }
    }

    #[test]
    fn gauss_part_matches_ten_point_rule() {
        // the embedded Gauss rule is exact through degree 19
        let mut f = |x: f64| x.powi(18);
        let seg = kronrod21(&mut f, -1.0, 1.0);
        assert!((seg.value - 2.0 / 19.0).abs() < 1e-15);
        let weights: f64 = WG.iter().sum::<f64>() * 2.0;
        assert!((weights - 2.0).abs() < 1e-15);
    }

    #[test]
    fn adaptive_handles_sqrt_endpoint() {
        let cfg = QuadratureConfig::default();
        let r = integrate(|x: f64| x.sqrt(), 0.0, 1.0, &cfg).unwrap();
        assert!((r.value - 2.0 / 3.0).abs() < 1e-13);
    }

    #[test]
    fn sine_substitution_semicircle() {
        let cfg = QuadratureConfig::default();
        let r = integrate_sine_substituted(|x: f64| (1.0 - x * x).max(0.0).sqrt(), -1.0, 1.0, &cfg)
            .unwrap();
        assert!((r.value - std::f64::consts::FRAC_PI_2).abs() < 1e-14);
        assert!(r.evaluations <= 21 * 3);
    }

    #[test]
    fn reversed_limits_flip_sign() {
        let cfg = QuadratureConfig::default();
        let r = integrate(|x: f64| x.exp(), 1.0, 0.0, &cfg).unwrap();
        assert!((r.value + (1f64.exp() - 1.0)).abs() < 1e-14);
    }

    #[test]
    fn reports_non_convergence() {
        let cfg = QuadratureConfig {
            max_subdivisions: 3,
            ..QuadratureConfig::default()
        };
        let err = integrate(|x: f64| (1.0 / x).sin(), 1e-6, 1.0, &cfg).unwrap_err();
        assert!(matches!(err, Error::Quadrature { .. }));
    }
}
