//! Globally adaptive 21-point Gauss–Kronrod integration.
//!
//! All real and complex entry points share this core. A real integrand is
//! carried as a complex value with zero imaginary part, so the real and the
//! zero-frequency oscillatory paths run identical arithmetic.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;

use super::{Integral, QuadratureConfig};
use crate::error::{DecayError, Result};

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

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_622_376_841_645,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// 10-point Gauss weights, paired with `XGK[1], XGK[3], ..., XGK[9]`.
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[derive(Debug, Clone, Copy)]
pub(crate) struct Segment {
    pub a: f64,
    pub b: f64,
    pub value: Complex64,
    pub error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
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

/// QUADPACK-style rescaling of the raw |K21 - G10| difference.
fn rescale_error(raw: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut err = raw.abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    err
}

pub(crate) fn kronrod21<F>(f: &mut F, a: f64, b: f64) -> Result<Segment>
where
    F: FnMut(f64) -> Complex64,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);

    let mut eval = |x: f64| -> Result<Complex64> {
        let v = f(x);
        if v.re.is_finite() && v.im.is_finite() {
            Ok(v)
        } else {
            Err(DecayError::NonFinite { at: x })
        }
    };

    let fc = eval(center)?;
    let mut fv1 = [Complex64::new(0.0, 0.0); 10];
    let mut fv2 = [Complex64::new(0.0, 0.0); 10];
    let mut res_k = fc * WGK[10];
    let mut res_g = Complex64::new(0.0, 0.0);
    let mut abs_k = [fc.re.abs() * WGK[10], fc.im.abs() * WGK[10]];

    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = eval(center - dx)?;
        let f2 = eval(center + dx)?;
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += (f1 + f2) * WGK[j];
        abs_k[0] += WGK[j] * (f1.re.abs() + f2.re.abs());
        abs_k[1] += WGK[j] * (f1.im.abs() + f2.im.abs());
        if j % 2 == 1 {
            res_g += (f1 + f2) * WG[j / 2];
        }
    }

    let mean = res_k * 0.5;
    let mut asc = [
        WGK[10] * (fc.re - mean.re).abs(),
        WGK[10] * (fc.im - mean.im).abs(),
    ];
    for j in 0..10 {
        asc[0] += WGK[j] * ((fv1[j].re - mean.re).abs() + (fv2[j].re - mean.re).abs());
        asc[1] += WGK[j] * ((fv1[j].im - mean.im).abs() + (fv2[j].im - mean.im).abs());
    }

    let scale = half.abs();
    let diff = (res_k - res_g) * half;
    let err_re = rescale_error(diff.re, abs_k[0] * scale, asc[0] * scale);
    let err_im = rescale_error(diff.im, abs_k[1] * scale, asc[1] * scale);

    Ok(Segment {
        a,
        b,
        value: res_k * half,
        error: err_re.hypot(err_im),
    })
}

/// Sorted, de-duplicated partition `a = x0 < x1 < ... < xn = b` built from
/// the interior members of `points`.
pub(crate) fn partition(a: f64, b: f64, points: &[f64]) -> Vec<f64> {
    let mut nodes = Vec::with_capacity(points.len() + 2);
    nodes.push(a);
    nodes.extend(points.iter().copied().filter(|&p| p > a && p < b));
    nodes.push(b);
    nodes.sort_by(f64::total_cmp);
    nodes.dedup();
    nodes
}

fn too_narrow(seg: &Segment) -> bool {
    let scale = seg.a.abs().max(seg.b.abs());
    let width = seg.b - seg.a;
    width <= 64.0 * f64::EPSILON * scale || width <= f64::MIN_POSITIVE * 1e10
}

/// Adaptive integration over the partition `nodes`; the refinement budget
/// is `cfg.max_panels` splits on top of the initial panels.
pub(crate) fn adaptive<F>(f: &mut F, nodes: &[f64], cfg: &QuadratureConfig) -> Result<Integral<Complex64>>
where
    F: FnMut(f64) -> Complex64,
{
    cfg.validate()?;
    let mut heap = BinaryHeap::with_capacity(nodes.len() * 2);
    for w in nodes.windows(2) {
        heap.push(kronrod21(f, w[0], w[1])?);
    }
    let budget = heap.len() + cfg.max_panels;
    let mut frozen: Vec<Segment> = Vec::new();

    let totals = |heap: &BinaryHeap<Segment>, frozen: &[Segment]| {
        let mut value = Complex64::new(0.0, 0.0);
        let mut error = 0.0;
        for s in heap.iter().chain(frozen.iter()) {
            value += s.value;
            error += s.error;
        }
        (value, error)
    };

    let (mut value, mut error) = totals(&heap, &frozen);
    let mut iterations = 0usize;
    loop {
        let tol = cfg.abs_tol.max(cfg.rel_tol * value.norm());
        if error <= tol {
            break;
        }
        if heap.len() + frozen.len() >= budget {
            let (value, error) = totals(&heap, &frozen);
            return Err(DecayError::NonConvergence {
                best_estimate: value.re,
                best_estimate_im: value.im,
                error_estimate: error,
                panels: heap.len() + frozen.len(),
            });
        }
        let Some(worst) = heap.pop() else {
            return Err(DecayError::NonConvergence {
                best_estimate: value.re,
                best_estimate_im: value.im,
                error_estimate: error,
                panels: frozen.len(),
            });
        };
        if too_narrow(&worst) {
            frozen.push(worst);
            continue;
        }
        let mid = 0.5 * (worst.a + worst.b);
        let left = kronrod21(f, worst.a, mid)?;
        let right = kronrod21(f, mid, worst.b)?;
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);

        iterations += 1;
        if iterations % 64 == 0 {
            (value, error) = totals(&heap, &frozen);
        }
    }

    let (value, error) = totals(&heap, &frozen);
    Ok(Integral {
        value,
        error,
        panels: heap.len() + frozen.len(),
    })
}
