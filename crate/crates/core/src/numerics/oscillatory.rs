use std::f64::consts::PI;

use num_complex::Complex64;

use super::{check_interval, integrate_adaptive_points, integrate_complex_points, Integral, QuadratureConfig};
use crate::error::{DecayError, Result};

/// `∫_{e_min}^{e_max} g(E) e^{-iEt} dE`.
///
/// For `t > 0` the interval is first cut into panels no wider than
/// `(2π/t) / oscillation_points_per_period`, then refined adaptively.
/// At `t = 0` this is exactly [`integrate_adaptive`](super::integrate_adaptive).
pub fn integrate_oscillatory<F>(
    g: F,
    e_min: f64,
    e_max: f64,
    t: f64,
    cfg: &QuadratureConfig,
) -> Result<Integral<Complex64>>
where
    F: FnMut(f64) -> f64,
{
    integrate_oscillatory_points(g, e_min, e_max, t, &[], cfg)
}

pub fn integrate_oscillatory_points<F>(
    mut g: F,
    e_min: f64,
    e_max: f64,
    t: f64,
    points: &[f64],
    cfg: &QuadratureConfig,
) -> Result<Integral<Complex64>>
where
    F: FnMut(f64) -> f64,
{
    if !(t >= 0.0) || !t.is_finite() {
        return Err(DecayError::InvalidArgument(format!("time must be finite and >= 0, got {t}")));
    }
    check_interval(e_min, e_max)?;
    cfg.validate()?;
    if t == 0.0 {
        let r = integrate_adaptive_points(g, e_min, e_max, points, cfg)?;
        return Ok(Integral {
            value: Complex64::new(r.value, 0.0),
            error: r.error,
            panels: r.panels,
        });
    }

    let width = 2.0 * PI / t / cfg.oscillation_points_per_period as f64;
    let n = ((e_max - e_min) / width).ceil().max(1.0) as usize;
    let step = (e_max - e_min) / n as f64;
    let mut nodes: Vec<f64> = (1..n).map(|j| e_min + step * j as f64).collect();
    nodes.extend_from_slice(points);

    integrate_complex_points(
        |e| {
            let (s, c) = (e * t).sin_cos();
            g(e) * Complex64::new(c, -s)
        },
        e_min,
        e_max,
        &nodes,
        cfg,
    )
}

/// `∫_L^∞ u^{-p} e^{-iut} du` for `L > 0`.
///
/// For `t > 0` the contour is rotated onto `u = L - i s/t`, which turns the
/// oscillatory tail into the damped integral
/// `(-i/t) e^{-iLt} ∫_0^∞ (L - i s/t)^{-p} e^{-s} ds`.
/// At `t = 0` the closed form `L^{1-p}/(p-1)` is used and `p <= 1` is
/// rejected as divergent.
pub fn power_tail_fourier(exponent: f64, start: f64, t: f64, cfg: &QuadratureConfig) -> Result<Complex64> {
    if !(start > 0.0) {
        return Err(DecayError::InvalidArgument(format!("tail start must be > 0, got {start}")));
    }
    if !(t >= 0.0) {
        return Err(DecayError::InvalidArgument(format!("time must be >= 0, got {t}")));
    }
    if t == 0.0 {
        if exponent <= 1.0 {
            return Err(DecayError::DivergentMoment { order: 0 });
        }
        return Ok(Complex64::new(start.powf(1.0 - exponent) / (exponent - 1.0), 0.0));
    }

    let lt = start * t;
    let scale = lt.min(1.0);
    let points = [1e-3 * scale, 1e-2 * scale, 0.1 * scale, scale, 4.0, 16.0];
    let l = Complex64::new(start, 0.0);
    // the integrand magnitude is at most L^{-p}; tolerances are relative to it
    let mag = start.powf(-exponent);
    let inner_cfg = QuadratureConfig {
        abs_tol: cfg.abs_tol.min(cfg.rel_tol) * mag,
        ..*cfg
    };
    let r = integrate_complex_points(
        |s| {
            let z = l - Complex64::new(0.0, s / t);
            (-exponent * z.ln()).exp() * (-s).exp()
        },
        0.0,
        60.0,
        &points,
        &inner_cfg,
    )?;
    let (sn, cs) = lt.sin_cos();
    Ok(Complex64::new(0.0, -1.0 / t) * Complex64::new(cs, -sn) * r.value)
}
