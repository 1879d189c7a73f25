use super::{check_interval, integrate_adaptive_points, Integral, QuadratureConfig};
use crate::error::{DecayError, Result};

/// Cauchy principal value `PV ∫_a^b f(x) / (x - pole) dx`.
///
/// The symmetric neighbourhood `[pole - δ, pole + δ]` is folded onto
/// `∫_0^δ (f(pole + u) - f(pole - u)) / u du`, which cancels the `1/(x - pole)`
/// term exactly; the remaining one-sided piece is a regular integral.
pub fn integrate_principal_value<F>(
    f: F,
    pole: f64,
    a: f64,
    b: f64,
    cfg: &QuadratureConfig,
) -> Result<Integral<f64>>
where
    F: FnMut(f64) -> f64,
{
    integrate_principal_value_points(f, pole, a, b, &[], cfg)
}

/// As [`integrate_principal_value`], with breakpoints for kinks of `f`.
pub fn integrate_principal_value_points<F>(
    mut f: F,
    pole: f64,
    a: f64,
    b: f64,
    points: &[f64],
    cfg: &QuadratureConfig,
) -> Result<Integral<f64>>
where
    F: FnMut(f64) -> f64,
{
    check_interval(a, b)?;
    if !(pole > a && pole < b) {
        return Err(DecayError::PoleOutsideInterval { pole, a, b });
    }
    let half = QuadratureConfig {
        abs_tol: 0.5 * cfg.abs_tol,
        ..*cfg
    };
    let delta = (pole - a).min(b - pole);

    let folded_points: Vec<f64> = points.iter().map(|p| (p - pole).abs()).collect();
    let sym = integrate_adaptive_points(
        |u| (f(pole + u) - f(pole - u)) / u,
        0.0,
        delta,
        &folded_points,
        &half,
    )?;

    let (lo, hi) = (pole - delta, pole + delta);
    let rest = if lo > a {
        integrate_adaptive_points(|x| f(x) / (x - pole), a, lo, points, &half)?
    } else if hi < b {
        integrate_adaptive_points(|x| f(x) / (x - pole), hi, b, points, &half)?
    } else {
        Integral {
            value: 0.0,
            error: 0.0,
            panels: 0,
        }
    };

    Ok(Integral {
        value: sym.value + rest.value,
        error: sym.error + rest.error,
        panels: sym.panels + rest.panels,
    })
}
