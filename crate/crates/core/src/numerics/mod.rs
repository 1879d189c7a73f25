//! Quadrature, principal values, oscillatory Fourier integrals, root finding,
//! numerical differentiation and shape-preserving interpolation.
//!
//! Everything here is a pure function of its arguments.

mod diff;
mod interp;
mod kronrod;
mod oscillatory;
mod pv;
mod roots;

use num_complex::Complex64;

use crate::error::{DecayError, Result};

pub use diff::{differentiate_central, Derivative};
pub use interp::MonotoneCubic;
pub use oscillatory::{integrate_oscillatory, integrate_oscillatory_points, power_tail_fourier};
pub use pv::{integrate_principal_value, integrate_principal_value_points};
pub use roots::find_root_bisect;

/// Accuracy targets shared by every adaptive routine.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    /// Absolute error target.
    pub abs_tol: f64,
    /// Relative error target, applied to the magnitude of the running result.
    pub rel_tol: f64,
    /// Number of bisections allowed on top of the initial panels.
    pub max_panels: usize,
    /// Minimum number of panels per period `2π/t` for oscillatory integrals.
    pub oscillation_points_per_period: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-9,
            rel_tol: 1e-8,
            max_panels: 20_000,
            oscillation_points_per_period: 8,
        }
    }
}

impl QuadratureConfig {
    /// Looser profile for exploratory runs.
    pub fn fast() -> Self {
        Self {
            abs_tol: 1e-7,
            rel_tol: 1e-6,
            max_panels: 10_000,
            oscillation_points_per_period: 6,
        }
    }

    pub fn with_tolerances(mut self, abs_tol: f64, rel_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self.rel_tol = rel_tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0) || !(self.rel_tol > 0.0) {
            return Err(DecayError::InvalidArgument(format!(
                "tolerances must be positive (abs_tol = {}, rel_tol = {})",
                self.abs_tol, self.rel_tol
            )));
        }
        if self.max_panels < 1 {
            return Err(DecayError::InvalidArgument("max_panels must be at least 1".into()));
        }
        if self.oscillation_points_per_period < 4 {
            return Err(DecayError::InvalidArgument(
                "oscillation_points_per_period must be at least 4".into(),
            ));
        }
        Ok(())
    }
}

/// Value of an integral together with its estimated absolute error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral<T> {
    pub value: T,
    pub error: f64,
    /// Number of panels in the final partition.
    pub panels: usize,
}

impl Integral<Complex64> {
    fn real(self) -> Integral<f64> {
        Integral {
            value: self.value.re,
            error: self.error,
            panels: self.panels,
        }
    }
}

fn check_interval(a: f64, b: f64) -> Result<()> {
    if a < b && a.is_finite() && b.is_finite() {
        Ok(())
    } else {
        Err(DecayError::InvalidInterval { a, b })
    }
}

/// `∫_a^b f(x) dx` with a global error target `max(abs_tol, rel_tol·|result|)`.
pub fn integrate_adaptive<F>(f: F, a: f64, b: f64, cfg: &QuadratureConfig) -> Result<Integral<f64>>
where
    F: FnMut(f64) -> f64,
{
    integrate_adaptive_points(f, a, b, &[], cfg)
}

/// As [`integrate_adaptive`], with known kinks or peaks passed as initial
/// breakpoints. Points outside `(a, b)` are ignored.
pub fn integrate_adaptive_points<F>(
    mut f: F,
    a: f64,
    b: f64,
    points: &[f64],
    cfg: &QuadratureConfig,
) -> Result<Integral<f64>>
where
    F: FnMut(f64) -> f64,
{
    check_interval(a, b)?;
    let nodes = kronrod::partition(a, b, points);
    let mut g = |x: f64| Complex64::new(f(x), 0.0);
    kronrod::adaptive(&mut g, &nodes, cfg).map(Integral::real)
}

/// Complex-valued adaptive integration over `[a, b]`.
pub fn integrate_complex_points<F>(
    mut f: F,
    a: f64,
    b: f64,
    points: &[f64],
    cfg: &QuadratureConfig,
) -> Result<Integral<Complex64>>
where
    F: FnMut(f64) -> Complex64,
{
    check_interval(a, b)?;
    let nodes = kronrod::partition(a, b, points);
    kronrod::adaptive(&mut f, &nodes, cfg)
}

/// `∫_a^∞ f(x) dx` through the map `x = a + (1 - y)/y`.
pub fn integrate_semi_infinite<F>(mut f: F, a: f64, cfg: &QuadratureConfig) -> Result<Integral<f64>>
where
    F: FnMut(f64) -> f64,
{
    if !a.is_finite() {
        return Err(DecayError::InvalidInterval { a, b: f64::INFINITY });
    }
    let mut g = |y: f64| {
        let x = a + (1.0 - y) / y;
        let v = f(x) / (y * y);
        // the map sends y -> 0 to x = ∞ where a decaying integrand vanishes
        Complex64::new(if x.is_finite() { v } else { 0.0 }, 0.0)
    };
    kronrod::adaptive(&mut g, &[0.0, 1.0], cfg).map(Integral::real)
}
