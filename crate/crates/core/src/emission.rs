//! Photon spectrum of a Breit-Wigner emitter observed a finite time after
//! preparation, and its width at half maximum.

use std::f64::consts::PI;

use crate::error::{DecayError, Result};
use crate::numerics::{
    find_root_bisect, integrate_oscillatory, integrate_semi_infinite, power_tail_fourier, QuadratureConfig,
};

fn check(gamma: f64, t: f64) -> Result<()> {
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(DecayError::InvalidArgument(format!("width must be positive, got {gamma}")));
    }
    if !(t > 0.0) || !t.is_finite() {
        return Err(DecayError::InvalidArgument(format!("time must be positive, got {t}")));
    }
    Ok(())
}

fn eta(gamma: f64, t: f64, x: f64) -> f64 {
    // |e^{-ixt} - e^{-Γt/2}|² written without cancellation
    let q = (-0.5 * gamma * t).exp();
    let s = (0.5 * x * t).sin();
    let num = (-0.5 * gamma * t).exp_m1().powi(2) + 4.0 * q * s * s;
    gamma / (2.0 * PI) * num / (x * x + 0.25 * gamma * gamma)
}

/// `η(t, ω) = (Γ/2π) |e^{-iωt} - e^{-i(M - iΓ/2)t}|² / |ω - M + iΓ/2|²`.
pub fn photon_spectrum(mass: f64, gamma: f64, t: f64, omega: f64) -> Result<f64> {
    check(gamma, t)?;
    Ok(eta(gamma, t, omega - mass))
}

/// Full width at half maximum of `η(t, ·)`.
///
/// At short times the spectrum rings like `sinc²`; the width returned is the
/// one of the central peak, found from the first half-height crossing above
/// `M`. The width does not depend on `M`.
pub fn linewidth(_mass: f64, gamma: f64, t: f64) -> Result<f64> {
    check(gamma, t)?;
    let half = 0.5 * eta(gamma, t, 0.0);
    let g = |x: f64| eta(gamma, t, x) - half;
    let mut lo = 0.0;
    let mut hi = 0.25 * gamma;
    while g(hi) > 0.0 {
        lo = hi;
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(DecayError::NoSignChange { lo, hi });
        }
    }
    let x = find_root_bisect(g, lo, hi, 1e-14 * hi)?;
    Ok(2.0 * x)
}

/// Total emitted probability `∫ η(t, ω) dω`, by quadrature over `ω`.
///
/// The range `|ω - M| ≤ 40Γ` is integrated directly. Beyond it the Lorentzian
/// denominator is expanded in powers of `Γ²/4x²` and the oscillating part is
/// summed from power-law Fourier tails.
pub fn emitted_probability(gamma: f64, t: f64, cfg: &QuadratureConfig) -> Result<f64> {
    check(gamma, t)?;
    let a2 = 0.25 * gamma * gamma;
    let q = (-0.5 * gamma * t).exp();
    let flat = 1.0 + q * q;
    let cut = 40.0 * gamma;

    let lorentz = |x: f64| 1.0 / (x * x + a2);
    let core_flat = crate::numerics::integrate_adaptive(lorentz, 0.0, cut, cfg)?.value;
    let core_osc = integrate_oscillatory(lorentz, 0.0, cut, t, cfg)?.value.re;
    let tail_flat = integrate_semi_infinite(lorentz, cut, cfg)?.value;
    let mut tail_osc = 0.0;
    let mut c = 1.0;
    for k in 0..6 {
        tail_osc += c * power_tail_fourier(2.0 + 2.0 * k as f64, cut, t, cfg)?.re;
        c *= -a2;
    }

    let half_line = flat * (core_flat + tail_flat) - 2.0 * q * (core_osc + tail_osc);
    Ok(gamma / PI * half_line)
}

/// `η(t, ω)` tabulated on an energy grid.
#[derive(Debug, Clone, PartialEq)]
pub struct EmissionSpectrum {
    pub mass: f64,
    pub gamma: f64,
    pub t: f64,
    pub omega: Vec<f64>,
    pub eta: Vec<f64>,
    pub linewidth: f64,
}

impl EmissionSpectrum {
    pub fn new(mass: f64, gamma: f64, t: f64, omega: Vec<f64>) -> Result<Self> {
        let linewidth = linewidth(mass, gamma, t)?;
        let eta = omega.iter().map(|&w| eta(gamma, t, w - mass)).collect();
        Ok(Self {
            mass,
            gamma,
            t,
            omega,
            eta,
            linewidth,
        })
    }

    /// `1 - e^{-Γt}`, the weight the spectrum must carry.
    pub fn expected_weight(&self) -> f64 {
        -(-self.gamma * self.t).exp_m1()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const M: f64 = 2.0;
    const G: f64 = 0.36;

    #[test]
    fn late_time_width_is_gamma() {
        let w = linewidth(M, G, 100.0 / G).unwrap();
        assert!((w / G - 1.0).abs() < 0.01, "{w}");
    }

    #[test]
    fn short_time_broadening() {
        for tg in [0.2, 0.5] {
            let t = tg / G;
            let wt = linewidth(M, G, t).unwrap() * t;
            assert!((wt / 5.56 - 1.0).abs() < 0.05, "t = {tg}/Γ: δω·t = {wt}");
        }
    }

    #[test]
    fn late_time_peak_is_lorentzian() {
        let peak = photon_spectrum(M, G, 200.0 / G, M).unwrap();
        assert!((peak - 2.0 / (PI * G)).abs() < 1e-12);
    }

    #[test]
    fn emitted_probability_matches_decay() {
        let cfg = QuadratureConfig::default();
        for tg in [0.5, 1.0, 5.0] {
            let t = tg / G;
            let w = emitted_probability(G, t, &cfg).unwrap();
            assert!((w - (1.0 - (-tg).exp())).abs() < 1e-6, "t = {tg}/Γ: {w}");
        }
    }

    #[test]
    fn width_shrinks_with_time() {
        let mut prev = f64::INFINITY;
        for j in 0..=40 {
            let t = 0.1 / G * 100f64.powf(j as f64 / 40.0);
            let w = linewidth(M, G, t).unwrap();
            assert!(w < prev, "t = {t}");
            prev = w;
        }
    }

    #[test]
    fn bad_arguments() {
        assert!(photon_spectrum(M, G, 0.0, M).is_err());
        assert!(linewidth(M, -1.0, 1.0).is_err());
    }

    proptest! {
        #[test]
        fn symmetric_and_nonnegative(x in 0.0f64..50.0, t in 0.01f64..100.0) {
            let up = photon_spectrum(M, G, t, M + x).unwrap();
            let down = photon_spectrum(M, G, t, M - x).unwrap();
            prop_assert!(up >= 0.0);
            let peak = photon_spectrum(M, G, t, M).unwrap();
            prop_assert!((up - down).abs() <= 1e-9 * peak);
        }
    }
}
