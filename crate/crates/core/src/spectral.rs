//! Spectral functions: a continuum density plus discrete bound-state poles.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{DecayError, Result, ResultExt};
use crate::lee::BreitWigner;
use crate::numerics::{integrate_adaptive_points, integrate_oscillatory_points, power_tail_fourier, QuadratureConfig};

pub type Density = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Power-law continuation `coefficient · |E - center|^{-exponent}` used beyond
/// the finite integration window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerTail {
    pub center: f64,
    pub exponent: f64,
    pub coefficient: f64,
    /// Distance from `center` at which the tail takes over (`> 0`).
    pub start: f64,
}

impl PowerTail {
    /// Tail matched to `density` at `edge`.
    pub fn matched(density: &dyn Fn(f64) -> f64, center: f64, edge: f64, exponent: f64) -> Result<Self> {
        let start = (edge - center).abs();
        if !(start > 0.0) || !(exponent > 0.0) {
            return Err(DecayError::InvalidArgument(format!(
                "power tail needs edge != center and exponent > 0 (edge {edge}, center {center}, exponent {exponent})"
            )));
        }
        let value = density(edge);
        if !value.is_finite() || value < 0.0 {
            return Err(DecayError::NonFinite { at: edge });
        }
        Ok(Self {
            center,
            exponent,
            coefficient: value * start.powf(exponent),
            start,
        })
    }

    pub fn eval(&self, e: f64) -> f64 {
        self.coefficient * (e - self.center).abs().powf(-self.exponent)
    }

    /// `∫_L^∞ C u^{k-p} du`, or `None` when it diverges.
    fn power_integral(&self, k: u32) -> Option<f64> {
        let q = self.exponent - k as f64;
        (q > 1.0).then(|| self.coefficient * self.start.powf(1.0 - q) / (q - 1.0))
    }
}

/// Discrete eigenvalue of the full Hamiltonian overlapping with `|S⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pole {
    pub energy: f64,
    pub weight: f64,
    /// Signed offset from the nearest continuum edge, kept separately because
    /// it can be far below the floating-point spacing at the edge.
    pub edge_offset: Option<f64>,
}

impl Pole {
    /// The pole sits closer to a continuum edge than the float grid resolves.
    pub fn is_at_edge(&self) -> bool {
        match self.edge_offset {
            Some(off) => self.energy - off == self.energy,
            None => false,
        }
    }
}

/// Result of [`SpectralFunction::moment`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Moment {
    Finite(f64),
    /// The power-law tail makes `∫ Eⁿ d_S dE` diverge.
    Divergent,
}

impl Moment {
    pub fn value(self) -> Option<f64> {
        match self {
            Moment::Finite(v) => Some(v),
            Moment::Divergent => None,
        }
    }
}

/// Energy distribution `d_S(E)` of the unstable state.
///
/// The continuum is integrated numerically over a finite `window`; beyond it
/// optional power-law tails are handled analytically. Poles contribute
/// `Z e^{-iE_p t}` terms.
#[derive(Clone)]
pub struct SpectralFunction {
    density: Density,
    support: (f64, f64),
    window: (f64, f64),
    breakpoints: Vec<f64>,
    lower_tail: Option<PowerTail>,
    upper_tail: Option<PowerTail>,
    poles: Vec<Pole>,
    breit_wigner: Option<BreitWigner>,
}

impl fmt::Debug for SpectralFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpectralFunction")
            .field("support", &self.support)
            .field("window", &self.window)
            .field("breakpoints", &self.breakpoints)
            .field("lower_tail", &self.lower_tail)
            .field("upper_tail", &self.upper_tail)
            .field("poles", &self.poles)
            .field("breit_wigner", &self.breit_wigner)
            .finish_non_exhaustive()
    }
}

impl SpectralFunction {
    /// Density supported on the bounded interval `[lo, hi]`.
    pub fn bounded(density: Density, lo: f64, hi: f64) -> Result<Self> {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(DecayError::InvalidInterval { a: lo, b: hi });
        }
        Ok(Self {
            density,
            support: (lo, hi),
            window: (lo, hi),
            breakpoints: Vec::new(),
            lower_tail: None,
            upper_tail: None,
            poles: Vec::new(),
            breit_wigner: None,
        })
    }

    /// Continue the density beyond `cut` with a power law of the given
    /// exponent about `center`, matched to the density at `cut`.
    pub fn with_upper_tail(mut self, cut: f64, center: f64, exponent: f64) -> Result<Self> {
        if !(cut > self.window.0) || !(cut > center) {
            return Err(DecayError::InvalidArgument(format!("upper cut {cut} must lie above the window start and the tail center")));
        }
        let tail = PowerTail::matched(&*self.density, center, cut, exponent)?;
        self.window.1 = cut;
        self.support.1 = f64::INFINITY;
        self.upper_tail = Some(tail);
        Ok(self)
    }

    pub fn with_lower_tail(mut self, cut: f64, center: f64, exponent: f64) -> Result<Self> {
        if !(cut < self.window.1) || !(cut < center) {
            return Err(DecayError::InvalidArgument(format!("lower cut {cut} must lie below the window end and the tail center")));
        }
        let tail = PowerTail::matched(&*self.density, center, cut, exponent)?;
        self.window.0 = cut;
        self.support.0 = f64::NEG_INFINITY;
        self.lower_tail = Some(tail);
        Ok(self)
    }

    pub fn with_breakpoints(mut self, points: impl IntoIterator<Item = f64>) -> Self {
        self.breakpoints.extend(points);
        self.breakpoints.sort_by(f64::total_cmp);
        self.breakpoints.dedup();
        self
    }

    pub fn with_poles(mut self, poles: impl IntoIterator<Item = Pole>) -> Self {
        self.poles.extend(poles);
        self
    }

    pub(crate) fn with_breit_wigner(mut self, bw: BreitWigner) -> Self {
        self.breit_wigner = Some(bw);
        self
    }

    /// `d_S(E)`; zero outside the support. Beyond the window the tail model
    /// is returned.
    pub fn density(&self, e: f64) -> f64 {
        if e < self.support.0 || e > self.support.1 {
            return 0.0;
        }
        match (&self.lower_tail, &self.upper_tail) {
            (Some(t), _) if e < self.window.0 => t.eval(e),
            (_, Some(t)) if e > self.window.1 => t.eval(e),
            _ => (self.density)(e),
        }
    }

    /// Raw density closure, usable outside the window as well.
    pub fn density_fn(&self) -> &Density {
        &self.density
    }

    pub fn support(&self) -> (f64, f64) {
        self.support
    }

    pub fn window(&self) -> (f64, f64) {
        self.window
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn poles(&self) -> &[Pole] {
        &self.poles
    }

    pub fn tails(&self) -> (Option<PowerTail>, Option<PowerTail>) {
        (self.lower_tail, self.upper_tail)
    }

    /// Set when the density is an exact Lorentzian, enabling closed forms.
    pub fn breit_wigner(&self) -> Option<BreitWigner> {
        self.breit_wigner
    }

    fn window_points(&self) -> Vec<f64> {
        let (lo, hi) = self.window;
        self.breakpoints.iter().copied().filter(|&p| p > lo && p < hi).collect()
    }

    /// `∫ d_S dE` over the continuum, tails included.
    pub fn continuum_weight(&self, cfg: &QuadratureConfig) -> Result<f64> {
        match self.moment_continuum(0, cfg)? {
            Moment::Finite(v) => Ok(v),
            Moment::Divergent => Err(DecayError::DivergentMoment { order: 0 }),
        }
    }

    /// Continuum weight plus the pole weights.
    pub fn total_weight(&self, cfg: &QuadratureConfig) -> Result<f64> {
        Ok(self.continuum_weight(cfg)? + self.poles.iter().map(|p| p.weight).sum::<f64>())
    }

    /// `⟨Eⁿ⟩ = ∫ Eⁿ d_S dE + Σ Z E_pⁿ`.
    pub fn moment(&self, n: u32, cfg: &QuadratureConfig) -> Result<Moment> {
        Ok(match self.moment_continuum(n, cfg)? {
            Moment::Finite(v) => Moment::Finite(v + self.poles.iter().map(|p| p.weight * p.energy.powi(n as i32)).sum::<f64>()),
            Moment::Divergent => Moment::Divergent,
        })
    }

    fn moment_continuum(&self, n: u32, cfg: &QuadratureConfig) -> Result<Moment> {
        let mut tails = 0.0;
        // ∫ (c ± u)ⁿ C u^{-p} du expanded binomially
        for (tail, sign) in [(self.lower_tail, -1.0), (self.upper_tail, 1.0)] {
            let Some(tail) = tail else { continue };
            let mut binom = 1.0;
            for k in 0..=n {
                match tail.power_integral(k) {
                    Some(v) => tails += binom * tail.center.powi((n - k) as i32) * f64::powi(sign, k as i32) * v,
                    None => return Ok(Moment::Divergent),
                }
                binom = binom * (n - k) as f64 / (k + 1) as f64;
            }
        }
        let (lo, hi) = self.window;
        let body = integrate_adaptive_points(|e| e.powi(n as i32) * (self.density)(e), lo, hi, &self.window_points(), cfg)
            .context(|| format!("moment of order {n}"))?;
        Ok(Moment::Finite(body.value + tails))
    }

    /// Continuum part `∫ d_S(E) e^{-iEt} dE`.
    pub fn continuum_fourier(&self, t: f64, cfg: &QuadratureConfig) -> Result<Complex64> {
        self.continuum_fourier_weighted(t, 0, cfg)
    }

    /// `∫ Eⁿ d_S(E) e^{-iEt} dE` over the continuum for `n ∈ {0, 1}`.
    fn continuum_fourier_weighted(&self, t: f64, n: u32, cfg: &QuadratureConfig) -> Result<Complex64> {
        let (lo, hi) = self.window;
        let body = integrate_oscillatory_points(
            |e| e.powi(n as i32) * (self.density)(e),
            lo,
            hi,
            t,
            &self.window_points(),
            cfg,
        )
        .context(|| format!("continuum Fourier integral at t = {t}"))?;
        let mut total = body.value;
        for (tail, lower) in [(self.lower_tail, true), (self.upper_tail, false)] {
            let Some(tail) = tail else { continue };
            if tail.exponent - n as f64 <= 1.0 {
                return Err(DecayError::DivergentMoment { order: n });
            }
            let phase = Complex64::from_polar(tail.coefficient, -tail.center * t);
            let orient = |z: Complex64| if lower { z.conj() } else { z };
            let base = orient(power_tail_fourier(tail.exponent, tail.start, t, cfg)?);
            total += phase
                * match n {
                    0 => base,
                    // E = c ± u splits into c·(u^{-p}) ± u^{1-p}
                    _ => {
                        let first = orient(power_tail_fourier(tail.exponent - 1.0, tail.start, t, cfg)?);
                        tail.center * base + if lower { -first } else { first }
                    }
                };
        }
        Ok(total)
    }

    /// Survival amplitude `a(t)`.
    pub fn amplitude(&self, t: f64, cfg: &QuadratureConfig) -> Result<Complex64> {
        let poles: Complex64 = self.poles.iter().map(|p| Complex64::from_polar(p.weight, -p.energy * t)).sum();
        Ok(self.continuum_fourier(t, cfg)? + poles)
    }

    /// `a′(t) = -i ∫ E d_S e^{-iEt} dE` plus pole terms.
    ///
    /// Requires a convergent first moment of the tails.
    pub fn amplitude_derivative(&self, t: f64, cfg: &QuadratureConfig) -> Result<Complex64> {
        let poles: Complex64 = self
            .poles
            .iter()
            .map(|p| Complex64::from_polar(p.weight * p.energy, -p.energy * t))
            .sum();
        let first = self.continuum_fourier_weighted(t, 1, cfg)?;
        Ok(Complex64::new(0.0, -1.0) * (first + poles))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn lorentzian(m: f64, gamma: f64) -> Density {
        Arc::new(move |e: f64| gamma / (2.0 * PI) / ((e - m).powi(2) + gamma * gamma / 4.0))
    }

    #[test]
    fn box_density_weights_and_moments() {
        let s = SpectralFunction::bounded(Arc::new(|_| 0.25), 0.0, 4.0).unwrap();
        let cfg = QuadratureConfig::default();
        assert!((s.total_weight(&cfg).unwrap() - 1.0).abs() < 1e-14);
        assert!((s.moment(1, &cfg).unwrap().value().unwrap() - 2.0).abs() < 1e-12);
        assert!((s.moment(2, &cfg).unwrap().value().unwrap() - 16.0 / 3.0).abs() < 1e-12);
        assert_eq!(s.density(-1.0), 0.0);
        assert_eq!(s.density(5.0), 0.0);
    }

    #[test]
    fn lorentzian_tails_restore_weight_and_flag_mean() {
        let (m, g) = (2.0, 0.36);
        let s = SpectralFunction::bounded(lorentzian(m, g), m - 50.0, m + 50.0)
            .unwrap()
            .with_upper_tail(m + 50.0, m, 2.0)
            .unwrap()
            .with_lower_tail(m - 50.0, m, 2.0)
            .unwrap()
            .with_breakpoints([m]);
        let cfg = QuadratureConfig::default();
        assert!((s.total_weight(&cfg).unwrap() - 1.0).abs() < 1e-7);
        assert_eq!(s.moment(1, &cfg).unwrap(), Moment::Divergent);
        assert!(s.amplitude_derivative(1.0, &cfg).is_err());
        let a = s.amplitude(1.0, &cfg).unwrap();
        let exact = Complex64::from_polar((-g / 2.0).exp(), -m);
        assert!((a - exact).norm() < 1e-6);
    }

    #[test]
    fn steep_tail_first_moment_is_finite() {
        // d = 1/(1+E)^4 on [0, ∞) has weight 1/3 and mean weight 1/6
        let d: Density = Arc::new(|e: f64| if e < 0.0 { 0.0 } else { (1.0 + e).powi(-4) });
        let s = SpectralFunction::bounded(d, 0.0, 20.0).unwrap().with_upper_tail(20.0, -1.0, 4.0).unwrap();
        let cfg = QuadratureConfig::default();
        assert!((s.continuum_weight(&cfg).unwrap() - 1.0 / 3.0).abs() < 1e-10);
        assert!((s.moment(1, &cfg).unwrap().value().unwrap() - 1.0 / 6.0).abs() < 1e-10);
        // a'(0) = -i⟨E⟩
        let da = s.amplitude_derivative(0.0, &cfg).unwrap();
        assert!((da.im + 1.0 / 6.0).abs() < 1e-10 && da.re.abs() < 1e-14);
    }

    #[test]
    fn poles_add_to_amplitude_and_weight() {
        let s = SpectralFunction::bounded(Arc::new(|_| 0.5), 0.0, 1.0)
            .unwrap()
            .with_poles([Pole { energy: -1.0, weight: 0.5, edge_offset: None }]);
        let cfg = QuadratureConfig::default();
        assert!((s.total_weight(&cfg).unwrap() - 1.0).abs() < 1e-14);
        let t = 2.0;
        let a = s.amplitude(t, &cfg).unwrap();
        let exact = Complex64::new(0.0, 1.0) * 0.5 * (Complex64::from_polar(1.0, -t) - 1.0) / t
            + Complex64::from_polar(0.5, t);
        assert!((a - exact).norm() < 1e-10);
    }

    #[test]
    fn edge_flag() {
        let p = Pole { energy: 5.0, weight: 1e-20, edge_offset: Some(1e-22) };
        assert!(p.is_at_edge());
        let p = Pole { energy: -1e-3, weight: 1e-3, edge_offset: Some(-1e-3) };
        assert!(!p.is_at_edge());
    }
}
