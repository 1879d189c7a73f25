//! Lee (Friedrichs) model: one discrete level coupled to continua.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{DecayError, Result, ResultExt};
use crate::numerics::{
    find_root_bisect, integrate_adaptive_points, integrate_principal_value_points, QuadratureConfig,
};
use crate::spectral::{Pole, SpectralFunction};

/// Form factor `f(k)` of a channel.
#[derive(Debug, Clone, PartialEq)]
pub enum FormFactor {
    /// `f = 1` for every `k`: the flat, memoryless limit.
    ConstantOne,
    /// `f = 1` on `(e0, lambda)`, zero elsewhere.
    Window { e0: f64, lambda: f64 },
    Tabulated(TabulatedFormFactor),
}

/// Piecewise-linear `f(k)` through the given nodes, zero outside them.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedFormFactor {
    k: Vec<f64>,
    f: Vec<f64>,
}

impl TabulatedFormFactor {
    pub fn new(k: Vec<f64>, f: Vec<f64>) -> Result<Self> {
        if k.len() != f.len() || k.len() < 2 {
            return Err(DecayError::InvalidModel("tabulated form factor needs at least two (k, f) pairs".into()));
        }
        if k.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(DecayError::InvalidModel("tabulated form factor k values must be strictly increasing".into()));
        }
        if f.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(DecayError::InvalidModel("tabulated form factor values must be finite and >= 0".into()));
        }
        Ok(Self { k, f })
    }

    pub fn eval(&self, k: f64) -> f64 {
        let n = self.k.len();
        if k < self.k[0] || k > self.k[n - 1] {
            return 0.0;
        }
        let i = self.k.partition_point(|&v| v <= k).clamp(1, n - 1) - 1;
        let s = (k - self.k[i]) / (self.k[i + 1] - self.k[i]);
        self.f[i] + s * (self.f[i + 1] - self.f[i])
    }

    pub fn nodes(&self) -> &[f64] {
        &self.k
    }

    pub fn values(&self) -> &[f64] {
        &self.f
    }
}

/// Mode energies `ω(k)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Dispersion {
    /// `ω(k) = k + offset`.
    Linear { offset: f64 },
}

impl Dispersion {
    fn offset(&self) -> f64 {
        match *self {
            Dispersion::Linear { offset } => offset,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSpec {
    /// Coupling `g`; the channel strength enters as `g²`.
    pub coupling: f64,
    pub form_factor: FormFactor,
    pub dispersion: Dispersion,
}

impl ChannelSpec {
    pub fn new(coupling: f64, form_factor: FormFactor, dispersion: Dispersion) -> Result<Self> {
        if !(coupling >= 0.0) || !coupling.is_finite() {
            return Err(DecayError::InvalidModel(format!("coupling must be finite and >= 0, got {coupling}")));
        }
        if let FormFactor::Window { e0, lambda } = form_factor {
            if !(e0 < lambda) || !e0.is_finite() || !lambda.is_finite() {
                return Err(DecayError::InvalidModel(format!(
                    "window form factor needs E0 < Lambda, got E0 = {e0}, Lambda = {lambda}"
                )));
            }
        }
        if !dispersion.offset().is_finite() {
            return Err(DecayError::InvalidModel("dispersion offset must be finite".into()));
        }
        Ok(Self {
            coupling,
            form_factor,
            dispersion,
        })
    }

    /// Window channel with `ω = k`, given `g²`.
    pub fn window(g2: f64, e0: f64, lambda: f64) -> Result<Self> {
        Self::new(g2.sqrt(), FormFactor::Window { e0, lambda }, Dispersion::Linear { offset: 0.0 })
    }

    /// Flat channel with `ω = k`, given `g² = Γ`.
    pub fn breit_wigner(g2: f64) -> Result<Self> {
        Self::new(g2.sqrt(), FormFactor::ConstantOne, Dispersion::Linear { offset: 0.0 })
    }

    pub fn with_offset(mut self, offset: f64) -> Self {
        self.dispersion = Dispersion::Linear { offset };
        self
    }

    pub fn g2(&self) -> f64 {
        self.coupling * self.coupling
    }

    pub fn offset(&self) -> f64 {
        self.dispersion.offset()
    }

    /// `f(k)`.
    pub fn form_factor_at(&self, k: f64) -> f64 {
        match &self.form_factor {
            FormFactor::ConstantOne => 1.0,
            FormFactor::Window { e0, lambda } => {
                if k > *e0 && k < *lambda {
                    1.0
                } else {
                    0.0
                }
            }
            FormFactor::Tabulated(t) => t.eval(k),
        }
    }

    /// Energy interval on which `f²(k(E))` can be nonzero; `None` when unbounded.
    pub fn energy_support(&self) -> Option<(f64, f64)> {
        let a = self.offset();
        match &self.form_factor {
            FormFactor::ConstantOne => None,
            FormFactor::Window { e0, lambda } => Some((e0 + a, lambda + a)),
            FormFactor::Tabulated(t) => Some((t.k[0] + a, t.k[t.k.len() - 1] + a)),
        }
    }

    /// Kinks of `f²` in energy.
    fn energy_breakpoints(&self) -> Vec<f64> {
        let a = self.offset();
        match &self.form_factor {
            FormFactor::ConstantOne => Vec::new(),
            FormFactor::Window { e0, lambda } => vec![e0 + a, lambda + a],
            FormFactor::Tabulated(t) => t.k.iter().map(|k| k + a).collect(),
        }
    }

    /// `Im Σ(E + i0) = -(g²/2) f²(k(E))`.
    pub fn imag_self_energy(&self, e: f64) -> f64 {
        let f = self.form_factor_at(e - self.offset());
        -0.5 * self.g2() * f * f
    }

    /// `Re Σ` at `E = base + dir·eᵘ`. When `base` coincides with a window
    /// edge the logarithm is taken from `u` directly, so offsets far below the
    /// float spacing at `base` remain meaningful.
    fn real_self_energy_near(&self, base: f64, dir: f64, u: f64, cfg: &QuadratureConfig) -> Result<f64> {
        let e = base + dir * u.exp();
        match &self.form_factor {
            FormFactor::Window { .. } => {
                let (lo, hi) = self.energy_support().unwrap();
                let log_dist = |edge: f64| if edge == base { u } else { (e - edge).abs().ln() };
                Ok(self.g2() / (2.0 * PI) * (log_dist(lo) - log_dist(hi)))
            }
            _ => self.real_self_energy(e, cfg),
        }
    }

    /// `Re Σ(E) = (g²/2π) PV ∫ f²(k)/(E - ω(k)) dk`.
    pub fn real_self_energy(&self, e: f64, cfg: &QuadratureConfig) -> Result<f64> {
        let g2 = self.g2();
        match &self.form_factor {
            FormFactor::ConstantOne => Ok(0.0),
            FormFactor::Window { .. } => {
                let (lo, hi) = self.energy_support().unwrap();
                // log singularities at the edges: ln|E - lo| → -∞ at lo
                Ok(g2 / (2.0 * PI) * ((e - lo).abs().ln() - (e - hi).abs().ln()))
            }
            FormFactor::Tabulated(t) => {
                if g2 == 0.0 {
                    return Ok(0.0);
                }
                let x = e - self.offset();
                let (k0, k1) = (t.k[0], t.k[t.k.len() - 1]);
                let f2 = |k: f64| t.eval(k).powi(2);
                if x == k0 || x == k1 {
                    let fe = f2(x);
                    if fe > 0.0 {
                        return Ok(if x == k0 { f64::NEG_INFINITY } else { f64::INFINITY });
                    }
                }
                let integral = if x > k0 && x < k1 {
                    // PV ∫ f²/(x - k) = -PV ∫ f²/(k - x)
                    -integrate_principal_value_points(f2, x, k0, k1, &t.k, cfg)?.value
                } else {
                    integrate_adaptive_points(|k| f2(k) / (x - k), k0, k1, &t.k, cfg)?.value
                };
                Ok(g2 / (2.0 * PI) * integral)
            }
        }
    }

    /// `dRe Σ/dE` outside the channel support.
    fn real_self_energy_slope_near(&self, base: f64, dir: f64, u: f64, cfg: &QuadratureConfig) -> Result<f64> {
        let e = base + dir * u.exp();
        let g2 = self.g2();
        match &self.form_factor {
            FormFactor::ConstantOne => Ok(0.0),
            FormFactor::Window { .. } => {
                let (lo, hi) = self.energy_support().unwrap();
                let dist = |edge: f64| if edge == base { dir * u.exp() } else { e - edge };
                Ok(g2 / (2.0 * PI) * (1.0 / dist(lo) - 1.0 / dist(hi)))
            }
            FormFactor::Tabulated(t) => {
                let x = e - self.offset();
                let (k0, k1) = (t.k[0], t.k[t.k.len() - 1]);
                let r = integrate_adaptive_points(|k| t.eval(k).powi(2) / (x - k).powi(2), k0, k1, &t.k, cfg)?;
                Ok(-g2 / (2.0 * PI) * r.value)
            }
        }
    }

    /// Complex self-energy `Σ(E + i0)`.
    pub fn self_energy(&self, e: f64, cfg: &QuadratureConfig) -> Result<Complex64> {
        Ok(Complex64::new(self.real_self_energy(e, cfg)?, self.imag_self_energy(e)))
    }
}

/// Closed-form Breit–Wigner (Lorentzian) spectral function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BreitWigner {
    pub mass: f64,
    pub width: f64,
}

impl BreitWigner {
    pub fn new(mass: f64, width: f64) -> Result<Self> {
        if !(width > 0.0) || !width.is_finite() || !mass.is_finite() {
            return Err(DecayError::InvalidModel(format!("Breit-Wigner needs finite M and Γ > 0 (M = {mass}, Γ = {width})")));
        }
        Ok(Self { mass, width })
    }

    /// `(Γ/2π) / ((E - M)² + Γ²/4)`.
    pub fn density(&self, e: f64) -> f64 {
        let g = self.width;
        g / (2.0 * PI) / ((e - self.mass).powi(2) + 0.25 * g * g)
    }

    pub fn amplitude(&self, t: f64) -> Complex64 {
        Complex64::from_polar((-0.5 * self.width * t).exp(), -self.mass * t)
    }

    pub fn survival_probability(&self, t: f64) -> f64 {
        (-self.width * t).exp()
    }

    pub fn decay_density(&self, t: f64) -> f64 {
        self.width * (-self.width * t).exp()
    }

    /// Numerical representation: the Lorentzian on `M ± half_width` continued
    /// by `E⁻²` tails on both sides.
    pub fn spectral_function(&self, half_width: f64) -> Result<SpectralFunction> {
        let bw = *self;
        let (lo, hi) = (self.mass - half_width, self.mass + half_width);
        Ok(SpectralFunction::bounded(Arc::new(move |e| bw.density(e)), lo, hi)?
            .with_upper_tail(hi, self.mass, 2.0)?
            .with_lower_tail(lo, self.mass, 2.0)?
            .with_breakpoints([self.mass])
            .with_breit_wigner(bw))
    }
}

/// Per-channel golden-rule widths.
#[derive(Debug, Clone, PartialEq)]
pub struct GoldenRule {
    pub total: f64,
    pub per_channel: Vec<f64>,
}

/// `H = M|S⟩⟨S| + Σ_i ∫ ω_i(k)|k,i⟩⟨k,i| dk + couplings`.
#[derive(Debug, Clone, PartialEq)]
pub struct LeeModel {
    mass: f64,
    channels: Vec<ChannelSpec>,
    quadrature: QuadratureConfig,
}

impl LeeModel {
    pub fn new(mass: f64, channels: Vec<ChannelSpec>) -> Result<Self> {
        if channels.is_empty() {
            return Err(DecayError::InvalidModel("a Lee model needs at least one channel".into()));
        }
        if !mass.is_finite() {
            return Err(DecayError::InvalidModel(format!("bare mass must be finite, got {mass}")));
        }
        Ok(Self {
            mass,
            channels,
            quadrature: QuadratureConfig::default(),
        })
    }

    /// Quadrature settings for tabulated self-energies and the continuum.
    pub fn with_quadrature(mut self, cfg: QuadratureConfig) -> Self {
        self.quadrature = cfg;
        self
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn channels(&self) -> &[ChannelSpec] {
        &self.channels
    }

    pub fn quadrature(&self) -> &QuadratureConfig {
        &self.quadrature
    }

    fn channel(&self, index: usize) -> Result<&ChannelSpec> {
        self.channels.get(index).ok_or_else(|| {
            DecayError::InvalidArgument(format!("channel {index} out of range (model has {})", self.channels.len()))
        })
    }

    /// `Σ_i(E + i0)`.
    pub fn self_energy(&self, channel: usize, e: f64) -> Result<Complex64> {
        self.channel(channel)?.self_energy(e, &self.quadrature)
    }

    pub fn total_self_energy(&self, e: f64) -> Result<Complex64> {
        self.channels.iter().map(|c| c.self_energy(e, &self.quadrature)).sum()
    }

    /// `d_S(E) = (1/π)|Im Σ| / ((E - M - Re Σ)² + (Im Σ)²)`.
    pub fn spectral_density(&self, e: f64) -> Result<f64> {
        let im: f64 = self.channels.iter().map(|c| c.imag_self_energy(e)).sum();
        if im == 0.0 {
            return Ok(0.0);
        }
        let re: f64 = self
            .channels
            .iter()
            .map(|c| c.real_self_energy(e, &self.quadrature))
            .sum::<Result<f64>>()?;
        let d = e - self.mass - re;
        if !d.is_finite() {
            return Ok(0.0);
        }
        Ok(im.abs() / PI / (d * d + im * im))
    }

    /// Union of the channel supports, or `None` if some channel is unbounded.
    pub fn support(&self) -> Option<Vec<(f64, f64)>> {
        let mut spans: Vec<(f64, f64)> = self
            .channels
            .iter()
            .filter(|c| c.g2() > 0.0)
            .map(|c| c.energy_support())
            .collect::<Option<_>>()?;
        spans.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, f64)> = Vec::new();
        for (lo, hi) in spans {
            match merged.last_mut() {
                Some(last) if lo <= last.1 => last.1 = last.1.max(hi),
                _ => merged.push((lo, hi)),
            }
        }
        Some(merged)
    }

    /// `E - M - Re Σ_tot(E)` at `E = base + dir·eᵘ`.
    fn inverse_propagator(&self, base: f64, dir: f64, u: f64) -> Result<f64> {
        let e = base + dir * u.exp();
        let mut re = 0.0;
        for c in self.channels.iter().filter(|c| c.g2() > 0.0) {
            re += c.real_self_energy_near(base, dir, u, &self.quadrature)?;
        }
        Ok(e - self.mass - re)
    }

    fn pole_at(&self, base: f64, dir: f64, u: f64) -> Result<Pole> {
        let mut slope = 0.0;
        for c in self.channels.iter().filter(|c| c.g2() > 0.0) {
            slope += c.real_self_energy_slope_near(base, dir, u, &self.quadrature)?;
        }
        let offset = dir * u.exp();
        Ok(Pole {
            energy: base + offset,
            weight: 1.0 / (1.0 - slope),
            edge_offset: Some(offset),
        })
    }

    /// Root of `E - M - Re Σ` on `E = base + dir·eᵘ`, `u ∈ [u_lo, u_hi]`,
    /// if the sign changes there.
    fn search_side(&self, base: f64, dir: f64, u_lo: f64, u_hi: f64) -> Result<Option<Pole>> {
        let first_err = RefCell::new(None);
        let f = |u: f64| match self.inverse_propagator(base, dir, u) {
            Ok(v) => v,
            Err(e) => {
                first_err.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        };
        let (a, b) = (f(u_lo), f(u_hi));
        if let Some(e) = first_err.take() {
            return Err(e);
        }
        if a == 0.0 {
            return self.pole_at(base, dir, u_lo).map(Some);
        }
        if !(a * b < 0.0) {
            return Ok(None);
        }
        let u = find_root_bisect(f, u_lo, u_hi, 1e-13)?;
        if let Some(e) = first_err.take() {
            return Err(e);
        }
        self.pole_at(base, dir, u).map(Some)
    }

    /// Bound states: real zeros of `E - M - Re Σ(E)` outside the continuum.
    ///
    /// The inverse propagator is strictly increasing in every gap of the
    /// support, so each gap holds at most one root. Roots are located in the
    /// logarithm of the distance to the nearest edge; a root closer to its
    /// edge than the float spacing is reported with [`Pole::is_at_edge`] set.
    pub fn find_poles(&self) -> Result<Vec<Pole>> {
        const U_MIN: f64 = -2000.0;
        let Some(support) = self.support() else {
            return Err(DecayError::InvalidModel("pole search needs a bounded continuum support".into()));
        };
        let mut poles = Vec::new();
        if support.is_empty() {
            // every channel decoupled
            poles.push(Pole {
                energy: self.mass,
                weight: 1.0,
                edge_offset: None,
            });
            return Ok(poles);
        }
        let far_u = |base: f64, dir: f64, want_positive: bool| -> Result<f64> {
            let mut u = 0.0;
            loop {
                let v = self.inverse_propagator(base, dir, u)?;
                if (v > 0.0) == want_positive || u > 700.0 {
                    return Ok(u);
                }
                u += 1.0;
            }
        };

        let lo = support[0].0;
        let u_far = far_u(lo, -1.0, false)?;
        poles.extend(self.search_side(lo, -1.0, U_MIN, u_far).context(|| "pole search below the continuum".into())?);

        for w in support.windows(2) {
            let (a, b) = (w[0].1, w[1].0);
            let mid = 0.5 * (a + b);
            let half = (0.5 * (b - a)).ln();
            let f_mid = self.inverse_propagator(mid, 1.0, f64::NEG_INFINITY)?;
            let pole = if f_mid > 0.0 {
                self.search_side(a, 1.0, U_MIN, half)?
            } else {
                self.search_side(b, -1.0, U_MIN, half)?
            };
            poles.extend(pole);
        }

        let hi = support[support.len() - 1].1;
        let u_far = far_u(hi, 1.0, true)?;
        poles.extend(self.search_side(hi, 1.0, U_MIN, u_far).context(|| "pole search above the continuum".into())?);
        Ok(poles)
    }

    /// Half-width of the numerical window around `M` used when a channel is
    /// flat and the density has Lorentzian tails.
    fn flat_cut(&self) -> f64 {
        let flat: f64 = self
            .channels
            .iter()
            .filter(|c| c.form_factor == FormFactor::ConstantOne)
            .map(|c| c.g2())
            .sum();
        let reach = self
            .channels
            .iter()
            .filter_map(|c| c.energy_support())
            .flat_map(|(a, b)| [(a - self.mass).abs(), (b - self.mass).abs()])
            .fold(0.0, f64::max);
        (400.0 * flat).max(2.0 * reach + 10.0 * flat)
    }

    /// The spectral function of `|S⟩`.
    ///
    /// With a flat channel the continuum extends over the whole real line and
    /// `E⁻²` tails are attached beyond `M ± cut`. A model made of flat
    /// channels only is exactly Breit–Wigner and is flagged as such.
    pub fn spectral_function(&self) -> Result<SpectralFunction> {
        let model = Arc::new(self.clone());
        let density = {
            let model = model.clone();
            Arc::new(move |e: f64| model.spectral_density(e).unwrap_or(f64::NAN))
        };
        let mut points: Vec<f64> = self.channels.iter().flat_map(|c| c.energy_breakpoints()).collect();
        points.push(self.mass);

        match self.support() {
            Some(support) if !support.is_empty() => {
                let lo = support[0].0;
                let hi = support[support.len() - 1].1;
                Ok(SpectralFunction::bounded(density, lo, hi)?
                    .with_breakpoints(points)
                    .with_poles(self.find_poles()?))
            }
            Some(_) => {
                // decoupled: a single discrete level
                let m = self.mass;
                Ok(SpectralFunction::bounded(Arc::new(|_| 0.0), m - 1.0, m + 1.0)?.with_poles(self.find_poles()?))
            }
            None => {
                let cut = self.flat_cut();
                let (lo, hi) = (self.mass - cut, self.mass + cut);
                let mut s = SpectralFunction::bounded(density, lo, hi)?
                    .with_upper_tail(hi, self.mass, 2.0)?
                    .with_lower_tail(lo, self.mass, 2.0)?
                    .with_breakpoints(points);
                if self.channels.iter().all(|c| c.form_factor == FormFactor::ConstantOne) {
                    let width = self.channels.iter().map(|c| c.g2()).sum();
                    s = s.with_breit_wigner(BreitWigner::new(self.mass, width)?);
                }
                Ok(s)
            }
        }
    }

    /// `∫ d_S dE + Σ Z`.
    pub fn normalization(&self) -> Result<f64> {
        self.spectral_function()?.total_weight(&self.quadrature)
    }

    /// `Γ_i = g_i² f_i²(k_M)/|ω_i′(k_M)|` with `ω_i(k_M) = M`.
    pub fn golden_rule_width(&self) -> GoldenRule {
        let per_channel: Vec<f64> = self
            .channels
            .iter()
            .map(|c| {
                let k_m = self.mass - c.offset();
                // ω′ = 1 for the linear dispersion
                c.g2() * c.form_factor_at(k_m).powi(2)
            })
            .collect();
        GoldenRule {
            total: per_channel.iter().sum(),
            per_channel,
        }
    }
}
