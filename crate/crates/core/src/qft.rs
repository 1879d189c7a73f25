//! One-loop resummed spectral functions of relativistic two-body decays.
//!
//! Normalisation of the absorptive parts:
//!
//! * scalar pair, `L = g S φ²`: `Im Π(s) = (g²/16π) √(1 - 4m²/s)`
//! * fermion pair, `L = g S ψ̄ψ`: `Im Π(s) = (g²/8π) s (1 - 4m²/s)^{3/2} F_Λ(s)`
//!
//! both above threshold, so that `Γ = Im Π(M²)/M`. The real part follows from
//! a dispersion relation subtracted at `s = M²`,
//!
//! `ΔRe Π(s) = (1/π) PV ∫ Im Π(s′) [1/(s′ - s) - 1/(s′ - M²)] ds′`,
//!
//! and the propagator is `1/(s - M² + ΔΠ(s))`, which keeps the peak at the
//! physical mass and the spectral weight normalised to one. In energy,
//! `d_S(E) = (2E/π) Im Π / ((E² - M² + ΔRe Π)² + Im Π²)`.

use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{DecayError, Result, ResultExt};
use crate::numerics::{
    find_root_bisect, integrate_adaptive_points, integrate_principal_value_points, integrate_semi_infinite,
    MonotoneCubic, QuadratureConfig,
};
use crate::spectral::{Pole, SpectralFunction};

/// Suppression of the fermion loop above the cutoff.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CutoffShape {
    /// `θ(Λ² - s)`.
    Hard,
    /// `exp(-(s - Λ²)/width)` above `Λ²`.
    Smooth { width: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QftChannelKind {
    ScalarPair { daughter_mass: f64 },
    FermionPair { daughter_mass: f64, cutoff: f64, shape: CutoffShape },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QftChannel {
    pub kind: QftChannelKind,
    pub coupling: f64,
}

impl QftChannel {
    pub fn scalar(coupling: f64, daughter_mass: f64) -> Self {
        Self {
            kind: QftChannelKind::ScalarPair { daughter_mass },
            coupling,
        }
    }

    pub fn fermion(coupling: f64, daughter_mass: f64, cutoff: f64, shape: CutoffShape) -> Self {
        Self {
            kind: QftChannelKind::FermionPair {
                daughter_mass,
                cutoff,
                shape,
            },
            coupling,
        }
    }

    /// Scalar channel whose width at `s = mass²` is `width`.
    pub fn scalar_with_width(mass: f64, daughter_mass: f64, width: f64) -> Result<Self> {
        let unit = Self::scalar(1.0, daughter_mass).imag_self_energy(mass * mass);
        if !(unit > 0.0) {
            return Err(DecayError::InvalidModel(format!(
                "mass {mass} is below the pair threshold {}",
                2.0 * daughter_mass
            )));
        }
        Ok(Self::scalar((width * mass / unit).sqrt(), daughter_mass))
    }

    /// Fermion channel whose width at `s = mass²` is `width`.
    pub fn fermion_with_width(mass: f64, daughter_mass: f64, cutoff: f64, shape: CutoffShape, width: f64) -> Result<Self> {
        let unit = Self::fermion(1.0, daughter_mass, cutoff, shape).imag_self_energy(mass * mass);
        if !(unit > 0.0) {
            return Err(DecayError::InvalidModel(format!(
                "mass {mass} is below the pair threshold {} or above the cutoff",
                2.0 * daughter_mass
            )));
        }
        Ok(Self::fermion((width * mass / unit).sqrt(), daughter_mass, cutoff, shape))
    }

    pub fn daughter_mass(&self) -> f64 {
        match self.kind {
            QftChannelKind::ScalarPair { daughter_mass } | QftChannelKind::FermionPair { daughter_mass, .. } => {
                daughter_mass
            }
        }
    }

    pub fn threshold(&self) -> f64 {
        4.0 * self.daughter_mass().powi(2)
    }

    /// `Im Π_i(s)`.
    pub fn imag_self_energy(&self, s: f64) -> f64 {
        let thr = self.threshold();
        if !(s > thr) {
            return 0.0;
        }
        let g2 = self.coupling * self.coupling;
        let beta2 = 1.0 - thr / s;
        match self.kind {
            QftChannelKind::ScalarPair { .. } => g2 / (16.0 * PI) * beta2.sqrt(),
            QftChannelKind::FermionPair { cutoff, shape, .. } => {
                let l2 = cutoff * cutoff;
                let suppression = match shape {
                    CutoffShape::Hard if s >= l2 => return 0.0,
                    CutoffShape::Smooth { width } if s > l2 => (-(s - l2) / width).exp(),
                    _ => 1.0,
                };
                g2 / (8.0 * PI) * s * beta2 * beta2.sqrt() * suppression
            }
        }
    }

    fn validate(&self, mass: f64) -> Result<()> {
        if !(self.coupling >= 0.0) || !self.coupling.is_finite() {
            return Err(DecayError::InvalidModel(format!("coupling must be finite and >= 0, got {}", self.coupling)));
        }
        let m = self.daughter_mass();
        if !(m > 0.0) || !m.is_finite() {
            return Err(DecayError::InvalidModel(format!("daughter mass must be finite and > 0, got {m}")));
        }
        if let QftChannelKind::FermionPair { cutoff, shape, .. } = self.kind {
            if !cutoff.is_finite() || !(cutoff > mass) {
                return Err(DecayError::InvalidModel(format!(
                    "fermion channel needs a finite cutoff above M = {mass}, got {cutoff}"
                )));
            }
            if let CutoffShape::Smooth { width } = shape {
                if !(width > 0.0) || !width.is_finite() {
                    return Err(DecayError::InvalidModel(format!("smooth cutoff width must be > 0, got {width}")));
                }
            }
        }
        Ok(())
    }
}

/// Unstable scalar `S` of mass `M` decaying into one or more pair channels.
#[derive(Debug, Clone, PartialEq)]
pub struct QftModel {
    mass: f64,
    channels: Vec<QftChannel>,
    quadrature: QuadratureConfig,
}

impl QftModel {
    pub fn new(mass: f64, channels: Vec<QftChannel>) -> Result<Self> {
        if !(mass > 0.0) || !mass.is_finite() {
            return Err(DecayError::InvalidModel(format!("mass must be finite and > 0, got {mass}")));
        }
        if channels.is_empty() {
            return Err(DecayError::InvalidModel("a QFT model needs at least one channel".into()));
        }
        for c in &channels {
            c.validate(mass)?;
            if !(mass > 2.0 * c.daughter_mass()) {
                return Err(DecayError::InvalidModel(format!(
                    "M = {mass} must exceed the pair threshold {}",
                    2.0 * c.daughter_mass()
                )));
            }
        }
        Ok(Self {
            mass,
            channels,
            quadrature: QuadratureConfig {
                abs_tol: 1e-11,
                rel_tol: 1e-10,
                max_panels: 100_000,
                ..QuadratureConfig::default()
            },
        })
    }

    /// Quadrature used inside the dispersion integral.
    pub fn with_quadrature(mut self, cfg: QuadratureConfig) -> Self {
        self.quadrature = cfg;
        self
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn channels(&self) -> &[QftChannel] {
        &self.channels
    }

    /// Lowest pair threshold in `s`.
    pub fn threshold(&self) -> f64 {
        self.channels.iter().map(QftChannel::threshold).fold(f64::INFINITY, f64::min)
    }

    /// Upper end of the support in `s` (`∞` unless every channel has a hard cutoff).
    fn s_max(&self) -> f64 {
        self.channels
            .iter()
            .map(|c| match c.kind {
                QftChannelKind::FermionPair {
                    cutoff,
                    shape: CutoffShape::Hard,
                    ..
                } => cutoff * cutoff,
                _ => f64::INFINITY,
            })
            .fold(0.0, f64::max)
    }

    /// Kinks of `Im Π` in `s`.
    fn s_breakpoints(&self) -> Vec<f64> {
        let mut pts: Vec<f64> = self.channels.iter().map(QftChannel::threshold).collect();
        for c in &self.channels {
            if let QftChannelKind::FermionPair { cutoff, .. } = c.kind {
                pts.push(cutoff * cutoff);
            }
        }
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }

    pub fn imag_self_energy(&self, s: f64) -> f64 {
        self.channels.iter().map(|c| c.imag_self_energy(s)).sum()
    }

    pub fn channel_imag_self_energy(&self, channel: usize, s: f64) -> Result<f64> {
        self.channels
            .get(channel)
            .map(|c| c.imag_self_energy(s))
            .ok_or_else(|| DecayError::InvalidArgument(format!("channel {channel} out of range")))
    }

    /// `Γ = Im Π(M²)/M` and its split over channels.
    pub fn widths(&self) -> Vec<f64> {
        let m2 = self.mass * self.mass;
        self.channels.iter().map(|c| c.imag_self_energy(m2) / self.mass).collect()
    }

    pub fn width(&self) -> f64 {
        self.widths().iter().sum()
    }

    /// `(1/π) [PV ∫ Im Π/(s′ - x)]` over `[lo, hi]`, regular if `x` is outside.
    fn dispersion_piece(&self, x: f64, lo: f64, hi: f64, points: &[f64]) -> Result<f64> {
        let im = |sp: f64| self.imag_self_energy(sp);
        let v = if x > lo && x < hi {
            integrate_principal_value_points(im, x, lo, hi, points, &self.quadrature)?.value
        } else if x <= lo {
            // s′ = lo + v² removes the square-root edge at threshold
            let vp: Vec<f64> = points.iter().filter(|&&p| p > lo).map(|p| (p - lo).sqrt()).collect();
            integrate_adaptive_points(
                |v| {
                    let sp = lo + v * v;
                    if sp == x {
                        0.0
                    } else {
                        2.0 * v * im(sp) / (sp - x)
                    }
                },
                0.0,
                (hi - lo).sqrt(),
                &vp,
                &self.quadrature,
            )?
            .value
        } else {
            integrate_adaptive_points(|sp| im(sp) / (sp - x), lo, hi, points, &self.quadrature)?.value
        };
        Ok(v / PI)
    }

    /// Subtracted real part `ΔRe Π(s) = Re Π(s) - Re Π(M²)`.
    pub fn real_self_energy(&self, s: f64) -> Result<f64> {
        let m2 = self.mass * self.mass;
        if s == m2 {
            return Ok(0.0);
        }
        let lo = self.threshold();
        let s_max = self.s_max();
        let mut split = s_max;
        if !split.is_finite() {
            // beyond `split` both kernels are regular and are combined
            split = 4.0 * s.max(m2).max(lo);
            for c in &self.channels {
                if let QftChannelKind::FermionPair { cutoff, .. } = c.kind {
                    split = split.max(2.0 * cutoff * cutoff);
                }
            }
        }
        if s == s_max {
            // logarithmic divergence at a hard cutoff
            return Ok(f64::NEG_INFINITY);
        }
        let points = self.s_breakpoints();
        let body = self.dispersion_piece(s, lo, split, &points)? - self.dispersion_piece(m2, lo, split, &points)?;
        let tail = if split < s_max {
            let d = s - m2;
            integrate_semi_infinite(
                |sp| self.imag_self_energy(sp) * d / ((sp - s) * (sp - m2)),
                split,
                &self.quadrature,
            )?
            .value
                / PI
        } else {
            0.0
        };
        Ok(body + tail)
    }

    /// `D(s) = s - M² + ΔRe Π(s)`.
    fn inverse_propagator(&self, s: f64) -> Result<f64> {
        Ok(s - self.mass * self.mass + self.real_self_energy(s)?)
    }

    /// `d_S(E)` by direct evaluation of the dispersion integral.
    pub fn spectral_density(&self, e: f64) -> Result<f64> {
        let s = e * e;
        let im = self.imag_self_energy(s);
        if e <= 0.0 || im == 0.0 {
            return Ok(0.0);
        }
        let d = self.inverse_propagator(s)?;
        Ok(2.0 * e / PI * im / (d * d + im * im))
    }

    /// Bound state below the lowest threshold, if the coupling is strong
    /// enough to pull one out. `D` increases on `[0, s_thr)` so there is at
    /// most one.
    ///
    /// A hard cutoff also produces a zero of `D` just above `Λ²`; its residue
    /// is of order `Λ² exp(-πΛ²/Im Π(Λ²))` and is not tracked.
    pub fn find_poles(&self) -> Result<Vec<Pole>> {
        let thr = self.threshold();
        let s_top = thr * (1.0 - 1e-12);
        let (d0, d1) = (self.inverse_propagator(0.0)?, self.inverse_propagator(s_top)?);
        if !(d0 < 0.0 && d1 > 0.0) {
            return Ok(Vec::new());
        }
        let mut err = None;
        let s = find_root_bisect(
            |s| {
                self.inverse_propagator(s).unwrap_or_else(|e| {
                    err.get_or_insert(e);
                    f64::NAN
                })
            },
            0.0,
            s_top,
            1e-14 * thr,
        )?;
        if let Some(e) = err {
            return Err(e);
        }
        // Z = 1/D′(s_p), with D′ = 1 + (1/π) ∫ Im Π/(s′ - s)²
        let slope = integrate_adaptive_points(
            |sp| self.imag_self_energy(sp) / (sp - s).powi(2),
            thr,
            thr.max(self.s_max().min(1e4 * thr.max(self.mass * self.mass))),
            &self.s_breakpoints(),
            &self.quadrature,
        )?
        .value
            / PI;
        Ok(vec![Pole {
            energy: s.sqrt(),
            weight: 1.0 / (1.0 + slope),
            edge_offset: None,
        }])
    }

    /// Energies at which `ΔRe Π` is tabulated for the interpolated spectrum.
    fn table_nodes(&self, e_max: f64, nodes_per_decade: usize) -> Vec<f64> {
        let e_thr = self.threshold().sqrt();
        let mut nodes = vec![e_thr];
        let span = e_max - e_thr;
        let d_min = 1e-7 * e_thr;
        let decades = (span / d_min).log10();
        let n = (decades * nodes_per_decade as f64).ceil() as usize;
        nodes.extend((0..=n).map(|i| e_thr + d_min * 10f64.powf(decades * i as f64 / n as f64)));
        // both sides of every kink, clustered geometrically
        for c in &self.channels {
            let mut kinks = vec![2.0 * c.daughter_mass()];
            if let QftChannelKind::FermionPair { cutoff, .. } = c.kind {
                kinks.push(cutoff);
            }
            for k in kinks {
                for j in 0..=10 * 8 {
                    let d = k * 10f64.powf(-1.0 - j as f64 / 8.0);
                    nodes.push(k - d);
                    nodes.push(k + d);
                }
                nodes.push(k);
            }
        }
        let hard_end = self.s_max().sqrt();
        nodes.retain(|&e| e >= e_thr && e <= e_max && e < hard_end * (1.0 - 1e-12));
        nodes.sort_by(f64::total_cmp);
        nodes.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * b.abs());
        nodes
    }

    /// `ΔRe Π(E²)` tabulated on `[E_thr, e_max]` and interpolated with a
    /// monotone cubic. Nodes are evaluated in parallel.
    pub fn tabulate(&self, e_max: f64) -> Result<SelfEnergyTable> {
        let nodes = self.table_nodes(e_max, 400);
        let values = nodes
            .par_iter()
            .map(|&e| self.real_self_energy(e * e))
            .collect::<Result<Vec<f64>>>()
            .context(|| "tabulating the dispersive self-energy".into())?;
        Ok(SelfEnergyTable {
            interp: MonotoneCubic::new(nodes, values)?,
        })
    }

    /// Upper end of the numerical window used by default: the cutoff for hard
    /// fermion channels, a point well into the tail otherwise.
    pub fn default_cut(&self) -> f64 {
        let mut cut: f64 = 40.0 * self.mass;
        for c in &self.channels {
            if let QftChannelKind::FermionPair { cutoff, shape, .. } = c.kind {
                cut = cut.max(match shape {
                    CutoffShape::Hard => cutoff,
                    CutoffShape::Smooth { width } => (cutoff * cutoff + 40.0 * width).sqrt(),
                });
            }
        }
        cut.min(self.s_max().sqrt())
    }

    /// Spectral function on `[E_thr, cut]`. When the support extends beyond
    /// `cut` (scalar channels), the remainder is an `E⁻³` tail matched at `cut`.
    pub fn spectral_function(&self, cut: f64) -> Result<SpectralFunction> {
        let e_thr = self.threshold().sqrt();
        let e_end = self.s_max().sqrt();
        if !(cut > self.mass) || cut > e_end {
            return Err(DecayError::InvalidArgument(format!(
                "cut {cut} must lie in (M, {e_end}]"
            )));
        }
        let table = Arc::new(self.tabulate(cut)?);
        let model = Arc::new(self.clone());
        let density = {
            let (model, table) = (model.clone(), table.clone());
            Arc::new(move |e: f64| model.tabulated_density(&table, e))
        };
        let mut points = vec![self.mass];
        points.extend(self.s_breakpoints().iter().map(|s| s.sqrt()));
        let s = SpectralFunction::bounded(density, e_thr, cut)?
            .with_breakpoints(points)
            .with_poles(self.find_poles()?);
        let scalar_tail = self
            .channels
            .iter()
            .any(|c| matches!(c.kind, QftChannelKind::ScalarPair { .. }));
        if scalar_tail && cut < e_end {
            s.with_upper_tail(cut, 0.0, 3.0)
        } else {
            Ok(s)
        }
    }

    /// `d_S(E)` using a precomputed table for `ΔRe Π`.
    pub fn tabulated_density(&self, table: &SelfEnergyTable, e: f64) -> f64 {
        let s = e * e;
        let im = self.imag_self_energy(s);
        if e <= 0.0 || im == 0.0 {
            return 0.0;
        }
        let d = s - self.mass * self.mass + table.eval(e);
        2.0 * e / PI * im / (d * d + im * im)
    }
}

/// Interpolated `ΔRe Π(E²)` as a function of `E`.
#[derive(Debug, Clone)]
pub struct SelfEnergyTable {
    interp: MonotoneCubic,
}

impl SelfEnergyTable {
    pub fn eval(&self, e: f64) -> f64 {
        self.interp.eval(e)
    }

    pub fn nodes(&self) -> &[f64] {
        self.interp.nodes()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar() -> QftModel {
        QftModel::new(1.0, vec![QftChannel::scalar_with_width(1.0, 0.25, 0.1).unwrap()]).unwrap()
    }

    #[test]
    fn imag_part_thresholds_and_limits() {
        let c = QftChannel::scalar(2.0, 0.25);
        assert_eq!(c.imag_self_energy(0.2), 0.0);
        assert_eq!(c.imag_self_energy(0.25), 0.0);
        assert!((c.imag_self_energy(1e12) - 4.0 / (16.0 * PI)).abs() < 1e-12);
        let f = QftChannel::fermion(1.0, 0.25, 10.0, CutoffShape::Hard);
        let near = f.imag_self_energy(0.25 * (1.0 + 1e-6));
        assert!(near > 0.0 && near < 1e-9);
        assert_eq!(f.imag_self_energy(100.0), 0.0);
        assert!(f.imag_self_energy(99.0) > 0.0);
    }

    #[test]
    fn width_constructor() {
        let m = scalar();
        assert!((m.width() - 0.1).abs() < 1e-14);
        let f = QftModel::new(
            1.0,
            vec![QftChannel::fermion_with_width(1.0, 0.25, 10.0, CutoffShape::Hard, 0.02).unwrap()],
        )
        .unwrap();
        assert!((f.width() - 0.02).abs() < 1e-14);
    }

    #[test]
    fn subtraction_point_and_continuity() {
        let m = scalar();
        assert_eq!(m.real_self_energy(1.0).unwrap(), 0.0);
        let below = m.real_self_energy(0.25 * (1.0 - 1e-9)).unwrap();
        let above = m.real_self_energy(0.25 * (1.0 + 1e-9)).unwrap();
        assert!((below - above).abs() < 1e-5, "{below} {above}");
    }

    #[test]
    fn scalar_real_part_matches_loop_function() {
        // above threshold the loop function is β ln((1+β)/(1-β)) up to a constant
        let m = scalar();
        let c = m.channels()[0].coupling.powi(2) / (16.0 * PI);
        let loop_fn = |s: f64| {
            let b = (1.0 - 0.25 / s).sqrt();
            -c / PI * b * ((1.0 + b) / (1.0 - b)).ln()
        };
        for s in [0.5, 2.0, 9.0, 50.0] {
            let direct = m.real_self_energy(s).unwrap();
            let closed = loop_fn(s) - loop_fn(1.0);
            assert!((direct - closed).abs() < 1e-8, "s = {s}: {direct} vs {closed}");
        }
    }

    #[test]
    fn fermion_requires_finite_cutoff() {
        assert!(QftModel::new(1.0, vec![QftChannel::fermion(1.0, 0.25, f64::INFINITY, CutoffShape::Hard)]).is_err());
        assert!(QftModel::new(1.0, vec![QftChannel::fermion(1.0, 0.25, 0.5, CutoffShape::Hard)]).is_err());
        assert!(QftModel::new(1.0, vec![QftChannel::scalar(1.0, 0.6)]).is_err());
    }

    #[test]
    fn table_tracks_direct_evaluation() {
        let m = scalar();
        let table = m.tabulate(20.0).unwrap();
        for e in [0.5001, 0.61, 0.93, 1.0, 1.07, 2.3, 7.7, 19.1] {
            let direct = m.real_self_energy(e * e).unwrap();
            let scale = (e * e - 1.0).abs().max(0.1);
            assert!((table.eval(e) - direct).abs() < 1e-7 * scale, "E = {e}");
        }
    }

    #[test]
    fn scalar_has_no_bound_state() {
        assert!(scalar().find_poles().unwrap().is_empty());
    }

    #[test]
    fn channel_split() {
        let m = QftModel::new(1.0, vec![QftChannel::scalar(1.0, 0.25), QftChannel::scalar(0.5, 0.4)]).unwrap();
        let w = m.widths();
        let expect = 4.0 * (1.0 - 0.25f64).sqrt() / (1.0 - 0.64f64).sqrt();
        assert!((w[0] / w[1] - expect).abs() < 1e-12);
        assert_eq!(m.channel_imag_self_energy(1, 0.5).unwrap(), 0.0);
        assert!(m.channel_imag_self_energy(0, 0.5).unwrap() > 0.0);
    }
}
