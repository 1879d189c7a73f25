//! Brute-force check of the continuum machinery: the Lee Hamiltonian is put
//! on a finite uniform `k` grid and evolved exactly through its eigenpairs.
//!
//! The matrix has arrowhead form (the discrete state couples to every mode,
//! modes do not couple to each other), so its eigenvalues are the roots of the
//! secular equation `λ - M - Σ_n c_n²/(λ - d_n) = 0`, one per gap between
//! distinct mode energies. A dense symmetric solver is available as a
//! cross-check on small grids.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{DecayError, Result};
use crate::evolution::survival_probability;
use crate::lee::{FormFactor, LeeModel};
use crate::numerics::{integrate_adaptive_points, QuadratureConfig};
use crate::spectral::SpectralFunction;

/// One grid mode `|k_n, i⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mode {
    pub channel: usize,
    pub k: f64,
    pub energy: f64,
    /// Matrix element `⟨k_n, i|H|S⟩`.
    pub coupling: f64,
}

/// The Lee Hamiltonian restricted to `N` cells of width `δk` per channel.
///
/// Couplings are cell averages, `c_n² = (g²/2π) ∫_cell f²(k) dk`, which equal
/// `g² f²(k_n) δk/2π` wherever `f` is smooth across the cell and keep the
/// weight of cells cut by a window edge exact.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscretizedModel {
    mass: f64,
    channels: usize,
    n: usize,
    k_range: (f64, f64),
    dk: f64,
    modes: Vec<Mode>,
}

pub fn discretize(model: &LeeModel, n: usize, k_range: (f64, f64)) -> Result<DiscretizedModel> {
    DiscretizedModel::new(model, n, k_range)
}

impl DiscretizedModel {
    pub fn new(model: &LeeModel, n: usize, (k_lo, k_hi): (f64, f64)) -> Result<Self> {
        if n == 0 {
            return Err(DecayError::InvalidArgument("need at least one mode per channel".into()));
        }
        if !(k_lo < k_hi) || !k_lo.is_finite() || !k_hi.is_finite() {
            return Err(DecayError::InvalidInterval { a: k_lo, b: k_hi });
        }
        let dk = (k_hi - k_lo) / n as f64;
        let quad = QuadratureConfig::default().with_tolerances(1e-14, 1e-12);
        let mut modes = Vec::with_capacity(n * model.channels().len());
        for (i, ch) in model.channels().iter().enumerate() {
            let (s_lo, s_hi) = match &ch.form_factor {
                FormFactor::ConstantOne => (f64::NEG_INFINITY, f64::INFINITY),
                FormFactor::Window { e0, lambda } => (*e0, *lambda),
                FormFactor::Tabulated(t) => (t.nodes()[0], t.nodes()[t.nodes().len() - 1]),
            };
            if ch.g2() > 0.0 && (s_lo < k_lo || s_hi > k_hi) {
                return Err(DecayError::RangeDoesNotCoverSupport {
                    lo: k_lo,
                    hi: k_hi,
                    support_lo: s_lo,
                    support_hi: s_hi,
                });
            }
            for j in 0..n {
                let a = k_lo + dk * j as f64;
                let b = if j + 1 == n { k_hi } else { k_lo + dk * (j + 1) as f64 };
                let k = 0.5 * (a + b);
                let weight = match &ch.form_factor {
                    FormFactor::ConstantOne => b - a,
                    FormFactor::Window { e0, lambda } => (b.min(*lambda) - a.max(*e0)).max(0.0),
                    FormFactor::Tabulated(t) => {
                        let f = |x: f64| t.eval(x).powi(2);
                        integrate_adaptive_points(f, a, b, t.nodes(), &quad)?.value
                    }
                };
                modes.push(Mode {
                    channel: i,
                    k,
                    energy: k + ch.offset(),
                    coupling: (ch.g2() * weight / (2.0 * std::f64::consts::PI)).sqrt(),
                });
            }
        }
        Ok(Self {
            mass: model.mass(),
            channels: model.channels().len(),
            n,
            k_range: (k_lo, k_hi),
            dk,
            modes,
        })
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn modes_per_channel(&self) -> usize {
        self.n
    }

    pub fn k_range(&self) -> (f64, f64) {
        self.k_range
    }

    pub fn spacing(&self) -> f64 {
        self.dk
    }

    /// Matrix size `1 + Σ_i N`.
    pub fn dimension(&self) -> usize {
        1 + self.modes.len()
    }

    /// Revival time `2π/δk` of the finite model.
    pub fn recurrence_time(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.dk
    }

    /// Largest time that may be compared against the continuum.
    pub fn comparison_window(&self, requested: f64) -> f64 {
        requested.min(0.2 * self.recurrence_time())
    }

    /// The Hamiltonian in the basis `(|S⟩, |k_0, 0⟩, ..., |k_{N-1}, n_ch-1⟩)`.
    pub fn matrix(&self) -> DMatrix<f64> {
        let d = self.dimension();
        let mut h = DMatrix::zeros(d, d);
        h[(0, 0)] = self.mass;
        for (j, m) in self.modes.iter().enumerate() {
            h[(j + 1, j + 1)] = m.energy;
            h[(0, j + 1)] = m.coupling;
            h[(j + 1, 0)] = m.coupling;
        }
        h
    }

    /// Eigenpairs from the secular equation.
    pub fn eigensolve(&self) -> Result<Eigensystem> {
        Secular::solve(self).map(|s| Eigensystem {
            channels: self.channels,
            modes: self.modes.clone(),
            repr: Repr::Secular(s),
        })
    }

    /// Eigenpairs from a dense symmetric eigensolver. Cost grows as the cube of
    /// [`dimension`](Self::dimension).
    pub fn eigensolve_dense(&self) -> Result<Eigensystem> {
        let eig = SymmetricEigen::try_new(self.matrix(), f64::EPSILON, 10_000)
            .ok_or_else(|| DecayError::Eigensolver(format!("no convergence for dimension {}", self.dimension())))?;
        Ok(Eigensystem {
            channels: self.channels,
            modes: self.modes.clone(),
            repr: Repr::Dense {
                values: eig.eigenvalues.iter().copied().collect(),
                vectors: eig.eigenvectors,
            },
        })
    }
}

/// Modes sharing one energy act as a single bright mode with coupling
/// `sqrt(Σ c²)`; the orthogonal combinations never leave zero amplitude.
#[derive(Debug, Clone)]
struct Bright {
    energy: f64,
    c2: f64,
    members: Vec<usize>,
}

/// Eigenvalue `λ = d[base] + mu`, stored relative to the nearest mode energy
/// so that `λ - d_n` keeps full precision.
#[derive(Debug, Clone, Copy)]
struct Root {
    base: Option<usize>,
    mu: f64,
    weight: f64,
}

#[derive(Debug, Clone)]
struct Secular {
    mass: f64,
    bright: Vec<Bright>,
    roots: Vec<Root>,
}

impl Secular {
    fn solve(dm: &DiscretizedModel) -> Result<Self> {
        let mut order: Vec<usize> = (0..dm.modes.len()).filter(|&j| dm.modes[j].coupling > 0.0).collect();
        order.sort_by(|&a, &b| dm.modes[a].energy.total_cmp(&dm.modes[b].energy));
        let mut bright: Vec<Bright> = Vec::new();
        for j in order {
            let m = dm.modes[j];
            match bright.last_mut() {
                // energies that differ only by rounding of k + offset are merged
                Some(b) if (m.energy - b.energy).abs() <= 1e-12 * b.energy.abs().max(1.0) => {
                    b.c2 += m.coupling * m.coupling;
                    b.members.push(j);
                }
                _ => bright.push(Bright {
                    energy: m.energy,
                    c2: m.coupling * m.coupling,
                    members: vec![j],
                }),
            }
        }

        let mut s = Self {
            mass: dm.mass,
            bright,
            roots: Vec::new(),
        };
        let k = s.bright.len();
        if k == 0 {
            s.roots.push(Root {
                base: None,
                mu: dm.mass,
                weight: 1.0,
            });
            return Ok(s);
        }
        let reach = s.bright.iter().map(|b| b.c2).sum::<f64>().sqrt() + 1.0;
        let d0 = s.bright[0].energy;
        let dl = s.bright[k - 1].energy;
        let mut brackets = Vec::with_capacity(k + 1);
        brackets.push((0, d0.min(dm.mass) - reach - d0, 0.0));
        for j in 0..k - 1 {
            let gap = s.bright[j + 1].energy - s.bright[j].energy;
            if s.secular(j, 0.5 * gap) >= 0.0 {
                brackets.push((j, 0.0, 0.5 * gap));
            } else {
                brackets.push((j + 1, -0.5 * gap, 0.0));
            }
        }
        brackets.push((k - 1, 0.0, dl.max(dm.mass) + reach - dl));

        let roots: Vec<Root> = brackets
            .par_iter()
            .map(|&(base, lo, hi)| {
                let mu = s.bisect(base, lo, hi);
                Root {
                    base: Some(base),
                    mu,
                    weight: s.weight(base, mu),
                }
            })
            .collect();
        if roots.iter().any(|r| !r.mu.is_finite() || !r.weight.is_finite()) {
            return Err(DecayError::Eigensolver("secular equation produced a non-finite root".into()));
        }
        s.roots = roots;
        Ok(s)
    }

    fn diff(&self, base: usize, mu: f64, n: usize) -> f64 {
        (self.bright[base].energy - self.bright[n].energy) + mu
    }

    fn secular(&self, base: usize, mu: f64) -> f64 {
        let sum: f64 = (0..self.bright.len()).map(|n| self.bright[n].c2 / self.diff(base, mu, n)).sum();
        (self.bright[base].energy - self.mass) + mu - sum
    }

    fn weight(&self, base: usize, mu: f64) -> f64 {
        let sum: f64 = (0..self.bright.len())
            .map(|n| self.bright[n].c2 / self.diff(base, mu, n).powi(2))
            .sum();
        1.0 / (1.0 + sum)
    }

    /// The secular function increases between its poles; open ends at a mode
    /// energy are never evaluated.
    fn bisect(&self, base: usize, mut lo: f64, mut hi: f64) -> f64 {
        for _ in 0..400 {
            let mid = 0.5 * (lo + hi);
            if mid == lo || mid == hi {
                break;
            }
            if self.secular(base, mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        // the end next to the pole is excluded
        if lo == 0.0 {
            hi
        } else if hi == 0.0 {
            lo
        } else {
            0.5 * (lo + hi)
        }
    }

    fn eigenvalue(&self, r: &Root) -> f64 {
        match r.base {
            Some(b) => self.bright[b].energy + r.mu,
            None => r.mu,
        }
    }
}

#[derive(Debug, Clone)]
enum Repr {
    Secular(Secular),
    Dense { values: Vec<f64>, vectors: DMatrix<f64> },
}

/// Amplitudes of the evolved state `e^{-iHt}|S⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateAmplitudes {
    /// `⟨S|e^{-iHt}|S⟩`.
    pub survival: Complex64,
    /// One entry per [`Mode`], in the order of [`DiscretizedModel::modes`].
    pub modes: Vec<Complex64>,
}

impl StateAmplitudes {
    /// `|a|² + Σ|ψ_n|²`.
    pub fn norm(&self) -> f64 {
        self.survival.norm_sqr() + self.modes.iter().map(|z| z.norm_sqr()).sum::<f64>()
    }
}

/// Eigendecomposition of a [`DiscretizedModel`].
#[derive(Debug, Clone)]
pub struct Eigensystem {
    channels: usize,
    modes: Vec<Mode>,
    repr: Repr,
}

impl Eigensystem {
    /// All eigenvalues in increasing order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut v = match &self.repr {
            Repr::Dense { values, .. } => values.clone(),
            Repr::Secular(s) => {
                let mut v: Vec<f64> = s.roots.iter().map(|r| s.eigenvalue(r)).collect();
                for b in &s.bright {
                    v.extend(std::iter::repeat(b.energy).take(b.members.len() - 1));
                }
                v.extend(self.modes.iter().filter(|m| m.coupling == 0.0).map(|m| m.energy));
                v
            }
        };
        v.sort_by(f64::total_cmp);
        v
    }

    /// Eigenvalues with their overlap `|⟨S|λ⟩|²`, for eigenstates that overlap
    /// the discrete state.
    pub fn overlaps(&self) -> Vec<(f64, f64)> {
        match &self.repr {
            Repr::Secular(s) => s.roots.iter().map(|r| (s.eigenvalue(r), r.weight)).collect(),
            Repr::Dense { values, vectors } => values
                .iter()
                .enumerate()
                .map(|(j, &l)| (l, vectors[(0, j)].powi(2)))
                .filter(|&(_, w)| w > 0.0)
                .collect(),
        }
    }

    /// `a(t) = Σ_λ |⟨S|λ⟩|² e^{-iλt}`.
    pub fn survival_amplitude(&self, t: f64) -> Complex64 {
        self.overlaps()
            .iter()
            .map(|&(l, w)| w * Complex64::new(0.0, -l * t).exp())
            .sum()
    }

    pub fn survival_probability(&self, t: f64) -> f64 {
        self.survival_amplitude(t).norm_sqr()
    }

    /// The full evolved state at time `t`.
    pub fn evolve(&self, t: f64) -> StateAmplitudes {
        match &self.repr {
            Repr::Dense { values, vectors } => {
                let phases: Vec<Complex64> = values
                    .iter()
                    .enumerate()
                    .map(|(j, &l)| vectors[(0, j)] * Complex64::new(0.0, -l * t).exp())
                    .collect();
                let amp = |row: usize| -> Complex64 { (0..values.len()).map(|j| vectors[(row, j)] * phases[j]).sum() };
                StateAmplitudes {
                    survival: amp(0),
                    modes: (0..self.modes.len()).into_par_iter().map(|j| amp(j + 1)).collect(),
                }
            }
            Repr::Secular(s) => {
                // ψ_n = c_n Σ_λ w_λ e^{-iλt} / (λ - d_n)
                let phases: Vec<Complex64> = s
                    .roots
                    .iter()
                    .map(|r| r.weight * Complex64::new(0.0, -s.eigenvalue(r) * t).exp())
                    .collect();
                let per_bright: Vec<Complex64> = (0..s.bright.len())
                    .into_par_iter()
                    .map(|n| {
                        s.roots
                            .iter()
                            .zip(&phases)
                            .map(|(r, p)| match r.base {
                                Some(b) => p / s.diff(b, r.mu, n),
                                None => Complex64::new(0.0, 0.0),
                            })
                            .sum()
                    })
                    .collect();
                let mut modes = vec![Complex64::new(0.0, 0.0); self.modes.len()];
                for (b, sum) in s.bright.iter().zip(&per_bright) {
                    for &j in &b.members {
                        modes[j] = self.modes[j].coupling * sum;
                    }
                }
                StateAmplitudes {
                    survival: phases.iter().sum(),
                    modes,
                }
            }
        }
    }

    /// `w_i(t) = Σ_{n ∈ channel i} |⟨k_n, i|e^{-iHt}|S⟩|²`.
    pub fn channel_occupations(&self, t: f64) -> Vec<f64> {
        occupations(self.channels, &self.modes, &self.evolve(t))
    }

    /// `h_i(t) = dw_i/dt` by central differences with the given step.
    pub fn channel_densities(&self, t: f64, step: f64) -> Vec<f64> {
        let up = self.channel_occupations(t + step);
        let down = self.channel_occupations(t - step);
        up.iter().zip(&down).map(|(u, d)| (u - d) / (2.0 * step)).collect()
    }
}

fn occupations(channels: usize, modes: &[Mode], state: &StateAmplitudes) -> Vec<f64> {
    let mut w = vec![0.0; channels];
    for (m, z) in modes.iter().zip(&state.modes) {
        w[m.channel] += z.norm_sqr();
    }
    w
}

/// `e^{-iHt}|S⟩` for a discretized model; see [`Eigensystem::evolve`].
pub fn evolve_exact(es: &Eigensystem, t: f64) -> StateAmplitudes {
    es.evolve(t)
}

pub fn channel_occupations(es: &Eigensystem, t: f64) -> Vec<f64> {
    es.channel_occupations(t)
}

/// Outcome of comparing oracle and continuum survival probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub modes_per_channel: usize,
    pub k_range: (f64, f64),
    pub dimension: usize,
    pub recurrence_time: f64,
    /// Upper end of the compared window after the recurrence cap.
    pub t_max: f64,
    pub compared: usize,
    pub max_abs_dp: f64,
    pub worst_t: f64,
    /// Largest `|1 - |a|² - Σ_n |ψ_n|²|` seen at the compared times.
    pub unitarity_defect: f64,
}

/// Compares `p(t)` from the finite model with the continuum result at the
/// given times, dropping those beyond the recurrence cap.
pub fn compare_survival(
    dm: &DiscretizedModel,
    es: &Eigensystem,
    spectral: &SpectralFunction,
    times: &[f64],
    cfg: &QuadratureConfig,
) -> Result<OracleReport> {
    let t_cap = dm.comparison_window(f64::INFINITY);
    let kept: Vec<f64> = times.iter().copied().filter(|&t| t <= t_cap).collect();
    let rows = kept
        .par_iter()
        .map(|&t| {
            let p = survival_probability(spectral, t, cfg)?;
            let state = es.evolve(t);
            Ok((t, (state.survival.norm_sqr() - p).abs(), (1.0 - state.norm()).abs()))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut report = OracleReport {
        modes_per_channel: dm.modes_per_channel(),
        k_range: dm.k_range(),
        dimension: dm.dimension(),
        recurrence_time: dm.recurrence_time(),
        t_max: kept.last().copied().unwrap_or(0.0),
        compared: kept.len(),
        max_abs_dp: 0.0,
        worst_t: f64::NAN,
        unitarity_defect: 0.0,
    };
    for (t, dp, defect) in rows {
        if !(dp <= report.max_abs_dp) {
            report.max_abs_dp = dp;
            report.worst_t = t;
        }
        report.unitarity_defect = report.unitarity_defect.max(defect);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lee::ChannelSpec;

    fn fig1() -> LeeModel {
        LeeModel::new(2.0, vec![ChannelSpec::window(0.36, 0.0, 5.0).unwrap()]).unwrap()
    }

    #[test]
    fn decoupled_model_is_diagonal() {
        let m = LeeModel::new(2.0, vec![ChannelSpec::window(0.0, 0.0, 5.0).unwrap()]).unwrap();
        let dm = discretize(&m, 5, (0.0, 5.0)).unwrap();
        let ev = dm.eigensolve().unwrap().eigenvalues();
        assert_eq!(ev, vec![0.5, 1.5, 2.0, 2.5, 3.5, 4.5]);
        assert_eq!(dm.eigensolve().unwrap().survival_amplitude(1.0), Complex64::new(0.0, -2.0).exp());
    }

    #[test]
    fn single_mode_rabi() {
        let m = LeeModel::new(2.0, vec![ChannelSpec::window(0.5, 0.0, 5.0).unwrap()]).unwrap();
        let dm = discretize(&m, 1, (0.0, 5.0)).unwrap();
        let kappa = dm.modes()[0].coupling;
        let delta = 2.5 - 2.0;
        let es = dm.eigensolve().unwrap();
        for t in [0.0, 0.3, 1.7, 12.0] {
            let om = (0.25 * delta * delta + kappa * kappa).sqrt();
            let want = 1.0 - 4.0 * kappa * kappa / (delta * delta + 4.0 * kappa * kappa) * (om * t).sin().powi(2);
            assert!((es.survival_probability(t) - want).abs() < 1e-13, "t = {t}");
        }
    }

    #[test]
    fn secular_matches_dense() {
        let m = LeeModel::new(
            2.0,
            vec![
                ChannelSpec::window(0.36, 0.0, 5.0).unwrap(),
                ChannelSpec::window(0.16, 0.5, 5.0).unwrap(),
            ],
        )
        .unwrap();
        let dm = discretize(&m, 60, (-1.0, 6.0)).unwrap();
        let a = dm.eigensolve().unwrap();
        let b = dm.eigensolve_dense().unwrap();
        for (x, y) in a.eigenvalues().iter().zip(b.eigenvalues()) {
            assert!((x - y).abs() < 1e-12, "{x} vs {y}");
        }
        for t in [0.0, 1.0, 4.5] {
            let sa = a.evolve(t);
            let sb = b.evolve(t);
            assert!((sa.survival - sb.survival).norm() < 1e-12);
            let wa = occupations(2, dm.modes(), &sa);
            let wb = occupations(2, dm.modes(), &sb);
            for i in 0..2 {
                assert!((wa[i] - wb[i]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn unitarity_and_start() {
        let dm = discretize(&fig1(), 400, (-1.0, 6.0)).unwrap();
        let es = dm.eigensolve().unwrap();
        let s0 = es.evolve(0.0);
        assert!((s0.survival - 1.0).norm() < 1e-12);
        assert!(es.channel_occupations(0.0)[0] < 1e-24);
        for t in [0.5, 7.0, 50.0] {
            assert!((es.evolve(t).norm() - 1.0).abs() < 1e-10, "t = {t}");
        }
    }

    #[test]
    fn uncovered_support_is_rejected() {
        assert!(matches!(
            discretize(&fig1(), 10, (1.0, 6.0)),
            Err(DecayError::RangeDoesNotCoverSupport { .. })
        ));
        let bw = LeeModel::new(2.0, vec![ChannelSpec::breit_wigner(0.36).unwrap()]).unwrap();
        assert!(discretize(&bw, 10, (-100.0, 100.0)).is_err());
    }

    #[test]
    fn recurrence_cap() {
        let dm = discretize(&fig1(), 700, (-1.0, 6.0)).unwrap();
        let rec = 2.0 * std::f64::consts::PI / 0.01;
        assert!((dm.recurrence_time() - rec).abs() < 1e-9);
        assert_eq!(dm.comparison_window(10.0), 10.0);
        assert!((dm.comparison_window(1e6) - rec / 5.0).abs() < 1e-9);
    }
}
