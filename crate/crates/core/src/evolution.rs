//! Survival amplitude, decay densities and their split over decay channels.
//!
//! Per-channel densities use the exact Lee-model identity
//! `h_i(t) = 2 Im[a(t) · conj(A_i(t))]` with
//! `A_i(t) = -i ∫_0^t K_i(t - t′) a(t′) dt′` and the memory kernel
//! `K_i(τ) = -(1/π) ∫ Im Σ_i(E) e^{-iEτ} dE`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{DecayError, Result, ResultExt};
use crate::lee::{FormFactor, LeeModel};
use crate::numerics::{
    differentiate_central, integrate_adaptive_points, integrate_oscillatory_points, integrate_principal_value_points,
    integrate_semi_infinite, Derivative, MonotoneCubic, QuadratureConfig,
};
use crate::qft::QftModel;
use crate::spectral::SpectralFunction;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// `a(t) = ∫ d_S(E) e^{-iEt} dE + Σ Z e^{-iE_p t}`.
pub fn survival_amplitude(spectral: &SpectralFunction, t: f64, cfg: &QuadratureConfig) -> Result<Complex64> {
    spectral.amplitude(t, cfg).context(|| format!("survival amplitude at t = {t}"))
}

/// `p(t) = |a(t)|²`.
pub fn survival_probability(spectral: &SpectralFunction, t: f64, cfg: &QuadratureConfig) -> Result<f64> {
    Ok(survival_amplitude(spectral, t, cfg)?.norm_sqr())
}

/// `h(t) = -p′(t) = -2 Re[conj(a) a′]`.
///
/// A Breit–Wigner spectrum has no first moment, so its density comes from the
/// closed form `Γ e^{-Γt}`; any other spectrum with a divergent first moment
/// is refused.
pub fn decay_density(spectral: &SpectralFunction, t: f64, cfg: &QuadratureConfig) -> Result<f64> {
    if let Some(bw) = spectral.breit_wigner() {
        return Ok(bw.decay_density(t));
    }
    let a = survival_amplitude(spectral, t, cfg)?;
    let da = spectral
        .amplitude_derivative(t, cfg)
        .context(|| format!("amplitude derivative at t = {t}"))?;
    Ok(-2.0 * (a.conj() * da).re)
}

/// `-p′(t)` by central differences of `p`, for cross-checks.
pub fn decay_density_fd(spectral: &SpectralFunction, t: f64, step: f64, cfg: &QuadratureConfig) -> Result<Derivative> {
    if t < step {
        return Err(DecayError::InvalidArgument(format!("finite difference needs t >= step (t = {t}, step = {step})")));
    }
    let mut err = None;
    let d = differentiate_central(
        |s| match survival_probability(spectral, s, cfg) {
            Ok(p) => p,
            Err(e) => {
                err.get_or_insert(e);
                f64::NAN
            }
        },
        t,
        step,
    );
    match err {
        Some(e) => Err(e),
        None => Ok(Derivative {
            value: -d.value,
            error: d.error,
        }),
    }
}

/// `a`, `p` and `h` on a time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SurvivalSeries {
    pub times: Vec<f64>,
    pub amplitude: Vec<Complex64>,
    pub probability: Vec<f64>,
    pub decay_density: Vec<f64>,
}

fn check_times(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(DecayError::InvalidArgument("time grid is empty".into()));
    }
    if times.iter().any(|t| !(*t >= 0.0) || !t.is_finite()) {
        return Err(DecayError::InvalidArgument("times must be finite and >= 0".into()));
    }
    if times.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(DecayError::InvalidArgument("time grid must be strictly increasing".into()));
    }
    Ok(())
}

/// Evaluates the series in parallel over grid points.
pub fn survival_series(spectral: &SpectralFunction, times: &[f64], cfg: &QuadratureConfig) -> Result<SurvivalSeries> {
    check_times(times)?;
    let rows = times
        .par_iter()
        .map(|&t| {
            let a = survival_amplitude(spectral, t, cfg)?;
            let h = decay_density(spectral, t, cfg)?;
            Ok((a, h))
        })
        .collect::<Result<Vec<_>>>()?;
    let (amplitude, decay_density): (Vec<Complex64>, Vec<f64>) = rows.into_iter().unzip();
    Ok(SurvivalSeries {
        times: times.to_vec(),
        probability: amplitude.iter().map(|a| a.norm_sqr()).collect(),
        amplitude,
        decay_density,
    })
}

/// Window kernel `(g²/2π) ∫_{lo}^{hi} e^{-iEτ} dE` written through a sinc so
/// that `τ → 0` is exact.
fn window_kernel(g2: f64, lo: f64, hi: f64, tau: f64) -> Complex64 {
    let c = 0.5 * (lo + hi);
    let w = 0.5 * (hi - lo);
    let x = w * tau;
    let sinc = if x.abs() < 1e-4 { 1.0 - x * x / 6.0 } else { x.sin() / x };
    Complex64::from_polar(g2 / PI * w * sinc, -c * tau)
}

/// Memory kernel `K_i(τ) = -(1/π) ∫ Im Σ_i(E) e^{-iEτ} dE`, by oscillatory
/// quadrature. Flat channels have a delta-function kernel and are rejected.
pub fn channel_kernel(model: &LeeModel, channel: usize, tau: f64, cfg: &QuadratureConfig) -> Result<Complex64> {
    let c = model
        .channels()
        .get(channel)
        .ok_or_else(|| DecayError::InvalidArgument(format!("channel {channel} out of range")))?;
    let Some((lo, hi)) = c.energy_support() else {
        return Err(DecayError::InvalidArgument(
            "a flat channel has a memoryless delta kernel; use its width directly".into(),
        ));
    };
    let points: Vec<f64> = match &c.form_factor {
        FormFactor::Tabulated(t) => t.nodes().iter().map(|k| k + c.offset()).collect(),
        _ => Vec::new(),
    };
    let r = integrate_oscillatory_points(|e| -c.imag_self_energy(e) / PI, lo, hi, tau, &points, cfg)?;
    Ok(r.value)
}

/// Per-channel decay densities on a time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelDensities {
    pub times: Vec<f64>,
    /// `h_i(t_j)` indexed as `per_channel[i][j]`.
    pub per_channel: Vec<Vec<f64>>,
    /// `-p′(t_j)` from the survival amplitude.
    pub total: Vec<f64>,
    /// Estimated error of the extrapolated `h_i`, from two successive
    /// Richardson steps.
    pub convolution_error: f64,
    /// Largest sum-rule residual `|Σ_i h_i + p′|`.
    pub sum_rule_residual: f64,
    /// Largest flux assigned to the part of the kernels above the truncation
    /// energy (zero for Lee models, whose kernels are exact).
    pub tail_correction: f64,
}

impl ChannelDensities {
    /// `h_1/h_2` at grid index `j`, or `None` where `|h_2|` is at or below
    /// `1e-12 · max |h_2|`.
    pub fn ratio(&self, j: usize) -> Option<f64> {
        if self.per_channel.len() < 2 {
            return None;
        }
        let (h1, h2) = (&self.per_channel[0], &self.per_channel[1]);
        let floor = 1e-12 * h2.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        (h2[j].abs() > floor).then(|| h1[j] / h2[j])
    }

    pub fn ratios(&self) -> Vec<Option<f64>> {
        (0..self.times.len()).map(|j| self.ratio(j)).collect()
    }
}

/// `h_1(t)/h_2(t)` at the grid time nearest to `t`.
pub fn density_ratio(cd: &ChannelDensities, t: f64) -> Option<f64> {
    let j = cd
        .times
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1 - t).abs().total_cmp(&(b.1 - t).abs()))?
        .0;
    cd.ratio(j)
}

type KernelFn<'a> = Box<dyn Fn(f64) -> Result<Complex64> + Send + Sync + 'a>;

enum Kernel<'a> {
    /// `K = g² δ(τ)`, so `A = -i (g²/2) a`.
    Memoryless(f64),
    Sampled(KernelFn<'a>),
}

/// Largest `Δ` such that every time is an integer multiple of it.
fn grid_unit(times: &[f64]) -> Result<f64> {
    let t_max = times[times.len() - 1];
    if t_max == 0.0 {
        return Ok(1.0);
    }
    let mut gaps: Vec<f64> = times.windows(2).map(|w| w[1] - w[0]).collect();
    if times[0] > 0.0 {
        gaps.push(times[0]);
    }
    let unit = gaps.iter().copied().fold(f64::INFINITY, f64::min);
    let tol = 1e-9 * t_max.max(1.0);
    for &t in times {
        let q = t / unit;
        if (q - q.round()).abs() * unit > tol {
            return Err(DecayError::InvalidArgument(
                "channel densities need times on a uniform lattice starting at 0".into(),
            ));
        }
    }
    Ok(unit)
}

/// Trapezoidal `-i ∫_0^{t_n} K(t_n - t′) a(t′) dt′` on every `stride`-th node.
fn convolve(kernel: &[Complex64], amp: &[Complex64], n: usize, stride: usize, h: f64) -> Complex64 {
    if n == 0 {
        return Complex64::new(0.0, 0.0);
    }
    let m = n / stride;
    let mut acc = 0.5 * (kernel[n] * amp[0] + kernel[0] * amp[n]);
    for j in 1..m {
        let idx = j * stride;
        acc += kernel[n - idx] * amp[idx];
    }
    -I * acc * (h * stride as f64)
}

struct Inputs<'a> {
    spectral: &'a SpectralFunction,
    kernels: Vec<Kernel<'a>>,
    /// Rough width of the energy range carried by `a` and the kernels.
    energy_span: f64,
    width: f64,
}

fn partial_densities(input: Inputs<'_>, times: &[f64], cfg: &QuadratureConfig) -> Result<ChannelDensities> {
    check_times(times)?;
    let spectral = input.spectral;
    let total = times
        .par_iter()
        .map(|&t| decay_density(spectral, t, cfg))
        .collect::<Result<Vec<f64>>>()?;
    let h_scale = total.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);

    let needs_grid = input.kernels.iter().any(|k| matches!(k, Kernel::Sampled(_)));
    let mut per_channel = vec![vec![0.0; times.len()]; input.kernels.len()];
    let mut convolution_error = 0.0;

    if !needs_grid {
        let amps = times
            .par_iter()
            .map(|&t| survival_amplitude(spectral, t, cfg))
            .collect::<Result<Vec<_>>>()?;
        for (i, k) in input.kernels.iter().enumerate() {
            if let Kernel::Memoryless(g2) = k {
                for (j, a) in amps.iter().enumerate() {
                    per_channel[i][j] = g2 * a.norm_sqr();
                }
            }
        }
    } else {
        let unit = grid_unit(times)?;
        let t_max = times[times.len() - 1];
        let h_target = (PI / input.energy_span).min(if input.width > 0.0 { 0.1 / input.width } else { f64::INFINITY }) / 8.0;
        let mut k = (unit / (4.0 * h_target)).ceil().max(1.0) as usize;
        let tolerance = 1e-6 * h_scale;
        // cached samples on the finest grid so far, step `unit / (4k)`
        let mut amp: Vec<Complex64> = Vec::new();
        let mut kern: Vec<Vec<Complex64>> = vec![Vec::new(); input.kernels.len()];
        loop {
            let h = unit / (4 * k) as f64;
            let n_max = (t_max / h).round() as usize;
            let refine = |old: &[Complex64], f: &(dyn Fn(f64) -> Result<Complex64> + Sync)| -> Result<Vec<Complex64>> {
                (0..=n_max)
                    .into_par_iter()
                    .map(|j| if j % 2 == 0 && j / 2 < old.len() { Ok(old[j / 2]) } else { f(j as f64 * h) })
                    .collect()
            };
            amp = refine(&amp, &|t| survival_amplitude(spectral, t, cfg))?;
            for (i, kernel) in input.kernels.iter().enumerate() {
                if let Kernel::Sampled(f) = kernel {
                    kern[i] = refine(&kern[i], f.as_ref())?;
                }
            }

            let mut worst = 0.0f64;
            for (i, kernel) in input.kernels.iter().enumerate() {
                for (j, &t) in times.iter().enumerate() {
                    let n = (t / h).round() as usize;
                    let a = amp[n];
                    let big_a = match kernel {
                        Kernel::Memoryless(g2) => -I * 0.5 * g2 * a,
                        Kernel::Sampled(_) => {
                            let [fine, mid, coarse] = [1, 2, 4].map(|s| convolve(&kern[i], &amp, n, s, h));
                            let better = (4.0 * fine - mid) / 3.0;
                            let worse = (4.0 * mid - coarse) / 3.0;
                            worst = worst.max(2.0 * a.norm() * (better - worse).norm() / 15.0);
                            better
                        }
                    };
                    per_channel[i][j] = 2.0 * (a * big_a.conj()).im;
                }
            }
            convolution_error = worst;
            if worst <= tolerance {
                break;
            }
            if n_max > 1 << 17 {
                return Err(DecayError::GridTooCoarse { error: worst, tolerance });
            }
            k *= 2;
        }
    }

    let sum_rule_residual = (0..times.len())
        .map(|j| (per_channel.iter().map(|h| h[j]).sum::<f64>() - total[j]).abs())
        .fold(0.0, f64::max);
    Ok(ChannelDensities {
        times: times.to_vec(),
        per_channel,
        total,
        convolution_error,
        sum_rule_residual,
        tail_correction: 0.0,
    })
}

fn require_sum_rule(cd: ChannelDensities, relative: f64) -> Result<ChannelDensities> {
    let scale = cd.total.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let tolerance = relative * scale;
    if cd.sum_rule_residual > tolerance {
        return Err(DecayError::SumRuleViolated {
            residual: cd.sum_rule_residual,
            tolerance,
        });
    }
    Ok(cd)
}

/// `h_i(t)` for every channel of a Lee model on a uniform grid from 0.
///
/// The convolution step is refined until the extrapolation error estimate falls
/// below `1e-6 · max h`; the result must satisfy the sum rule
/// `|Σ h_i + p′| ≤ 1e-3 · max |p′|`.
pub fn partial_decay_densities(model: &LeeModel, times: &[f64], cfg: &QuadratureConfig) -> Result<ChannelDensities> {
    let spectral = model.spectral_function()?;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut flat = 0.0;
    let kernels = model
        .channels()
        .iter()
        .enumerate()
        .map(|(i, c)| match (&c.form_factor, c.energy_support()) {
            (FormFactor::ConstantOne, _) | (_, None) => {
                flat += c.g2();
                Kernel::Memoryless(c.g2())
            }
            (FormFactor::Window { .. }, Some((a, b))) => {
                lo = lo.min(a);
                hi = hi.max(b);
                let g2 = c.g2();
                Kernel::Sampled(Box::new(move |tau| Ok(window_kernel(g2, a, b, tau))))
            }
            (_, Some((a, b))) => {
                lo = lo.min(a);
                hi = hi.max(b);
                Kernel::Sampled(Box::new(move |tau| channel_kernel(model, i, tau, cfg)))
            }
        })
        .collect();
    if flat > 0.0 {
        lo = lo.min(model.mass() - 10.0 * flat);
        hi = hi.max(model.mass() + 10.0 * flat);
    }
    let width = model.golden_rule_width().total;
    let cd = partial_densities(
        Inputs {
            spectral: &spectral,
            kernels,
            energy_span: (hi - lo).max(f64::MIN_POSITIVE),
            width,
        },
        times,
        cfg,
    )
    .context(|| "per-channel decay densities".into())?;
    require_sum_rule(cd, 1e-3)
}

/// Effective coupling density of the Lee model that reproduces a given
/// spectral function: `ρ(E) = d_S(E) / |G(E)|²`, where
/// `G(E) = ∫ d_S(E′)/(E - E′ + i0) dE′` is the resolvent of `|S⟩`.
///
/// For a Lee model `ρ = g²f²/2π` summed over channels.
#[derive(Debug, Clone)]
pub struct EmbeddedDensity {
    re_g: MonotoneCubic,
}

impl EmbeddedDensity {
    /// Tabulates `Re G` on `nodes` inside the window of `spectral`.
    pub fn new(spectral: &SpectralFunction, nodes: Vec<f64>, cfg: &QuadratureConfig) -> Result<Self> {
        // poles of the PV kernel close to the window edges need deep refinement
        let cfg = QuadratureConfig {
            max_panels: cfg.max_panels.max(200_000),
            ..*cfg
        };
        let values = nodes
            .par_iter()
            .map(|&e| resolvent_real_part(spectral, e, &cfg))
            .collect::<Result<Vec<f64>>>()?;
        Ok(Self {
            re_g: MonotoneCubic::new(nodes, values)?,
        })
    }

    pub fn eval(&self, spectral: &SpectralFunction, e: f64) -> f64 {
        let d = spectral.density(e);
        if d == 0.0 {
            return 0.0;
        }
        let re = self.re_g.eval(e);
        d / (re * re + PI * PI * d * d)
    }
}

/// `Re G(E) = PV ∫ d_S(E′)/(E - E′) dE′ + Σ Z/(E - E_p)`.
pub fn resolvent_real_part(spectral: &SpectralFunction, e: f64, cfg: &QuadratureConfig) -> Result<f64> {
    let (lo, hi) = spectral.window();
    let d = spectral.density_fn();
    let points = spectral.breakpoints();
    let body = if e > lo && e < hi {
        -integrate_principal_value_points(|x| d(x), e, lo, hi, points, cfg)?.value
    } else {
        integrate_adaptive_points(|x| d(x) / (e - x), lo, hi, points, cfg)?.value
    };
    let mut total = body;
    let (lower, upper) = spectral.tails();
    if let Some(t) = upper {
        total += integrate_semi_infinite(|x| t.eval(x) / (e - x), hi, cfg)?.value;
    }
    if let Some(t) = lower {
        total += integrate_semi_infinite(|u| t.eval(lo - u) / (e - lo + u), 0.0, cfg)?.value;
    }
    total += spectral
        .poles()
        .iter()
        .filter(|p| p.weight > 0.0 && p.energy != e)
        .map(|p| p.weight / (e - p.energy))
        .sum::<f64>();
    Ok(total)
}

/// Energies for tabulating `Re G` on `[lo, hi]`: uniform in the bulk and
/// clustered geometrically towards the edges and breakpoints.
fn embedding_nodes(lo: f64, hi: f64, kinks: &[f64], bulk: usize) -> Vec<f64> {
    let span = hi - lo;
    let mut nodes: Vec<f64> = (0..=bulk).map(|i| lo + span * i as f64 / bulk as f64).collect();
    // deeper clustering buys nothing: the density within 1e-7 of an edge
    // carries no visible weight, and the PV kernel there is ill-conditioned
    for &k in kinks.iter().chain([lo, hi].iter()) {
        for j in 0..=48 {
            let d = span * 10f64.powf(-1.0 - j as f64 / 8.0);
            nodes.push(k - d);
            nodes.push(k + d);
        }
    }
    nodes.retain(|&e| e > lo && e < hi);
    nodes.sort_by(f64::total_cmp);
    nodes.dedup_by(|a, b| (*a - *b).abs() <= 1e-13 * span);
    nodes
}

/// Per-channel densities of a multi-channel QFT model.
///
/// The spectral function is embedded in a Lee model with coupling density
/// `ρ(E) = d_S/|G|²`, which is then shared among channels in proportion to
/// `Im Π_i(E²)`. The kernels are rolled off towards the window's upper end
/// `cut`. The flux carried by the omitted high-energy part, `-p′ - Σ_i h_i`,
/// is shared in the channel proportions at `cut` and reported as
/// `tail_correction`.
pub fn qft_partial_densities(model: &QftModel, times: &[f64], cut: f64, cfg: &QuadratureConfig) -> Result<ChannelDensities> {
    let spectral = model.spectral_function(cut)?;
    let (lo, hi) = spectral.window();
    let kinks: Vec<f64> = spectral.breakpoints().to_vec();
    let embedding = EmbeddedDensity::new(&spectral, embedding_nodes(lo, hi, &kinks, 4000), cfg)
        .context(|| "embedding the QFT spectrum in a Lee model".into())?;
    // cos² roll-off over the upper half of the window instead of a hard cut,
    // which would ring as e^{-iE_K τ}/τ in the kernels
    let taper = move |e: f64| {
        let start = 0.5 * (lo + hi);
        if e <= start {
            1.0
        } else {
            (0.5 * PI * (e - start) / (hi - start)).cos().powi(2)
        }
    };
    let kernels = (0..model.channels().len())
        .map(|i| {
            let (spectral, embedding, kinks) = (&spectral, &embedding, &kinks);
            let f: KernelFn<'_> = Box::new(move |tau| {
                let r = integrate_oscillatory_points(
                    |e| {
                        let s = e * e;
                        let im = model.imag_self_energy(s);
                        if im == 0.0 {
                            return 0.0;
                        }
                        embedding.eval(spectral, e) * model.channels()[i].imag_self_energy(s) / im * taper(e)
                    },
                    lo,
                    hi,
                    tau,
                    kinks,
                    cfg,
                )?;
                Ok(r.value)
            });
            Kernel::Sampled(f)
        })
        .collect();
    let mut cd = partial_densities(
        Inputs {
            spectral: &spectral,
            kernels,
            energy_span: hi - lo,
            width: model.width(),
        },
        times,
        cfg,
    )
    .context(|| "QFT per-channel decay densities".into())?;

    let s_top = (hi * (1.0 - 1e-9)).powi(2);
    let im_top = model.imag_self_energy(s_top);
    let shares: Vec<f64> = model
        .channels()
        .iter()
        .map(|c| if im_top > 0.0 { c.imag_self_energy(s_top) / im_top } else { 0.0 })
        .collect();
    let mut tail = 0.0f64;
    let mut residual = 0.0f64;
    for j in 0..times.len() {
        let missing = cd.total[j] - cd.per_channel.iter().map(|h| h[j]).sum::<f64>();
        tail = tail.max(missing.abs());
        for (h, share) in cd.per_channel.iter_mut().zip(&shares) {
            h[j] += share * missing;
        }
        residual = residual.max((cd.per_channel.iter().map(|h| h[j]).sum::<f64>() - cd.total[j]).abs());
    }
    cd.tail_correction = tail;
    cd.sum_rule_residual = residual;
    Ok(cd)
}
