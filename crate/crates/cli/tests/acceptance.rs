//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any criterion fails.

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use decaylab::emission::{emitted_probability, linewidth};
use decaylab::evolution::{decay_density, partial_decay_densities, survival_probability, survival_series};
use decaylab::{
    discretize, BreitWigner, ChannelSpec, CutoffShape, LeeModel, QftChannel, QftModel, QuadratureConfig,
    SpectralFunction,
};


/// Accuracy target for `p(t)` and `h(t)` from the continuum machinery.
const NUM_TOL: f64 = 1e-6;
/// Accuracy target for channel ratios.
const RATIO_TOL: f64 = 1e-3;

type Outcome = Result<String, String>;

fn check(cond: bool, detail: String) -> Outcome {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn fig1() -> LeeModel {
    LeeModel::new(2.0, vec![ChannelSpec::window(0.36, 0.0, 5.0).unwrap()]).unwrap()
}

fn fig2() -> LeeModel {
    LeeModel::new(
        2.0,
        vec![
            ChannelSpec::window(0.36, 0.0, 5.0).unwrap(),
            ChannelSpec::window(0.16, 0.5, 5.0).unwrap(),
        ],
    )
    .unwrap()
}

fn grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|j| a + (b - a) * j as f64 / (n - 1) as f64).collect()
}

/// Least-squares slope of `ln y` against `ln x`.
fn log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let num: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    num / den
}

fn bw_exponential() -> Outcome {
    let cfg = QuadratureConfig::default();
    let gamma = 0.36;
    let model = LeeModel::new(2.0, vec![ChannelSpec::breit_wigner(gamma).map_err(err)?]).map_err(err)?;
    let rule = model.golden_rule_width().total;
    let bw = BreitWigner::new(2.0, rule).map_err(err)?;
    let s = model.spectral_function().map_err(err)?;
    let mut closed: f64 = 0.0;
    let mut numeric: f64 = 0.0;
    for t in grid(0.0, 10.0 / gamma, 201) {
        let exact = (-gamma * t).exp();
        closed = closed.max((bw.survival_probability(t) - exact).abs());
        closed = closed.max((decay_density(&s, t, &cfg).map_err(err)? - gamma * exact).abs());
        // p from the Fourier integral of the Lorentzian and its tails
        numeric = numeric.max((survival_probability(&s, t, &cfg).map_err(err)? - exact).abs());
    }
    check(
        (rule - gamma).abs() < 1e-15 && closed <= 1e-6 && numeric <= 1e-3,
        format!("Γ = {rule}, closed form {closed:.1e}, Fourier {numeric:.1e}"),
    )
}

fn normalization() -> Outcome {
    let cfg = QuadratureConfig::default();
    let mut lee_worst: f64 = 0.0;
    for model in [
        fig1(),
        fig2(),
        LeeModel::new(1.0, vec![ChannelSpec::window(2.0, 0.0, 5.0).unwrap()]).unwrap(),
        LeeModel::new(4.8, vec![ChannelSpec::window(0.5, 0.0, 5.0).unwrap()]).unwrap(),
    ] {
        let n = model.spectral_function().and_then(|s| s.total_weight(&cfg)).map_err(err)?;
        lee_worst = lee_worst.max((n - 1.0).abs());
    }
    let scalar = QftModel::new(1.0, vec![QftChannel::scalar_with_width(1.0, 0.25, 0.1).map_err(err)?]).map_err(err)?;
    let ns = scalar
        .spectral_function(scalar.default_cut())
        .and_then(|s| s.total_weight(&cfg))
        .map_err(err)?;
    let fermion = QftModel::new(
        1.0,
        vec![QftChannel::fermion_with_width(1.0, 0.25, 10.0, CutoffShape::Hard, 0.1).map_err(err)?],
    )
    .map_err(err)?;
    let nf = fermion.spectral_function(10.0).and_then(|s| s.total_weight(&cfg)).map_err(err)?;
    let rejected = QftModel::new(1.0, vec![QftChannel::fermion(0.5, 0.25, f64::INFINITY, CutoffShape::Hard)]).is_err();
    check(
        lee_worst <= 1e-6 && (ns - 1.0).abs() <= 1e-4 && (nf - 1.0).abs() <= 1e-4 && rejected,
        format!(
            "Lee {lee_worst:.1e}, scalar {:.1e}, fermion {:.1e}, fermion without cutoff rejected: {rejected}",
            (ns - 1.0).abs(),
            (nf - 1.0).abs()
        ),
    )
}

fn short_time() -> Outcome {
    let s = fig1().spectral_function().map_err(err)?;
    let cfg = QuadratureConfig::default().with_tolerances(1e-14, 1e-13);
    let h0 = decay_density(&s, 0.0, &cfg).map_err(err)?;
    let ts: Vec<f64> = (0..8).map(|j| 2e-3 * 10f64.powf(j as f64 / 7.0)).collect();
    let qs = ts
        .iter()
        .map(|&t| survival_probability(&s, t, &cfg).map(|p| 1.0 - p))
        .collect::<Result<Vec<_>, _>>()
        .map_err(err)?;
    let slope = log_slope(&ts, &qs);
    check(
        h0.abs() <= 1e-6 && (slope - 2.0).abs() <= 0.05,
        format!("h(0) = {h0:.1e}, slope {slope:.4} on t in [2e-3, 2e-2]"),
    )
}

fn fig1_reproduction() -> Outcome {
    let cfg = QuadratureConfig::default();
    let model = fig1();
    let gamma = model.golden_rule_width().total;
    let s = model.spectral_function().map_err(err)?;
    let times = grid(0.0, 25.0, 501);
    let series = survival_series(&s, &times, &cfg).map_err(err)?;
    let (mut dp, mut dh): (f64, f64) = (0.0, 0.0);
    for (j, &t) in times.iter().enumerate().filter(|(_, &t)| t <= 2.0) {
        dp = dp.max((series.probability[j] - (-gamma * t).exp()).abs());
        dh = dh.max((series.decay_density[j] - gamma * (-gamma * t).exp()).abs());
    }

    let start = Instant::now();
    let dm = discretize(&model, 4000, (-1.0, 6.0)).map_err(err)?;
    let es = dm.eigensolve().map_err(err)?;
    let solve = start.elapsed().as_secs_f64();
    let mut oracle: f64 = 0.0;
    for (j, &t) in times.iter().enumerate().filter(|(_, &t)| t <= 10.0) {
        oracle = oracle.max((es.survival_probability(t) - series.probability[j]).abs());
    }
    check(
        dp > 5.0 * NUM_TOL && dh > 5.0 * NUM_TOL && oracle <= 1e-3 && solve < 120.0,
        format!("max |p - e^-Γt| = {dp:.3}, max |h - Γe^-Γt| = {dh:.3} (t <= 2); oracle |Δp| = {oracle:.1e}, eigensolve {solve:.1}s"),
    )
}

fn two_channels() -> Outcome {
    let cfg = QuadratureConfig::default();
    let times: Vec<f64> = (0..=250).map(|j| 0.1 * j as f64).collect();

    let bw = LeeModel::new(
        2.0,
        vec![ChannelSpec::breit_wigner(0.36).unwrap(), ChannelSpec::breit_wigner(0.16).unwrap()],
    )
    .map_err(err)?;
    let cb = partial_decay_densities(&bw, &times, &cfg).map_err(err)?;
    let bw_dev = (1..times.len())
        .filter_map(|j| cb.ratio(j))
        .fold(0.0f64, |a, r| a.max((r - 2.25).abs()));

    let model = fig2();
    let cd = partial_decay_densities(&model, &times, &cfg).map_err(err)?;
    let h_scale = cd.total.iter().fold(0.0f64, |a, h| a.max(h.abs()));
    let sum_rule = cd.sum_rule_residual / h_scale;
    let swing = (1..times.len())
        .filter_map(|j| cd.ratio(j))
        .fold(0.0f64, |a, r| a.max((r - 2.25).abs()));

    let es = discretize(&model, 4000, (-1.0, 6.0))
        .and_then(|dm| dm.eigensolve())
        .map_err(err)?;
    let mut worst: f64 = 0.0;
    let mut worst_t = 0.0;
    for j in 1..times.len() {
        let Some(r) = cd.ratio(j) else { continue };
        let h = es.channel_densities(times[j], 1e-3);
        let rel = (h[0] / h[1] / r - 1.0).abs();
        if rel > worst {
            worst = rel;
            worst_t = times[j];
        }
    }
    check(
        bw_dev <= 1e-3 && swing > 10.0 * RATIO_TOL && worst <= 0.02 && sum_rule <= 1e-3,
        format!(
            "BW ratio off by {bw_dev:.1e}; max |r - 2.25| = {swing:.2}; oracle ratio within {:.2}% (worst at t = {worst_t}); sum rule {sum_rule:.1e}",
            100.0 * worst
        ),
    )
}

fn emission() -> Outcome {
    let cfg = QuadratureConfig::default();
    let (m, g) = (2.0, 0.36);
    let late = linewidth(m, g, 100.0 / g).map_err(err)? / g;
    let mut short = Vec::new();
    for tg in [0.2, 0.5] {
        short.push(linewidth(m, g, tg / g).map_err(err)? * tg / g);
    }
    let mut weight: f64 = 0.0;
    for tg in [0.5, 1.0, 5.0] {
        let w = emitted_probability(g, tg / g, &cfg).map_err(err)?;
        weight = weight.max((w - (1.0 - (-tg as f64).exp())).abs());
    }
    check(
        (late - 1.0).abs() <= 0.01 && short.iter().all(|x| (x / 5.56 - 1.0).abs() <= 0.05) && weight <= 1e-6,
        format!(
            "δω(100/Γ)/Γ = {late:.4}; δω·t = {:.3}, {:.3} at 0.2/Γ, 0.5/Γ; ∫η off by {weight:.1e}",
            short[0], short[1]
        ),
    )
}

fn qft_tails() -> Outcome {
    let energies = |a: f64, b: f64| -> Vec<f64> { (0..20).map(|j| a * (b / a).powf(j as f64 / 19.0)).collect() };
    let scalar = QftModel::new(1.0, vec![QftChannel::scalar_with_width(1.0, 0.25, 0.1).map_err(err)?]).map_err(err)?;
    let s = scalar.spectral_function(120.0).map_err(err)?;
    let es = energies(10.0, 100.0);
    let ds: Vec<f64> = es.iter().map(|&e| s.density(e)).collect();
    let scalar_slope = log_slope(&es, &ds);

    let lambda = 100.0;
    let fermion = QftModel::new(
        1.0,
        vec![QftChannel::fermion_with_width(1.0, 0.25, lambda, CutoffShape::Hard, 0.02).map_err(err)?],
    )
    .map_err(err)?;
    let f = fermion.spectral_function(lambda).map_err(err)?;
    let ef = energies(10.0, lambda / 3.0);
    let df: Vec<f64> = ef.iter().map(|&e| f.density(e)).collect();
    let fermion_slope = log_slope(&ef, &df);
    check(
        (scalar_slope + 3.0).abs() <= 0.05 && (fermion_slope + 1.0).abs() <= 0.05,
        format!("scalar {scalar_slope:.4} on [10M, 100M]; fermion {fermion_slope:.4} on [10M, Λ/3], Λ = 100M"),
    )
}

/// Largest `t` up to which `1 - p` stays within 10% of the quadratic fitted at
/// the earliest times.
fn quadratic_duration(s: &SpectralFunction, lambda: f64) -> Result<f64, String> {
    let cfg = QuadratureConfig::default().with_tolerances(1e-13, 1e-11);
    let p0 = s.amplitude(0.0, &cfg).map_err(err)?.norm_sqr();
    let q = |t: f64| s.amplitude(t, &cfg).map(|a| 1.0 - a.norm_sqr() / p0).map_err(err);
    let (mut num, mut den) = (0.0, 0.0);
    for j in 0..5 {
        let t = (0.01 + 0.01 * j as f64) / lambda;
        num += q(t)? * t * t;
        den += t.powi(4);
    }
    let c = num / den;
    let mut last = 0.05 / lambda;
    for j in 0..400 {
        let t = 0.05 / lambda * 200f64.powf(j as f64 / 399.0);
        if ((q(t)? - c * t * t) / (c * t * t)).abs() > 0.1 {
            return Ok(last);
        }
        last = t;
    }
    Err("1 - p stayed quadratic over the whole scan".into())
}

fn cutoff_dependence() -> Outcome {
    let cfg = QuadratureConfig::default();
    let scalar = QftModel::new(1.0, vec![QftChannel::scalar_with_width(1.0, 0.25, 0.1).map_err(err)?]).map_err(err)?;
    let a = scalar.spectral_function(40.0).map_err(err)?;
    let b = scalar.spectral_function(80.0).map_err(err)?;
    let mut dp: f64 = 0.0;
    for t in grid(0.0, 20.0, 81) {
        dp = dp.max((survival_probability(&a, t, &cfg).map_err(err)? - survival_probability(&b, t, &cfg).map_err(err)?).abs());
    }

    let mut durations = Vec::new();
    for lambda in [10.0, 20.0] {
        let m = QftModel::new(
            1.0,
            vec![QftChannel::fermion_with_width(1.0, 0.25, lambda, CutoffShape::Hard, 0.02).map_err(err)?],
        )
        .map_err(err)?;
        let s = m.spectral_function(lambda).map_err(err)?;
        durations.push(quadratic_duration(&s, lambda)?);
    }
    let ratio = durations[1] / durations[0];
    check(
        dp < 1e-4 && (ratio / 0.5 - 1.0).abs() <= 0.2,
        format!(
            "scalar cut 40 -> 80 changes p by {dp:.1e}; fermion quadratic era {:.4} (Λ = 10) -> {:.4} (Λ = 20), ratio {ratio:.3}",
            durations[0], durations[1]
        ),
    )
}

fn determinism() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_decaylab");
    let cfg = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/fig1.cfg");
    let mut outputs = Vec::new();
    for _ in 0..2 {
        let dir = tempfile::tempdir().map_err(err)?;
        let status = Command::new(bin)
            .arg("survive")
            .arg("--config")
            .arg(&cfg)
            .arg("--out")
            .arg(dir.path())
            .output()
            .map_err(err)?;
        if !status.status.success() {
            return Err(format!("decaylab exited with {}: {}", status.status, String::from_utf8_lossy(&status.stderr)));
        }
        let csv = std::fs::read(dir.path().join("fig1.csv")).map_err(err)?;
        let meta = std::fs::read(dir.path().join("fig1.meta")).map_err(err)?;
        outputs.push((csv, meta));
    }
    let rows = outputs[0].0.iter().filter(|&&b| b == b'\n').count();
    check(
        outputs[0] == outputs[1] && rows == 502,
        format!("{rows} lines, {} bytes, identical: {}", outputs[0].0.len(), outputs[0] == outputs[1]),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("1 BW exponential limit", bw_exponential),
        ("2 normalization", normalization),
        ("3 short-time flatness", short_time),
        ("4 single-window non-exponential decay", fig1_reproduction),
        ("5 two-channel ratio", two_channels),
        ("6 emission linewidth", emission),
        ("7 QFT tails", qft_tails),
        ("8 cutoff (in)dependence", cutoff_dependence),
        ("9 determinism", determinism),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        let start = Instant::now();
        let outcome = f();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {name}: {detail} [{secs:.1}s]"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name}: {detail} [{secs:.1}s]");
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
