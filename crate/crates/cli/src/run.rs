use std::path::{Path, PathBuf};

use decaylab::emission::{emitted_probability, linewidth, EmissionSpectrum};
use decaylab::evolution::{partial_decay_densities, qft_partial_densities, survival_series, ChannelDensities};
use decaylab::oracle::{compare_survival, discretize};
use decaylab::{DecayError, FormFactor, LeeModel, QuadratureConfig, SpectralFunction};
use thiserror::Error;

use crate::config::{ConfigError, ConfigErrorKind, EmissionQuantity, Model, RunConfig, TaskKind};
use crate::output::{self, Meta, Table};

/// Upper bound accepted for an emitted survival probability.
pub const P_CEILING: f64 = 1.0 + 1e-9;
/// Relativistic spectra are normalized only to this accuracy, so `p(0)` may
/// exceed 1 by as much.
pub const QFT_NORMALIZATION_TOL: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Profile {
    Strict,
    Fast,
}

impl Profile {
    pub fn quadrature(self) -> QuadratureConfig {
        match self {
            Profile::Strict => QuadratureConfig::default(),
            Profile::Fast => QuadratureConfig::fast(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Profile::Strict => "strict",
            Profile::Fast => "fast",
        }
    }
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error("config: {0}")]
    Config(#[from] ConfigError),
    #[error("{task}: {source}")]
    Numerical {
        task: TaskKind,
        #[source]
        source: DecayError,
    },
    #[error("{task}: {message}")]
    Contract { task: TaskKind, message: String },
    #[error("writing {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Numerical { .. } | RunError::Contract { .. } => 1,
            RunError::Io { .. } => 3,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub task: TaskKind,
    pub csv: PathBuf,
    pub meta: PathBuf,
    pub table: Table,
    pub results: Meta,
}

fn config_error(message: String) -> RunError {
    RunError::Config(ConfigError {
        line: None,
        kind: ConfigErrorKind::Invariant(message),
    })
}

/// Picks the task from the command line, falling back to `[task] kind`.
pub fn resolve_task(cli: Option<TaskKind>, config: &RunConfig) -> Result<TaskKind, RunError> {
    cli.or(config.task.kind)
        .ok_or_else(|| config_error("no task given on the command line or in [task] kind".into()))
}

struct Ctx<'a> {
    config: &'a RunConfig,
    task: TaskKind,
    cfg: QuadratureConfig,
    results: Meta,
}

impl Ctx<'_> {
    fn num<T>(&self, r: decaylab::Result<T>) -> Result<T, RunError> {
        r.map_err(|source| RunError::Numerical { task: self.task, source })
    }

    fn lee(&self) -> Option<LeeModel> {
        match &self.config.model {
            Model::Lee(m) => Some(m.clone().with_quadrature(self.cfg)),
            Model::Qft { .. } => None,
        }
    }

    fn qft_cut(&self) -> Option<f64> {
        match &self.config.model {
            Model::Qft { model, cut } => Some(cut.unwrap_or_else(|| model.default_cut())),
            Model::Lee(_) => None,
        }
    }

    fn mass(&self) -> f64 {
        match &self.config.model {
            Model::Lee(m) => m.mass(),
            Model::Qft { model, .. } => model.mass(),
        }
    }

    /// Leading-order widths per channel.
    fn widths(&self) -> Vec<f64> {
        match &self.config.model {
            Model::Lee(m) => m.golden_rule_width().per_channel,
            Model::Qft { model, .. } => model.widths(),
        }
    }

    fn spectral(&mut self) -> Result<SpectralFunction, RunError> {
        let s = match &self.config.model {
            Model::Lee(_) => {
                let m = self.lee().unwrap();
                self.num(m.spectral_function())?
            }
            Model::Qft { model, .. } => {
                let cut = self.qft_cut().unwrap();
                self.results.set_number("results", "cut", cut);
                self.num(model.spectral_function(cut))?
            }
        };
        let norm = self.num(s.total_weight(&self.cfg))?;
        self.results.set_number("results", "normalization", norm);
        for (i, p) in s.poles().iter().enumerate() {
            self.results.set_number("results", &format!("pole.{}.energy", i + 1), p.energy);
            self.results.set_number("results", &format!("pole.{}.weight", i + 1), p.weight);
        }
        Ok(s)
    }
}

fn spectral_task(ctx: &mut Ctx) -> Result<Table, RunError> {
    let s = ctx.spectral()?;
    let grid = match ctx.config.grid.energy {
        Some(g) => g.values(),
        None => {
            let (lo, hi) = s.window();
            let (lo, hi) = if lo.is_finite() && hi.is_finite() {
                (lo, hi)
            } else {
                let g: f64 = ctx.widths().iter().sum();
                (ctx.mass() - 10.0 * g, ctx.mass() + 10.0 * g)
            };
            crate::config::Grid { min: lo, max: hi, points: 501 }.values()
        }
    };
    let mut t = Table::new(["E", "d_S"]);
    for e in grid {
        t.push(vec![e, s.density(e)]);
    }
    Ok(t)
}

fn survive_task(ctx: &mut Ctx) -> Result<Table, RunError> {
    let s = ctx.spectral()?;
    let times = ctx.config.grid.time.values();
    let series = ctx.num(survival_series(&s, &times, &ctx.cfg))?;
    let gamma: f64 = ctx.widths().iter().sum();
    ctx.results.set_number("results", "gamma", gamma);

    let mut cols = vec!["t", "re_a", "im_a", "p", "h"];
    if ctx.config.task.compare_bw {
        cols.extend(["p_bw", "h_bw"]);
    }
    let mut table = Table::new(cols);
    let ceiling = match ctx.config.model {
        Model::Lee(_) => P_CEILING,
        Model::Qft { .. } => 1.0 + QFT_NORMALIZATION_TOL,
    };
    ctx.results.set_number("results", "p_ceiling", ceiling);
    let mut dev: f64 = 0.0;
    for (j, &t) in times.iter().enumerate() {
        let p = series.probability[j];
        if !(0.0..=ceiling).contains(&p) {
            return Err(RunError::Contract {
                task: ctx.task,
                message: format!("survival probability {p} at t = {t} is outside [0, {ceiling}]"),
            });
        }
        let a = series.amplitude[j];
        let mut row = vec![t, a.re, a.im, p, series.decay_density[j]];
        let p_bw = (-gamma * t).exp();
        dev = dev.max((p - p_bw).abs());
        if ctx.config.task.compare_bw {
            row.extend([p_bw, gamma * p_bw]);
        }
        table.push(row);
    }
    ctx.results.set_number("results", "max_abs_p_minus_bw", dev);
    Ok(table)
}

fn record_densities(ctx: &mut Ctx, cd: &ChannelDensities) {
    ctx.results.set_number("results", "convolution_error", cd.convolution_error);
    ctx.results.set_number("results", "sum_rule_residual", cd.sum_rule_residual);
    ctx.results.set_number("results", "tail_correction", cd.tail_correction);
}

fn channels_task(ctx: &mut Ctx) -> Result<Table, RunError> {
    let times = ctx.config.grid.time.values();
    let cd = match &ctx.config.model {
        Model::Lee(_) => {
            let m = ctx.lee().unwrap();
            ctx.num(partial_decay_densities(&m, &times, &ctx.cfg))?
        }
        Model::Qft { model, .. } => {
            let cut = ctx.qft_cut().unwrap();
            ctx.results.set_number("results", "cut", cut);
            ctx.num(qft_partial_densities(model, &times, cut, &ctx.cfg))?
        }
    };
    record_densities(ctx, &cd);
    let widths = ctx.widths();
    for (i, w) in widths.iter().enumerate() {
        ctx.results.set_number("results", &format!("gamma.{}", i + 1), *w);
    }
    let n = cd.per_channel.len();
    if n >= 2 {
        ctx.results.set_number("results", "ratio_bw", widths[0] / widths[1]);
    }

    let mut cols = vec!["t".to_string(), "h".to_string()];
    cols.extend((1..=n).map(|i| format!("h{i}")));
    if n >= 2 {
        cols.push("ratio".into());
    }
    let mut table = Table::new(cols);
    for (j, &t) in times.iter().enumerate() {
        let mut row = vec![t, cd.total[j]];
        row.extend(cd.per_channel.iter().map(|h| h[j]));
        if n >= 2 {
            row.push(cd.ratio(j).unwrap_or(f64::NAN));
        }
        table.push(row);
    }
    Ok(table)
}

fn emission_task(ctx: &mut Ctx) -> Result<Table, RunError> {
    let mass = ctx.mass();
    let gamma: f64 = ctx.widths().iter().sum();
    ctx.results.set_number("results", "mass", mass);
    ctx.results.set_number("results", "gamma", gamma);
    match ctx.config.task.quantity {
        EmissionQuantity::Spectrum => {
            let t = ctx.config.task.t.unwrap_or(1.0 / gamma);
            let omega = match ctx.config.grid.energy {
                Some(g) => g.values(),
                None => {
                    let half = 5.0 * gamma.max(5.56 / t);
                    crate::config::Grid {
                        min: mass - half,
                        max: mass + half,
                        points: 501,
                    }
                    .values()
                }
            };
            let spec = ctx.num(EmissionSpectrum::new(mass, gamma, t, omega))?;
            let weight = ctx.num(emitted_probability(gamma, t, &ctx.cfg))?;
            ctx.results.set_number("results", "t", t);
            ctx.results.set_number("results", "linewidth", spec.linewidth);
            ctx.results.set_number("results", "linewidth_times_t", spec.linewidth * t);
            ctx.results.set_number("results", "emitted_probability", weight);
            ctx.results.set_number("results", "expected_weight", spec.expected_weight());
            let mut table = Table::new(["omega", "eta"]);
            for (w, e) in spec.omega.iter().zip(&spec.eta) {
                table.push(vec![*w, *e]);
            }
            Ok(table)
        }
        EmissionQuantity::Linewidth => {
            let mut table = Table::new(["t", "linewidth", "linewidth_times_t"]);
            for t in ctx.config.grid.time.values().into_iter().filter(|&t| t > 0.0) {
                let w = ctx.num(linewidth(mass, gamma, t))?;
                table.push(vec![t, w, w * t]);
            }
            Ok(table)
        }
    }
}

fn default_k_range(model: &LeeModel) -> Option<(f64, f64)> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for c in model.channels() {
        let (a, b) = match &c.form_factor {
            FormFactor::ConstantOne => return None,
            FormFactor::Window { e0, lambda } => (*e0, *lambda),
            FormFactor::Tabulated(t) => (t.nodes()[0], t.nodes()[t.nodes().len() - 1]),
        };
        lo = lo.min(a);
        hi = hi.max(b);
    }
    let margin = 0.2 * (hi - lo);
    Some((lo - margin, hi + margin))
}

fn oracle_task(ctx: &mut Ctx) -> Result<Table, RunError> {
    let Some(model) = ctx.lee() else {
        return Err(config_error("oracle-check needs a lee model".into()));
    };
    let k_range = match ctx.config.task.k_range.or_else(|| default_k_range(&model)) {
        Some(r) => r,
        None => {
            return Err(config_error(
                "oracle-check needs channels with bounded form factors (flat channels have no finite grid)".into(),
            ))
        }
    };
    let dm = ctx.num(discretize(&model, ctx.config.task.modes, k_range))?;
    let es = ctx.num(dm.eigensolve())?;
    let s = ctx.spectral()?;
    let times = ctx.config.grid.time.values();
    let report = ctx.num(compare_survival(&dm, &es, &s, &times, &ctx.cfg))?;
    let kept = &times[..report.compared];

    let r = &mut ctx.results;
    r.set("oracle", "modes_per_channel", dm.modes_per_channel());
    r.set_number("oracle", "k_min", k_range.0);
    r.set_number("oracle", "k_max", k_range.1);
    r.set("oracle", "dimension", dm.dimension());
    r.set_number("oracle", "recurrence_time", report.recurrence_time);
    r.set_number("oracle", "t_max", report.t_max);
    r.set_number("results", "max_abs_dp", report.max_abs_dp);
    r.set_number("results", "worst_t", report.worst_t);
    r.set_number("results", "unitarity_defect", report.unitarity_defect);
    r.set_number("results", "tolerance", ctx.config.task.tolerance);

    let n = model.channels().len();
    let with_ratio = n >= 2;
    let cd = if with_ratio {
        let cd = ctx.num(partial_decay_densities(&model, kept, &ctx.cfg))?;
        record_densities(ctx, &cd);
        Some(cd)
    } else {
        None
    };

    let mut cols = vec!["t", "p_oracle", "p", "abs_dp"];
    if with_ratio {
        cols.extend(["ratio_oracle", "ratio", "ratio_rel_diff"]);
    }
    let mut table = Table::new(cols);
    let mut worst_ratio: f64 = 0.0;
    for (j, &t) in kept.iter().enumerate() {
        let p_o = es.survival_probability(t);
        let p = ctx.num(decaylab::evolution::survival_probability(&s, t, &ctx.cfg))?;
        let mut row = vec![t, p_o, p, (p_o - p).abs()];
        if let Some(cd) = &cd {
            let (ro, rc) = match cd.ratio(j) {
                Some(rc) if t > 0.0 => {
                    let h = es.channel_densities(t, ctx.config.task.step);
                    (h[0] / h[1], rc)
                }
                _ => (f64::NAN, f64::NAN),
            };
            let rel = (ro / rc - 1.0).abs();
            if rel.is_finite() {
                worst_ratio = worst_ratio.max(rel);
            }
            row.extend([ro, rc, rel]);
        }
        table.push(row);
    }

    let mut failures = Vec::new();
    if !(report.max_abs_dp <= ctx.config.task.tolerance) {
        failures.push(format!(
            "max |dp| = {:e} at t = {} exceeds {:e}",
            report.max_abs_dp, report.worst_t, ctx.config.task.tolerance
        ));
    }
    if with_ratio {
        ctx.results.set_number("results", "max_ratio_rel_diff", worst_ratio);
        ctx.results.set_number("results", "ratio_tolerance", ctx.config.task.ratio_tolerance);
        if !(worst_ratio <= ctx.config.task.ratio_tolerance) {
            failures.push(format!(
                "h1/h2 differs from the oracle by {worst_ratio:e} (relative), above {:e}",
                ctx.config.task.ratio_tolerance
            ));
        }
    }
    ctx.results.set("results", "pass", failures.is_empty());
    if !failures.is_empty() {
        ctx.results.set("results", "failure", failures.join("; "));
    }
    Ok(table)
}

fn output_paths(config: &RunConfig, task: TaskKind, out_dir: &Path) -> (PathBuf, PathBuf) {
    let csv = match &config.output.path {
        Some(p) => out_dir.join(p),
        None => out_dir.join(format!("{}.csv", task.name())),
    };
    let meta = csv.with_extension("meta");
    (csv, meta)
}

/// Runs one task and writes `<name>.csv` plus its `<name>.meta` sidecar.
///
/// A failed oracle comparison still writes both files before reporting the
/// failure.
pub fn run(config: &RunConfig, task: TaskKind, out_dir: &Path, profile: Profile) -> Result<RunSummary, RunError> {
    let cfg = profile.quadrature();
    let mut ctx = Ctx {
        config,
        task,
        cfg,
        results: Meta::default(),
    };
    let table = match task {
        TaskKind::Spectral => spectral_task(&mut ctx)?,
        TaskKind::Survive => survive_task(&mut ctx)?,
        TaskKind::Channels => channels_task(&mut ctx)?,
        TaskKind::Emission => emission_task(&mut ctx)?,
        TaskKind::OracleCheck => oracle_task(&mut ctx)?,
    };

    let mut meta = Meta::default();
    meta.set("run", "task", task.name());
    meta.set("run", "profile", profile.name());
    meta.set("run", "version", env!("CARGO_PKG_VERSION"));
    meta.set("run", "rows", table.rows.len());
    meta.set_number("tolerances", "abs_tol", cfg.abs_tol);
    meta.set_number("tolerances", "rel_tol", cfg.rel_tol);
    meta.set("tolerances", "max_panels", cfg.max_panels);
    meta.set("tolerances", "oscillation_points_per_period", cfg.oscillation_points_per_period);
    for (name, entries) in &config.echo {
        let sec = meta.section(&format!("config.{name}"));
        sec.extend(entries.iter().cloned());
    }
    let results = ctx.results;
    for name in ["oracle", "results"] {
        if let Some(v) = results.entries(name) {
            meta.section(name).extend(v.iter().cloned());
        }
    }

    let (csv, meta_path) = output_paths(config, task, out_dir);
    output::write(&csv, &table.to_csv()).map_err(|source| RunError::Io { path: csv.clone(), source })?;
    output::write(&meta_path, &meta.render()).map_err(|source| RunError::Io {
        path: meta_path.clone(),
        source,
    })?;

    if let Some(msg) = results.get("results", "failure") {
        return Err(RunError::Contract {
            task,
            message: msg.to_string(),
        });
    }
    Ok(RunSummary {
        task,
        csv,
        meta: meta_path,
        table,
        results,
    })
}
