//! Sectioned `key = value` run configuration.
//!
//! ```text
//! [model]
//! kind = lee
//! mass = 2
//!
//! [channel.1]
//! g2 = 0.36
//! e0 = 0
//! lambda = 5
//!
//! [task]
//! kind = survive
//! ```
//!
//! `#` starts a comment. Section and key names are case sensitive.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use decaylab::{ChannelSpec, CutoffShape, FormFactor, LeeModel, QftChannel, QftModel, TabulatedFormFactor};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigErrorKind {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("unknown section [{0}]")]
    UnknownSection(String),
    #[error("unknown key `{key}` in [{section}]")]
    UnknownKey { section: String, key: String },
    #[error("missing {0} section")]
    MissingSection(String),
    #[error("missing key `{key}` in [{section}]")]
    MissingKey { section: String, key: String },
    #[error("duplicate {0}")]
    Duplicate(String),
    #[error("invalid value `{value}` for `{key}`: expected {expected}")]
    InvalidValue { key: String, value: String, expected: String },
    #[error("{0}")]
    Invariant(String),
}

/// A configuration problem, with the line it was found on when there is one.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub kind: ConfigErrorKind,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.kind),
            None => write!(f, "{}", self.kind),
        }
    }
}

impl std::error::Error for ConfigError {}

fn err<T>(line: Option<usize>, kind: ConfigErrorKind) -> Result<T, ConfigError> {
    Err(ConfigError { line, kind })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TaskKind {
    Spectral,
    Survive,
    Channels,
    Emission,
    OracleCheck,
}

impl TaskKind {
    pub fn name(self) -> &'static str {
        match self {
            TaskKind::Spectral => "spectral",
            TaskKind::Survive => "survive",
            TaskKind::Channels => "channels",
            TaskKind::Emission => "emission",
            TaskKind::OracleCheck => "oracle-check",
        }
    }
}

impl FromStr for TaskKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "spectral" => TaskKind::Spectral,
            "survive" => TaskKind::Survive,
            "channels" => TaskKind::Channels,
            "emission" => TaskKind::Emission,
            "oracle-check" => TaskKind::OracleCheck,
            _ => return Err("one of spectral, survive, channels, emission, oracle-check".into()),
        })
    }
}

impl fmt::Display for TaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone)]
pub enum Model {
    Lee(LeeModel),
    Qft { model: QftModel, cut: Option<f64> },
}

/// Settings read from `[task]`. Keys a task does not use are ignored by it.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskConfig {
    pub kind: Option<TaskKind>,
    /// Add the Breit-Wigner comparison columns to `survive`.
    pub compare_bw: bool,
    /// Observation time of the emission spectrum.
    pub t: Option<f64>,
    /// `spectrum` or `linewidth` for the emission task.
    pub quantity: EmissionQuantity,
    pub modes: usize,
    pub k_range: Option<(f64, f64)>,
    /// Largest `|Δp|` accepted by `oracle-check`.
    pub tolerance: f64,
    /// Largest relative difference of `h1/h2` accepted by `oracle-check`.
    pub ratio_tolerance: f64,
    /// Central-difference step for the oracle channel densities.
    pub step: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmissionQuantity {
    Spectrum,
    Linewidth,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        let n = self.points - 1;
        (0..self.points)
            .map(|j| {
                if j == n {
                    self.max
                } else {
                    self.min + (self.max - self.min) * j as f64 / n as f64
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridConfig {
    pub time: Grid,
    pub energy: Option<Grid>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputConfig {
    pub path: Option<String>,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub model: Model,
    pub task: TaskConfig,
    pub grid: GridConfig,
    pub output: OutputConfig,
    /// Every key as written, for the metadata sidecar.
    pub echo: Vec<(String, Vec<(String, String)>)>,
}

#[derive(Debug)]
struct Entry {
    value: String,
    line: usize,
    used: bool,
}

#[derive(Debug)]
struct Section {
    name: String,
    line: usize,
    entries: BTreeMap<String, Entry>,
    order: Vec<String>,
}

impl Section {
    fn take(&mut self, key: &str) -> Option<(String, usize)> {
        self.entries.get_mut(key).map(|e| {
            e.used = true;
            (e.value.clone(), e.line)
        })
    }

    fn missing(&self, key: &str) -> ConfigError {
        ConfigError {
            line: Some(self.line),
            kind: ConfigErrorKind::MissingKey {
                section: self.name.clone(),
                key: key.into(),
            },
        }
    }

    fn require(&mut self, key: &str) -> Result<(String, usize), ConfigError> {
        self.take(key).ok_or_else(|| self.missing(key))
    }

    fn parse<T: FromStr>(&mut self, key: &str, expected: &str) -> Result<Option<(T, usize)>, ConfigError> {
        match self.take(key) {
            None => Ok(None),
            Some((v, line)) => match v.parse::<T>() {
                Ok(x) => Ok(Some((x, line))),
                Err(_) => err(
                    Some(line),
                    ConfigErrorKind::InvalidValue {
                        key: key.into(),
                        value: v,
                        expected: expected.into(),
                    },
                ),
            },
        }
    }

    fn number(&mut self, key: &str) -> Result<Option<(f64, usize)>, ConfigError> {
        match self.parse::<f64>(key, "a finite number")? {
            Some((x, line)) if !x.is_finite() => err(
                Some(line),
                ConfigErrorKind::InvalidValue {
                    key: key.into(),
                    value: x.to_string(),
                    expected: "a finite number".into(),
                },
            ),
            other => Ok(other),
        }
    }

    fn required_number(&mut self, key: &str) -> Result<(f64, usize), ConfigError> {
        self.number(key)?.ok_or_else(|| self.missing(key))
    }

    fn list(&mut self, key: &str) -> Result<Option<(Vec<f64>, usize)>, ConfigError> {
        match self.take(key) {
            None => Ok(None),
            Some((v, line)) => v
                .split(',')
                .map(|s| s.trim().parse::<f64>().ok().filter(|x| x.is_finite()))
                .collect::<Option<Vec<_>>>()
                .map(|xs| Some((xs, line)))
                .ok_or(ConfigError {
                    line: Some(line),
                    kind: ConfigErrorKind::InvalidValue {
                        key: key.into(),
                        value: v,
                        expected: "a comma separated list of finite numbers".into(),
                    },
                }),
        }
    }

    fn finish(&self) -> Result<(), ConfigError> {
        for key in &self.order {
            let e = &self.entries[key];
            if !e.used {
                return err(
                    Some(e.line),
                    ConfigErrorKind::UnknownKey {
                        section: self.name.clone(),
                        key: key.clone(),
                    },
                );
            }
        }
        Ok(())
    }
}

fn lex(text: &str) -> Result<Vec<Section>, ConfigError> {
    let mut sections: Vec<Section> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let s = raw.split('#').next().unwrap_or("").trim();
        if s.is_empty() {
            continue;
        }
        if let Some(rest) = s.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .map(str::trim)
                .filter(|n| !n.is_empty())
                .ok_or_else(|| ConfigError {
                    line: Some(line),
                    kind: ConfigErrorKind::Syntax(format!("malformed section header `{s}`")),
                })?;
            if let Some(prev) = sections.iter().find(|x| x.name == name) {
                return err(
                    Some(line),
                    ConfigErrorKind::Duplicate(format!("section [{name}] (first on line {})", prev.line)),
                );
            }
            sections.push(Section {
                name: name.to_string(),
                line,
                entries: BTreeMap::new(),
                order: Vec::new(),
            });
            continue;
        }
        let Some((k, v)) = s.split_once('=') else {
            return err(Some(line), ConfigErrorKind::Syntax(format!("expected `key = value`, got `{s}`")));
        };
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() {
            return err(Some(line), ConfigErrorKind::Syntax("empty key".into()));
        }
        let Some(sec) = sections.last_mut() else {
            return err(Some(line), ConfigErrorKind::Syntax(format!("key `{k}` outside of any section")));
        };
        if let Some(prev) = sec.entries.get(k) {
            return err(
                Some(line),
                ConfigErrorKind::Duplicate(format!("key `{k}` (first on line {})", prev.line)),
            );
        }
        sec.order.push(k.to_string());
        sec.entries.insert(
            k.to_string(),
            Entry {
                value: v.to_string(),
                line,
                used: false,
            },
        );
    }
    Ok(sections)
}

fn core_error(line: usize, e: decaylab::DecayError) -> ConfigError {
    ConfigError {
        line: Some(line),
        kind: ConfigErrorKind::Invariant(e.to_string()),
    }
}

fn lee_channel(sec: &mut Section) -> Result<ChannelSpec, ConfigError> {
    let g2 = match (sec.number("g2")?, sec.number("coupling")?) {
        (Some(_), Some((_, line))) => {
            return err(Some(line), ConfigErrorKind::Invariant("give either g2 or coupling, not both".into()))
        }
        (Some((g2, line)), None) if g2 < 0.0 => {
            return err(Some(line), ConfigErrorKind::Invariant(format!("g2 must be >= 0, got {g2}")))
        }
        (Some((g2, _)), None) => g2,
        (None, Some((g, _))) => g * g,
        (None, None) => return Err(sec.missing("g2")),
    };
    let (form, form_line) = sec.take("form").unwrap_or(("window".into(), sec.line));
    let ff = match form.as_str() {
        "window" => {
            let (e0, _) = sec.required_number("e0")?;
            let (lambda, line) = sec.required_number("lambda")?;
            if !(lambda > e0) {
                return err(
                    Some(line),
                    ConfigErrorKind::Invariant(format!(
                        "window invariant violated: lambda ({lambda}) must exceed e0 ({e0})"
                    )),
                );
            }
            FormFactor::Window { e0, lambda }
        }
        "flat" => FormFactor::ConstantOne,
        "tabulated" => {
            let (k, _) = sec.list("k")?.ok_or_else(|| sec.missing("k"))?;
            let (f, fl) = sec.list("f")?.ok_or_else(|| sec.missing("f"))?;
            FormFactor::Tabulated(TabulatedFormFactor::new(k, f).map_err(|e| core_error(fl, e))?)
        }
        _ => {
            return err(
                Some(form_line),
                ConfigErrorKind::InvalidValue {
                    key: "form".into(),
                    value: form,
                    expected: "window, flat or tabulated".into(),
                },
            )
        }
    };
    let offset = sec.number("offset")?.map_or(0.0, |x| x.0);
    ChannelSpec::new(g2.sqrt(), ff, decaylab::Dispersion::Linear { offset }).map_err(|e| core_error(sec.line, e))
}

fn qft_channel(sec: &mut Section, mass: f64) -> Result<QftChannel, ConfigError> {
    let (daughters, dline) = sec.require("daughters")?;
    let (m, _) = sec.required_number("daughter_mass")?;
    let fermion_cut = |sec: &mut Section| -> Result<(f64, CutoffShape), ConfigError> {
        let (cutoff, _) = sec.required_number("cutoff")?;
        let (name, line) = sec.take("cutoff_shape").unwrap_or(("hard".into(), sec.line));
        let shape = match name.as_str() {
            "hard" => CutoffShape::Hard,
            "smooth" => CutoffShape::Smooth {
                width: sec.required_number("cutoff_width")?.0,
            },
            _ => {
                return err(
                    Some(line),
                    ConfigErrorKind::InvalidValue {
                        key: "cutoff_shape".into(),
                        value: name,
                        expected: "hard or smooth".into(),
                    },
                )
            }
        };
        Ok((cutoff, shape))
    };
    let width = sec.number("width")?;
    let coupling = sec.number("coupling")?;
    let strength = match (width, coupling) {
        (Some(_), Some((_, line))) => {
            return err(Some(line), ConfigErrorKind::Invariant("give either width or coupling, not both".into()))
        }
        (Some((w, l)), None) => Ok((w, l)),
        (None, Some((g, l))) => Err((g, l)),
        (None, None) => return Err(sec.missing("width")),
    };
    let built = match daughters.as_str() {
        "scalar" => match strength {
            Ok((w, l)) => QftChannel::scalar_with_width(mass, m, w).map_err(|e| core_error(l, e))?,
            Err((g, _)) => QftChannel::scalar(g, m),
        },
        "fermion" => {
            let (cutoff, shape) = fermion_cut(sec)?;
            match strength {
                Ok((w, l)) => QftChannel::fermion_with_width(mass, m, cutoff, shape, w).map_err(|e| core_error(l, e))?,
                Err((g, _)) => QftChannel::fermion(g, m, cutoff, shape),
            }
        }
        _ => {
            return err(
                Some(dline),
                ConfigErrorKind::InvalidValue {
                    key: "daughters".into(),
                    value: daughters,
                    expected: "scalar or fermion".into(),
                },
            )
        }
    };
    Ok(built)
}

fn grid(sec: Option<&mut Section>, lo: &str, hi: &str, n: &str, default: Option<Grid>) -> Result<Option<Grid>, ConfigError> {
    let Some(sec) = sec else { return Ok(default) };
    let a = sec.number(lo)?;
    let b = sec.number(hi)?;
    let c = sec.parse::<usize>(n, "an integer >= 2")?;
    if a.is_none() && b.is_none() && c.is_none() {
        return Ok(default);
    }
    let line = [a.map(|x| x.1), b.map(|x| x.1), c.map(|x| x.1)].into_iter().flatten().max();
    let d = default.unwrap_or(Grid {
        min: f64::NAN,
        max: f64::NAN,
        points: 201,
    });
    let g = Grid {
        min: a.map_or(d.min, |x| x.0),
        max: b.map_or(d.max, |x| x.0),
        points: c.map_or(d.points, |x| x.0),
    };
    if g.min.is_nan() {
        return Err(sec.missing(lo));
    }
    if g.max.is_nan() {
        return Err(sec.missing(hi));
    }
    if !(g.max > g.min) || g.points < 2 {
        return err(
            line,
            ConfigErrorKind::Invariant(format!(
                "grid must be strictly increasing: {lo} = {}, {hi} = {}, {n} = {}",
                g.min, g.max, g.points
            )),
        );
    }
    Ok(Some(g))
}

/// Parses and validates a run configuration.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let mut sections = lex(text)?;
    let echo = sections
        .iter()
        .map(|s| {
            (
                s.name.clone(),
                s.order.iter().map(|k| (k.clone(), s.entries[k].value.clone())).collect(),
            )
        })
        .collect();

    for s in &sections {
        let known = matches!(s.name.as_str(), "model" | "task" | "grid" | "output")
            || s.name.strip_prefix("channel.").is_some_and(|n| n.parse::<u32>().is_ok_and(|v| v >= 1));
        if !known {
            return err(Some(s.line), ConfigErrorKind::UnknownSection(s.name.clone()));
        }
    }

    let find = |name: &str| sections.iter().position(|s| s.name == name);
    let model_ix = find("model").ok_or(ConfigError {
        line: None,
        kind: ConfigErrorKind::MissingSection("model".into()),
    })?;
    let task_ix = find("task");
    let grid_ix = find("grid");
    let output_ix = find("output");

    let mut channel_ix: Vec<(u32, usize)> = sections
        .iter()
        .enumerate()
        .filter_map(|(i, s)| s.name.strip_prefix("channel.").map(|n| (n.parse().unwrap(), i)))
        .collect();
    channel_ix.sort();
    for (pos, &(n, i)) in channel_ix.iter().enumerate() {
        if n as usize != pos + 1 {
            return err(
                Some(sections[i].line),
                ConfigErrorKind::Invariant(format!("channels must be numbered 1, 2, ... without gaps, found [channel.{n}]")),
            );
        }
    }

    let model = {
        let (kind, kline) = sections[model_ix].require("kind")?;
        let (mass, mline) = sections[model_ix].required_number("mass")?;
        if channel_ix.is_empty() {
            return err(
                Some(sections[model_ix].line),
                ConfigErrorKind::MissingSection("channel.1".into()),
            );
        }
        match kind.as_str() {
            "lee" => {
                let mut chans = Vec::new();
                for &(_, i) in &channel_ix {
                    chans.push(lee_channel(&mut sections[i])?);
                }
                Model::Lee(LeeModel::new(mass, chans).map_err(|e| core_error(mline, e))?)
            }
            "qft" => {
                let cut = match sections[model_ix].number("cut")? {
                    Some((c, line)) if !(c > mass) => {
                        return err(Some(line), ConfigErrorKind::Invariant(format!("cut ({c}) must exceed mass ({mass})")))
                    }
                    c => c.map(|x| x.0),
                };
                let mut chans = Vec::new();
                for &(_, i) in &channel_ix {
                    chans.push(qft_channel(&mut sections[i], mass)?);
                }
                let model = QftModel::new(mass, chans).map_err(|e| core_error(mline, e))?;
                Model::Qft { model, cut }
            }
            _ => {
                return err(
                    Some(kline),
                    ConfigErrorKind::InvalidValue {
                        key: "kind".into(),
                        value: kind,
                        expected: "lee or qft".into(),
                    },
                )
            }
        }
    };

    let task = {
        let mut t = TaskConfig {
            kind: None,
            compare_bw: false,
            t: None,
            quantity: EmissionQuantity::Spectrum,
            modes: 4000,
            k_range: None,
            tolerance: 1e-3,
            ratio_tolerance: 0.02,
            step: 1e-3,
        };
        if let Some(i) = task_ix {
            let s = &mut sections[i];
            if let Some((k, line)) = s.take("kind") {
                t.kind = Some(k.parse().map_err(|expected| ConfigError {
                    line: Some(line),
                    kind: ConfigErrorKind::InvalidValue {
                        key: "kind".into(),
                        value: k.clone(),
                        expected,
                    },
                })?);
            }
            if let Some((b, _)) = s.parse::<bool>("compare_bw", "true or false")? {
                t.compare_bw = b;
            }
            if let Some((v, line)) = s.number("t")? {
                if !(v > 0.0) {
                    return err(Some(line), ConfigErrorKind::Invariant(format!("t must be > 0, got {v}")));
                }
                t.t = Some(v);
            }
            if let Some((q, line)) = s.take("quantity") {
                t.quantity = match q.as_str() {
                    "spectrum" => EmissionQuantity::Spectrum,
                    "linewidth" => EmissionQuantity::Linewidth,
                    _ => {
                        return err(
                            Some(line),
                            ConfigErrorKind::InvalidValue {
                                key: "quantity".into(),
                                value: q,
                                expected: "spectrum or linewidth".into(),
                            },
                        )
                    }
                };
            }
            if let Some((n, line)) = s.parse::<usize>("modes", "a positive integer")? {
                if n == 0 {
                    return err(Some(line), ConfigErrorKind::Invariant("modes must be positive".into()));
                }
                t.modes = n;
            }
            match (s.number("k_min")?, s.number("k_max")?) {
                (None, None) => {}
                (Some((a, _)), Some((b, line))) => {
                    if !(b > a) {
                        return err(Some(line), ConfigErrorKind::Invariant(format!("k_max ({b}) must exceed k_min ({a})")));
                    }
                    t.k_range = Some((a, b));
                }
                (None, Some(_)) => return Err(s.missing("k_min")),
                (Some(_), None) => return Err(s.missing("k_max")),
            }
            for (key, slot) in [
                ("tolerance", &mut t.tolerance),
                ("ratio_tolerance", &mut t.ratio_tolerance),
                ("step", &mut t.step),
            ] {
                if let Some((v, line)) = s.number(key)? {
                    if !(v > 0.0) {
                        return err(Some(line), ConfigErrorKind::Invariant(format!("{key} must be > 0, got {v}")));
                    }
                    *slot = v;
                }
            }
        }
        t
    };

    let grid = {
        let default_t = Grid {
            min: 0.0,
            max: 25.0,
            points: 501,
        };
        let time = grid(grid_ix.map(|i| &mut sections[i]), "t_min", "t_max", "n_points", Some(default_t))?
            .expect("default supplied");
        if time.min < 0.0 {
            return err(
                grid_ix.map(|i| sections[i].line),
                ConfigErrorKind::Invariant(format!("t_min must be >= 0, got {}", time.min)),
            );
        }
        let energy = grid(grid_ix.map(|i| &mut sections[i]), "e_min", "e_max", "e_points", None)?;
        GridConfig { time, energy }
    };

    let output = match output_ix {
        None => OutputConfig { path: None },
        Some(i) => {
            let s = &mut sections[i];
            if let Some((f, line)) = s.take("format") {
                if f != "csv" {
                    return err(
                        Some(line),
                        ConfigErrorKind::InvalidValue {
                            key: "format".into(),
                            value: f,
                            expected: "csv".into(),
                        },
                    );
                }
            }
            OutputConfig {
                path: s.take("path").map(|p| p.0),
            }
        }
    };

    for s in &sections {
        s.finish()?;
    }

    Ok(RunConfig {
        model,
        task,
        grid,
        output,
        echo,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIG1: &str = "[model]\nkind = lee\nmass = 2\n\n[channel.1]\ng2 = 0.36\ne0 = 0\nlambda = 5\n\n[task]\nkind = survive\n";

    #[test]
    fn fig1_parses() {
        let c = parse_config(FIG1).unwrap();
        assert_eq!(c.task.kind, Some(TaskKind::Survive));
        assert_eq!(c.grid.time.values().len(), 501);
        match c.model {
            Model::Lee(m) => {
                assert_eq!(m.mass(), 2.0);
                assert!((m.channels()[0].g2() - 0.36).abs() < 1e-15);
            }
            _ => panic!("expected a Lee model"),
        }
    }

    #[test]
    fn empty_file() {
        let e = parse_config("").unwrap_err();
        assert_eq!(e.to_string(), "missing model section");
    }

    #[test]
    fn window_invariant() {
        let e = parse_config(&FIG1.replace("lambda = 5", "lambda = -1")).unwrap_err();
        assert_eq!(e.line, Some(8));
        assert!(e.to_string().contains("window invariant"), "{e}");
    }

    #[test]
    fn distinct_error_kinds() {
        let e = parse_config(&FIG1.replace("e0 = 0", "e0 = 0\ncolour = red")).unwrap_err();
        assert!(matches!(e.kind, ConfigErrorKind::UnknownKey { .. }));
        assert_eq!(e.line, Some(8));

        let e = parse_config(&FIG1.replace("mass = 2\n", "")).unwrap_err();
        assert!(matches!(e.kind, ConfigErrorKind::MissingKey { ref key, .. } if key == "mass"));

        let e = parse_config(&format!("{FIG1}[grid]\nt_min = 3\nt_max = 1\n")).unwrap_err();
        assert!(matches!(e.kind, ConfigErrorKind::Invariant(_)));

        let e = parse_config(&FIG1.replace("g2 = 0.36", "g2 = lots")).unwrap_err();
        assert!(matches!(e.kind, ConfigErrorKind::InvalidValue { .. }));

        let e = parse_config(&format!("{FIG1}[plot]\n")).unwrap_err();
        assert!(matches!(e.kind, ConfigErrorKind::UnknownSection(_)));

        let e = parse_config(&format!("{FIG1}[model]\n")).unwrap_err();
        assert!(matches!(e.kind, ConfigErrorKind::Duplicate(_)));
    }

    #[test]
    fn qft_fermion_needs_cutoff() {
        let text = "[model]\nkind = qft\nmass = 1\n[channel.1]\ndaughters = fermion\ndaughter_mass = 0.2\nwidth = 0.1\n";
        let e = parse_config(text).unwrap_err();
        assert!(matches!(e.kind, ConfigErrorKind::MissingKey { ref key, .. } if key == "cutoff"));
        let ok = parse_config(&format!("{text}cutoff = 10\n")).unwrap();
        assert!(matches!(ok.model, Model::Qft { .. }));
    }

    #[test]
    fn comments_and_blank_lines() {
        let c = parse_config(&format!("# header\n\n{}", FIG1.replace("mass = 2", "mass = 2   # GeV-ish"))).unwrap();
        assert!(matches!(c.model, Model::Lee(_)));
    }
}
