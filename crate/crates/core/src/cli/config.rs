//! Scenario files: INI-style sections of `key = value` lines, `#` comments.
//!
//! ```text
//! [domain]
//! lengths = 1.0          # one entry per axis
//! counts = 65
//!
//! [params]
//! d1 = 1.0
//! ...
//!
//! [coefficients]
//! a0.base = 1.0
//! a0.temporal_amplitude = 0.2
//! a0.temporal_period = 5.0
//! a0.spatial_amplitude = 0.1, 0.0
//! a0.spatial_mode = 1, 0
//!
//! [init]
//! u0.base = 0.5
//! u0.amplitude = 0.1
//! u0.mode = 2
//! ```
//!
//! Unknown sections and keys are rejected with their line number.

use std::fmt;

use crate::analysis::{DEFAULT_EPS_EXTINCTION, DEFAULT_ETA_PERSISTENCE, DEFAULT_TAIL_FRACTION};
use crate::model::{
    CoefficientBundle, CoefficientField, FieldState, Grid, ModelError, ModelParams, COEFFICIENT_NAMES, MAX_DIM,
};
use crate::pde::{Model, SimError, StepperConfig};

const SECTIONS: [&str; 6] = ["domain", "params", "coefficients", "init", "time", "analysis"];
const DOMAIN_KEYS: [&str; 3] = ["dim", "lengths", "counts"];
const PARAM_KEYS: [&str; 8] = ["d1", "d2", "d3", "chi1", "chi2", "k", "l", "lambda"];
const COEFFICIENT_KEYS: [&str; 6] = [
    "base",
    "temporal_amplitude",
    "temporal_period",
    "temporal_phase",
    "spatial_amplitude",
    "spatial_mode",
];
const INIT_NAMES: [&str; 2] = ["u0", "v0"];
const INIT_KEYS: [&str; 3] = ["base", "amplitude", "mode"];
const TIME_KEYS: [&str; 4] = ["t_final", "dt_max", "safety", "sample_every"];
const ANALYSIS_KEYS: [&str; 5] = [
    "tail_fraction",
    "eps_extinction",
    "eta_persistence",
    "tol_poincare",
    "max_iter",
];

pub const DEFAULT_SAMPLE_EVERY: f64 = 0.1;
pub const DEFAULT_TOL_POINCARE: f64 = 1e-8;
pub const DEFAULT_MAX_ITER: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl ConfigError {
    fn at(line: Option<usize>, message: impl Into<String>) -> Self {
        Self {
            line,
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "line {line}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialProfile {
    pub base: f64,
    pub amplitude: [f64; MAX_DIM],
    pub mode: [u32; MAX_DIM],
}

impl InitialProfile {
    pub fn constant(base: f64) -> Self {
        Self {
            base,
            amplitude: [0.0; MAX_DIM],
            mode: [0; MAX_DIM],
        }
    }

    /// `base + Σ amplitude·cos(mode·π·x/L)` at the grid nodes.
    pub fn sample(&self, grid: &Grid) -> Vec<f64> {
        grid.sample(|x| {
            let mut value = self.base;
            for (axis, &xa) in x.iter().enumerate() {
                value += self.amplitude[axis]
                    * (self.mode[axis] as f64 * std::f64::consts::PI * xa / grid.lengths()[axis]).cos();
            }
            value
        })
    }

    fn minimum(&self) -> f64 {
        self.base - self.amplitude.iter().map(|a| a.abs()).sum::<f64>()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DomainConfig {
    pub lengths: Vec<f64>,
    pub counts: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeConfig {
    pub t_final: f64,
    pub dt_max: f64,
    pub safety: f64,
    pub sample_every: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalysisConfig {
    pub tail_fraction: f64,
    pub eps_extinction: f64,
    pub eta_persistence: f64,
    pub tol_poincare: f64,
    pub max_iter: usize,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            tail_fraction: DEFAULT_TAIL_FRACTION,
            eps_extinction: DEFAULT_EPS_EXTINCTION,
            eta_persistence: DEFAULT_ETA_PERSISTENCE,
            tol_poincare: DEFAULT_TOL_POINCARE,
            max_iter: DEFAULT_MAX_ITER,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub domain: DomainConfig,
    pub params: ModelParams,
    pub coefficients: CoefficientBundle,
    pub u0: InitialProfile,
    pub v0: InitialProfile,
    pub time: TimeConfig,
    pub analysis: AnalysisConfig,
}

impl ScenarioConfig {
    pub fn grid(&self) -> Result<Grid, ModelError> {
        Grid::new(&self.domain.lengths, &self.domain.counts)
    }

    pub fn model(&self) -> Result<Model, SimError> {
        Model::new(self.params, self.coefficients, self.grid()?)
    }

    pub fn stepper(&self) -> StepperConfig {
        StepperConfig {
            dt_max: self.time.dt_max,
            safety: self.time.safety,
            ..StepperConfig::default()
        }
    }

    /// Initial densities at `t = 0` with the matching signal.
    pub fn initial_state(&self, model: &Model) -> Result<FieldState, SimError> {
        model.initial_state(0.0, self.u0.sample(model.grid()), self.v0.sample(model.grid()))
    }

    /// Canonical text form; [`parse_config`] reads it back to an equal value.
    pub fn render(&self) -> String {
        let dim = self.domain.lengths.len();
        let mut out = String::new();
        let mut line = |s: String| {
            out.push_str(&s);
            out.push('\n');
        };
        line("[domain]".into());
        line(format!("dim = {dim}"));
        line(format!("lengths = {}", join(&self.domain.lengths)));
        line(format!("counts = {}", join(&self.domain.counts)));
        line(String::new());
        line("[params]".into());
        let p = &self.params;
        for (key, value) in PARAM_KEYS
            .iter()
            .zip([p.d1, p.d2, p.d3, p.chi1, p.chi2, p.k, p.l, p.lambda])
        {
            line(format!("{key} = {value:?}"));
        }
        line(String::new());
        line("[coefficients]".into());
        for (name, f) in COEFFICIENT_NAMES.iter().zip(self.coefficients.fields()) {
            line(format!("{name}.base = {:?}", f.base));
            line(format!("{name}.temporal_amplitude = {:?}", f.temporal_amplitude));
            line(format!("{name}.temporal_period = {:?}", f.temporal_period));
            line(format!("{name}.temporal_phase = {:?}", f.temporal_phase));
            line(format!(
                "{name}.spatial_amplitude = {}",
                join(&f.spatial_amplitude[..dim])
            ));
            line(format!("{name}.spatial_mode = {}", join(&f.spatial_mode[..dim])));
        }
        line(String::new());
        line("[init]".into());
        for (name, prof) in INIT_NAMES.iter().zip([&self.u0, &self.v0]) {
            line(format!("{name}.base = {:?}", prof.base));
            line(format!("{name}.amplitude = {}", join(&prof.amplitude[..dim])));
            line(format!("{name}.mode = {}", join(&prof.mode[..dim])));
        }
        line(String::new());
        line("[time]".into());
        let t = &self.time;
        line(format!("t_final = {:?}", t.t_final));
        line(format!("dt_max = {:?}", t.dt_max));
        line(format!("safety = {:?}", t.safety));
        line(format!("sample_every = {:?}", t.sample_every));
        line(String::new());
        line("[analysis]".into());
        let a = &self.analysis;
        line(format!("tail_fraction = {:?}", a.tail_fraction));
        line(format!("eps_extinction = {:?}", a.eps_extinction));
        line(format!("eta_persistence = {:?}", a.eta_persistence));
        line(format!("tol_poincare = {:?}", a.tol_poincare));
        line(format!("max_iter = {}", a.max_iter));
        out
    }
}

fn join<T: fmt::Debug>(values: &[T]) -> String {
    values.iter().map(|v| format!("{v:?}")).collect::<Vec<_>>().join(", ")
}

#[derive(Debug, Clone, PartialEq)]
struct Entry {
    section: String,
    key: String,
    value: String,
    line: Option<usize>,
}

/// Flat list of `section.key = value` entries in file order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RawConfig {
    entries: Vec<Entry>,
}

fn is_known(section: &str, key: &str) -> bool {
    let prefixed = |names: &[&str], keys: &[&str]| {
        key.split_once('.')
            .is_some_and(|(name, rest)| names.contains(&name) && keys.contains(&rest))
    };
    match section {
        "domain" => DOMAIN_KEYS.contains(&key),
        "params" => PARAM_KEYS.contains(&key),
        "coefficients" => prefixed(&COEFFICIENT_NAMES, &COEFFICIENT_KEYS),
        "init" => prefixed(&INIT_NAMES, &INIT_KEYS),
        "time" => TIME_KEYS.contains(&key),
        "analysis" => ANALYSIS_KEYS.contains(&key),
        _ => false,
    }
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut raw = RawConfig::default();
        let mut section: Option<String> = None;
        for (idx, full) in text.lines().enumerate() {
            let line_no = Some(idx + 1);
            let line = full.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| ConfigError::at(line_no, format!("malformed section header '{line}'")))?
                    .trim();
                if !SECTIONS.contains(&name) {
                    return Err(ConfigError::at(line_no, format!("unknown section [{name}]")));
                }
                section = Some(name.to_string());
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| ConfigError::at(line_no, format!("expected 'key = value', found '{line}'")))?;
            let (key, value) = (key.trim(), value.trim());
            let sec = section
                .clone()
                .ok_or_else(|| ConfigError::at(line_no, format!("key '{key}' appears before any section")))?;
            if !is_known(&sec, key) {
                return Err(ConfigError::at(line_no, format!("unknown key '{key}' in [{sec}]")));
            }
            if value.is_empty() {
                return Err(ConfigError::at(line_no, format!("{sec}.{key} has no value")));
            }
            if raw.find(&sec, key).is_some() {
                return Err(ConfigError::at(line_no, format!("duplicate key {sec}.{key}")));
            }
            raw.entries.push(Entry {
                section: sec,
                key: key.to_string(),
                value: value.to_string(),
                line: line_no,
            });
        }
        Ok(raw)
    }

    fn find(&self, section: &str, key: &str) -> Option<&Entry> {
        self.entries.iter().find(|e| e.section == section && e.key == key)
    }

    /// Resolves `section.key` or a bare key that names exactly one setting.
    pub fn resolve_key(key: &str) -> Result<(String, String), ConfigError> {
        if let Some((sec, rest)) = key.split_once('.') {
            if SECTIONS.contains(&sec) {
                return if is_known(sec, rest) {
                    Ok((sec.to_string(), rest.to_string()))
                } else {
                    Err(ConfigError::at(None, format!("unknown key '{rest}' in [{sec}]")))
                };
            }
        }
        let hits: Vec<&str> = SECTIONS.iter().copied().filter(|s| is_known(s, key)).collect();
        match hits.as_slice() {
            [sec] => Ok((sec.to_string(), key.to_string())),
            [] => Err(ConfigError::at(None, format!("unknown key '{key}'"))),
            _ => Err(ConfigError::at(
                None,
                format!("key '{key}' is ambiguous; prefix it with its section"),
            )),
        }
    }

    /// Replaces or adds one setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let (section, key) = Self::resolve_key(key)?;
        match self.entries.iter_mut().find(|e| e.section == section && e.key == key) {
            Some(e) => {
                e.value = value.trim().to_string();
                e.line = None;
            }
            None => self.entries.push(Entry {
                section,
                key,
                value: value.trim().to_string(),
                line: None,
            }),
        }
        Ok(())
    }

    pub fn to_config(&self) -> Result<ScenarioConfig, ConfigError> {
        Builder { raw: self }.build()
    }
}

pub fn parse_config(text: &str) -> Result<ScenarioConfig, ConfigError> {
    RawConfig::parse(text)?.to_config()
}

struct Builder<'a> {
    raw: &'a RawConfig,
}

impl Builder<'_> {
    fn line(&self, section: &str, key: &str) -> Option<usize> {
        self.raw.find(section, key).and_then(|e| e.line)
    }

    fn list<T: std::str::FromStr>(&self, section: &str, key: &str) -> Result<Option<Vec<T>>, ConfigError> {
        let Some(e) = self.raw.find(section, key) else {
            return Ok(None);
        };
        e.value
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<T>()
                    .map_err(|_| ConfigError::at(e.line, format!("{section}.{key}: cannot parse '{}'", s.trim())))
            })
            .collect::<Result<Vec<T>, _>>()
            .map(Some)
    }

    fn scalar<T: std::str::FromStr>(&self, section: &str, key: &str) -> Result<Option<T>, ConfigError> {
        let Some(e) = self.raw.find(section, key) else {
            return Ok(None);
        };
        e.value
            .parse::<T>()
            .map(Some)
            .map_err(|_| ConfigError::at(e.line, format!("{section}.{key}: cannot parse '{}'", e.value)))
    }

    fn required<T: std::str::FromStr>(&self, section: &str, key: &str) -> Result<T, ConfigError> {
        self.scalar(section, key)?
            .ok_or_else(|| ConfigError::at(None, format!("missing required key {section}.{key}")))
    }

    fn axes<T: std::str::FromStr + Copy + Default>(
        &self,
        section: &str,
        key: &str,
        dim: usize,
    ) -> Result<[T; MAX_DIM], ConfigError> {
        let mut out = [T::default(); MAX_DIM];
        if let Some(values) = self.list::<T>(section, key)? {
            if values.is_empty() || values.len() > dim {
                return Err(ConfigError::at(
                    self.line(section, key),
                    format!("{section}.{key} needs 1 to {dim} entries, found {}", values.len()),
                ));
            }
            out[..values.len()].copy_from_slice(&values);
        }
        Ok(out)
    }

    fn check(&self, ok: bool, section: &str, key: &str, requirement: &str, value: f64) -> Result<(), ConfigError> {
        if ok {
            Ok(())
        } else {
            Err(ConfigError::at(
                self.line(section, key),
                format!("{section}.{key} must be {requirement} (got {value})"),
            ))
        }
    }

    fn locate_model_error(&self, err: &ModelError) -> Option<usize> {
        match err {
            ModelError::InvalidParameter { name, .. } => {
                let (sec, key) = name.split_once('.')?;
                self.line(sec, key)
            }
            ModelError::NonPositiveInfimum { name, .. } | ModelError::MalformedCoefficient { name, .. } => {
                self.line("coefficients", &format!("{name}.base"))
            }
            ModelError::InvalidGrid(_) => self.line("domain", "counts"),
            _ => None,
        }
    }

    fn build(&self) -> Result<ScenarioConfig, ConfigError> {
        let lengths = self
            .list::<f64>("domain", "lengths")?
            .ok_or_else(|| ConfigError::at(None, "missing required key domain.lengths"))?;
        let mut counts = self
            .list::<usize>("domain", "counts")?
            .ok_or_else(|| ConfigError::at(None, "missing required key domain.counts"))?;
        let dim = lengths.len();
        if let Some(d) = self.scalar::<usize>("domain", "dim")? {
            if d != dim {
                return Err(ConfigError::at(
                    self.line("domain", "dim"),
                    format!("domain.dim = {d} but domain.lengths has {dim} entries"),
                ));
            }
        }
        if !(1..=MAX_DIM).contains(&dim) {
            return Err(ConfigError::at(
                self.line("domain", "lengths"),
                format!("domain.lengths needs 1 to {MAX_DIM} entries, found {dim}"),
            ));
        }
        if counts.len() == 1 && dim > 1 {
            counts = vec![counts[0]; dim];
        }
        let domain = DomainConfig { lengths, counts };
        let grid = domain_grid(&domain).map_err(|e| ConfigError::at(self.locate_model_error(&e), e.to_string()))?;

        let mut values = [0.0; 8];
        for (slot, key) in values.iter_mut().zip(PARAM_KEYS) {
            *slot = self.required("params", key)?;
        }
        let [d1, d2, d3, chi1, chi2, k, l, lambda] = values;
        let params = ModelParams::new(d1, d2, d3, chi1, chi2, k, l, lambda)
            .map_err(|e| ConfigError::at(self.locate_model_error(&e), e.to_string()))?;

        let mut coefficients = CoefficientBundle::default();
        for name in COEFFICIENT_NAMES {
            let key = |k: &str| format!("{name}.{k}");
            let mut field = CoefficientField::constant(self.required("coefficients", &key("base"))?);
            if let Some(a) = self.scalar("coefficients", &key("temporal_amplitude"))? {
                field.temporal_amplitude = a;
            }
            if let Some(p) = self.scalar("coefficients", &key("temporal_period"))? {
                field.temporal_period = p;
            }
            if let Some(p) = self.scalar("coefficients", &key("temporal_phase"))? {
                field.temporal_phase = p;
            }
            field.spatial_amplitude = self.axes("coefficients", &key("spatial_amplitude"), dim)?;
            field.spatial_mode = self.axes("coefficients", &key("spatial_mode"), dim)?;
            *coefficients.field_mut(name).expect("known coefficient") = field;
        }

        let mut profiles = [InitialProfile::constant(0.0); 2];
        for (prof, name) in profiles.iter_mut().zip(INIT_NAMES) {
            let key = |k: &str| format!("{name}.{k}");
            prof.base = self.required("init", &key("base"))?;
            prof.amplitude = self.axes("init", &key("amplitude"), dim)?;
            prof.mode = self.axes("init", &key("mode"), dim)?;
            let min = prof.minimum();
            self.check(
                min >= 0.0 && min.is_finite(),
                "init",
                &key("base"),
                ">= the sum of |amplitude|",
                prof.base,
            )?;
        }
        let [u0, v0] = profiles;

        let defaults = StepperConfig::default();
        let time = TimeConfig {
            t_final: self.required("time", "t_final")?,
            dt_max: self.scalar("time", "dt_max")?.unwrap_or(defaults.dt_max),
            safety: self.scalar("time", "safety")?.unwrap_or(defaults.safety),
            sample_every: self.scalar("time", "sample_every")?.unwrap_or(DEFAULT_SAMPLE_EVERY),
        };
        self.check(
            time.t_final > 0.0 && time.t_final.is_finite(),
            "time",
            "t_final",
            "> 0",
            time.t_final,
        )?;
        self.check(
            time.dt_max > 0.0 && time.dt_max.is_finite(),
            "time",
            "dt_max",
            "> 0",
            time.dt_max,
        )?;
        self.check(
            time.safety > 0.0 && time.safety <= 1.0,
            "time",
            "safety",
            "in (0, 1]",
            time.safety,
        )?;
        self.check(
            time.sample_every > 0.0 && time.sample_every.is_finite(),
            "time",
            "sample_every",
            "> 0",
            time.sample_every,
        )?;

        let d = AnalysisConfig::default();
        let analysis = AnalysisConfig {
            tail_fraction: self.scalar("analysis", "tail_fraction")?.unwrap_or(d.tail_fraction),
            eps_extinction: self.scalar("analysis", "eps_extinction")?.unwrap_or(d.eps_extinction),
            eta_persistence: self.scalar("analysis", "eta_persistence")?.unwrap_or(d.eta_persistence),
            tol_poincare: self.scalar("analysis", "tol_poincare")?.unwrap_or(d.tol_poincare),
            max_iter: self.scalar("analysis", "max_iter")?.unwrap_or(d.max_iter),
        };
        let a = &analysis;
        self.check(
            a.tail_fraction > 0.0 && a.tail_fraction < 1.0,
            "analysis",
            "tail_fraction",
            "in (0, 1)",
            a.tail_fraction,
        )?;
        self.check(
            a.eps_extinction > 0.0,
            "analysis",
            "eps_extinction",
            "> 0",
            a.eps_extinction,
        )?;
        self.check(
            a.eta_persistence > a.eps_extinction,
            "analysis",
            "eta_persistence",
            "> eps_extinction",
            a.eta_persistence,
        )?;
        self.check(a.tol_poincare > 0.0, "analysis", "tol_poincare", "> 0", a.tol_poincare)?;
        self.check(a.max_iter >= 1, "analysis", "max_iter", ">= 1", a.max_iter as f64)?;

        let config = ScenarioConfig {
            domain,
            params,
            coefficients,
            u0,
            v0,
            time,
            analysis,
        };
        Model::new(params, coefficients, grid).map_err(|e| match &e {
            SimError::Model(m) => ConfigError::at(self.locate_model_error(m), m.to_string()),
            other => ConfigError::at(None, other.to_string()),
        })?;
        Ok(config)
    }
}

fn domain_grid(domain: &DomainConfig) -> Result<Grid, ModelError> {
    Grid::new(&domain.lengths, &domain.counts)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub(crate) const MINIMAL: &str = "\
[domain]
lengths = 1.0
counts = 17

[params]
d1 = 1
d2 = 1
d3 = 1
chi1 = 0.1
chi2 = 0.1
k = 1
l = 1
lambda = 1

[coefficients]
a0.base = 1
a1.base = 2
a2.base = 0.2
b0.base = 1
b1.base = 0.2
b2.base = 2

[init]
u0.base = 0.5
v0.base = 0.5

[time]
t_final = 10
";

    #[test]
    fn minimal_config_parses() {
        let c = parse_config(MINIMAL).unwrap();
        assert_eq!(c.domain.counts, vec![17]);
        assert_eq!(c.params.lambda, 1.0);
        assert_eq!(c.coefficients.a1.base, 2.0);
        assert_eq!(c.time.dt_max, 0.01);
        assert_eq!(c.analysis, AnalysisConfig::default());
        assert!(c.model().is_ok());
    }

    #[test]
    fn lambda_zero_is_rejected() {
        let text = MINIMAL.replace("lambda = 1", "lambda = 0");
        let err = parse_config(&text).unwrap_err();
        assert!(err.message.contains("params.lambda must be > 0"), "{err}");
        assert_eq!(err.line, Some(13));
    }

    #[test]
    fn misspelled_key_has_line() {
        let text = MINIMAL.replace("chi1 = 0.1", "cih1 = 0.1");
        let err = parse_config(&text).unwrap_err();
        assert_eq!(err.line, Some(9));
        assert!(err.to_string().contains("unknown key 'cih1'"), "{err}");
    }

    #[test]
    fn syntax_errors() {
        assert_eq!(parse_config("x = 1").unwrap_err().line, Some(1));
        assert!(parse_config("[nope]").unwrap_err().message.contains("unknown section"));
        assert!(parse_config("[params\n").is_err());
        assert!(parse_config("[params]\nd1\n")
            .unwrap_err()
            .message
            .contains("key = value"));
        let dup = MINIMAL.replace("d2 = 1", "d1 = 2");
        assert!(parse_config(&dup).unwrap_err().message.contains("duplicate"));
        let bad = MINIMAL.replace("k = 1", "k = one");
        assert!(parse_config(&bad).unwrap_err().message.contains("cannot parse"));
    }

    #[test]
    fn missing_and_inconsistent() {
        let text = MINIMAL.replace("t_final = 10", "");
        assert!(parse_config(&text).unwrap_err().message.contains("time.t_final"));
        let text = MINIMAL.replace("lengths = 1.0", "lengths = 1.0\ndim = 2");
        assert!(parse_config(&text).is_err());
        let text = MINIMAL.replace("a1.base = 2", "a1.base = -1");
        assert_eq!(parse_config(&text).unwrap_err().line, Some(17));
        let text = MINIMAL.replace("u0.base = 0.5", "u0.base = 0.5\nu0.amplitude = 0.6");
        assert!(parse_config(&text).is_err());
        let text = MINIMAL.replace("a0.base = 1", "a0.base = 1\na0.spatial_amplitude = 0.1, 0.1");
        assert!(parse_config(&text).is_err());
    }

    #[test]
    fn render_round_trip() {
        let text = MINIMAL
            .replace(
                "a0.base = 1",
                "a0.base = 1\na0.temporal_amplitude = 0.2\na0.temporal_period = 5",
            )
            .replace(
                "b1.base = 0.2",
                "b1.base = 0.2\nb1.spatial_amplitude = 0.02\nb1.spatial_mode = 3",
            )
            .replace("u0.base = 0.5", "u0.base = 0.5\nu0.amplitude = 0.1\nu0.mode = 2");
        let c = parse_config(&text).unwrap();
        let again = parse_config(&c.render()).unwrap();
        assert_eq!(c, again);
    }

    #[test]
    fn two_dimensional_counts_broadcast() {
        let text = MINIMAL
            .replace("lengths = 1.0", "lengths = 1.0, 2.0")
            .replace("counts = 17", "counts = 9");
        let c = parse_config(&text).unwrap();
        assert_eq!(c.domain.counts, vec![9, 9]);
        assert_eq!(c.grid().unwrap().dim(), 2);
    }

    #[test]
    fn key_resolution_and_override() {
        assert_eq!(
            RawConfig::resolve_key("chi2").unwrap(),
            ("params".to_string(), "chi2".to_string())
        );
        assert_eq!(
            RawConfig::resolve_key("a2.base").unwrap(),
            ("coefficients".to_string(), "a2.base".to_string())
        );
        assert!(RawConfig::resolve_key("base").is_err());
        assert!(RawConfig::resolve_key("params.nope").is_err());
        let mut raw = RawConfig::parse(MINIMAL).unwrap();
        raw.set("chi2", "0.3").unwrap();
        raw.set("time.safety", "0.2").unwrap();
        let c = raw.to_config().unwrap();
        assert_eq!(c.params.chi2, 0.3);
        assert_eq!(c.time.safety, 0.2);
    }

    #[test]
    fn initial_profile_sampling() {
        let grid = Grid::line(1.0, 5).unwrap();
        let p = InitialProfile {
            base: 0.5,
            amplitude: [0.1, 0.0],
            mode: [1, 0],
        };
        let s = p.sample(&grid);
        assert!((s[0] - 0.6).abs() < 1e-15 && (s[4] - 0.4).abs() < 1e-15 && (s[2] - 0.5).abs() < 1e-15);
    }
}
