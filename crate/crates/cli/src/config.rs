//! Run configuration: one TOML file with a section per command, plus
//! `section.key=value` overrides from the command line.

use std::f64::consts::PI;
use std::path::Path;

use breather_core::evolve::BoundaryDrive;
use breather_core::fields::Detuning;
use breather_core::{Boost, BreatherSpec, Complex64, FieldKind, ModeIndex, PhysParams};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UnitSystem {
    #[default]
    Natural,
    Explicit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UnitsConfig {
    pub system: UnitSystem,
    pub m: f64,
    pub c: f64,
    pub hbar: f64,
}

impl Default for UnitsConfig {
    fn default() -> Self {
        Self { system: UnitSystem::Natural, m: 1.0, c: 1.0, hbar: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BreatherConfig {
    pub alpha_re: f64,
    pub alpha_im: f64,
    pub l: f64,
    pub n: f64,
    /// Boost velocity along x. Mutually exclusive with `momentum`.
    pub velocity: Option<f64>,
    pub momentum: Option<f64>,
    pub train_period: Option<f64>,
    pub truncation: u32,
    pub radial_factor: f64,
    pub kappa_scale: f64,
}

impl Default for BreatherConfig {
    fn default() -> Self {
        Self {
            alpha_re: 0.5,
            alpha_im: 0.0,
            l: 0.0,
            n: 0.0,
            velocity: None,
            momentum: None,
            train_period: None,
            truncation: 64,
            radial_factor: 3f64.sqrt(),
            kappa_scale: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub format: Format,
    pub path: Option<String>,
}

/// Evenly spaced values `min..=max`; `count = 1` yields `min`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Range {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Range {
    pub const fn single(value: f64) -> Self {
        Self { min: value, max: value, count: 1 }
    }

    pub fn values(&self) -> Vec<f64> {
        match self.count {
            0 => Vec::new(),
            1 => vec![self.min],
            n => (0..n)
                .map(|i| self.min + (self.max - self.min) * i as f64 / (n - 1) as f64)
                .collect(),
        }
    }

    fn check(&self, name: &str) -> Result<(), CliError> {
        finite(name, &[self.min, self.max])?;
        if self.count == 0 {
            return Err(CliError::Usage(format!("{name}.count must be at least 1")));
        }
        if self.count > 1 && !(self.max > self.min) {
            return Err(CliError::Usage(format!("{name}: max must exceed min when count > 1")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SampleConfig {
    pub field: FieldKind,
    pub t: Range,
    pub x: Range,
    pub y: Range,
    pub z: Range,
}

impl Default for SampleConfig {
    fn default() -> Self {
        Self {
            field: FieldKind::Psi,
            t: Range::single(0.0),
            x: Range { min: -5.0, max: 5.0, count: 11 },
            y: Range::single(0.0),
            z: Range::single(0.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyConfig {
    /// `psi`-like kinds are checked against Klein–Gordon, action kinds
    /// against the Hamilton–Jacobi equation.
    pub field: FieldKind,
    /// Number of random events, used when `events` is absent.
    pub points: usize,
    pub seed: u64,
    pub r_min: f64,
    pub r_max: f64,
    pub t_min: f64,
    pub t_max: f64,
    /// Explicit events `[t, x, y, z]`; replaces the random set.
    pub events: Option<Vec<[f64; 4]>>,
    pub h: f64,
    pub levels: usize,
    pub order_min: f64,
    pub order_max: f64,
    /// Largest residual accepted at spacing `residual_spacing`.
    pub residual_limit: Option<f64>,
    pub residual_spacing: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            field: FieldKind::Psi,
            points: 20,
            seed: 20_240_601,
            r_min: 0.2,
            r_max: 10.0,
            t_min: 0.0,
            t_max: 2.0 * PI,
            events: None,
            h: 0.02,
            levels: 3,
            order_min: 1.8,
            order_max: 2.2,
            residual_limit: Some(1e-3),
            residual_spacing: 0.01,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuantizeConfig {
    pub d: f64,
    pub p: Range,
    pub tolerance: f64,
    pub h: f64,
    pub t: f64,
    pub y: f64,
    pub z: f64,
}

impl Default for QuantizeConfig {
    fn default() -> Self {
        Self {
            d: 2.0 * PI,
            p: Range { min: 0.5, max: 3.5, count: 301 },
            tolerance: 1e-9,
            h: 0.01,
            t: 0.0,
            y: 0.0,
            z: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvolveConfig {
    /// Outer radius in units of `1/κ`.
    pub radius: f64,
    pub cells: usize,
    pub cfl: f64,
    /// Run length in periods `π/ω₀` of the evolved term.
    pub periods: f64,
    pub boundary: BoundaryDrive,
    /// Write every `every`-th history sample.
    pub every: usize,
    /// Where the JSON summary goes in CSV mode; defaults to
    /// `<output>.summary.json`, or the diagnostic stream without an output.
    pub summary: Option<String>,
}

impl Default for EvolveConfig {
    fn default() -> Self {
        Self {
            radius: 40.0,
            cells: 1024,
            cfl: 0.5,
            periods: 20.0,
            boundary: BoundaryDrive::Analytic,
            every: 1,
            summary: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectrumConfig {
    pub points: Vec<[f64; 3]>,
    pub periods: usize,
    pub samples_per_period: usize,
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        Self { points: vec![[50.0, 0.0, 0.0], [0.5, 0.0, 0.0]], periods: 16, samples_per_period: 64 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AverageEnergyConfig {
    pub points: Vec<[f64; 3]>,
    pub t0: f64,
    pub nodes: usize,
}

impl Default for AverageEnergyConfig {
    fn default() -> Self {
        Self { points: vec![[0.3, 0.0, 0.0], [0.7, 0.0, 0.0], [2.0, 0.0, 0.0]], t0: 0.0, nodes: 256 }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub units: UnitsConfig,
    pub breather: BreatherConfig,
    pub output: OutputConfig,
    pub sample: SampleConfig,
    pub verify: VerifyConfig,
    pub quantize: QuantizeConfig,
    pub evolve: EvolveConfig,
    pub spectrum: SpectrumConfig,
    pub average_energy: AverageEnergyConfig,
}

fn finite(name: &str, values: &[f64]) -> Result<(), CliError> {
    match values.iter().find(|v| !v.is_finite()) {
        Some(v) => Err(CliError::Usage(format!("{name} must be finite, got {v}"))),
        None => Ok(()),
    }
}

impl RunConfig {
    /// Parses a config document and applies `section.key=value` overrides.
    /// Override values are read as TOML, falling back to a plain string.
    pub fn from_toml(text: &str, overrides: &[String]) -> Result<Self, CliError> {
        let file: toml::Table =
            text.parse().map_err(|e| CliError::Usage(format!("cannot parse config: {e}")))?;
        let mut doc = toml::Table::try_from(RunConfig::default()).expect("defaults serialize");
        merge(&mut doc, file);
        for item in overrides {
            apply_override(&mut doc, item)?;
        }
        let config: RunConfig = toml::Value::Table(doc)
            .try_into()
            .map_err(|e| CliError::Usage(format!("invalid config: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self, CliError> {
        let text = match path {
            Some(p) => std::fs::read_to_string(p)
                .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", p.display())))?,
            None => String::new(),
        };
        Self::from_toml(&text, overrides)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let u = &self.units;
        finite("units", &[u.m, u.c, u.hbar])?;
        let b = &self.breather;
        finite("breather", &[b.alpha_re, b.alpha_im, b.l, b.n, b.radial_factor, b.kappa_scale])?;
        finite("breather", &[b.velocity, b.momentum, b.train_period].iter().flatten().copied().collect::<Vec<_>>())?;
        if b.velocity.is_some() && b.momentum.is_some() {
            return Err(CliError::Usage("breather.velocity and breather.momentum are mutually exclusive".into()));
        }
        let s = &self.sample;
        for (name, r) in [("sample.t", s.t), ("sample.x", s.x), ("sample.y", s.y), ("sample.z", s.z)] {
            r.check(name)?;
        }
        let v = &self.verify;
        finite("verify", &[v.r_min, v.r_max, v.t_min, v.t_max, v.h, v.order_min, v.order_max, v.residual_spacing])?;
        if let Some(events) = &v.events {
            finite("verify.events", &events.iter().flatten().copied().collect::<Vec<_>>())?;
        }
        if !(v.r_min >= 0.0 && v.r_max > v.r_min) || v.t_max < v.t_min {
            return Err(CliError::Usage("verify: need 0 <= r_min < r_max and t_min <= t_max".into()));
        }
        let q = &self.quantize;
        finite("quantize", &[q.d, q.tolerance, q.h, q.t, q.y, q.z])?;
        q.p.check("quantize.p")?;
        let e = &self.evolve;
        finite("evolve", &[e.radius, e.cfl, e.periods])?;
        if e.every == 0 {
            return Err(CliError::Usage("evolve.every must be at least 1".into()));
        }
        finite("spectrum.points", &self.spectrum.points.iter().flatten().copied().collect::<Vec<_>>())?;
        let a = &self.average_energy;
        finite("average_energy", &[a.t0])?;
        finite("average_energy.points", &a.points.iter().flatten().copied().collect::<Vec<_>>())?;
        Ok(())
    }

    pub fn params(&self) -> Result<PhysParams, CliError> {
        match self.units.system {
            UnitSystem::Natural => Ok(PhysParams::NATURAL),
            UnitSystem::Explicit => Ok(PhysParams::new(self.units.m, self.units.c, self.units.hbar)?),
        }
    }

    /// Breather spec from the `[breather]` section, without a train period.
    pub fn single_spec(&self, params: &PhysParams) -> Result<BreatherSpec, CliError> {
        let b = &self.breather;
        let boost = match (b.velocity, b.momentum) {
            (Some(v), None) => Boost::new(v),
            (None, Some(p)) => Boost::from_momentum(p, params)?,
            _ => Boost::REST,
        };
        let spec = BreatherSpec::new(Complex64::new(b.alpha_re, b.alpha_im))
            .with_mode(ModeIndex::from_f64(b.l, b.n)?)
            .with_boost(boost)
            .with_detuning(Detuning { radial_factor: b.radial_factor, kappa_scale: b.kappa_scale });
        boost.gamma(params)?;
        spec.validate()?;
        Ok(spec)
    }

    /// Full spec, including the train period when one is configured.
    pub fn spec(&self, params: &PhysParams) -> Result<BreatherSpec, CliError> {
        let spec = self.single_spec(params)?;
        let spec = match self.breather.train_period {
            Some(d) => spec.with_train(d, self.breather.truncation),
            None => spec,
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// Recursively overlays `top` onto `base`; tables merge, other values replace.
fn merge(base: &mut toml::Table, top: toml::Table) {
    for (key, value) in top {
        match (base.get_mut(&key), value) {
            (Some(toml::Value::Table(b)), toml::Value::Table(t)) => merge(b, t),
            (_, value) => {
                base.insert(key, value);
            }
        }
    }
}

fn apply_override(doc: &mut toml::Table, item: &str) -> Result<(), CliError> {
    let (path, raw) = item
        .split_once('=')
        .ok_or_else(|| CliError::Usage(format!("override `{item}` is not of the form section.key=value")))?;
    let keys: Vec<&str> = path.trim().split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(CliError::Usage(format!("override `{item}` has an empty key")));
    }
    let value = parse_value(raw.trim());
    let (last, parents) = keys.split_last().expect("split yields at least one key");
    let mut table = doc;
    for key in parents {
        let entry = table
            .entry(key.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        table = entry
            .as_table_mut()
            .ok_or_else(|| CliError::Usage(format!("override `{item}`: `{key}` is not a section")))?;
    }
    table.insert(last.to_string(), value);
    Ok(())
}

fn parse_value(raw: &str) -> toml::Value {
    format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}
