//! Finite-difference verification of fields against the Klein–Gordon and
//! quantum Hamilton–Jacobi equations, plus the derived checks built on the
//! same stencils: gradient energy/momentum, period averages, far-field
//! spectra and periodic boundary conditions.
//!
//! Every residual is evaluated pointwise on a 9-point stencil (centre and
//! `±h` along x, y, z, `±h/c` along t). A refinement study repeats the
//! stencil with `h, h/2, h/4, ...` and reports the observed order
//! `log2(res(h) / res(h/2))`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::fields::Evaluator;
use crate::kinematics::{PhysParams, SpacetimePoint};
use crate::quadrature;
use crate::spectrum;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StencilConfig {
    pub h: f64,
    pub refinement_levels: usize,
}

impl Default for StencilConfig {
    fn default() -> Self {
        Self { h: 0.01, refinement_levels: 3 }
    }
}

impl StencilConfig {
    pub fn new(h: f64, refinement_levels: usize) -> Result<Self> {
        let cfg = Self { h, refinement_levels };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.h.is_finite() && self.h > 0.0) {
            return Err(Error::Config(format!("stencil spacing must be positive, got {}", self.h)));
        }
        if self.refinement_levels < 2 {
            return Err(Error::Config(format!(
                "a convergence study needs at least 2 refinement levels, got {}",
                self.refinement_levels
            )));
        }
        Ok(())
    }

    /// `h, h/2, h/4, ...`, coarsest first.
    pub fn spacings(&self) -> Vec<f64> {
        (0..self.refinement_levels).map(|i| self.h / (1u64 << i) as f64).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelResidual {
    pub h: f64,
    pub max_abs: f64,
    pub l2: f64,
}

/// Residual magnitudes per refinement level.
///
/// `max_abs` and `l2` at the top level refer to the finest spacing;
/// `orders` holds `log2` of each successive ratio and `convergence_order`
/// the one between the two finest levels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub max_abs: f64,
    pub l2: f64,
    pub per_level: Vec<LevelResidual>,
    pub orders: Vec<f64>,
    pub convergence_order: f64,
}

impl ResidualReport {
    /// Builds a report from residual values grouped by spacing (coarsest
    /// first). Each group may hold one point or many.
    pub fn from_levels(levels: &[(f64, Vec<Complex64>)]) -> Self {
        let per_level: Vec<LevelResidual> = levels
            .iter()
            .map(|(h, values)| {
                let max_abs = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
                let l2 = if values.is_empty() {
                    0.0
                } else {
                    (values.iter().map(|v| v.norm_sqr()).sum::<f64>() / values.len() as f64).sqrt()
                };
                LevelResidual { h: *h, max_abs, l2 }
            })
            .collect();
        Self::from_per_level(per_level)
    }

    fn from_per_level(per_level: Vec<LevelResidual>) -> Self {
        let orders: Vec<f64> = per_level
            .windows(2)
            .map(|w| (w[0].max_abs / w[1].max_abs).ln() / (w[0].h / w[1].h).ln())
            .collect();
        let last = per_level.last().copied().unwrap_or(LevelResidual { h: 0.0, max_abs: 0.0, l2: 0.0 });
        Self {
            max_abs: last.max_abs,
            l2: last.l2,
            convergence_order: orders.last().copied().unwrap_or(f64::NAN),
            orders,
            per_level,
        }
    }

    /// Combines per-point reports taken at identical spacings: maximum and
    /// root-mean-square over points, level by level.
    pub fn aggregate(reports: &[ResidualReport]) -> Result<Self> {
        let first = reports
            .first()
            .ok_or_else(|| Error::Config("cannot aggregate an empty set of reports".into()))?;
        let mut per_level = Vec::with_capacity(first.per_level.len());
        for (i, level) in first.per_level.iter().enumerate() {
            let mut max_abs: f64 = 0.0;
            let mut sq = 0.0;
            for r in reports {
                let other = r
                    .per_level
                    .get(i)
                    .filter(|o| o.h == level.h)
                    .ok_or_else(|| Error::Config("reports use different refinement levels".into()))?;
                max_abs = max_abs.max(other.max_abs);
                sq += other.l2 * other.l2;
            }
            per_level.push(LevelResidual { h: level.h, max_abs, l2: (sq / reports.len() as f64).sqrt() });
        }
        Ok(Self::from_per_level(per_level))
    }

    /// Residual magnitude at spacing `h`, if that level was computed.
    pub fn at_spacing(&self, h: f64) -> Option<f64> {
        self.per_level
            .iter()
            .find(|l| (l.h - h).abs() <= 1e-12 * h)
            .map(|l| l.max_abs)
    }

    /// Whether every successive order lies within `[lo, hi]`.
    pub fn orders_within(&self, lo: f64, hi: f64) -> bool {
        !self.orders.is_empty() && self.orders.iter().all(|q| (lo..=hi).contains(q))
    }
}

/// Potentials `(U, A)` at one event, both in energy units.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ExternalFieldSample {
    pub u: f64,
    pub a: [f64; 3],
}

pub trait PotentialEvaluator: Sync {
    fn eval(&self, p: &SpacetimePoint) -> Result<ExternalFieldSample>;
}

impl<F> PotentialEvaluator for F
where
    F: Fn(&SpacetimePoint) -> Result<ExternalFieldSample> + Sync,
{
    fn eval(&self, p: &SpacetimePoint) -> Result<ExternalFieldSample> {
        self(p)
    }
}

/// Values of a field on the 9-point stencil.
struct Stencil<T> {
    center: T,
    t: [T; 2],
    x: [T; 2],
    y: [T; 2],
    z: [T; 2],
    ht: f64,
    h: f64,
}

fn sample_stencil<T, F>(mut f: F, at: &SpacetimePoint, h: f64, c: f64) -> Result<Stencil<T>>
where
    F: FnMut(&SpacetimePoint) -> Result<T>,
{
    let ht = h / c;
    let p = *at;
    Ok(Stencil {
        center: f(&p)?,
        t: [f(&SpacetimePoint { t: p.t + ht, ..p })?, f(&SpacetimePoint { t: p.t - ht, ..p })?],
        x: [f(&SpacetimePoint { x: p.x + h, ..p })?, f(&SpacetimePoint { x: p.x - h, ..p })?],
        y: [f(&SpacetimePoint { y: p.y + h, ..p })?, f(&SpacetimePoint { y: p.y - h, ..p })?],
        z: [f(&SpacetimePoint { z: p.z + h, ..p })?, f(&SpacetimePoint { z: p.z - h, ..p })?],
        ht,
        h,
    })
}

impl Stencil<Complex64> {
    fn d_t(&self) -> Complex64 {
        (self.t[0] - self.t[1]) / (2.0 * self.ht)
    }

    fn grad(&self) -> [Complex64; 3] {
        let s = 2.0 * self.h;
        [(self.x[0] - self.x[1]) / s, (self.y[0] - self.y[1]) / s, (self.z[0] - self.z[1]) / s]
    }

    fn second(&self, pair: &[Complex64; 2]) -> Complex64 {
        pair[0] - 2.0 * self.center + pair[1]
    }

    /// `(1/c^2) f_tt - ∇² f`; the time spacing is `h/c`, so the time term is
    /// a plain second difference over `h^2`.
    fn dalembertian(&self) -> Complex64 {
        let h2 = self.h * self.h;
        (self.second(&self.t) - self.second(&self.x) - self.second(&self.y) - self.second(&self.z)) / h2
    }
}

fn refine<F>(cfg: &StencilConfig, mut at_level: F) -> Result<ResidualReport>
where
    F: FnMut(f64) -> Result<Complex64>,
{
    cfg.validate()?;
    let levels = cfg
        .spacings()
        .into_iter()
        .map(|h| Ok((h, vec![at_level(h)?])))
        .collect::<Result<Vec<_>>>()?;
    Ok(ResidualReport::from_levels(&levels))
}

/// Klein–Gordon residual `□Ψ + κ²Ψ` at one spacing.
pub fn kg_residual_at(field: &dyn Evaluator, at: &SpacetimePoint, h: f64, params: &PhysParams) -> Result<Complex64> {
    let s = sample_stencil(|p| field.eval(p), at, h, params.c())?;
    let kappa = params.kappa();
    Ok(s.dalembertian() + kappa * kappa * s.center)
}

/// Refinement study of the Klein–Gordon residual at one event.
pub fn kg_residual(
    field: &dyn Evaluator,
    at: &SpacetimePoint,
    cfg: &StencilConfig,
    params: &PhysParams,
) -> Result<ResidualReport> {
    refine(cfg, |h| kg_residual_at(field, at, h, params))
}

/// Residual of the field-coupled Hamilton–Jacobi equation at one spacing,
/// `(1/c²)(S_t + U)² - (∇S - A/c)² - m²c² - i hbar □S`.
pub fn qhj_field_residual_at(
    action: &dyn Evaluator,
    potentials: &dyn PotentialEvaluator,
    at: &SpacetimePoint,
    h: f64,
    params: &PhysParams,
) -> Result<Complex64> {
    let s = sample_stencil(|p| action.eval(p), at, h, params.c())?;
    let ext = potentials.eval(at)?;
    let c = params.c();
    let m = params.m();
    let grad = s.grad();
    let temporal = s.d_t() + ext.u;
    let mut spatial = Complex64::new(0.0, 0.0);
    for (g, a) in grad.iter().zip(ext.a.iter()) {
        let k = g - a / c;
        spatial += k * k;
    }
    let box_s = s.dalembertian();
    Ok(temporal * temporal / (c * c) - spatial - m * m * c * c - Complex64::i() * params.hbar() * box_s)
}

fn zero_potentials(_: &SpacetimePoint) -> Result<ExternalFieldSample> {
    Ok(ExternalFieldSample::default())
}

/// Free Hamilton–Jacobi residual `(1/c²)S_t² - (∇S)² - m²c² - i hbar □S` at
/// one spacing. Same code path as the field-coupled version with `U = A = 0`.
pub fn qhj_residual_at(action: &dyn Evaluator, at: &SpacetimePoint, h: f64, params: &PhysParams) -> Result<Complex64> {
    qhj_field_residual_at(action, &zero_potentials, at, h, params)
}

pub fn qhj_residual(
    action: &dyn Evaluator,
    at: &SpacetimePoint,
    cfg: &StencilConfig,
    params: &PhysParams,
) -> Result<ResidualReport> {
    refine(cfg, |h| qhj_residual_at(action, at, h, params))
}

pub fn qhj_field_residual(
    action: &dyn Evaluator,
    potentials: &dyn PotentialEvaluator,
    at: &SpacetimePoint,
    cfg: &StencilConfig,
    params: &PhysParams,
) -> Result<ResidualReport> {
    refine(cfg, |h| qhj_field_residual_at(action, potentials, at, h, params))
}

/// Lorenz-gauge defect `(1/c) ∂U/∂t + div A` at one spacing.
pub fn lorenz_gauge_residual_at(
    potentials: &dyn PotentialEvaluator,
    at: &SpacetimePoint,
    h: f64,
    params: &PhysParams,
) -> Result<f64> {
    let s = sample_stencil(|p| potentials.eval(p), at, h, params.c())?;
    let du_dt = (s.t[0].u - s.t[1].u) / (2.0 * s.ht);
    let div = (s.x[0].a[0] - s.x[1].a[0] + s.y[0].a[1] - s.y[1].a[1] + s.z[0].a[2] - s.z[1].a[2]) / (2.0 * h);
    Ok(du_dt / params.c() + div)
}

pub fn lorenz_gauge_residual(
    potentials: &dyn PotentialEvaluator,
    at: &SpacetimePoint,
    cfg: &StencilConfig,
    params: &PhysParams,
) -> Result<ResidualReport> {
    refine(cfg, |h| lorenz_gauge_residual_at(potentials, at, h, params).map(|v| Complex64::new(v, 0.0)))
}

/// Refinement studies at many events, evaluated in parallel; results keep
/// the order of `points`.
pub fn residual_batch<F>(points: &[SpacetimePoint], study: F) -> Vec<Result<ResidualReport>>
where
    F: Fn(&SpacetimePoint) -> Result<ResidualReport> + Sync + Send,
{
    points.par_iter().map(&study).collect()
}

/// Gradient energy and momentum `E = -∂S/∂t`, `p = ∇S`; complex near the
/// breather core.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyMomentum {
    pub energy: Complex64,
    pub momentum: [Complex64; 3],
}

impl EnergyMomentum {
    /// `E² - c² p·p - m² c⁴` (bilinear, no conjugation).
    pub fn dispersion_defect(&self, params: &PhysParams) -> Complex64 {
        let c = params.c();
        let p2: Complex64 = self.momentum.iter().map(|p| p * p).sum();
        let mc2 = params.rest_energy();
        self.energy * self.energy - c * c * p2 - mc2 * mc2
    }
}

pub fn energy_momentum_field(
    action: &dyn Evaluator,
    at: &SpacetimePoint,
    cfg: &StencilConfig,
    params: &PhysParams,
) -> Result<EnergyMomentum> {
    cfg.validate()?;
    let s = sample_stencil(|p| action.eval(p), at, cfg.h, params.c())?;
    Ok(EnergyMomentum { energy: -s.d_t(), momentum: s.grad() })
}

/// Largest dispersion defect over one radial wavelength of the mode around
/// radius `r` (along `direction`) and one rest period in time. This is the
/// local envelope of a quantity that oscillates with `j0`.
pub fn dispersion_defect_envelope(
    action: &dyn Evaluator,
    r: f64,
    direction: [f64; 3],
    radial_wavenumber: f64,
    cfg: &StencilConfig,
    params: &PhysParams,
    samples: usize,
) -> Result<f64> {
    let norm = direction.iter().map(|d| d * d).sum::<f64>().sqrt();
    if !(norm > 0.0) || samples < 2 || !(radial_wavenumber > 0.0) {
        return Err(Error::Config("envelope scan needs a direction, a wavenumber and >= 2 samples".into()));
    }
    let dir = direction.map(|d| d / norm);
    let half_wave = PI / radial_wavenumber;
    let period = 2.0 * PI / params.omega0();
    let mut worst: f64 = 0.0;
    for i in 0..samples {
        let rr = r - half_wave + 2.0 * half_wave * i as f64 / (samples - 1) as f64;
        for j in 0..samples {
            let t = period * j as f64 / samples as f64;
            let at = SpacetimePoint::new(t, rr * dir[0], rr * dir[1], rr * dir[2]);
            let em = energy_momentum_field(action, &at, cfg, params)?;
            worst = worst.max(em.dispersion_defect(params).norm());
        }
    }
    Ok(worst)
}

/// Step used for `-∂S/∂t` inside period averages, as a fraction of the
/// period. Over a full period the mean of a central difference equals the
/// mean derivative for any step, so a coarse step only reduces roundoff.
const AVERAGE_STEP_FRACTION: f64 = 0.125;

/// Time average of `-∂S/∂t` over one rest period `2π/ω₀` at a fixed point,
/// starting at `t0`, using the `nodes`-point trapezoidal rule.
///
/// The oscillating part of `S` is periodic, so its difference quotient
/// averages to zero with spectral accuracy.
pub fn average_energy_from(
    action: &dyn Evaluator,
    x: f64,
    y: f64,
    z: f64,
    t0: f64,
    params: &PhysParams,
    nodes: usize,
) -> Result<Complex64> {
    if nodes < 2 {
        return Err(Error::Config(format!("period average needs at least 2 nodes, got {nodes}")));
    }
    if !(params.omega0() > 0.0) {
        return Err(Error::Domain("period average needs a non-zero rest frequency".into()));
    }
    let period = 2.0 * PI / params.omega0();
    let dt = AVERAGE_STEP_FRACTION * period;
    let mut sum = Complex64::new(0.0, 0.0);
    for j in 0..nodes {
        let t = t0 + period * j as f64 / nodes as f64;
        let fwd = action.eval(&SpacetimePoint::new(t + dt, x, y, z))?;
        let bwd = action.eval(&SpacetimePoint::new(t - dt, x, y, z))?;
        sum += -(fwd - bwd) / (2.0 * dt);
    }
    Ok(sum / nodes as f64)
}

pub fn average_energy(
    action: &dyn Evaluator,
    at: [f64; 3],
    params: &PhysParams,
    nodes: usize,
) -> Result<Complex64> {
    average_energy_from(action, at[0], at[1], at[2], 0.0, params, nodes)
}

/// Experimental: volume average of `-∂S/∂t` over a ball of radius `radius`
/// at time `t`, assuming a spherically symmetric action (sampled along +x).
/// Unlike the period average this is not pinned to `m c²`.
pub fn spatial_average_energy(
    action: &dyn Evaluator,
    t: f64,
    radius: f64,
    params: &PhysParams,
    radial_nodes: usize,
) -> Result<Complex64> {
    if !(radius > 0.0) || radial_nodes < 1 {
        return Err(Error::Config("spatial average needs a positive radius and nodes".into()));
    }
    let dt = 1e-4 * 2.0 * PI / params.omega0().max(f64::MIN_POSITIVE);
    let (nodes, weights) = quadrature::gauss_legendre(radial_nodes);
    let mut sum = Complex64::new(0.0, 0.0);
    for (x, w) in nodes.iter().zip(&weights) {
        let r = 0.5 * radius * (x + 1.0);
        let fwd = action.eval(&SpacetimePoint::new(t + dt, r, 0.0, 0.0))?;
        let bwd = action.eval(&SpacetimePoint::new(t - dt, r, 0.0, 0.0))?;
        sum += -(fwd - bwd) / (2.0 * dt) * (w * r * r);
    }
    // (3/R³) ∫₀^R r² E dr, with dr = R/2 dx
    Ok(sum * 0.5 * radius * 3.0 / radius.powi(3))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    /// Angular frequency of the strongest non-DC bin.
    pub peak_frequency: f64,
    /// Power at `2ω₀` over power at `ω₀`, both sidebands summed.
    pub harmonic_ratio: f64,
    /// Angular frequency resolution of the transform.
    pub bin_width: f64,
    /// Set when the perturbation signal is identically zero.
    pub zero_signal: bool,
}

/// Spectrum of the action perturbation `w(t) = S(t) + m c² t` at a fixed
/// point over an integer number of rest periods (rectangular window).
pub fn far_field_spectrum(
    action: &dyn Evaluator,
    at: [f64; 3],
    params: &PhysParams,
    n_periods: usize,
    samples_per_period: usize,
) -> Result<SpectrumReport> {
    if n_periods < 8 || samples_per_period < 32 {
        return Err(Error::Config(format!(
            "spectrum needs >= 8 periods and >= 32 samples per period, got {n_periods} and {samples_per_period}"
        )));
    }
    let omega0 = params.omega0();
    if !(omega0 > 0.0) {
        return Err(Error::Domain("spectrum needs a non-zero rest frequency".into()));
    }
    let period = 2.0 * PI / omega0;
    let n = n_periods * samples_per_period;
    let dt = period / samples_per_period as f64;
    let rest = params.rest_energy();
    let samples = (0..n)
        .map(|j| {
            let t = j as f64 * dt;
            Ok(action.eval(&SpacetimePoint::new(t, at[0], at[1], at[2]))? + rest * t)
        })
        .collect::<Result<Vec<_>>>()?;
    let bin_width = 2.0 * PI / (n as f64 * dt);

    let t_end = n as f64 * dt;
    let floor = 64.0 * f64::EPSILON * (rest * t_end).max(params.hbar());
    if samples.iter().all(|w| w.norm() <= floor) {
        return Ok(SpectrumReport { peak_frequency: 0.0, harmonic_ratio: 0.0, bin_width, zero_signal: true });
    }

    let power = spectrum::power_spectrum(&samples);
    let peak = spectrum::peak_bin(&power);
    let peak_frequency = spectrum::signed_bin(peak, n).unsigned_abs() as f64 * bin_width;
    let fundamental = spectrum::two_sided_power(&power, n_periods);
    let harmonic = spectrum::two_sided_power(&power, 2 * n_periods);
    Ok(SpectrumReport {
        peak_frequency,
        harmonic_ratio: harmonic / fundamental,
        bin_width,
        zero_signal: false,
    })
}

/// Mismatches `|∂S/∂t(0) - ∂S/∂t(d)|` and `|∂S/∂x(0) - ∂S/∂x(d)|` of the
/// periodic boundary conditions on `0 < x < d`, by central differences with
/// the base spacing of `cfg`.
pub fn boundary_condition_check(
    action: &dyn Evaluator,
    d: f64,
    y: f64,
    z: f64,
    t: f64,
    cfg: &StencilConfig,
    params: &PhysParams,
) -> Result<(f64, f64)> {
    cfg.validate()?;
    if !(d.is_finite() && d > 0.0) {
        return Err(Error::Domain(format!("interval length must be positive, got {d}")));
    }
    let h = cfg.h;
    let ht = h / params.c();
    let derivs = |x: f64| -> Result<(Complex64, Complex64)> {
        let st = (action.eval(&SpacetimePoint::new(t + ht, x, y, z))?
            - action.eval(&SpacetimePoint::new(t - ht, x, y, z))?)
            / (2.0 * ht);
        let sx = (action.eval(&SpacetimePoint::new(t, x + h, y, z))?
            - action.eval(&SpacetimePoint::new(t, x - h, y, z))?)
            / (2.0 * h);
        Ok((st, sx))
    };
    let (t0, x0) = derivs(0.0)?;
    let (td, xd) = derivs(d)?;
    Ok(((t0 - td).norm(), (x0 - xd).norm()))
}
