//! Closed-form breather fields: the two-term wave-function, its action
//! function `S = -i hbar Log Ψ`, boosted versions and d-periodic trains.
//!
//! With `u = α e^{-iω₀t} B(r, θ, φ)` and `B = j_l(√3 κ r) P_l^n(cos θ) e^{inφ}`
//! the rest-frame fields are
//!
//! ```text
//! Ψ = e^{-iω₀t} (1 + u)
//! S = -m c² t - i hbar Log(1 + u)
//! ```
//!
//! The logarithm is the principal branch; evaluation refuses any event with
//! `|u| >= 1`, which keeps `1 + u` in the right half-plane.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinematics::{dilated_train_period, energy_momentum_classical, lorentz_map, Boost, PhysParams, SpacetimePoint};
use crate::specfun::{assoc_legendre_p, spherical_bessel_j, ModeIndex};

/// Default number of train copies on each side of the central breather.
pub const DEFAULT_TRUNCATION: u32 = 64;

/// Anything that can be sampled as a complex field on spacetime events.
pub trait Evaluator: Sync {
    fn eval(&self, p: &SpacetimePoint) -> Result<Complex64>;
}

impl<F> Evaluator for F
where
    F: Fn(&SpacetimePoint) -> Result<Complex64> + Sync,
{
    fn eval(&self, p: &SpacetimePoint) -> Result<Complex64> {
        self(p)
    }
}

/// Radial wavenumber of the mode factor, `radial_factor * kappa_scale * κ`.
///
/// The defaults (`√3`, `1`) give the exact solution; anything else is only
/// useful as a negative control for the residual checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Detuning {
    pub radial_factor: f64,
    pub kappa_scale: f64,
}

impl Default for Detuning {
    fn default() -> Self {
        Self { radial_factor: 3f64.sqrt(), kappa_scale: 1.0 }
    }
}

impl Detuning {
    pub fn is_exact(&self) -> bool {
        *self == Self::default()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BreatherSpec {
    pub alpha: Complex64,
    pub mode: ModeIndex,
    pub boost: Boost,
    pub train_period: Option<f64>,
    pub truncation: u32,
    #[serde(default)]
    pub detuning: Detuning,
}

impl BreatherSpec {
    /// Spherically symmetric breather at rest with amplitude `alpha`.
    pub fn new(alpha: impl Into<Complex64>) -> Self {
        Self {
            alpha: alpha.into(),
            mode: ModeIndex::SPHERICAL,
            boost: Boost::REST,
            train_period: None,
            truncation: DEFAULT_TRUNCATION,
            detuning: Detuning::default(),
        }
    }

    pub fn with_mode(mut self, mode: ModeIndex) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_boost(mut self, boost: Boost) -> Self {
        self.boost = boost;
        self
    }

    pub fn with_train(mut self, period: f64, truncation: u32) -> Self {
        self.train_period = Some(period);
        self.truncation = truncation;
        self
    }

    pub fn with_detuning(mut self, detuning: Detuning) -> Self {
        self.detuning = detuning;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha.re.is_finite() && self.alpha.im.is_finite()) {
            return Err(Error::Domain(format!("amplitude must be finite, got {}", self.alpha)));
        }
        if !self.boost.v.is_finite() {
            return Err(Error::Kinematics(format!("boost velocity must be finite, got {}", self.boost.v)));
        }
        if let Some(d) = self.train_period {
            if !(d.is_finite() && d > 0.0) {
                return Err(Error::Domain(format!("train period must be positive, got {d}")));
            }
        }
        if self.truncation < 1 {
            return Err(Error::Domain("train truncation K must be at least 1".into()));
        }
        let Detuning { radial_factor, kappa_scale } = self.detuning;
        if !(radial_factor.is_finite() && radial_factor > 0.0 && kappa_scale.is_finite() && kappa_scale > 0.0) {
            return Err(Error::Domain("detuning factors must be positive and finite".into()));
        }
        Ok(())
    }

    /// Radial wavenumber of the mode factor.
    pub fn radial_wavenumber(&self, params: &PhysParams) -> f64 {
        self.detuning.radial_factor * self.detuning.kappa_scale * params.kappa()
    }
}

/// Outcome of the Bohr–Sommerfeld compatibility test `d p = 2π n hbar`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantizationReport {
    pub n_exact: Option<u64>,
    pub mismatch: f64,
}

fn require_massive(params: &PhysParams) -> Result<()> {
    if params.is_massless() {
        return Err(Error::Domain(
            "breather fields need m > 0; the massless limit at fixed energy has no closed form here".into(),
        ));
    }
    Ok(())
}

fn check_finite(value: Complex64, p: &SpacetimePoint) -> Result<Complex64> {
    if value.re.is_finite() && value.im.is_finite() {
        Ok(value)
    } else {
        Err(Error::Domain(format!("non-finite field value at {p:?}")))
    }
}

/// Spatial mode factor `j_l(k r) P_l^n(cos θ) e^{inφ}` at `(x, y, z)`.
///
/// On the axis and at the origin the undefined angles are taken as zero;
/// every `l >= 1` or `n != 0` factor vanishes there anyway.
pub fn mode_factor(x: f64, y: f64, z: f64, spec: &BreatherSpec, params: &PhysParams) -> Result<Complex64> {
    let k = spec.radial_wavenumber(params);
    let r = (x * x + y * y + z * z).sqrt();
    let radial = spherical_bessel_j(spec.mode.l(), k * r)?;
    if spec.mode.is_spherical() {
        return Ok(Complex64::new(radial, 0.0));
    }
    let cos_theta = if r > 0.0 { (z / r).clamp(-1.0, 1.0) } else { 1.0 };
    let polar = assoc_legendre_p(spec.mode.l(), spec.mode.n(), cos_theta)?;
    let rho = x.hypot(y);
    let phi = if rho > 0.0 { y.atan2(x) } else { 0.0 };
    Ok(Complex64::from_polar(radial * polar, spec.mode.n() as f64 * phi))
}

fn require_single(spec: &BreatherSpec) -> Result<()> {
    spec.validate()?;
    if spec.train_period.is_some() {
        return Err(Error::Domain("single-breather constructor called with a train period".into()));
    }
    Ok(())
}

fn require_rest(spec: &BreatherSpec) -> Result<()> {
    if !spec.boost.is_rest() {
        return Err(Error::Domain("rest-frame constructor called with a non-zero boost".into()));
    }
    Ok(())
}

fn require_log_safe(spec: &BreatherSpec) -> Result<()> {
    if !(spec.alpha.norm() < 1.0) {
        return Err(Error::BranchSafety {
            magnitude: spec.alpha.norm(),
            t: f64::NAN,
            x: f64::NAN,
            y: f64::NAN,
            z: f64::NAN,
        });
    }
    Ok(())
}

fn branch_error(u: Complex64, p: &SpacetimePoint) -> Error {
    Error::BranchSafety { magnitude: u.norm(), t: p.t, x: p.x, y: p.y, z: p.z }
}

/// The excitation `u = α e^{-iω₀t} B` at a rest-frame event.
fn excitation(p: &SpacetimePoint, spec: &BreatherSpec, params: &PhysParams) -> Result<Complex64> {
    let phase = Complex64::from_polar(1.0, -params.omega0() * p.t);
    Ok(spec.alpha * phase * mode_factor(p.x, p.y, p.z, spec, params)?)
}

fn psi_rest_unchecked(p: &SpacetimePoint, spec: &BreatherSpec, params: &PhysParams) -> Result<Complex64> {
    let w = params.omega0() * p.t;
    let first = Complex64::from_polar(1.0, -w);
    let second = spec.alpha * Complex64::from_polar(1.0, -2.0 * w) * mode_factor(p.x, p.y, p.z, spec, params)?;
    check_finite(first + second, p)
}

fn action_rest_unchecked(p: &SpacetimePoint, spec: &BreatherSpec, params: &PhysParams) -> Result<Complex64> {
    let u = excitation(p, spec, params)?;
    if !(u.norm() < 1.0) {
        return Err(branch_error(u, p));
    }
    let hbar = params.hbar();
    let log = (Complex64::new(1.0, 0.0) + u).ln();
    let s = Complex64::new(-params.rest_energy() * p.t, 0.0) - Complex64::i() * hbar * log;
    check_finite(s, p)
}

/// Two-term wave-function `e^{-iω₀t} + α e^{-2iω₀t} B` of a breather at rest.
pub fn psi_rest(p: &SpacetimePoint, spec: &BreatherSpec, params: &PhysParams) -> Result<Complex64> {
    require_massive(params)?;
    require_single(spec)?;
    require_rest(spec)?;
    psi_rest_unchecked(p, spec, params)
}

/// Action function `-m c² t - i hbar Log(1 + u)` of a breather at rest.
pub fn action_rest(p: &SpacetimePoint, spec: &BreatherSpec, params: &PhysParams) -> Result<Complex64> {
    require_massive(params)?;
    require_single(spec)?;
    require_rest(spec)?;
    require_log_safe(spec)?;
    action_rest_unchecked(p, spec, params)
}

/// Far-field action `-m c² t - i hbar u`, the first-order expansion of the
/// logarithm.
pub fn action_far(p: &SpacetimePoint, spec: &BreatherSpec, params: &PhysParams) -> Result<Complex64> {
    require_massive(params)?;
    require_single(spec)?;
    require_log_safe(spec)?;
    let q = lorentz_map(p, spec.boost, params)?;
    let u = excitation(&q, spec, params)?;
    let s = Complex64::new(-params.rest_energy() * q.t, 0.0) - Complex64::i() * params.hbar() * u;
    check_finite(s, p)
}

/// Rest-frame wave-function evaluated at the boosted event.
pub fn psi_moving(p: &SpacetimePoint, spec: &BreatherSpec, params: &PhysParams) -> Result<Complex64> {
    require_massive(params)?;
    require_single(spec)?;
    let q = lorentz_map(p, spec.boost, params)?;
    psi_rest_unchecked(&q, spec, params)
}

/// Rest-frame action evaluated at the boosted event; the leading term is
/// `-E t + p x`.
pub fn action_moving(p: &SpacetimePoint, spec: &BreatherSpec, params: &PhysParams) -> Result<Complex64> {
    require_massive(params)?;
    require_single(spec)?;
    require_log_safe(spec)?;
    let q = lorentz_map(p, spec.boost, params)?;
    action_rest_unchecked(&q, spec, params)
}

/// Phase `(-E t + p x)/hbar` and the symmetric partial sum
/// `Σ_{|k|<=K} j0(k_r r_k)` of a d-periodic train, with
/// `r_k² = (γ (x - v t - k d))² + y² + z²`.
fn train_terms(p: &SpacetimePoint, spec: &BreatherSpec, params: &PhysParams) -> Result<(f64, f64)> {
    require_massive(params)?;
    spec.validate()?;
    let d = spec
        .train_period
        .ok_or_else(|| Error::Domain("train constructor needs a train period".into()))?;
    if !spec.mode.is_spherical() {
        return Err(Error::Domain("breather trains are built from the l = n = 0 mode only".into()));
    }
    let (energy, momentum) = energy_momentum_classical(spec.boost, params)?;
    let gamma = spec.boost.gamma(params)?;
    // γ(x - v t - k d) = x' - k d', with d' = γ d the rest-frame period
    let rest_period = dilated_train_period(d, spec.boost, params)?;
    let x_rest = gamma * (p.x - spec.boost.v * p.t);
    let k_r = spec.radial_wavenumber(params);
    let transverse = p.y * p.y + p.z * p.z;
    let big_k = spec.truncation as i64;
    let mut sum = 0.0;
    // accumulate from the outermost copies inwards to limit rounding growth
    for k in (1..=big_k).rev() {
        for kk in [k, -k] {
            let dx = x_rest - kk as f64 * rest_period;
            let r = (dx * dx + transverse).sqrt();
            sum += spherical_bessel_j(0, k_r * r)?;
        }
    }
    let r0 = (x_rest * x_rest + transverse).sqrt();
    sum += spherical_bessel_j(0, k_r * r0)?;
    let theta = (-energy * p.t + momentum * p.x) / params.hbar();
    Ok((theta, sum))
}

/// Action function of a d-periodic breather train,
/// `-E t + p x - i hbar Log(1 + α e^{i(-E t + p x)/hbar} Σ_k j0)`.
///
/// For a train at rest this is `-m c² t - i hbar Log(1 + α e^{-iω₀t} Σ_k j0)`.
pub fn action_train(p: &SpacetimePoint, spec: &BreatherSpec, params: &PhysParams) -> Result<Complex64> {
    let (theta, sum) = train_terms(p, spec, params)?;
    let u = spec.alpha * Complex64::from_polar(1.0, theta) * sum;
    if !(u.norm() < 1.0) {
        return Err(branch_error(u, p));
    }
    let hbar = params.hbar();
    let s = Complex64::new(hbar * theta, 0.0) - Complex64::i() * hbar * (Complex64::new(1.0, 0.0) + u).ln();
    check_finite(s, p)
}

/// Wave-function of a d-periodic train, `e^{iθ} + α e^{2iθ} Σ_k j0`.
pub fn psi_train(p: &SpacetimePoint, spec: &BreatherSpec, params: &PhysParams) -> Result<Complex64> {
    let (theta, sum) = train_terms(p, spec, params)?;
    let psi = Complex64::from_polar(1.0, theta) + spec.alpha * Complex64::from_polar(1.0, 2.0 * theta) * sum;
    check_finite(psi, p)
}

/// Classical free-particle action `-E t + p x`.
pub fn action_classical(p: &SpacetimePoint, energy: f64, momentum: f64) -> Complex64 {
    Complex64::new(-energy * p.t + momentum * p.x, 0.0)
}

/// Bohr–Sommerfeld test: `ν = d p / (2π hbar)` must be a positive integer
/// within `tol`.
pub fn quantization_check(d: f64, momentum: f64, params: &PhysParams, tol: f64) -> Result<QuantizationReport> {
    if !(d.is_finite() && d > 0.0) {
        return Err(Error::Domain(format!("interval length must be positive, got {d}")));
    }
    if !(momentum.is_finite() && momentum > 0.0) {
        return Err(Error::Domain(format!("momentum must be positive, got {momentum}")));
    }
    if !(tol.is_finite() && tol >= 0.0) {
        return Err(Error::Domain(format!("tolerance must be non-negative, got {tol}")));
    }
    let nu = d * momentum / (2.0 * std::f64::consts::PI * params.hbar());
    let nearest = nu.round();
    let mismatch = (nu - nearest).abs();
    let n_exact = (mismatch <= tol && nearest >= 1.0).then_some(nearest as u64);
    Ok(QuantizationReport { n_exact, mismatch })
}

/// Which closed-form field to sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FieldKind {
    /// Two-term wave-function, boosted when the spec carries a velocity.
    Psi,
    /// Action function, boosted when the spec carries a velocity.
    Action,
    /// First-order far-field action.
    ActionFar,
    /// Wave-function of a d-periodic train.
    PsiTrain,
    /// Action function of a d-periodic train.
    ActionTrain,
}

impl FieldKind {
    pub fn is_action(&self) -> bool {
        matches!(self, FieldKind::Action | FieldKind::ActionFar | FieldKind::ActionTrain)
    }
}

/// A breather spec bound to physical constants and a field kind; shareable
/// across threads and usable wherever an [`Evaluator`] is expected.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BreatherField {
    pub spec: BreatherSpec,
    pub params: PhysParams,
    pub kind: FieldKind,
}

impl BreatherField {
    pub fn new(spec: BreatherSpec, params: PhysParams, kind: FieldKind) -> Result<Self> {
        spec.validate()?;
        require_massive(&params)?;
        spec.boost.gamma(&params)?;
        let train = matches!(kind, FieldKind::PsiTrain | FieldKind::ActionTrain);
        if train != spec.train_period.is_some() {
            return Err(Error::Domain(format!(
                "field kind {kind:?} does not match the presence of a train period"
            )));
        }
        if kind.is_action() && !kind.eq(&FieldKind::ActionTrain) {
            require_log_safe(&spec)?;
        }
        Ok(Self { spec, params, kind })
    }
}

impl Evaluator for BreatherField {
    fn eval(&self, p: &SpacetimePoint) -> Result<Complex64> {
        match self.kind {
            FieldKind::Psi => psi_moving(p, &self.spec, &self.params),
            FieldKind::Action => action_moving(p, &self.spec, &self.params),
            FieldKind::ActionFar => action_far(p, &self.spec, &self.params),
            FieldKind::PsiTrain => psi_train(p, &self.spec, &self.params),
            FieldKind::ActionTrain => action_train(p, &self.spec, &self.params),
        }
    }
}
