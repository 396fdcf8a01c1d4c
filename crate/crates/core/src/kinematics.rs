//! Physical constants, events and Lorentz boosts along the x-axis.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Mass, speed of light and reduced Planck constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysParams {
    m: f64,
    c: f64,
    hbar: f64,
}

impl PhysParams {
    /// Natural units `m = c = hbar = 1`.
    pub const NATURAL: PhysParams = PhysParams { m: 1.0, c: 1.0, hbar: 1.0 };

    pub fn new(m: f64, c: f64, hbar: f64) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::Domain(format!("speed of light must be positive, got {c}")));
        }
        if !(hbar.is_finite() && hbar > 0.0) {
            return Err(Error::Domain(format!("hbar must be positive, got {hbar}")));
        }
        if !(m.is_finite() && m >= 0.0) {
            return Err(Error::Domain(format!("mass must be non-negative, got {m}")));
        }
        Ok(Self { m, c, hbar })
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    /// Compton wavenumber `m c / hbar`.
    pub fn kappa(&self) -> f64 {
        self.m * self.c / self.hbar
    }

    /// Rest frequency `m c^2 / hbar`.
    pub fn omega0(&self) -> f64 {
        self.m * self.c * self.c / self.hbar
    }

    /// Rest energy `m c^2`.
    pub fn rest_energy(&self) -> f64 {
        self.m * self.c * self.c
    }

    pub fn is_massless(&self) -> bool {
        self.m == 0.0
    }
}

impl Default for PhysParams {
    fn default() -> Self {
        Self::NATURAL
    }
}

/// An event `(t, x, y, z)` in the lab frame.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SpacetimePoint {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl SpacetimePoint {
    pub const ORIGIN: SpacetimePoint = SpacetimePoint { t: 0.0, x: 0.0, y: 0.0, z: 0.0 };

    pub const fn new(t: f64, x: f64, y: f64, z: f64) -> Self {
        Self { t, x, y, z }
    }

    pub fn radius(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite() && self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn with_t(self, t: f64) -> Self {
        Self { t, ..self }
    }

    pub fn with_x(self, x: f64) -> Self {
        Self { x, ..self }
    }
}

/// Boost with velocity `v` along the x-axis.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Boost {
    pub v: f64,
}

impl Boost {
    pub const REST: Boost = Boost { v: 0.0 };

    pub fn new(v: f64) -> Self {
        Self { v }
    }

    /// Boost of a particle of momentum `p` (along x), `v = p c^2 / E`.
    pub fn from_momentum(p: f64, params: &PhysParams) -> Result<Self> {
        if params.is_massless() {
            return Err(Error::Kinematics(
                "a massless particle has no rest frame to boost from".into(),
            ));
        }
        if !p.is_finite() {
            return Err(Error::Kinematics(format!("momentum must be finite, got {p}")));
        }
        let c = params.c();
        let mc = params.m() * c;
        Ok(Self { v: p * c / (p * p + mc * mc).sqrt() })
    }

    pub fn is_rest(&self) -> bool {
        self.v == 0.0
    }

    /// Lorentz factor; fails unless `|v| < c`.
    pub fn gamma(&self, params: &PhysParams) -> Result<f64> {
        let beta = self.v / params.c();
        if !(beta.abs() < 1.0) {
            return Err(Error::Kinematics(format!(
                "boost velocity |v| = {} must be below c = {}",
                self.v.abs(),
                params.c()
            )));
        }
        Ok(1.0 / ((1.0 - beta) * (1.0 + beta)).sqrt())
    }
}

/// Maps a lab-frame event into the frame moving with velocity `v` along x:
/// `t' = γ(t - x v / c^2)`, `x' = γ(x - v t)`.
pub fn lorentz_map(p: &SpacetimePoint, boost: Boost, params: &PhysParams) -> Result<SpacetimePoint> {
    let gamma = boost.gamma(params)?;
    if boost.is_rest() {
        return Ok(*p);
    }
    let c = params.c();
    let v = boost.v;
    Ok(SpacetimePoint {
        t: gamma * (p.t - p.x * v / (c * c)),
        x: gamma * (p.x - v * p.t),
        y: p.y,
        z: p.z,
    })
}

/// Energy and momentum `(γ m c^2, γ m v)` of a free classical particle.
pub fn energy_momentum_classical(boost: Boost, params: &PhysParams) -> Result<(f64, f64)> {
    if params.is_massless() {
        return Err(Error::Kinematics(
            "energy and momentum of a massless particle are not fixed by its velocity".into(),
        ));
    }
    let gamma = boost.gamma(params)?;
    Ok((gamma * params.rest_energy(), gamma * params.m() * boost.v))
}

/// Rest-frame train period that keeps the lab-frame period `d` after the
/// contraction, `γ d`.
pub fn dilated_train_period(d: f64, boost: Boost, params: &PhysParams) -> Result<f64> {
    if !(d.is_finite() && d > 0.0) {
        return Err(Error::Domain(format!("train period must be positive, got {d}")));
    }
    Ok(boost.gamma(params)? * d)
}
