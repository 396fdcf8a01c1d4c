//! Leapfrog evolution of the spherically symmetric Klein–Gordon equation.
//!
//! The reduced field `u = r Ψ` obeys `(1/c²) u_tt = u_rr - κ² u` with
//! `u(0) = 0`. Only the breather term `α e^{-2iω₀t} j0(√3κr)` of the
//! two-term solution is evolved; the uniform term is added back
//! analytically where the action function is needed. The outer boundary is
//! clamped to the mode value, at the analytic frequency by default.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::fields::BreatherSpec;
use crate::kinematics::PhysParams;
use crate::specfun::spherical_bessel_j;
use crate::spectrum;

/// Largest Courant number accepted by [`RadialGrid::new`].
pub const MAX_CFL: f64 = 0.9;

/// Core region `[0, CORE_RADIUS/κ]` used for the norm diagnostic.
pub const CORE_RADIUS: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialGrid {
    pub radius: f64,
    pub cells: usize,
    pub dr: f64,
    pub dt: f64,
}

impl RadialGrid {
    pub fn new(radius: f64, cells: usize, dt: f64, params: &PhysParams) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::Config(format!("outer radius must be positive, got {radius}")));
        }
        if cells < 8 {
            return Err(Error::Config(format!("radial grid needs at least 8 cells, got {cells}")));
        }
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::Config(format!("time step must be positive, got {dt}")));
        }
        let grid = Self { radius, cells, dr: radius / cells as f64, dt };
        let cfl = grid.cfl(params);
        if cfl > MAX_CFL {
            return Err(Error::Config(format!("CFL number {cfl:.4} exceeds {MAX_CFL}")));
        }
        Ok(grid)
    }

    /// Grid whose time step is the largest one not exceeding `cfl` that
    /// divides the mode period `π/ω₀` into an integer number of steps.
    pub fn synchronized(radius: f64, cells: usize, cfl: f64, params: &PhysParams) -> Result<Self> {
        if !(cfl.is_finite() && cfl > 0.0) {
            return Err(Error::Config(format!("CFL number must be positive, got {cfl}")));
        }
        if !(params.omega0() > 0.0) {
            return Err(Error::Domain("evolution needs m > 0".into()));
        }
        let dr = radius / cells as f64;
        let period = mode_period(params);
        let steps = (period * params.c() / (cfl * dr)).ceil().max(1.0);
        Self::new(radius, cells, period / steps, params)
    }

    pub fn cfl(&self, params: &PhysParams) -> f64 {
        params.c() * self.dt / self.dr
    }

    pub fn r(&self, j: usize) -> f64 {
        j as f64 * self.dr
    }

    /// Number of steps per period of the evolved mode.
    pub fn steps_per_period(&self, params: &PhysParams) -> f64 {
        mode_period(params) / self.dt
    }
}

/// Period `π/ω₀` of the breather term `e^{-2iω₀t}`.
pub fn mode_period(params: &PhysParams) -> f64 {
    PI / params.omega0()
}

/// Time dependence imposed on the clamped outer node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundaryDrive {
    /// Analytic mode value, oscillating at `2ω₀`.
    #[default]
    Analytic,
    /// Mode value oscillating at the scheme's own frequency for the mode
    /// wavenumber, which makes the unperturbed mode an exact discrete
    /// solution.
    Discrete,
}

/// Frequency at which the leapfrog scheme carries the node profile
/// `sin(k r_j)`: `sin²(Ω dt/2) = (c dt/2)² (4 sin²(k dr/2)/dr² + κ²)`.
pub fn discrete_mode_frequency(k: f64, grid: &RadialGrid, params: &PhysParams) -> f64 {
    let kappa = params.kappa();
    let lambda = 4.0 * (0.5 * k * grid.dr).sin().powi(2) / (grid.dr * grid.dr) + kappa * kappa;
    let half = 0.5 * params.c() * grid.dt * lambda.sqrt();
    2.0 / grid.dt * half.min(1.0).asin()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticSample {
    pub step: u64,
    pub time: f64,
    pub core_norm: f64,
    /// Discrete energy at the half step `time - dt/2`.
    pub energy: f64,
    pub probe: Complex64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionState {
    pub u_prev: Vec<Complex64>,
    pub u_curr: Vec<Complex64>,
    pub step_index: u64,
    /// Amplitude of the analytic mode imposed at `r = R`.
    pub drive: Complex64,
    /// Radial wavenumber of the mode.
    pub wavenumber: f64,
    pub probe_index: usize,
    pub boundary: BoundaryDrive,
    pub initial_envelope: Vec<f64>,
    pub diagnostics: Vec<DiagnosticSample>,
    scratch: Vec<Complex64>,
}

/// Analytic reduced mode `r j0(k r) e^{-2iω₀t}` times `amplitude`.
fn mode_value(amplitude: Complex64, k: f64, r: f64, t: f64, params: &PhysParams) -> Complex64 {
    let radial = r * spherical_bessel_j(0, k * r).unwrap_or(0.0);
    amplitude * Complex64::from_polar(radial, -2.0 * params.omega0() * t)
}

/// Initial data `u = r Ψ₂` at `t = 0` and `t = -dt` for a spherically
/// symmetric breather at rest.
pub fn init_from_breather(spec: &BreatherSpec, grid: &RadialGrid, params: &PhysParams) -> Result<EvolutionState> {
    spec.validate()?;
    if !spec.mode.is_spherical() {
        return Err(Error::Domain("radial evolution supports the l = n = 0 mode only".into()));
    }
    if !spec.boost.is_rest() || spec.train_period.is_some() {
        return Err(Error::Domain("radial evolution starts from a single breather at rest".into()));
    }
    if params.is_massless() {
        return Err(Error::Domain("evolution needs m > 0".into()));
    }
    let k = spec.radial_wavenumber(params);
    let n = grid.cells;
    let profile = |t: f64| -> Vec<Complex64> {
        let mut u: Vec<Complex64> = (0..=n).map(|j| mode_value(spec.alpha, k, grid.r(j), t, params)).collect();
        u[0] = Complex64::new(0.0, 0.0);
        u
    };
    let u_curr = profile(0.0);
    let u_prev = profile(-grid.dt);
    let probe_index = ((1.0 / params.kappa()) / grid.dr).round().clamp(1.0, (n - 1) as f64) as usize;
    let mut state = EvolutionState {
        initial_envelope: u_curr.iter().map(|z| z.norm()).collect(),
        u_prev,
        u_curr,
        step_index: 0,
        drive: spec.alpha,
        wavenumber: k,
        probe_index,
        boundary: BoundaryDrive::Analytic,
        diagnostics: Vec::new(),
        scratch: vec![Complex64::new(0.0, 0.0); n + 1],
    };
    state.record(grid, params);
    Ok(state)
}

impl EvolutionState {
    pub fn time(&self, grid: &RadialGrid) -> f64 {
        self.step_index as f64 * grid.dt
    }

    /// Scales the state and the boundary drive by `factor` (an exact
    /// perturbation of a linear equation).
    pub fn scale_amplitude(&mut self, factor: f64) {
        for z in self.u_prev.iter_mut().chain(self.u_curr.iter_mut()) {
            *z *= factor;
        }
        for e in self.initial_envelope.iter_mut() {
            *e *= factor;
        }
        self.drive *= factor;
        self.diagnostics.clear();
    }

    /// Adds a static Gaussian bump `amplitude · exp(-((r - center)/width)²)`
    /// to both time levels without touching the boundary drive.
    pub fn add_bump(&mut self, grid: &RadialGrid, center: f64, width: f64, amplitude: f64, params: &PhysParams) {
        let n = grid.cells;
        for j in 1..n {
            let r = grid.r(j);
            let bump = amplitude * (-((r - center) / width).powi(2)).exp();
            self.u_prev[j] += bump;
            self.u_curr[j] += bump;
        }
        self.initial_envelope = self.u_curr.iter().map(|z| z.norm()).collect();
        self.diagnostics.clear();
        self.record(grid, params);
    }

    /// One leapfrog step.
    pub fn advance(&mut self, grid: &RadialGrid, params: &PhysParams) {
        let n = grid.cells;
        let kappa2 = params.kappa() * params.kappa();
        let courant2 = (params.c() * grid.dt / grid.dr).powi(2);
        let mass_term = (params.c() * grid.dt).powi(2) * kappa2;
        let (prev, curr, next) = (&self.u_prev, &self.u_curr, &mut self.scratch);
        next[0] = Complex64::new(0.0, 0.0);
        for j in 1..n {
            let lap = curr[j + 1] - 2.0 * curr[j] + curr[j - 1];
            next[j] = 2.0 * curr[j] - prev[j] + courant2 * lap - mass_term * curr[j];
        }
        self.step_index += 1;
        let t = self.step_index as f64 * grid.dt;
        let omega = match self.boundary {
            BoundaryDrive::Analytic => 2.0 * params.omega0(),
            BoundaryDrive::Discrete => discrete_mode_frequency(self.wavenumber, grid, params),
        };
        let radial = grid.radius * spherical_bessel_j(0, self.wavenumber * grid.radius).unwrap_or(0.0);
        next[n] = self.drive * Complex64::from_polar(radial, -omega * t);
        std::mem::swap(&mut self.u_prev, &mut self.u_curr);
        std::mem::swap(&mut self.u_curr, &mut self.scratch);
        self.record(grid, params);
    }

    fn record(&mut self, grid: &RadialGrid, params: &PhysParams) {
        let sample = DiagnosticSample {
            step: self.step_index,
            time: self.time(grid),
            core_norm: core_norm(&self.u_curr, grid, params),
            energy: discrete_energy(&self.u_prev, &self.u_curr, grid, params),
            probe: self.u_curr[self.probe_index],
        };
        self.diagnostics.push(sample);
    }

    /// Discrete energy between the two stored time levels.
    pub fn energy(&self, grid: &RadialGrid, params: &PhysParams) -> f64 {
        discrete_energy(&self.u_prev, &self.u_curr, grid, params)
    }

    pub fn probe_radius(&self, grid: &RadialGrid) -> f64 {
        grid.r(self.probe_index)
    }
}

/// Functional form of [`EvolutionState::advance`].
pub fn step(mut state: EvolutionState, grid: &RadialGrid, params: &PhysParams) -> EvolutionState {
    state.advance(grid, params);
    state
}

/// Advances `steps` leapfrog steps.
pub fn run(state: &mut EvolutionState, grid: &RadialGrid, params: &PhysParams, steps: u64) {
    for _ in 0..steps {
        state.advance(grid, params);
    }
}

/// `∫₀^{5/κ} |u|² dr` by the trapezoidal rule on grid nodes.
pub fn core_norm(u: &[Complex64], grid: &RadialGrid, params: &PhysParams) -> f64 {
    let last = ((CORE_RADIUS / params.kappa()) / grid.dr).floor() as usize;
    let last = last.min(grid.cells);
    trapezoid(&u[..=last].iter().map(|z| z.norm_sqr()).collect::<Vec<_>>(), grid.dr)
}

fn trapezoid(values: &[f64], dx: f64) -> f64 {
    match values.len() {
        0 | 1 => 0.0,
        n => (values[1..n - 1].iter().sum::<f64>() + 0.5 * (values[0] + values[n - 1])) * dx,
    }
}

/// `L v = v_rr - κ² v` on interior nodes by second differences.
fn apply_operator(v: &[Complex64], grid: &RadialGrid, params: &PhysParams) -> Vec<Complex64> {
    let n = v.len() - 1;
    let kappa2 = params.kappa() * params.kappa();
    let inv_dr2 = 1.0 / (grid.dr * grid.dr);
    let mut out = vec![Complex64::new(0.0, 0.0); n + 1];
    for j in 1..n {
        out[j] = (v[j + 1] - 2.0 * v[j] + v[j - 1]) * inv_dr2 - kappa2 * v[j];
    }
    out
}

/// Fourth-order radial derivative on nodes, odd extension through `r = 0`
/// and one-sided stencils at the outer edge.
fn radial_derivative(u: &[Complex64], dr: f64) -> Vec<Complex64> {
    let n = u.len() - 1;
    let at = |j: isize| -> Complex64 {
        if j < 0 {
            -u[(-j) as usize]
        } else {
            u[j as usize]
        }
    };
    let mut d = vec![Complex64::new(0.0, 0.0); n + 1];
    for j in 0..=n.saturating_sub(2) {
        let j = j as isize;
        d[j as usize] = (-at(j + 2) + 8.0 * at(j + 1) - 8.0 * at(j - 1) + at(j - 2)) / (12.0 * dr);
    }
    d[n - 1] = (3.0 * u[n] + 10.0 * u[n - 1] - 18.0 * u[n - 2] + 6.0 * u[n - 3] - u[n - 4]) / (12.0 * dr);
    d[n] = (25.0 * u[n] - 48.0 * u[n - 1] + 36.0 * u[n - 2] - 16.0 * u[n - 3] + 3.0 * u[n - 4]) / (12.0 * dr);
    d
}

/// `Σ (|u_t|²/c² + |u_r|² + κ²|u|²) dr` at the half step between `prev`
/// and `curr`.
///
/// The half-step differences are corrected with the semi-discrete operator
/// so that time and space derivatives are both fourth-order accurate.
pub fn discrete_energy(prev: &[Complex64], curr: &[Complex64], grid: &RadialGrid, params: &PhysParams) -> f64 {
    let c = params.c();
    let dt = grid.dt;
    let kappa2 = params.kappa() * params.kappa();
    let velocity: Vec<Complex64> = prev.iter().zip(curr).map(|(a, b)| (b - a) / dt).collect();
    let midpoint: Vec<Complex64> = prev.iter().zip(curr).map(|(a, b)| 0.5 * (a + b)).collect();
    let lv = apply_operator(&velocity, grid, params);
    let lw = apply_operator(&midpoint, grid, params);
    let cdt2 = (c * dt).powi(2);
    let u_t: Vec<Complex64> = velocity.iter().zip(&lv).map(|(v, l)| v - cdt2 / 24.0 * l).collect();
    let u: Vec<Complex64> = midpoint.iter().zip(&lw).map(|(w, l)| w - cdt2 / 8.0 * l).collect();
    let u_r = radial_derivative(&u, grid.dr);
    let density: Vec<f64> = (0..u.len())
        .map(|j| u_t[j].norm_sqr() / (c * c) + u_r[j].norm_sqr() + kappa2 * u[j].norm_sqr())
        .collect();
    trapezoid(&density, grid.dr)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunDiagnostics {
    /// FFT peak (angular) of the probe history of `u`.
    pub measured_frequency: f64,
    /// Frequency resolution of that transform.
    pub bin_width: f64,
    /// Relative change of the core norm between first and last sample.
    pub core_norm_drift: f64,
    /// Largest relative change of the discrete energy over the run.
    pub energy_drift: f64,
    /// `max |(|u_final| - |u_initial|)| / max |u_initial|`.
    pub profile_error: f64,
    /// FFT peak of the reconstructed action perturbation `S + m c² t` at
    /// the probe radius (uniform term re-added analytically).
    pub action_frequency: f64,
}

/// Summarizes a run. Needs at least 16 mode periods of history sampled at
/// 32 or more points per period.
pub fn run_diagnostics(state: &EvolutionState, grid: &RadialGrid, params: &PhysParams) -> Result<RunDiagnostics> {
    let history = &state.diagnostics;
    if history.len() < 2 {
        return Err(Error::Diagnostics("no history recorded".into()));
    }
    let span = history.last().unwrap().time - history[0].time;
    let period = mode_period(params);
    if span < 16.0 * period * (1.0 - 1e-12) {
        return Err(Error::Diagnostics(format!(
            "history spans {:.3} mode periods, at least 16 are needed",
            span / period
        )));
    }
    if grid.steps_per_period(params) < 32.0 * (1.0 - 1e-12) {
        return Err(Error::Diagnostics("fewer than 32 samples per mode period".into()));
    }

    // drop the final sample when it closes an exact period so the window
    // holds an integer number of periods
    let samples: Vec<&DiagnosticSample> = history[..history.len() - 1].iter().collect();
    let n = samples.len();
    let window = n as f64 * grid.dt;
    let bin_width = 2.0 * PI / window;

    let probe: Vec<Complex64> = samples.iter().map(|s| s.probe).collect();
    let power = spectrum::power_spectrum(&probe);
    let measured_frequency = spectrum::signed_bin(spectrum::peak_bin(&power), n).unsigned_abs() as f64 * bin_width;

    let r_probe = state.probe_radius(grid);
    let omega0 = params.omega0();
    let hbar = params.hbar();
    let perturbation = samples
        .iter()
        .map(|s| {
            // S + m c² t = -i hbar Log(1 + e^{iω₀t} Ψ₂)
            let arg = Complex64::new(1.0, 0.0) + Complex64::from_polar(1.0, omega0 * s.time) * s.probe / r_probe;
            if arg.norm() == 0.0 {
                return Err(Error::Diagnostics("reconstructed wave-function vanishes at the probe".into()));
            }
            Ok(-Complex64::i() * hbar * arg.ln())
        })
        .collect::<Result<Vec<_>>>()?;
    let power = spectrum::power_spectrum(&perturbation);
    let action_frequency = spectrum::signed_bin(spectrum::peak_bin(&power), n).unsigned_abs() as f64 * bin_width;

    let first = history[0];
    let last = *history.last().unwrap();
    let rel = |a: f64, b: f64| if b == 0.0 { (a - b).abs() } else { ((a - b) / b).abs() };
    let core_norm_drift = rel(last.core_norm, first.core_norm);
    let energy_drift = history.iter().map(|s| rel(s.energy, first.energy)).fold(0.0, f64::max);

    let scale = state.initial_envelope.iter().cloned().fold(0.0, f64::max);
    let diff = state
        .u_curr
        .iter()
        .zip(&state.initial_envelope)
        .map(|(u, e)| (u.norm() - e).abs())
        .fold(0.0, f64::max);
    let profile_error = if scale > 0.0 { diff / scale } else { diff };

    Ok(RunDiagnostics {
        measured_frequency,
        bin_width,
        core_norm_drift,
        energy_drift,
        profile_error,
        action_frequency,
    })
}
