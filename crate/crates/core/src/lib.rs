//! Breather solutions of the relativistic quantum Hamilton–Jacobi equation.
//!
//! The crate builds the closed-form wave-functions `Ψ` and action functions
//! `S = -i hbar Log Ψ` of localized, periodically oscillating Klein–Gordon
//! solutions (at rest, boosted, spinning, and as d-periodic trains) and
//! checks them numerically:
//!
//! * [`specfun`]: spherical Bessel `j_l` and associated Legendre `P_l^n`.
//! * [`kinematics`]: units, events, x-axis Lorentz boosts.
//! * [`fields`]: the closed-form constructors.
//! * [`verify`]: finite-difference residuals, energy/momentum, averages,
//!   spectra and periodic boundary checks.
//! * [`evolve`]: leapfrog evolution of the radial Klein–Gordon equation.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod evolve;
pub mod fields;
pub mod kinematics;
pub mod quadrature;
pub mod specfun;
pub mod spectrum;
pub mod verify;

pub use error::{Error, Result};
pub use fields::{BreatherField, BreatherSpec, Detuning, Evaluator, FieldKind, QuantizationReport};
pub use kinematics::{Boost, PhysParams, SpacetimePoint};
pub use num_complex::Complex64;
pub use specfun::ModeIndex;
