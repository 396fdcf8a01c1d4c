use thiserror::Error;

/// Errors raised by the breather library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the supported domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Superluminal boost, massless input where a mass is required, and similar.
    #[error("kinematics error: {0}")]
    Kinematics(String),

    /// The logarithm argument `1 + u` of an action-function is not winding-free
    /// (`|u| >= 1`) at the requested event.
    #[error("branch-safety error: |u| = {magnitude} >= 1 at (t={t}, x={x}, y={y}, z={z})")]
    BranchSafety {
        magnitude: f64,
        t: f64,
        x: f64,
        y: f64,
        z: f64,
    },

    /// Invalid grid, stencil or run configuration.
    #[error("configuration error: {0}")]
    Config(String),

    /// Not enough history (or a degenerate signal) to compute a diagnostic.
    #[error("diagnostics error: {0}")]
    Diagnostics(String),
}

pub type Result<T> = std::result::Result<T, Error>;
