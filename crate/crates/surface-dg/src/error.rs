//! Error types shared across the crate.

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Parameter value outside the unit interval.
    #[error("parameter {0} lies outside [0, 1]")]
    Domain(f64),

    #[error("invalid knot vector: {0}")]
    KnotVector(String),

    /// Knot insertion would push an interior multiplicity past the degree.
    #[error("inserting {value} would raise its multiplicity above the degree {degree}")]
    Refinement { value: f64, degree: usize },

    #[error("geometry error: {0}")]
    Geometry(String),

    /// Rank-deficient surface parametrization.
    #[error("degenerate geometry on patch {patch} at ({u}, {v}): det F = {det}")]
    DegenerateGeometry { patch: usize, u: f64, v: f64, det: f64 },

    #[error("topology error: {0}")]
    Topology(String),

    #[error("space error: {0}")]
    Space(String),

    #[error("quadrature error: {0}")]
    Quadrature(String),

    /// Non-finite value produced during integration.
    #[error("non-finite contribution from {0}")]
    NonFinite(String),

    #[error("missing boundary data callback: {0}")]
    MissingData(&'static str),

    #[error("solver error: {0}")]
    Solver(String),

    #[error("artifact mismatch: {0}")]
    Artifact(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
