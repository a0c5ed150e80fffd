//! Error taxonomy shared across the crate.

use num_complex::Complex64;
use thiserror::Error;

/// Failure modes of evaluation, conversion, and flow routines.
#[derive(Debug, Error)]
pub enum Error {
    /// An evaluation point landed on (or within tolerance of) a pole of the
    /// requested special function or kernel.
    #[error("point {point} is within {tolerance:.1e} of the singular set")]
    Pole { point: Complex64, tolerance: f64 },

    /// Two particles (or two eigenvalues of X) approached closer than the
    /// collision tolerance, so the particle chart is no longer trustworthy.
    #[error("separation {separation:.3e} fell below the collision tolerance {tolerance:.1e} ({context})")]
    Collision {
        separation: f64,
        tolerance: f64,
        context: String,
    },

    /// The moment-map constraint failed, or data needed to satisfy it
    /// (such as the diagonal spin contractions) cannot be arranged.
    #[error("constraint violation: {message} (residual {residual:.3e})")]
    Constraint { message: String, residual: f64 },

    /// A matrix that must be invertible or diagonalizable with distinct
    /// eigenvalues is numerically degenerate.
    #[error("degenerate linear algebra: {message}")]
    SingularMatrix { message: String },

    /// Contour quadrature failed its self-check: doubling the sample count
    /// moved the result by more than the tolerance.
    #[error("quadrature did not converge: sample doubling moved the residue by {disagreement:.3e} (tolerance {tolerance:.1e})")]
    Quadrature { disagreement: f64, tolerance: f64 },

    /// A finite-difference stencil or an integration step disagreed with its
    /// refined version beyond tolerance, or a monitored invariant drifted.
    #[error("step check failed: {message}")]
    Step { message: String },

    /// A lattice with these parameters does not define a smooth cubic.
    #[error("invalid lattice: {message}")]
    InvalidLattice { message: String },

    /// Malformed or inconsistent run configuration. The message names the
    /// offending field.
    #[error("config error: {message}")]
    Config { message: String },

    /// An operation was called on data outside its domain (wrong variant,
    /// mismatched dimensions, unsupported chart).
    #[error("invalid input: {message}")]
    Validation { message: String },

    /// Filesystem failure while reading configs or writing outputs.
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    /// JSON (de)serialization failure; the serde message names the field.
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code for the CLI: config/schema problems exit 2,
    /// constraint violations exit 3, numerical failures exit 4.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } | Error::Json(_) | Error::Validation { .. } => 2,
            Error::Constraint { .. } => 3,
            Error::Pole { .. }
            | Error::Collision { .. }
            | Error::SingularMatrix { .. }
            | Error::Quadrature { .. }
            | Error::Step { .. }
            | Error::InvalidLattice { .. } => 4,
            Error::Io(_) => 4,
        }
    }
}
