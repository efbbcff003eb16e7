//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Inputs whose dimensions do not agree (e.g. a 2D segment against a 3D
    /// sphere).
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// Structurally invalid input values (non-finite coordinates, radius <= 0,
    /// bounds with lo >= hi, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Random environment generation could not satisfy its feasibility
    /// constraints (parameters too crowded).
    #[error("environment generation failed: {0}")]
    Generation(String),

    /// A scenario file or in-memory scenario violates its invariants.
    #[error("invalid scenario: {0}")]
    Scenario(String),

    /// A path handed to the roadmap failed collision re-validation. This
    /// signals optimizer-tolerance vs checker-resolution disagreement and is
    /// surfaced instead of silently dropped.
    #[error("path rejected: {0}")]
    PathRejected(String),

    /// Operation not available for the given inputs (e.g. rendering a
    /// non-2D scenario).
    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    /// File parse failure; carries serde_json's line/column diagnostics.
    #[error("parse error in {file}: {source}")]
    Parse {
        file: String,
        source: serde_json::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
