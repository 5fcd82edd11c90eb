//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A field was passed in the wrong representation (spatial vs frequency).
    #[error("expected a {expected:?}-space field, got {got:?}")]
    SpaceTag {
        expected: crate::grid::Space,
        got: crate::grid::Space,
    },

    /// Cube smaller than one lattice cell.
    #[error("cube side {side} is below the lattice spacing {spacing}")]
    DegenerateCube { side: f64, spacing: f64 },

    /// Invalid constructor or configuration parameter.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// Unknown catalog entry.
    #[error("unknown catalog name: {0}")]
    Catalog(String),

    /// A symbol or phase produced a non-finite value.
    #[error("non-finite evaluation at x={x:?}, xi={xi:?} in `{context}`")]
    Evaluation {
        context: String,
        x: crate::grid::Point,
        xi: crate::grid::Point,
    },

    /// Kernel matrix would exceed the memory guard.
    #[error("grid with {points} points exceeds the kernel matrix guard of {limit}")]
    SizeGuard { points: usize, limit: usize },

    /// An experiment was invoked outside its hypothesis range.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Weight vanishes where a pointwise quotient is required.
    #[error("degenerate weight: vanishes at lattice index {index}")]
    DegenerateWeight { index: usize },

    /// Input field unusable for the requested ratio (e.g. identically zero).
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
}
