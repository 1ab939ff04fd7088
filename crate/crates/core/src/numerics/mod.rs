//! Numeric building blocks: complex polynomial helpers, a replayable
//! reverse-mode tape over real scalars, and the Adam optimizer.

mod adam;
mod poly;
mod tape;

pub use adam::{AdamConfig, AdamState};
pub use poly::{conj_reflect_eval, ensure_finite, eval_poly_from_roots};
pub use tape::{CVar, DiffTape, Var};

/// Complex scalar used throughout the crate.
pub type Complex = num_complex::Complex64;

/// Imaginary unit.
pub const J: Complex = Complex { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NumericsError {
    #[error("non-finite value at index {0}")]
    NonFinite(usize),
    #[error("tape has no nodes")]
    EmptyTape,
    #[error("tape references parameter {index} but only {len} parameters were supplied")]
    ParamIndex { index: usize, len: usize },
    #[error("backward pass requested before a forward pass")]
    NotEvaluated,
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
}
