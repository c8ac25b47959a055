//! Exact scalar types and exact lattice computations.

pub mod interval;
pub mod intscan;
pub mod lattice;
pub mod linalg;
pub mod powcmp;
pub mod quad;
pub mod rational;

use thiserror::Error;

/// Errors from the enumeration layer.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExactError {
    #[error("dimension {0} exceeds the enumeration cap {1}")]
    DimensionTooLarge(usize, usize),
    #[error("basis is singular (zero determinant)")]
    SingularBasis,
    #[error("mixed quadratic discriminants {0} and {1}")]
    MixedDiscriminants(String, String),
    #[error("certified interval refinement exhausted at {0} bits")]
    PrecisionExhausted(u32),
}
