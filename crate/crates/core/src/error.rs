//! Error types shared across the symbolic engine.

use thiserror::Error;

/// Errors raised by symbolic operations.
///
/// Every operation that can leave the supported expression class, divide by
/// zero, need a missing domain assumption, or blow past the term budget
/// reports through this type rather than panicking.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ExprError {
    /// A fractional power was applied to a base whose sign is unknown.
    ///
    /// Register the base with [`crate::Context::register_positive`] first.
    #[error("missing domain assumption: {0}")]
    DomainAssumption(String),

    /// Division by an expression that normalizes to zero.
    #[error("division by zero expression")]
    DivisionByZero,

    /// The operation would leave the supported class
    /// (sums of rational functions times exponentials of rational functions,
    /// with registered radicals).
    #[error("expression outside supported class: {0}")]
    UnsupportedClass(String),

    /// A normalization intermediate exceeded the configured term budget.
    #[error("term budget exceeded: needed {needed} terms, cap is {cap} (raise LIEFUND_TERM_CAP)")]
    ResourceCap { needed: usize, cap: usize },

    /// Numeric evaluation hit a symbol with no binding.
    #[error("unbound symbol `{0}` in numeric evaluation")]
    UnboundSymbol(String),

    /// Numeric evaluation produced a non-finite or undefined value.
    #[error("numeric evaluation failed: {0}")]
    NumericEval(String),

    /// The arguments violate a documented precondition of the operation.
    #[error("invalid operation: {0}")]
    InvalidOperation(String),

    /// A similarity substitution did not close into an ordinary differential
    /// equation in the similarity variable alone.
    #[error("ansatz does not reduce: {0}")]
    ReductionFailure(String),

    /// A commutator of two basis elements left the rational span of the basis.
    #[error(
        "basis is not closed under the commutator: [basis[{left}], basis[{right}]] = {remainder} \
         is outside the rational span"
    )]
    SpanClosure {
        left: usize,
        right: usize,
        remainder: String,
    },
}

/// Convenience alias used throughout the symbolic modules.
pub type ExprResult<T> = Result<T, ExprError>;
