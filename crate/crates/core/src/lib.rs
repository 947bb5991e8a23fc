//! Symbolic and numeric tools for Lie point symmetries of linear PDEs.
//!
//! The crate is organized in layers:
//!
//! - [`expr`]: exact expression trees over arbitrary-precision rationals,
//!   with a canonical normal form for the class
//!   `rational function × radicals × exp(rational function)`.
//! - [`context`]: evaluation context carrying positivity assumptions (which
//!   gate fractional powers) and the term-count resource cap.
//!
//! Higher layers (parsing, jet calculus, point-source constraint solving,
//! symmetry reduction, and floating-point validation) build on these.

pub mod context;
pub mod error;
pub mod expr;
pub mod fundsol;
pub mod jet;
pub mod numerics;
pub mod parser;
pub mod reduce;

#[cfg(test)]
pub(crate) mod fixtures;

pub use context::Context;
pub use error::{ExprError, ExprResult};
pub use expr::symbol::{Symbol, SymbolKind};
pub use expr::Expression;
