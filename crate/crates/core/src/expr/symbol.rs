//! Interned symbols with semantic kinds.

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

/// Semantic role of a symbol.
///
/// The kind decides how operations treat the symbol: only independent
/// variables (and, internally, the dependent placeholder) may be
/// differentiated, source parameters survive into constraint systems, and
/// free constants are inert scalars.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SymbolKind {
    /// Coordinate of the underlying space, e.g. `t`, `x`, `y`.
    IndependentVariable,
    /// Location of the point source, e.g. `t0`, `x0`, `y0`.
    SourceParameter,
    /// Inert scalar constant, e.g. `pi`, `a1`, `C1`.
    FreeConstant,
    /// Placeholder for the dependent variable of a linear PDE, e.g. `u`.
    DependentPlaceholder,
}

/// A named symbol. Equality and ordering look at the name first and the kind
/// second, so two symbols with the same name but different kinds are distinct
/// (declaration layers are expected to prevent that situation).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Symbol {
    name: Arc<str>,
    kind: SymbolKind,
}

impl Symbol {
    /// Create a symbol with an explicit kind.
    pub fn new(name: &str, kind: SymbolKind) -> Self {
        Symbol { name: Arc::from(name), kind }
    }

    /// Shorthand for an independent variable.
    pub fn independent(name: &str) -> Self {
        Self::new(name, SymbolKind::IndependentVariable)
    }

    /// Shorthand for a source parameter.
    pub fn parameter(name: &str) -> Self {
        Self::new(name, SymbolKind::SourceParameter)
    }

    /// Shorthand for a free constant.
    pub fn constant(name: &str) -> Self {
        Self::new(name, SymbolKind::FreeConstant)
    }

    /// Shorthand for a dependent-variable placeholder.
    pub fn dependent(name: &str) -> Self {
        Self::new(name, SymbolKind::DependentPlaceholder)
    }

    /// The symbol's name.
    pub fn name(&self) -> &str {
        &self.name
    }

    /// The symbol's semantic kind.
    pub fn kind(&self) -> SymbolKind {
        self.kind
    }

    /// True for independent variables.
    pub fn is_independent(&self) -> bool {
        self.kind == SymbolKind::IndependentVariable
    }
}

impl PartialOrd for Symbol {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Symbol {
    fn cmp(&self, other: &Self) -> Ordering {
        self.name
            .as_ref()
            .cmp(other.name.as_ref())
            .then(self.kind.cmp(&other.kind))
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}
