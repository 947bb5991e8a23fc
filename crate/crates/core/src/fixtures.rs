//! Shared test fixtures: the model operator `u_t − u_xx + x·u_y` on
//! variables `(t, x, y)`, its eight-dimensional symmetry basis, and the
//! four-dimensional subalgebra that fixes a symbolic source point.
//!
//! Only compiled for tests; every module's unit tests draw on the same
//! frozen data so the oracles cannot drift apart.

use crate::context::Context;
use crate::expr::symbol::Symbol;
use crate::expr::Expression;
use crate::jet::{LinearPDE, MultiIndex, VectorField};

/// Ordered independent variables `t, x, y`.
pub(crate) fn vars() -> Vec<Symbol> {
    vec![
        Symbol::independent("t"),
        Symbol::independent("x"),
        Symbol::independent("y"),
    ]
}

/// Source-point parameters `t0, x0, y0`, aligned with [`vars`].
pub(crate) fn params() -> Vec<Symbol> {
    vec![
        Symbol::parameter("t0"),
        Symbol::parameter("x0"),
        Symbol::parameter("y0"),
    ]
}

pub(crate) fn t() -> Expression {
    Expression::symbol(Symbol::independent("t"))
}
pub(crate) fn x() -> Expression {
    Expression::symbol(Symbol::independent("x"))
}
pub(crate) fn y() -> Expression {
    Expression::symbol(Symbol::independent("y"))
}
pub(crate) fn t0() -> Expression {
    Expression::symbol(Symbol::parameter("t0"))
}
pub(crate) fn x0() -> Expression {
    Expression::symbol(Symbol::parameter("x0"))
}
pub(crate) fn y0() -> Expression {
    Expression::symbol(Symbol::parameter("y0"))
}
pub(crate) fn c(n: i64) -> Expression {
    Expression::integer(n)
}

/// The ultra-parabolic model operator: `u_t − u_xx + x·u_y`.
pub(crate) fn model_pde(ctx: &Context) -> LinearPDE {
    LinearPDE::new(
        ctx,
        vars(),
        Symbol::dependent("u"),
        vec![
            (MultiIndex::new(vec![0]), c(1)),
            (MultiIndex::new(vec![1, 1]), c(-1)),
            (MultiIndex::new(vec![2]), x()),
        ],
    )
    .unwrap()
}

/// The eight-dimensional symmetry basis of the model operator.
pub(crate) fn symmetry_basis(ctx: &Context) -> Vec<VectorField> {
    let zero = c(0);
    let mk = |xi_t: Expression, xi_x: Expression, xi_y: Expression, alpha: Expression| {
        VectorField::new(ctx, vars(), vec![xi_t, xi_x, xi_y], alpha).unwrap()
    };
    vec![
        // ∂x + t∂y
        mk(zero.clone(), c(1), t(), zero.clone()),
        // 2t∂t + x∂x + 3y∂y − 2u∂u
        mk(c(2) * t(), x(), c(3) * y(), c(-2)),
        // t²∂t + (tx+3y)∂x + 3ty∂y − (2t+x²)u∂u
        mk(
            Expression::powi(t(), 2),
            t() * x() + c(3) * y(),
            c(3) * t() * y(),
            -(c(2) * t() + Expression::powi(x(), 2)),
        ),
        // 3t²∂x + t³∂y + 3(y−tx)u∂u
        mk(
            zero.clone(),
            c(3) * Expression::powi(t(), 2),
            Expression::powi(t(), 3),
            c(3) * (y() - t() * x()),
        ),
        // 2t∂x + t²∂y − xu∂u
        mk(zero.clone(), c(2) * t(), Expression::powi(t(), 2), -x()),
        // ∂t
        mk(c(1), zero.clone(), zero.clone(), zero.clone()),
        // ∂y
        mk(zero.clone(), zero.clone(), c(1), zero.clone()),
        // u∂u
        mk(zero.clone(), zero.clone(), zero.clone(), c(1)),
    ]
}

/// Independently derived basis of the subalgebra fixing the source point
/// `(t0, x0, y0)`: each field's coefficients vanish at the source and its
/// multiplier balances the coefficient divergence there.
pub(crate) fn source_basis(ctx: &Context) -> Vec<VectorField> {
    let mk = |xi_t: Expression, xi_x: Expression, xi_y: Expression, alpha: Expression| {
        VectorField::new(ctx, vars(), vec![xi_t, xi_x, xi_y], alpha).unwrap()
    };
    vec![
        // 2(t−t0)∂t + (x−x0)∂x − (x0(t−t0) − 3(y−y0))∂y − 4u∂u
        mk(
            c(2) * (t() - t0()),
            x() - x0(),
            -(x0() * (t() - t0()) - c(3) * (y() - y0())),
            c(-4),
        ),
        // (t²−t0²)∂t + ((tx+3y) − (t0x0+3y0))∂x + (3(y−y0)t − t0x0(t−t0))∂y
        //   − (2(t+t0) + x² − x0²)u∂u
        mk(
            Expression::powi(t(), 2) - Expression::powi(t0(), 2),
            (t() * x() + c(3) * y()) - (t0() * x0() + c(3) * y0()),
            c(3) * (y() - y0()) * t() - t0() * x0() * (t() - t0()),
            -(c(2) * (t() + t0()) + Expression::powi(x(), 2) - Expression::powi(x0(), 2)),
        ),
        // 3(t²−t0²)∂x + (t³ − 3t0²t + 2t0³)∂y − 3(tx − y − (t0x0 − y0))u∂u
        mk(
            c(0),
            c(3) * (Expression::powi(t(), 2) - Expression::powi(t0(), 2)),
            Expression::powi(t(), 3) - c(3) * Expression::powi(t0(), 2) * t()
                + c(2) * Expression::powi(t0(), 3),
            c(-3) * (t() * x() - y() - (t0() * x0() - y0())),
        ),
        // 2(t−t0)∂x + (t−t0)²∂y − (x−x0)u∂u
        mk(
            c(0),
            c(2) * (t() - t0()),
            Expression::powi(t() - t0(), 2),
            -(x() - x0()),
        ),
    ]
}

/// Context with `t − t0` registered positive: the similarity variable below
/// carries a `(t − t0)^(3/2)` denominator, legal only on the forward domain.
pub(crate) fn forward_context() -> Context {
    let mut ctx = Context::new();
    ctx.register_positive(&(t() - t0())).unwrap();
    ctx
}

/// The dependent symbol `u` as it appears inside differential invariants.
pub(crate) fn u() -> Expression {
    Expression::symbol(Symbol::dependent("u"))
}

/// First independently derived invariant of the source subalgebra:
/// `(t−t0)² · exp((x−x0)²/(4(t−t0))) · u`.
pub(crate) fn invariant_weight() -> Expression {
    Expression::powi(t() - t0(), 2)
        * Expression::exp(Expression::div(
            Expression::powi(x() - x0(), 2),
            c(4) * (t() - t0()),
        ))
        * u()
}

/// Second invariant — the similarity variable:
/// `((t−t0)(x+x0) − 2(y−y0)) / (t−t0)^(3/2)`.
pub(crate) fn similarity_variable() -> Expression {
    Expression::div(
        (t() - t0()) * (x() + x0()) - c(2) * (y() - y0()),
        Expression::powr(t() - t0(), crate::expr::rat(3, 2)),
    )
}

/// Invariant multiplier of the separable ansatz:
/// `(t−t0)^(−2) · exp(−(x−x0)²/(4(t−t0)))`.
pub(crate) fn ansatz_multiplier() -> Expression {
    Expression::powi(t() - t0(), -2)
        * Expression::exp(-Expression::div(
            Expression::powi(x() - x0(), 2),
            c(4) * (t() - t0()),
        ))
}

/// The closed-form source solution with a symbolic amplitude:
/// `amp · (t−t0)^(−2) · exp(−(x−x0)²/(4(t−t0)) − 3(y−y0−(t−t0)(x+x0)/2)²/(t−t0)³)`.
pub(crate) fn closed_form_solution(amplitude: Expression) -> Expression {
    let tau = t() - t0();
    let centered = y() - y0() - Expression::div(tau.clone() * (x() + x0()), c(2));
    amplitude
        * Expression::powi(tau.clone(), -2)
        * Expression::exp(
            -Expression::div(Expression::powi(x() - x0(), 2), c(4) * tau.clone())
                - Expression::div(
                    c(3) * Expression::powi(centered, 2),
                    Expression::powi(tau, 3),
                ),
        )
}
