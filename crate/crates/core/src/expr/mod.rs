//! Exact symbolic expressions over the rational-exponential class.
//!
//! The tree is deliberately small: rational constants, symbols, sums,
//! products, powers with exact rational exponents, and exponentials. The
//! class — finite sums of rational functions times radicals times
//! exponentials of rational functions — is closed under differentiation and
//! has a sound zero test via [`normal::NormalForm`].

pub mod display;
pub mod normal;
pub mod poly;
pub mod ratfun;
pub mod symbol;

use std::collections::HashMap;

use num_traits::{Float, FromPrimitive, One, Signed, ToPrimitive};

use crate::context::Context;
use crate::error::{ExprError, ExprResult};
pub use normal::NormalForm;
pub use poly::{rat, rat_int, Poly, Rat};
pub use ratfun::RatFun;
pub use symbol::{Symbol, SymbolKind};

/// Immutable symbolic expression tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expression {
    /// Exact rational constant (always lowest terms, positive denominator —
    /// guaranteed by the arbitrary-precision rational type).
    Rational(Rat),
    /// Named symbol with a semantic kind.
    Symbol(Symbol),
    /// n-ary sum.
    Sum(Vec<Expression>),
    /// n-ary product.
    Product(Vec<Expression>),
    /// Power with an exact rational exponent. Non-integer exponents require
    /// the base's positivity to be registered in the [`Context`].
    Power(Box<Expression>, Rat),
    /// Exponential of a rational-function argument.
    Exp(Box<Expression>),
}

impl Expression {
    /// Integer constant.
    pub fn integer(n: i64) -> Expression {
        Expression::Rational(rat_int(n))
    }

    /// Rational constant `n/d`.
    pub fn rational(n: i64, d: i64) -> Expression {
        Expression::Rational(rat(n, d))
    }

    /// Symbol atom.
    pub fn symbol(s: Symbol) -> Expression {
        Expression::Symbol(s)
    }

    // The next five constructors share names with the `std::ops` traits on
    // purpose: the operator impls defer to them, and call sites that build
    // trees from owned parts read better as `Expression::div(a, b)` than as
    // an operator chain.
    /// Binary sum.
    #[allow(clippy::should_implement_trait)]
    pub fn add(a: Expression, b: Expression) -> Expression {
        Expression::Sum(vec![a, b])
    }

    /// Binary difference.
    #[allow(clippy::should_implement_trait)]
    pub fn sub(a: Expression, b: Expression) -> Expression {
        Expression::Sum(vec![a, Expression::neg(b)])
    }

    /// Binary product.
    #[allow(clippy::should_implement_trait)]
    pub fn mul(a: Expression, b: Expression) -> Expression {
        Expression::Product(vec![a, b])
    }

    /// Quotient `a * b^(-1)`.
    #[allow(clippy::should_implement_trait)]
    pub fn div(a: Expression, b: Expression) -> Expression {
        Expression::Product(vec![a, Expression::Power(Box::new(b), -Rat::one())])
    }

    /// Negation as `(-1) * e`.
    #[allow(clippy::should_implement_trait)]
    pub fn neg(e: Expression) -> Expression {
        Expression::Product(vec![Expression::integer(-1), e])
    }

    /// Rational multiple `c * e`.
    pub fn scale(c: Rat, e: Expression) -> Expression {
        Expression::Product(vec![Expression::Rational(c), e])
    }

    /// Integer power.
    pub fn powi(e: Expression, n: i64) -> Expression {
        Expression::Power(Box::new(e), rat_int(n))
    }

    /// Rational power.
    pub fn powr(e: Expression, r: Rat) -> Expression {
        Expression::Power(Box::new(e), r)
    }

    /// Square root as `e^(1/2)`.
    pub fn sqrt(e: Expression) -> Expression {
        Expression::powr(e, rat(1, 2))
    }

    /// Exponential.
    pub fn exp(e: Expression) -> Expression {
        Expression::Exp(Box::new(e))
    }

    /// Canonical form: expanded rational coefficients over a single monic
    /// denominator per term, merged exponentials, prime/registered radical
    /// bases, terms sorted by key. Idempotent.
    pub fn normalize(&self, ctx: &Context) -> ExprResult<Expression> {
        Ok(NormalForm::from_expr(ctx, self)?.to_expr())
    }

    /// Sound zero test on the declared domain.
    pub fn is_zero(&self, ctx: &Context) -> ExprResult<bool> {
        Ok(NormalForm::from_expr(ctx, self)?.is_zero())
    }

    /// `∂self/∂v` in normalized form. `v` must be an independent variable.
    pub fn differentiate(&self, ctx: &Context, v: &Symbol) -> ExprResult<Expression> {
        if v.kind() != SymbolKind::IndependentVariable {
            return Err(ExprError::InvalidOperation(format!(
                "cannot differentiate with respect to `{v}`: not an independent variable"
            )));
        }
        self.differentiate_any(ctx, v)
    }

    /// Differentiation without the kind restriction (used internally to
    /// differentiate with respect to the dependent placeholder).
    pub(crate) fn differentiate_any(&self, ctx: &Context, v: &Symbol) -> ExprResult<Expression> {
        Ok(NormalForm::from_expr(ctx, self)?.derivative(v, ctx)?.to_expr())
    }

    /// Simultaneous substitution followed by normalization.
    pub fn substitute(&self, ctx: &Context, bindings: &[(Symbol, Expression)]) -> ExprResult<Expression> {
        self.replace(bindings).normalize(ctx)
    }

    /// Simultaneous substitution on the raw tree (no normalization).
    pub fn replace(&self, bindings: &[(Symbol, Expression)]) -> Expression {
        match self {
            Expression::Rational(_) => self.clone(),
            Expression::Symbol(s) => bindings
                .iter()
                .find(|(from, _)| from == s)
                .map(|(_, to)| to.clone())
                .unwrap_or_else(|| self.clone()),
            Expression::Sum(items) => {
                Expression::Sum(items.iter().map(|e| e.replace(bindings)).collect())
            }
            Expression::Product(items) => {
                Expression::Product(items.iter().map(|e| e.replace(bindings)).collect())
            }
            Expression::Power(base, r) => {
                Expression::Power(Box::new(base.replace(bindings)), r.clone())
            }
            Expression::Exp(arg) => Expression::Exp(Box::new(arg.replace(bindings))),
        }
    }

    /// All symbols in the tree, sorted and deduplicated.
    pub fn free_symbols(&self) -> Vec<Symbol> {
        let mut out = Vec::new();
        self.collect_symbols(&mut out);
        out
    }

    fn collect_symbols(&self, out: &mut Vec<Symbol>) {
        match self {
            Expression::Rational(_) => {}
            Expression::Symbol(s) => {
                if let Err(pos) = out.binary_search(s) {
                    out.insert(pos, s.clone());
                }
            }
            Expression::Sum(items) | Expression::Product(items) => {
                for e in items {
                    e.collect_symbols(out);
                }
            }
            Expression::Power(base, _) => base.collect_symbols(out),
            Expression::Exp(arg) => arg.collect_symbols(out),
        }
    }

    /// True when the symbol occurs in the tree.
    pub fn mentions(&self, s: &Symbol) -> bool {
        match self {
            Expression::Rational(_) => false,
            Expression::Symbol(sym) => sym == s,
            Expression::Sum(items) | Expression::Product(items) => {
                items.iter().any(|e| e.mentions(s))
            }
            Expression::Power(base, _) => base.mentions(s),
            Expression::Exp(arg) => arg.mentions(s),
        }
    }

    /// IEEE double evaluation with all free symbols bound.
    pub fn eval_numeric(&self, bindings: &HashMap<Symbol, f64>) -> ExprResult<f64> {
        self.eval_with(bindings)
    }

    /// Generic float evaluation (f32/f64); rational constants are converted
    /// through f64 at full precision and rounded once.
    pub fn eval_with<F: Float + FromPrimitive>(
        &self,
        bindings: &HashMap<Symbol, F>,
    ) -> ExprResult<F> {
        let v = self.eval_inner(bindings)?;
        if !v.is_finite() {
            return Err(ExprError::NumericEval("non-finite result".into()));
        }
        Ok(v)
    }

    fn eval_inner<F: Float + FromPrimitive>(
        &self,
        bindings: &HashMap<Symbol, F>,
    ) -> ExprResult<F> {
        match self {
            Expression::Rational(r) => rat_to_float(r),
            Expression::Symbol(s) => bindings
                .get(s)
                .copied()
                .ok_or_else(|| ExprError::UnboundSymbol(s.name().to_string())),
            Expression::Sum(items) => {
                let mut acc = F::zero();
                for e in items {
                    acc = acc + e.eval_inner(bindings)?;
                }
                Ok(acc)
            }
            Expression::Product(items) => {
                let mut acc = F::one();
                for e in items {
                    acc = acc * e.eval_inner(bindings)?;
                }
                Ok(acc)
            }
            Expression::Power(base, r) => {
                let b = base.eval_inner(bindings)?;
                if r.is_integer() {
                    let n = r.to_integer().to_i32().ok_or_else(|| {
                        ExprError::InvalidOperation("integer exponent too large".into())
                    })?;
                    if b == F::zero() && n < 0 {
                        return Err(ExprError::NumericEval(
                            "zero raised to a negative power".into(),
                        ));
                    }
                    Ok(b.powi(n))
                } else {
                    if b < F::zero() {
                        return Err(ExprError::NumericEval(
                            "non-integer power of a negative base".into(),
                        ));
                    }
                    if b == F::zero() {
                        return if r.is_positive() {
                            Ok(F::zero())
                        } else {
                            Err(ExprError::NumericEval(
                                "zero raised to a negative power".into(),
                            ))
                        };
                    }
                    let e = rat_to_float::<F>(r)?;
                    Ok(b.powf(e))
                }
            }
            Expression::Exp(arg) => Ok(arg.eval_inner(bindings)?.exp()),
        }
    }
}

/// Convert an exact rational to a float through full-precision division.
pub fn rat_to_float<F: Float + FromPrimitive>(r: &Rat) -> ExprResult<F> {
    let v = r
        .to_f64()
        .ok_or_else(|| ExprError::NumericEval("rational out of float range".into()))?;
    F::from_f64(v).ok_or_else(|| ExprError::NumericEval("rational out of float range".into()))
}

impl std::ops::Add for Expression {
    type Output = Expression;
    fn add(self, rhs: Expression) -> Expression {
        Expression::add(self, rhs)
    }
}

impl std::ops::Sub for Expression {
    type Output = Expression;
    fn sub(self, rhs: Expression) -> Expression {
        Expression::sub(self, rhs)
    }
}

impl std::ops::Mul for Expression {
    type Output = Expression;
    fn mul(self, rhs: Expression) -> Expression {
        Expression::mul(self, rhs)
    }
}

impl std::ops::Div for Expression {
    type Output = Expression;
    fn div(self, rhs: Expression) -> Expression {
        Expression::div(self, rhs)
    }
}

impl std::ops::Neg for Expression {
    type Output = Expression;
    fn neg(self) -> Expression {
        Expression::neg(self)
    }
}
