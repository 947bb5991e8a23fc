//! Symmetry reduction and solution verification.
//!
//! Once a subalgebra fixing a source point is known, its invariants drive a
//! separation ansatz `u = F(t,x,…)·φ(ω(t,x,…))`: substituting the ansatz into
//! the equation and rewriting every coefficient through ω alone collapses the
//! PDE to a second-order ODE for the profile φ. This module checks candidate
//! invariants against a generator, performs that substitution with explicit
//! chain-rule bookkeeping, verifies closed-form solutions by direct
//! differentiation, and checks piecewise-constant weak factors against a
//! generator distributionally.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::Zero;

use crate::context::Context;
use crate::error::{ExprError, ExprResult};
use crate::expr::{Expression, NormalForm, Poly, Symbol, SymbolKind};
use crate::jet::{coef_times, write_signed_terms, LinearPDE, VectorField};

/// True for a literal rational zero (the normalized form of the zero
/// expression).
fn literal_zero(e: &Expression) -> bool {
    matches!(e, Expression::Rational(r) if r.is_zero())
}

/// Check that the generator annihilates `invariant`: the coefficients act on
/// the independent variables and the multiplier acts on the dependent symbol,
/// so the condition is `Σⱼ ξʲ·∂I/∂xʲ + α·u·∂I/∂u = 0` identically.
///
/// `invariant` may mention at most one dependent symbol; fractional powers
/// inside it must have registered-positive bases or the underlying
/// normalization reports the missing assumption.
pub fn check_invariant(
    ctx: &Context,
    field: &VectorField,
    invariant: &Expression,
) -> ExprResult<bool> {
    let mut action = field.apply_to_scalar(ctx, invariant)?;
    let dependents: Vec<Symbol> = invariant
        .free_symbols()
        .into_iter()
        .filter(|s| s.kind() == SymbolKind::DependentPlaceholder)
        .collect();
    if dependents.len() > 1 {
        return Err(ExprError::InvalidOperation(format!(
            "invariant mentions {} dependent symbols; at most one is supported",
            dependents.len()
        )));
    }
    if let Some(dep) = dependents.first() {
        let slope = invariant.differentiate_any(ctx, dep)?;
        action = action + field.alpha().clone() * Expression::symbol(dep.clone()) * slope;
    }
    action.is_zero(ctx)
}

/// Separation ansatz `u = multiplier · φ(similarity)`.
///
/// The profile symbol only names the unknown single-variable function; it
/// never appears inside the stored expressions.
#[derive(Debug, Clone)]
pub struct Ansatz {
    multiplier: Expression,
    similarity: Expression,
    profile: Symbol,
}

impl Ansatz {
    /// Build an ansatz, rejecting data outside the supported shape: both the
    /// multiplier and the similarity variable must be free of dependent
    /// symbols and the multiplier must not vanish identically. Both
    /// expressions are stored normalized, so fractional powers must already
    /// be legal in `ctx`.
    pub fn new(
        ctx: &Context,
        multiplier: Expression,
        similarity: Expression,
        profile: Symbol,
    ) -> ExprResult<Ansatz> {
        for (label, e) in [("multiplier", &multiplier), ("similarity variable", &similarity)] {
            if e.free_symbols()
                .iter()
                .any(|s| s.kind() == SymbolKind::DependentPlaceholder)
            {
                return Err(ExprError::InvalidOperation(format!(
                    "ansatz {label} must not mention a dependent symbol"
                )));
            }
        }
        let multiplier = multiplier.normalize(ctx)?;
        if literal_zero(&multiplier) {
            return Err(ExprError::InvalidOperation(
                "ansatz multiplier must be nonzero".into(),
            ));
        }
        Ok(Ansatz {
            multiplier,
            similarity: similarity.normalize(ctx)?,
            profile,
        })
    }

    /// The invariant multiplier `F`.
    pub fn multiplier(&self) -> &Expression {
        &self.multiplier
    }

    /// The similarity variable `ω` as an expression in the original
    /// variables.
    pub fn similarity(&self) -> &Expression {
        &self.similarity
    }

    /// The symbol naming the unknown profile function.
    pub fn profile(&self) -> &Symbol {
        &self.profile
    }

    /// Compose a concrete profile (an expression in `omega`) with the
    /// ansatz: substitute the similarity variable for `omega` and multiply by
    /// the invariant multiplier.
    pub fn apply_profile(
        &self,
        ctx: &Context,
        profile: &Expression,
        omega: &Symbol,
    ) -> ExprResult<Expression> {
        let composed = profile.substitute(ctx, &[(omega.clone(), self.similarity.clone())])?;
        (self.multiplier.clone() * composed).normalize(ctx)
    }
}

/// Second-order ODE `c2·φ'' + c1·φ' + c0·φ = 0` produced by the reduction.
///
/// All three coefficients are expressions in the single variable [`omega`]
/// (parameters may appear as constants); `c2` is never identically zero.
#[derive(Debug, Clone)]
pub struct ReducedODE {
    omega: Symbol,
    profile: Symbol,
    c2: Expression,
    c1: Expression,
    c0: Expression,
}

impl ReducedODE {
    /// The independent variable of the ODE.
    pub fn omega(&self) -> &Symbol {
        &self.omega
    }

    /// The symbol naming the profile function.
    pub fn profile(&self) -> &Symbol {
        &self.profile
    }

    /// Coefficient of `φ''`.
    pub fn c2(&self) -> &Expression {
        &self.c2
    }

    /// Coefficient of `φ'`.
    pub fn c1(&self) -> &Expression {
        &self.c1
    }

    /// Coefficient of `φ`.
    pub fn c0(&self) -> &Expression {
        &self.c0
    }

    /// Residual `c2·p'' + c1·p' + c0·p` for a candidate profile `p(omega)`,
    /// in normalized form.
    pub fn residual_for(&self, ctx: &Context, profile: &Expression) -> ExprResult<Expression> {
        let d1 = profile.differentiate(ctx, &self.omega)?;
        let d2 = d1.differentiate(ctx, &self.omega)?;
        (self.c2.clone() * d2 + self.c1.clone() * d1 + self.c0.clone() * profile.clone())
            .normalize(ctx)
    }

    /// True iff the candidate profile solves the reduced equation.
    pub fn is_solution(&self, ctx: &Context, profile: &Expression) -> ExprResult<bool> {
        Ok(literal_zero(&self.residual_for(ctx, profile)?))
    }
}

impl fmt::Display for ReducedODE {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let phi = self.profile.name();
        let mut terms = Vec::new();
        for (c, suffix) in [(&self.c2, "''"), (&self.c1, "'"), (&self.c0, "")] {
            if !literal_zero(c) {
                terms.push(coef_times(c, &format!("{phi}{suffix}")));
            }
        }
        write_signed_terms(f, &terms)?;
        write!(f, " = 0")
    }
}

/// One total derivative of a combination `Σₖ gₖ·φ⁽ᵏ⁾(ω)` with respect to `v`:
/// each coefficient differentiates in place, and contributes `gₖ·∂ω/∂v` one
/// slot up.
fn differentiate_profile_terms(
    ctx: &Context,
    terms: &BTreeMap<usize, Expression>,
    omega: &Expression,
    v: &Symbol,
) -> ExprResult<BTreeMap<usize, Expression>> {
    let slope = omega.differentiate(ctx, v)?;
    let mut out: BTreeMap<usize, Expression> = BTreeMap::new();
    let add = |map: &mut BTreeMap<usize, Expression>, k: usize, e: Expression| {
        if literal_zero(&e) {
            return;
        }
        match map.remove(&k) {
            Some(prev) => {
                map.insert(k, prev + e);
            }
            None => {
                map.insert(k, e);
            }
        }
    };
    for (k, g) in terms {
        add(&mut out, *k, g.differentiate(ctx, v)?);
        if !literal_zero(&slope) {
            add(&mut out, *k + 1, g.clone() * slope.clone());
        }
    }
    let mut normalized = BTreeMap::new();
    for (k, e) in out {
        let n = e.normalize(ctx)?;
        if !literal_zero(&n) {
            normalized.insert(k, n);
        }
    }
    Ok(normalized)
}

/// Repeatedly divide out registered-positive factors; true if only a nonzero
/// constant remains.
fn strips_to_constant(ctx: &Context, p: &Poly) -> bool {
    let mut cur = p.clone();
    'outer: while cur.as_constant().is_none() {
        for q in ctx.positives() {
            if q.total_degree() == 0 {
                continue;
            }
            if let Some(next) = cur.exact_div(q) {
                cur = next;
                continue 'outer;
            }
        }
        return false;
    }
    !cur.is_zero()
}

/// True when `e` is an invertible scale factor of the expression class: a
/// single generalized term with no exponential part whose numerator and
/// denominator are constants times products of registered-positive factors.
/// Dividing the whole equation by such a factor is exact and keeps every
/// coefficient inside the class.
fn is_unit_scale(ctx: &Context, e: &Expression) -> ExprResult<bool> {
    let nf = NormalForm::from_expr(ctx, e)?;
    let terms = nf.terms();
    if terms.len() != 1 {
        return Ok(false);
    }
    let term = &terms[0];
    if !term.exparg.is_zero() {
        return Ok(false);
    }
    Ok(strips_to_constant(ctx, term.coef.num()) && strips_to_constant(ctx, term.coef.den()))
}

/// Find a variable the similarity expression is affine in, scanning last
/// variable first, and return `(v, A, B)` with `ω = A·v + B`, `A` nonzero and
/// both `A` and `B` free of `v`.
fn affine_pivot(
    ctx: &Context,
    omega: &Expression,
    vars: &[Symbol],
) -> ExprResult<(Symbol, Expression, Expression)> {
    for v in vars.iter().rev() {
        let slope = omega.differentiate(ctx, v)?;
        if literal_zero(&slope) || slope.mentions(v) {
            continue;
        }
        let intercept =
            (omega.clone() - slope.clone() * Expression::symbol(v.clone())).normalize(ctx)?;
        if intercept.mentions(v) {
            continue;
        }
        return Ok((v.clone(), slope, intercept));
    }
    Err(ExprError::ReductionFailure(
        "the similarity variable is not affine in any independent variable, so the \
         coefficients cannot be rewritten through it"
            .into(),
    ))
}

/// `φ`, `φ'`, `φ''`, … rendered with the profile's name.
fn profile_label(profile: &Symbol, k: usize) -> String {
    format!("{}{}", profile.name(), "'".repeat(k))
}

/// Substitute `u = F·φ(ω)` into the equation and reduce it to an ODE in ω.
///
/// The substituted expression is kept as a combination `Σₖ gₖ(t,x,…)·φ⁽ᵏ⁾(ω)`
/// whose coefficients are tracked explicitly through the chain rule. The
/// combination is divided by `F`; when the `φ''` coefficient is an invertible
/// scale factor (see [`is_unit_scale`]) the whole equation is divided by it
/// as well, normalizing `c2 = 1`, and is reported unscaled otherwise. Every
/// surviving coefficient is then rewritten through ω — the similarity
/// variable is inverted for a variable it is affine in — and any leftover
/// dependence on the original variables is a reduction failure reported with
/// the offending residual.
pub fn substitute_ansatz(
    ctx: &Context,
    pde: &LinearPDE,
    ansatz: &Ansatz,
) -> ExprResult<ReducedODE> {
    let vars = pde.vars();
    let mut base = BTreeMap::new();
    base.insert(0usize, ansatz.multiplier().clone());

    // Lift every term of the equation through the chain rule.
    let mut total: BTreeMap<usize, Expression> = BTreeMap::new();
    for (idx, coeff) in pde.terms() {
        let mut cur = base.clone();
        for &j in idx.indices() {
            cur = differentiate_profile_terms(ctx, &cur, ansatz.similarity(), &vars[j])?;
        }
        for (k, g) in cur {
            let addend = coeff.clone() * g;
            match total.remove(&k) {
                Some(prev) => {
                    total.insert(k, prev + addend);
                }
                None => {
                    total.insert(k, addend);
                }
            }
        }
    }

    // Divide out the multiplier.
    let mut coeffs: BTreeMap<usize, Expression> = BTreeMap::new();
    for (k, g) in total {
        if k > 2 {
            return Err(ExprError::UnsupportedClass(
                "profile derivatives beyond second order".into(),
            ));
        }
        let v = Expression::div(g, ansatz.multiplier().clone()).normalize(ctx)?;
        if !literal_zero(&v) {
            coeffs.insert(k, v);
        }
    }

    let c2 = coeffs
        .get(&2)
        .cloned()
        .unwrap_or_else(|| Expression::integer(0));
    if literal_zero(&c2) {
        return Err(ExprError::ReductionFailure(
            "the substituted equation has no second-order profile term; the similarity \
             variable is constant along the second-order directions"
                .into(),
        ));
    }

    // Normalize the leading coefficient to 1 when that division is exact.
    let scaled: Vec<(usize, Expression)> = if is_unit_scale(ctx, &c2)? {
        let mut out = vec![(2usize, Expression::integer(1))];
        for k in [1usize, 0] {
            if let Some(c) = coeffs.get(&k) {
                out.push((k, Expression::div(c.clone(), c2.clone()).normalize(ctx)?));
            }
        }
        out
    } else {
        coeffs.into_iter().collect()
    };

    // Choose a fresh name for the ODE variable.
    let mut taken: BTreeSet<String> = vars.iter().map(|v| v.name().to_string()).collect();
    for (_, e) in &scaled {
        for s in e.free_symbols() {
            taken.insert(s.name().to_string());
        }
    }
    let mut name = String::from("omega");
    while taken.contains(&name) {
        name.push('_');
    }
    let omega_sym = Symbol::independent(&name);

    // Invert the similarity variable and rewrite every coefficient in ω.
    let (pivot, slope, intercept) = affine_pivot(ctx, ansatz.similarity(), vars)?;
    let inverse = Expression::div(
        Expression::symbol(omega_sym.clone()) - intercept,
        slope,
    );
    let mut rewritten: BTreeMap<usize, Expression> = BTreeMap::new();
    for (k, c) in scaled {
        let r = c.substitute(ctx, &[(pivot.clone(), inverse.clone())])?;
        if let Some(bad) = vars.iter().find(|v| r.mentions(v)) {
            return Err(ExprError::ReductionFailure(format!(
                "the coefficient of {} still depends on {} after rewriting in {}: {}",
                profile_label(ansatz.profile(), k),
                bad.name(),
                omega_sym.name(),
                r
            )));
        }
        rewritten.insert(k, r);
    }

    let get = |k: usize| {
        rewritten
            .get(&k)
            .cloned()
            .unwrap_or_else(|| Expression::integer(0))
    };
    Ok(ReducedODE {
        omega: omega_sym,
        profile: ansatz.profile().clone(),
        c2: get(2),
        c1: get(1),
        c0: get(0),
    })
}

/// Verify a closed-form solution by direct substitution: differentiate the
/// candidate along every multi-index of the equation, weight by the
/// coefficients, and test the sum for zero.
///
/// The candidate must be an explicit expression in the independent variables
/// (no dependent symbols).
pub fn verify_solution(
    ctx: &Context,
    pde: &LinearPDE,
    candidate: &Expression,
) -> ExprResult<bool> {
    if candidate
        .free_symbols()
        .iter()
        .any(|s| s.kind() == SymbolKind::DependentPlaceholder)
    {
        return Err(ExprError::InvalidOperation(
            "solution candidate must not mention a dependent symbol".into(),
        ));
    }
    let vars = pde.vars();
    let mut residual = Expression::integer(0);
    for (idx, coeff) in pde.terms() {
        let mut derived = candidate.clone();
        for &j in idx.indices() {
            derived = derived.differentiate(ctx, &vars[j])?;
        }
        residual = residual + coeff.clone() * derived;
    }
    residual.is_zero(ctx)
}

/// A factor constant on each side of a single jump in one variable:
/// `before` for `var < jump` and `after` for `var > jump`.
///
/// Held structurally because the jump lies outside the smooth expression
/// class; [`weak_factor_check`] knows its distributional derivative.
#[derive(Debug, Clone)]
pub struct StepFactor {
    var: Symbol,
    before: Expression,
    after: Expression,
    jump: Expression,
}

impl StepFactor {
    /// Build a step factor. `var` must be an independent variable; the two
    /// side values and the jump location must be free of independent
    /// variables and dependent symbols (parameters and constants only).
    pub fn new(
        var: Symbol,
        before: Expression,
        after: Expression,
        jump: Expression,
    ) -> ExprResult<StepFactor> {
        if !var.is_independent() {
            return Err(ExprError::InvalidOperation(format!(
                "step variable `{}` must be an independent variable",
                var.name()
            )));
        }
        for (label, e) in [
            ("left value", &before),
            ("right value", &after),
            ("jump location", &jump),
        ] {
            if e.free_symbols().iter().any(|s| {
                matches!(
                    s.kind(),
                    SymbolKind::IndependentVariable | SymbolKind::DependentPlaceholder
                )
            }) {
                return Err(ExprError::InvalidOperation(format!(
                    "step factor {label} must be built from parameters and constants only"
                )));
            }
        }
        Ok(StepFactor {
            var,
            before,
            after,
            jump,
        })
    }

    /// The variable carrying the jump.
    pub fn var(&self) -> &Symbol {
        &self.var
    }

    /// Value on the near side of the jump.
    pub fn before(&self) -> &Expression {
        &self.before
    }

    /// Value on the far side of the jump.
    pub fn after(&self) -> &Expression {
        &self.after
    }

    /// Location of the jump.
    pub fn jump(&self) -> &Expression {
        &self.jump
    }
}

/// Check that a piecewise-constant factor is invariant under the generator
/// in the weak sense.
///
/// Smooth invariant factors of a candidate solution already balance the
/// multiplier, so the factor only has to satisfy the first-order condition
/// `Σⱼ ξʲ·∂h/∂xʲ = 0` distributionally. The factor's single nonzero
/// derivative is `(after − before)·δ(var − jump)`, and multiplying the
/// continuous coefficient `ξ^{var}` by that delta evaluates the coefficient
/// on the jump locus. The product vanishes iff the jump has zero height or
/// `ξ^{var}` restricted to `var = jump` is identically zero.
pub fn weak_factor_check(
    ctx: &Context,
    field: &VectorField,
    factor: &StepFactor,
) -> ExprResult<bool> {
    let vars = field.vars();
    let Some(pos) = vars.iter().position(|v| v == factor.var()) else {
        return Err(ExprError::InvalidOperation(format!(
            "step variable `{}` is not a variable of the field",
            factor.var().name()
        )));
    };
    let height = (factor.after().clone() - factor.before().clone()).normalize(ctx)?;
    if literal_zero(&height) {
        return Ok(true);
    }
    let restricted = field
        .xi_component(pos)
        .substitute(ctx, &[(factor.var().clone(), factor.jump().clone())])?;
    restricted.is_zero(ctx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::rat;
    use crate::fixtures::{
        ansatz_multiplier, c, closed_form_solution, forward_context, invariant_weight,
        model_pde, similarity_variable, source_basis, t, t0, u, vars, x, y,
    };

    fn phi() -> Symbol {
        Symbol::constant("phi")
    }

    fn model_ansatz(ctx: &Context) -> Ansatz {
        Ansatz::new(ctx, ansatz_multiplier(), similarity_variable(), phi()).unwrap()
    }

    fn amplitude() -> Expression {
        Expression::symbol(Symbol::constant("C"))
    }

    #[test]
    fn source_generators_annihilate_the_derived_invariants() {
        let ctx = forward_context();
        let basis = source_basis(&ctx);
        // Oracle: hand integration of the characteristic systems of the
        // first and fourth source generators yields the weight invariant and
        // the similarity variable as their common invariants.
        for field in [&basis[0], &basis[3]] {
            assert!(check_invariant(&ctx, field, &invariant_weight()).unwrap());
            assert!(check_invariant(&ctx, field, &similarity_variable()).unwrap());
        }
        // t itself is moved by the first generator (its t-coefficient is
        // 2(t−t0), not zero).
        assert!(!check_invariant(&ctx, &basis[0], &t()).unwrap());
    }

    #[test]
    fn invariance_checks_validate_their_inputs() {
        let plain = Context::new();
        let basis = source_basis(&plain);
        // The similarity variable needs t−t0 registered positive for its
        // half-integer power.
        assert!(matches!(
            check_invariant(&plain, &basis[0], &similarity_variable()),
            Err(ExprError::DomainAssumption(_))
        ));
        // At most one dependent symbol is supported.
        let two = u() * Expression::symbol(Symbol::dependent("v"));
        assert!(matches!(
            check_invariant(&plain, &basis[0], &two),
            Err(ExprError::InvalidOperation(_))
        ));
    }

    #[test]
    fn polynomial_combinations_of_invariants_stay_invariant() {
        let ctx = forward_context();
        let i1 = invariant_weight();
        let i2 = similarity_variable();
        let combos = vec![
            Expression::powi(i1.clone(), 2),
            i1.clone() * i2.clone(),
            Expression::powi(i2.clone(), 3) - c(2) * i1.clone(),
            (c(1) + Expression::powi(i2.clone(), 2)) * i1.clone() + c(5),
        ];
        let basis = source_basis(&ctx);
        for combo in &combos {
            for field in [&basis[0], &basis[3]] {
                assert!(check_invariant(&ctx, field, combo).unwrap());
            }
        }
    }

    #[test]
    fn model_ansatz_reduces_to_the_profile_equation() {
        let ctx = forward_context();
        let pde = model_pde(&ctx);
        let ode = substitute_ansatz(&ctx, &pde, &model_ansatz(&ctx)).unwrap();
        let w = Expression::symbol(ode.omega().clone());
        // Oracle (hand-computed chain rule): φ'' + (3/2)ω·φ' + (3/2)φ = 0.
        assert!((ode.c2().clone() - c(1)).is_zero(&ctx).unwrap());
        assert!((ode.c1().clone() - Expression::rational(3, 2) * w)
            .is_zero(&ctx)
            .unwrap());
        assert!((ode.c0().clone() - Expression::rational(3, 2))
            .is_zero(&ctx)
            .unwrap());
        assert_eq!(ode.to_string(), "phi'' + 3/2*omega*phi' + 3/2*phi = 0");
        assert_eq!(ode.omega().name(), "omega");
        assert_eq!(ode.profile().name(), "phi");
    }

    #[test]
    fn gaussian_profile_solves_the_reduced_equation() {
        let ctx = forward_context();
        let pde = model_pde(&ctx);
        let ode = substitute_ansatz(&ctx, &pde, &model_ansatz(&ctx)).unwrap();
        let w = Expression::symbol(ode.omega().clone());
        let profile = amplitude()
            * Expression::exp(Expression::rational(-3, 4) * Expression::powi(w.clone(), 2));
        assert!(ode.is_solution(&ctx, &profile).unwrap());
        // A Gaussian with any other rate leaves a residual.
        let wrong = Expression::exp(Expression::rational(-1, 2) * Expression::powi(w, 2));
        assert!(!ode.is_solution(&ctx, &wrong).unwrap());
        assert!(!literal_zero(&ode.residual_for(&ctx, &wrong).unwrap()));
    }

    #[test]
    fn non_invariant_similarity_variables_fail_to_reduce() {
        let ctx = forward_context();
        let pde = model_pde(&ctx);
        // ω = x + y: the transport coefficient x survives in the φ' slot and
        // cannot be written through ω.
        let skew = Ansatz::new(&ctx, c(1), x() + y(), phi()).unwrap();
        let err = substitute_ansatz(&ctx, &pde, &skew).unwrap_err();
        let msg = err.to_string();
        assert!(matches!(err, ExprError::ReductionFailure(_)));
        assert!(msg.contains("phi'"), "unexpected message: {msg}");
        assert!(msg.contains('x'), "unexpected message: {msg}");
        // ω = y: no second-order profile term survives at all.
        let flat = Ansatz::new(&ctx, c(1), y(), phi()).unwrap();
        assert!(matches!(
            substitute_ansatz(&ctx, &pde, &flat),
            Err(ExprError::ReductionFailure(_))
        ));
    }

    #[test]
    fn ansatz_construction_rejects_degenerate_data() {
        let ctx = forward_context();
        assert!(matches!(
            Ansatz::new(&ctx, c(0), y(), phi()),
            Err(ExprError::InvalidOperation(_))
        ));
        assert!(matches!(
            Ansatz::new(&ctx, c(1), u(), phi()),
            Err(ExprError::InvalidOperation(_))
        ));
        // Without the positivity registration the similarity variable's
        // half-integer power is rejected up front.
        let plain = Context::new();
        assert!(matches!(
            Ansatz::new(&plain, ansatz_multiplier(), similarity_variable(), phi()),
            Err(ExprError::DomainAssumption(_))
        ));
    }

    #[test]
    fn reduction_pipeline_recovers_the_closed_form_solution() {
        let ctx = forward_context();
        let pde = model_pde(&ctx);
        let ansatz = model_ansatz(&ctx);
        let ode = substitute_ansatz(&ctx, &pde, &ansatz).unwrap();
        let w = Expression::symbol(ode.omega().clone());
        let profile =
            amplitude() * Expression::exp(Expression::rational(-3, 4) * Expression::powi(w, 2));
        assert!(ode.is_solution(&ctx, &profile).unwrap());
        let candidate = ansatz.apply_profile(&ctx, &profile, ode.omega()).unwrap();
        // Composing the profile with the ansatz reproduces the closed form.
        let closed = closed_form_solution(amplitude());
        assert!((candidate.clone() - closed).is_zero(&ctx).unwrap());
        assert!(verify_solution(&ctx, &pde, &candidate).unwrap());
    }

    #[test]
    fn closed_form_candidates_verify_by_direct_substitution() {
        let ctx = forward_context();
        let pde = model_pde(&ctx);
        assert!(verify_solution(&ctx, &pde, &closed_form_solution(amplitude())).unwrap());
        // The normalized amplitude √3/(2π) verifies identically too.
        let pi = Expression::symbol(Symbol::constant("pi"));
        let amp = Expression::div(Expression::powr(c(3), rat(1, 2)), c(2) * pi);
        assert!(verify_solution(&ctx, &pde, &closed_form_solution(amp)).unwrap());
        // u = y is not a solution: the transport term leaves x behind.
        assert!(!verify_solution(&ctx, &pde, &y()).unwrap());
        // Jet-style candidates mentioning the dependent symbol are rejected.
        assert!(matches!(
            verify_solution(&ctx, &pde, &u()),
            Err(ExprError::InvalidOperation(_))
        ));
    }

    #[test]
    fn step_factors_pass_exactly_at_the_source_time() {
        let ctx = forward_context();
        let basis = source_basis(&ctx);
        let time = vars()[0].clone();
        let low = Expression::symbol(Symbol::constant("C0"));
        let high = low.clone() + Expression::symbol(Symbol::constant("C1"));
        let step = StepFactor::new(time.clone(), low.clone(), high.clone(), t0()).unwrap();
        // Both generators kill the jump at the source time: the first one's
        // time coefficient 2(t−t0) vanishes on the jump locus, the fourth
        // one has no time motion at all.
        assert!(weak_factor_check(&ctx, &basis[0], &step).unwrap());
        assert!(weak_factor_check(&ctx, &basis[3], &step).unwrap());
        // A constant factor passes trivially, wherever the nominal jump sits.
        let flat = StepFactor::new(time.clone(), low.clone(), low.clone(), t0() + c(7)).unwrap();
        assert!(weak_factor_check(&ctx, &basis[0], &flat).unwrap());
        // A jump displaced from the source time is detected by the first
        // generator but invisible to the fourth.
        let shifted = StepFactor::new(time, low, high, t0() + c(1)).unwrap();
        assert!(!weak_factor_check(&ctx, &basis[0], &shifted).unwrap());
        assert!(weak_factor_check(&ctx, &basis[3], &shifted).unwrap());
    }

    #[test]
    fn step_factors_outside_the_class_are_rejected() {
        let time = vars()[0].clone();
        let low = Expression::symbol(Symbol::constant("C0"));
        // Side values must not involve the variables.
        assert!(matches!(
            StepFactor::new(time.clone(), x(), low.clone(), t0()),
            Err(ExprError::InvalidOperation(_))
        ));
        // The step variable must be an independent variable.
        assert!(matches!(
            StepFactor::new(Symbol::constant("k"), low.clone(), low.clone(), t0()),
            Err(ExprError::InvalidOperation(_))
        ));
        // The step variable must belong to the field.
        let ctx = forward_context();
        let basis = source_basis(&ctx);
        let foreign =
            StepFactor::new(Symbol::independent("z"), low.clone(), low, t0()).unwrap();
        assert!(matches!(
            weak_factor_check(&ctx, &basis[0], &foreign),
            Err(ExprError::InvalidOperation(_))
        ));
    }
}
