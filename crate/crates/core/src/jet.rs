//! Jet-space calculus for linear PDEs: vector-field prolongation, the
//! infinitesimal invariance criterion, commutators, and Lie-algebra
//! structure constants.
//!
//! A vector field here always has the shape
//! `X = Σ ξⁱ(x) ∂/∂xⁱ + α(x)·u ∂/∂u`
//! (coefficients free of the dependent variable, and the `∂/∂u` part linear
//! homogeneous in `u`). This class is closed under commutators and is
//! exactly the class for which the point-source constraint machinery in
//! [`crate::fundsol`] is formulated.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::{One, Zero};

use crate::context::Context;
use crate::error::{ExprError, ExprResult};
use crate::expr::poly::{Monomial, Poly, Rat};
use crate::expr::symbol::{Symbol, SymbolKind};
use crate::expr::{Expression, NormalForm};

/// Highest derivative order the prolongation machinery is enabled for.
pub const MAX_ORDER: usize = 2;

/// Sorted multi-index of derivative directions, stored as indices into the
/// problem's variable list. The empty index stands for the dependent
/// variable itself. Mixed partials commute, so indices are kept sorted.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MultiIndex(Vec<usize>);

impl MultiIndex {
    /// Multi-index from direction indices in any order.
    pub fn new(mut indices: Vec<usize>) -> MultiIndex {
        indices.sort_unstable();
        MultiIndex(indices)
    }

    /// The empty index (the dependent variable, no derivatives).
    pub fn empty() -> MultiIndex {
        MultiIndex(Vec::new())
    }

    /// Derivative order `|α|`.
    pub fn order(&self) -> usize {
        self.0.len()
    }

    /// The sorted direction indices.
    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    /// This index with one extra differentiation in direction `i`.
    pub fn extended(&self, i: usize) -> MultiIndex {
        let mut v = self.0.clone();
        v.push(i);
        v.sort_unstable();
        MultiIndex(v)
    }

    /// Derivative-suffix label, e.g. `u`, `u_t`, `u_xx`.
    pub fn label(&self, vars: &[Symbol], dep: &str) -> String {
        if self.0.is_empty() {
            return dep.to_string();
        }
        let suffix: String = self.0.iter().map(|&i| vars[i].name()).collect();
        format!("{dep}_{suffix}")
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for MultiIndex {
    /// Order by derivative order first, then lexicographically — so a jet
    /// expression lists `u`, then first, then second derivatives.
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.0.len(), &self.0).cmp(&(other.0.len(), &other.0))
    }
}

/// First-order operator `Σ ξⁱ(x) ∂/∂xⁱ + α(x)·u ∂/∂u`.
///
/// Components are kept in normalized form; the constructor rejects
/// coefficients that mention the dependent variable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VectorField {
    vars: Vec<Symbol>,
    xi: Vec<Expression>,
    alpha: Expression,
}

impl VectorField {
    /// Build and validate a vector field.
    pub fn new(
        ctx: &Context,
        vars: Vec<Symbol>,
        xi: Vec<Expression>,
        alpha: Expression,
    ) -> ExprResult<VectorField> {
        if xi.len() != vars.len() {
            return Err(ExprError::InvalidOperation(format!(
                "vector field has {} coefficients for {} variables",
                xi.len(),
                vars.len()
            )));
        }
        for v in &vars {
            if v.kind() != SymbolKind::IndependentVariable {
                return Err(ExprError::InvalidOperation(format!(
                    "`{}` is not an independent variable",
                    v.name()
                )));
            }
        }
        let xi = xi
            .into_iter()
            .map(|e| {
                reject_dependent(&e)?;
                e.normalize(ctx)
            })
            .collect::<ExprResult<Vec<_>>>()?;
        reject_dependent(&alpha)?;
        let alpha = alpha.normalize(ctx)?;
        Ok(VectorField { vars, xi, alpha })
    }

    /// The zero field on the given variables.
    pub fn zero(vars: Vec<Symbol>) -> VectorField {
        let xi = vec![Expression::integer(0); vars.len()];
        VectorField { vars, xi, alpha: Expression::integer(0) }
    }

    /// Ordered independent variables.
    pub fn vars(&self) -> &[Symbol] {
        &self.vars
    }

    /// All ξ components, one per variable.
    pub fn xi(&self) -> &[Expression] {
        &self.xi
    }

    /// ξ component for variable index `j`.
    pub fn xi_component(&self, j: usize) -> &Expression {
        &self.xi[j]
    }

    /// The multiplier α(x) of `u ∂/∂u`.
    pub fn alpha(&self) -> &Expression {
        &self.alpha
    }

    /// Directional action on a scalar: `X(f) = Σ ξʲ ∂f/∂xʲ`.
    pub fn apply_to_scalar(&self, ctx: &Context, f: &Expression) -> ExprResult<Expression> {
        let mut acc = Expression::integer(0);
        for (j, v) in self.vars.iter().enumerate() {
            if is_zero_literal(&self.xi[j]) {
                continue;
            }
            let df = f.differentiate(ctx, v)?;
            acc = acc + self.xi[j].clone() * df;
        }
        acc.normalize(ctx)
    }

    /// Coordinate divergence `Σ ∂ξʲ/∂xʲ`.
    pub fn divergence(&self, ctx: &Context) -> ExprResult<Expression> {
        let mut acc = Expression::integer(0);
        for (j, v) in self.vars.iter().enumerate() {
            acc = acc + self.xi[j].differentiate(ctx, v)?;
        }
        acc.normalize(ctx)
    }

    /// Component-wise sum (same variable list required).
    pub fn add(&self, ctx: &Context, other: &VectorField) -> ExprResult<VectorField> {
        self.require_same_vars(other)?;
        let xi = self
            .xi
            .iter()
            .zip(&other.xi)
            .map(|(a, b)| (a.clone() + b.clone()).normalize(ctx))
            .collect::<ExprResult<Vec<_>>>()?;
        let alpha = (self.alpha.clone() + other.alpha.clone()).normalize(ctx)?;
        Ok(VectorField { vars: self.vars.clone(), xi, alpha })
    }

    /// Scale every component by an expression free of the dependent variable.
    pub fn scale(&self, ctx: &Context, c: &Expression) -> ExprResult<VectorField> {
        reject_dependent(c)?;
        let xi = self
            .xi
            .iter()
            .map(|e| (c.clone() * e.clone()).normalize(ctx))
            .collect::<ExprResult<Vec<_>>>()?;
        let alpha = (c.clone() * self.alpha.clone()).normalize(ctx)?;
        Ok(VectorField { vars: self.vars.clone(), xi, alpha })
    }

    /// Component-wise negation.
    pub fn neg(&self, ctx: &Context) -> ExprResult<VectorField> {
        self.scale(ctx, &Expression::integer(-1))
    }

    /// True when every component normalizes to zero.
    pub fn is_zero(&self, ctx: &Context) -> ExprResult<bool> {
        for e in self.xi.iter().chain(std::iter::once(&self.alpha)) {
            if !e.is_zero(ctx)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Lie bracket `[X, Y]`: ξ-part `X(ξ_Yʲ) − Y(ξ_Xʲ)`, multiplier part
    /// `X(α_Y) − Y(α_X)`. The operator class is closed under this bracket.
    pub fn commutator(&self, ctx: &Context, other: &VectorField) -> ExprResult<VectorField> {
        self.require_same_vars(other)?;
        let mut xi = Vec::with_capacity(self.vars.len());
        for j in 0..self.vars.len() {
            let forward = self.apply_to_scalar(ctx, &other.xi[j])?;
            let backward = other.apply_to_scalar(ctx, &self.xi[j])?;
            xi.push((forward - backward).normalize(ctx)?);
        }
        let alpha = (self.apply_to_scalar(ctx, &other.alpha)?
            - other.apply_to_scalar(ctx, &self.alpha)?)
        .normalize(ctx)?;
        Ok(VectorField { vars: self.vars.clone(), xi, alpha })
    }

    fn require_same_vars(&self, other: &VectorField) -> ExprResult<()> {
        if self.vars != other.vars {
            return Err(ExprError::InvalidOperation(
                "vector fields are over different variable lists".into(),
            ));
        }
        Ok(())
    }

    /// All components as one slice-ordered vector: ξ¹…ξᵐ then α.
    pub(crate) fn components(&self) -> Vec<&Expression> {
        self.xi.iter().chain(std::iter::once(&self.alpha)).collect()
    }
}

impl fmt::Display for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut terms: Vec<String> = Vec::new();
        for (j, v) in self.vars.iter().enumerate() {
            if !is_zero_literal(&self.xi[j]) {
                terms.push(coef_times(&self.xi[j], &format!("∂{}", v.name())));
            }
        }
        if !is_zero_literal(&self.alpha) {
            terms.push(coef_times(&self.alpha, "u*∂u"));
        }
        write_signed_terms(f, &terms)
    }
}

/// Expression linear in the jet variables: `Σ c_α(x) · u_α`, with the empty
/// index standing for `u` itself. Coefficients are kept normalized and
/// zero terms dropped.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearJetExpression {
    vars: Vec<Symbol>,
    dep: Symbol,
    terms: BTreeMap<MultiIndex, Expression>,
}

impl LinearJetExpression {
    /// The zero jet expression.
    pub fn zero(vars: Vec<Symbol>, dep: Symbol) -> LinearJetExpression {
        LinearJetExpression { vars, dep, terms: BTreeMap::new() }
    }

    /// Coefficient map, indexed by multi-index.
    pub fn terms(&self) -> &BTreeMap<MultiIndex, Expression> {
        &self.terms
    }

    /// Coefficient of `u_idx` if present (absent means zero).
    pub fn coefficient(&self, idx: &MultiIndex) -> Option<&Expression> {
        self.terms.get(idx)
    }

    /// True when no nonzero term remains.
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Add `e · u_idx`, renormalizing the affected coefficient.
    pub fn add_term(&mut self, ctx: &Context, idx: MultiIndex, e: Expression) -> ExprResult<()> {
        let combined = match self.terms.remove(&idx) {
            Some(old) => (old + e).normalize(ctx)?,
            None => e.normalize(ctx)?,
        };
        if !is_zero_literal(&combined) {
            self.terms.insert(idx, combined);
        }
        Ok(())
    }

    /// Total derivative `D_i`: each `c·u_α` contributes `∂c/∂xᵢ·u_α + c·u_{α+i}`.
    fn total_derivative(&self, ctx: &Context, i: usize) -> ExprResult<LinearJetExpression> {
        let mut out = LinearJetExpression::zero(self.vars.clone(), self.dep.clone());
        for (idx, c) in &self.terms {
            out.add_term(ctx, idx.clone(), c.differentiate(ctx, &self.vars[i])?)?;
            out.add_term(ctx, idx.extended(i), c.clone())?;
        }
        Ok(out)
    }
}

impl fmt::Display for LinearJetExpression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = self
            .terms
            .iter()
            .map(|(idx, c)| coef_times(c, &idx.label(&self.vars, self.dep.name())))
            .collect();
        write_signed_terms(f, &terms)
    }
}

/// Linear PDE `Lu = Σ A_α(x) u_α = 0` of order at most [`MAX_ORDER`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearPDE {
    vars: Vec<Symbol>,
    dep: Symbol,
    order: usize,
    terms: BTreeMap<MultiIndex, Expression>,
}

impl LinearPDE {
    /// Build and validate. Duplicate indices are merged additively, zero
    /// coefficients dropped; the order is the highest surviving `|α|`.
    pub fn new(
        ctx: &Context,
        vars: Vec<Symbol>,
        dep: Symbol,
        terms: Vec<(MultiIndex, Expression)>,
    ) -> ExprResult<LinearPDE> {
        if dep.kind() != SymbolKind::DependentPlaceholder {
            return Err(ExprError::InvalidOperation(format!(
                "`{}` is not a dependent-variable symbol",
                dep.name()
            )));
        }
        let mut map: BTreeMap<MultiIndex, Expression> = BTreeMap::new();
        for (idx, coef) in terms {
            if idx.indices().iter().any(|&i| i >= vars.len()) {
                return Err(ExprError::InvalidOperation(
                    "derivative index outside the variable list".into(),
                ));
            }
            reject_dependent(&coef)?;
            let combined = match map.remove(&idx) {
                Some(old) => (old + coef).normalize(ctx)?,
                None => coef.normalize(ctx)?,
            };
            if !is_zero_literal(&combined) {
                map.insert(idx, combined);
            }
        }
        if map.is_empty() {
            return Err(ExprError::InvalidOperation("PDE has no nonzero terms".into()));
        }
        let order = map.keys().map(MultiIndex::order).max().unwrap_or(0);
        if order > MAX_ORDER {
            return Err(ExprError::UnsupportedClass(format!(
                "PDE order {order} not supported: order ≤ {MAX_ORDER} supported"
            )));
        }
        Ok(LinearPDE { vars, dep, order, terms: map })
    }

    /// Ordered independent variables.
    pub fn vars(&self) -> &[Symbol] {
        &self.vars
    }

    /// The dependent-variable symbol.
    pub fn dep(&self) -> &Symbol {
        &self.dep
    }

    /// Highest derivative order present.
    pub fn order(&self) -> usize {
        self.order
    }

    /// Coefficient map.
    pub fn terms(&self) -> &BTreeMap<MultiIndex, Expression> {
        &self.terms
    }

    /// Coefficient of `u_idx` if present.
    pub fn coefficient(&self, idx: &MultiIndex) -> Option<&Expression> {
        self.terms.get(idx)
    }

    /// The PDE's left-hand side as a jet expression.
    pub fn as_jet(&self) -> LinearJetExpression {
        LinearJetExpression {
            vars: self.vars.clone(),
            dep: self.dep.clone(),
            terms: self.terms.clone(),
        }
    }
}

impl fmt::Display for LinearPDE {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = 0", self.as_jet())
    }
}

/// Result of the invariance criterion: either a multiplier λ(x) with
/// `X_p(Lu) = λ·Lu` identically in the jet variables, or the nonzero
/// remainder `X_p(Lu) − λ·Lu` as a diagnostic.
#[derive(Debug, Clone)]
pub enum SymmetryVerdict {
    /// The field is a symmetry; `lambda` is the certified multiplier.
    Symmetry { lambda: Expression },
    /// Not a symmetry; the remainder shows which jet coefficients fail.
    NotSymmetry { remainder: LinearJetExpression },
}

impl SymmetryVerdict {
    /// The multiplier for a passing check.
    pub fn lambda(&self) -> Option<&Expression> {
        match self {
            SymmetryVerdict::Symmetry { lambda } => Some(lambda),
            SymmetryVerdict::NotSymmetry { .. } => None,
        }
    }

    /// True for a passing check.
    pub fn is_symmetry(&self) -> bool {
        matches!(self, SymmetryVerdict::Symmetry { .. })
    }
}

/// Apply the prolonged field to the PDE: returns
/// `X_p(Lu) = Σ_α [ X(A_α)·u_α + A_α·φ^α ]`, where the prolongation
/// coefficients come from the total-derivative recursion
/// `φ^{i₁…i_k} = D_{i₁}⋯D_{i_k}(α·u − Σ ξʲ u_j) + Σ ξʲ u_{i₁…i_k j}`.
/// The second sum exactly cancels the order-(k+1) terms of the first, so the
/// result is again linear of order ≤ the PDE's order.
pub fn prolong_apply(
    x: &VectorField,
    l: &LinearPDE,
    ctx: &Context,
) -> ExprResult<LinearJetExpression> {
    if x.vars() != l.vars() {
        return Err(ExprError::InvalidOperation(
            "field and PDE are over different variable lists".into(),
        ));
    }
    if l.order() > MAX_ORDER {
        return Err(ExprError::UnsupportedClass(format!(
            "PDE order {} not supported: order ≤ {MAX_ORDER} supported",
            l.order()
        )));
    }
    let m = l.vars().len();

    // W₀ = α·u − Σ ξʲ u_j  (the characteristic of the prolongation).
    let mut w0 = LinearJetExpression::zero(l.vars().to_vec(), l.dep().clone());
    w0.add_term(ctx, MultiIndex::empty(), x.alpha().clone())?;
    for j in 0..m {
        w0.add_term(ctx, MultiIndex::new(vec![j]), -x.xi_component(j).clone())?;
    }

    let mut out = LinearJetExpression::zero(l.vars().to_vec(), l.dep().clone());
    for (idx, a) in l.terms() {
        // Transport of the coefficient: X(A_α)·u_α.
        out.add_term(ctx, idx.clone(), x.apply_to_scalar(ctx, a)?)?;

        // φ^α = D^α(W₀) + Σ ξʲ u_{α+j}, then weighted by A_α.
        let mut w = w0.clone();
        for &i in idx.indices() {
            w = w.total_derivative(ctx, i)?;
        }
        for j in 0..m {
            w.add_term(ctx, idx.extended(j), x.xi_component(j).clone())?;
        }
        debug_assert!(
            w.terms().keys().all(|k| k.order() <= idx.order()),
            "top-order prolongation terms must cancel exactly"
        );
        for (beta, c) in w.terms() {
            out.add_term(ctx, beta.clone(), a.clone() * c.clone())?;
        }
    }
    Ok(out)
}

/// Default pivot for the multiplier: the first first-order term with a
/// constant coefficient if one exists (readable diagnostics), else the first
/// term. The verdict is pivot-independent whenever the check succeeds.
fn default_pivot(l: &LinearPDE) -> MultiIndex {
    for (idx, a) in l.terms() {
        if idx.order() == 1 && matches!(a, Expression::Rational(_)) {
            return idx.clone();
        }
    }
    l.terms().keys().next().expect("PDE has at least one term").clone()
}

/// Infinitesimal invariance criterion: find λ(x) with `X_p(Lu) = λ·Lu`
/// identically in the jet variables, or report the nonzero remainder.
pub fn check_symmetry(
    x: &VectorField,
    l: &LinearPDE,
    ctx: &Context,
) -> ExprResult<SymmetryVerdict> {
    check_symmetry_with_pivot(x, l, ctx, &default_pivot(l))
}

/// Same as [`check_symmetry`] with an explicit pivot term for λ extraction.
pub fn check_symmetry_with_pivot(
    x: &VectorField,
    l: &LinearPDE,
    ctx: &Context,
    pivot: &MultiIndex,
) -> ExprResult<SymmetryVerdict> {
    let a_pivot = l
        .coefficient(pivot)
        .ok_or_else(|| ExprError::InvalidOperation("pivot term absent from the PDE".into()))?;
    let e = prolong_apply(x, l, ctx)?;
    let e_pivot = e.coefficient(pivot).cloned().unwrap_or_else(|| Expression::integer(0));
    let lambda = Expression::div(e_pivot, a_pivot.clone()).normalize(ctx)?;

    let mut remainder = LinearJetExpression::zero(l.vars().to_vec(), l.dep().clone());
    let keys: BTreeSet<MultiIndex> =
        e.terms().keys().chain(l.terms().keys()).cloned().collect();
    for idx in keys {
        let lhs = e.coefficient(&idx).cloned().unwrap_or_else(|| Expression::integer(0));
        let rhs = match l.coefficient(&idx) {
            Some(a) => lambda.clone() * a.clone(),
            None => Expression::integer(0),
        };
        remainder.add_term(ctx, idx, lhs - rhs)?;
    }
    if remainder.is_zero() {
        Ok(SymmetryVerdict::Symmetry { lambda })
    } else {
        Ok(SymmetryVerdict::NotSymmetry { remainder })
    }
}

/// Structure constants `c_{ij}^k` with `[Xᵢ, Xⱼ] = Σ_k c_{ij}^k X_k`,
/// computed by exact rational linear solves on polynomial coordinates.
/// Fails with [`ExprError::SpanClosure`] if some commutator leaves the span.
pub fn structure_constants(
    basis: &[VectorField],
    ctx: &Context,
) -> ExprResult<Vec<Vec<Vec<Rat>>>> {
    let n = basis.len();
    let mut coords: Vec<Vec<Poly>> = Vec::with_capacity(n);
    for f in basis {
        coords.push(component_polys(f, ctx)?);
    }
    let mut table = vec![vec![Vec::new(); n]; n];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                table[i][j] = vec![Rat::zero(); n];
                continue;
            }
            let comm = basis[i].commutator(ctx, &basis[j])?;
            let target = component_polys(&comm, ctx)?;
            match solve_in_span(&coords, &target) {
                Some(c) => table[i][j] = c,
                None => {
                    return Err(ExprError::SpanClosure {
                        left: i,
                        right: j,
                        remainder: comm.to_string(),
                    })
                }
            }
        }
    }
    Ok(table)
}

/// Express `target` as a rational combination of `basis` component vectors
/// (all over polynomial coordinates), or return None if it is not in the span.
fn solve_in_span(basis: &[Vec<Poly>], target: &[Poly]) -> Option<Vec<Rat>> {
    let n = basis.len();
    let ncomp = target.len();
    // Coordinate rows: one per (component, monomial) pair seen anywhere.
    let mut rows: Vec<Vec<Rat>> = Vec::new();
    let mut rhs: Vec<Rat> = Vec::new();
    for comp in 0..ncomp {
        let mut monomials: BTreeSet<Monomial> = BTreeSet::new();
        for f in basis {
            for (mon, _) in f[comp].terms() {
                monomials.insert(mon.clone());
            }
        }
        for (mon, _) in target[comp].terms() {
            monomials.insert(mon.clone());
        }
        for mon in monomials {
            let mut row = Vec::with_capacity(n);
            for f in basis {
                row.push(poly_coeff(&f[comp], &mon));
            }
            rows.push(row);
            rhs.push(poly_coeff(&target[comp], &mon));
        }
    }
    solve_exact(rows, rhs)
}

fn poly_coeff(p: &Poly, mon: &Monomial) -> Rat {
    p.terms()
        .iter()
        .find(|(m, _)| m == mon)
        .map(|(_, c)| c.clone())
        .unwrap_or_else(Rat::zero)
}

/// Exact Gauss–Jordan solve of an (possibly over- or under-determined)
/// rational system; free variables are set to zero; None on inconsistency.
fn solve_exact(mut a: Vec<Vec<Rat>>, mut b: Vec<Rat>) -> Option<Vec<Rat>> {
    let rows = a.len();
    let cols = if rows == 0 { 0 } else { a[0].len() };
    let mut pivot_row_of_col: Vec<Option<usize>> = vec![None; cols];
    let mut rank = 0usize;
    for col in 0..cols {
        let Some(r) = (rank..rows).find(|&r| !a[r][col].is_zero()) else {
            continue;
        };
        a.swap(rank, r);
        b.swap(rank, r);
        let inv = a[rank][col].clone();
        for entry in a[rank].iter_mut() {
            *entry = &*entry / &inv;
        }
        b[rank] = &b[rank] / &inv;
        let pivot_row = a[rank].clone();
        for r2 in 0..rows {
            if r2 != rank && !a[r2][col].is_zero() {
                let f = a[r2][col].clone();
                for (entry, pv) in a[r2].iter_mut().zip(&pivot_row) {
                    let delta = pv * &f;
                    *entry = &*entry - &delta;
                }
                let delta = &b[rank] * &f;
                b[r2] = &b[r2] - &delta;
            }
        }
        pivot_row_of_col[col] = Some(rank);
        rank += 1;
        if rank == rows {
            break;
        }
    }
    // Consistency: eliminated rows with zero coefficients need zero rhs.
    if b[rank..].iter().any(|rhs| !rhs.is_zero()) {
        return None;
    }
    let mut sol = vec![Rat::zero(); cols];
    for col in 0..cols {
        if let Some(r) = pivot_row_of_col[col] {
            sol[col] = b[r].clone();
        }
    }
    Some(sol)
}

/// Normalize each field component and require it to be a polynomial; the
/// coordinates for span computations are its monomial coefficients.
fn component_polys(f: &VectorField, ctx: &Context) -> ExprResult<Vec<Poly>> {
    f.components()
        .into_iter()
        .map(|e| {
            let nf = NormalForm::from_expr(ctx, e)?;
            match nf.as_rational() {
                Some(rf) if rf.den().is_one() => Ok(rf.num().clone()),
                _ => Err(ExprError::UnsupportedClass(
                    "structure constants require polynomial field components".into(),
                )),
            }
        })
        .collect()
}

/// True for the literal normalized zero.
fn is_zero_literal(e: &Expression) -> bool {
    matches!(e, Expression::Rational(r) if r.is_zero())
}

fn reject_dependent(e: &Expression) -> ExprResult<()> {
    for s in e.free_symbols() {
        if s.kind() == SymbolKind::DependentPlaceholder {
            return Err(ExprError::InvalidOperation(format!(
                "coefficient mentions the dependent variable `{}`",
                s.name()
            )));
        }
    }
    Ok(())
}

/// `c * base` rendered compactly: unit coefficients collapse, sums get
/// parenthesized so the string parses back under the operator-sum syntax.
pub(crate) fn coef_times(c: &Expression, base: &str) -> String {
    match c {
        Expression::Rational(r) if r.is_one() => base.to_string(),
        Expression::Rational(r) if (-r).is_one() => format!("-{base}"),
        Expression::Sum(_) => format!("({c})*{base}"),
        _ => format!("{c}*{base}"),
    }
}

/// Join pre-rendered terms with sign-aware separators (`a - b` rather than
/// `a + -b`); an empty list renders as `0`.
pub(crate) fn write_signed_terms(f: &mut fmt::Formatter<'_>, terms: &[String]) -> fmt::Result {
    if terms.is_empty() {
        return write!(f, "0");
    }
    for (i, term) in terms.iter().enumerate() {
        if i == 0 {
            write!(f, "{term}")?;
        } else if let Some(rest) = term.strip_prefix('-') {
            write!(f, " - {rest}")?;
        } else {
            write!(f, " + {term}")?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::poly::rat_int;
    use crate::fixtures::{c, model_pde, symmetry_basis, t, vars, x, y};

    fn lambda_of(ctx: &Context, f: &VectorField, l: &LinearPDE) -> Expression {
        match check_symmetry(f, l, ctx).unwrap() {
            SymmetryVerdict::Symmetry { lambda } => lambda,
            SymmetryVerdict::NotSymmetry { remainder } => {
                panic!("expected a symmetry, got remainder {remainder}")
            }
        }
    }

    #[test]
    fn time_translation_prolongs_to_zero_with_zero_multiplier() {
        let ctx = Context::new();
        let l = model_pde(&ctx);
        let x6 = &symmetry_basis(&ctx)[5];
        let e = prolong_apply(x6, &l, &ctx).unwrap();
        assert!(e.is_zero());
        let lam = lambda_of(&ctx, x6, &l);
        assert!(lam.is_zero(&ctx).unwrap());
    }

    #[test]
    fn scaling_field_reproduces_minus_four_times_the_operator() {
        let ctx = Context::new();
        let l = model_pde(&ctx);
        let x2 = &symmetry_basis(&ctx)[1];
        let e = prolong_apply(x2, &l, &ctx).unwrap();
        // X₂ prolongs to −4·(u_t − u_xx + x u_y)
        for (idx, a) in l.terms() {
            let expected = (c(-4) * a.clone()).normalize(&ctx).unwrap();
            assert_eq!(e.coefficient(idx).unwrap(), &expected);
        }
        assert_eq!(e.terms().len(), l.terms().len());
        let lam = lambda_of(&ctx, x2, &l);
        assert!((lam + c(4)).is_zero(&ctx).unwrap());
    }

    #[test]
    fn multiplier_table_for_single_fields() {
        let ctx = Context::new();
        let l = model_pde(&ctx);
        let basis = symmetry_basis(&ctx);
        // Independently derived multipliers per generator.
        let expected: Vec<Expression> = vec![
            c(0),
            c(-4),
            -(c(4) * t() + Expression::powi(x(), 2)),
            c(3) * (y() - t() * x()),
            -x(),
            c(0),
            c(0),
            c(1),
        ];
        for (f, want) in basis.iter().zip(expected) {
            let lam = lambda_of(&ctx, f, &l);
            assert!((lam - want).is_zero(&ctx).unwrap());
        }
    }

    #[test]
    fn general_element_multiplier_is_linear_in_the_coefficients() {
        let ctx = Context::new();
        let l = model_pde(&ctx);
        let basis = symmetry_basis(&ctx);
        let a: Vec<Expression> = (1..=8)
            .map(|i| Expression::symbol(Symbol::constant(&format!("a{i}"))))
            .collect();
        let mut general = VectorField::zero(vars());
        for (f, ai) in basis.iter().zip(&a) {
            general = general.add(&ctx, &f.scale(&ctx, ai).unwrap()).unwrap();
        }
        let lam = lambda_of(&ctx, &general, &l);
        // λ = −4a₂ − a₃(4t + x²) + 3a₄(y − tx) − a₅x + a₈
        let want = c(-4) * a[1].clone()
            - a[2].clone() * (c(4) * t() + Expression::powi(x(), 2))
            + c(3) * a[3].clone() * (y() - t() * x())
            - a[4].clone() * x()
            + a[7].clone();
        assert!((lam - want).is_zero(&ctx).unwrap());
    }

    #[test]
    fn non_symmetry_reports_the_unmatched_jet_coefficient() {
        let ctx = Context::new();
        let l = model_pde(&ctx);
        // ∂x alone is not a symmetry: it transports the drift coefficient.
        let dx = VectorField::new(&ctx, vars(), vec![c(0), c(1), c(0)], c(0)).unwrap();
        match check_symmetry(&dx, &l, &ctx).unwrap() {
            SymmetryVerdict::Symmetry { .. } => panic!("∂x must not be a symmetry"),
            SymmetryVerdict::NotSymmetry { remainder } => {
                let uy = MultiIndex::new(vec![2]);
                let r = remainder.coefficient(&uy).expect("u_y coefficient must remain");
                assert!((r.clone() - c(1)).is_zero(&ctx).unwrap());
            }
        }
    }

    #[test]
    fn pivot_choice_does_not_change_the_multiplier() {
        let ctx = Context::new();
        let l = model_pde(&ctx);
        let x3 = &symmetry_basis(&ctx)[2];
        let mut lambdas = Vec::new();
        for idx in l.terms().keys() {
            match check_symmetry_with_pivot(x3, &l, &ctx, idx).unwrap() {
                SymmetryVerdict::Symmetry { lambda } => lambdas.push(lambda),
                SymmetryVerdict::NotSymmetry { remainder } => {
                    panic!("pivot {idx:?} rejected a symmetry: {remainder}")
                }
            }
        }
        for pair in lambdas.windows(2) {
            assert!((pair[0].clone() - pair[1].clone()).is_zero(&ctx).unwrap());
        }
    }

    #[test]
    fn commutator_oracles() {
        let ctx = Context::new();
        let basis = symmetry_basis(&ctx);
        // [∂t, ∂x + t∂y] = ∂y
        let got = basis[5].commutator(&ctx, &basis[0]).unwrap();
        let diff = got.add(&ctx, &basis[6].neg(&ctx).unwrap()).unwrap();
        assert!(diff.is_zero(&ctx).unwrap());
        // [X₁, X₅] = −u∂u
        let got = basis[0].commutator(&ctx, &basis[4]).unwrap();
        let diff = got.add(&ctx, &basis[7]).unwrap();
        assert!(diff.is_zero(&ctx).unwrap());
        // [X, X] = 0
        for f in &basis {
            assert!(f.commutator(&ctx, f).unwrap().is_zero(&ctx).unwrap());
        }
    }

    #[test]
    fn structure_constants_close_on_the_full_basis() {
        let ctx = Context::new();
        let basis = symmetry_basis(&ctx);
        let table = structure_constants(&basis, &ctx).unwrap();
        // Spot-check [X₆, X₁] = X₇: row (5,0) must be the 7th unit vector.
        let row = &table[5][0];
        for (k, v) in row.iter().enumerate() {
            let want = if k == 6 { rat_int(1) } else { rat_int(0) };
            assert_eq!(*v, want, "c_{{6,1}}^{} mismatch", k + 1);
        }
        // Antisymmetry of the table; i, j, k play symmetric roles, so the
        // index form is the readable one here.
        #[allow(clippy::needless_range_loop)]
        for i in 0..basis.len() {
            for j in 0..basis.len() {
                for k in 0..basis.len() {
                    assert_eq!(table[i][j][k], -table[j][i][k].clone());
                }
            }
        }
    }

    #[test]
    fn structure_constants_report_span_escape() {
        let ctx = Context::new();
        let basis = symmetry_basis(&ctx);
        let pair = vec![basis[0].clone(), basis[4].clone()];
        match structure_constants(&pair, &ctx) {
            Err(ExprError::SpanClosure { left: 0, right: 1, remainder }) => {
                assert!(remainder.contains("u*∂u"), "remainder was {remainder}");
            }
            other => panic!("expected span-closure failure, got {other:?}"),
        }
    }

    #[test]
    fn single_field_table_is_zero() {
        let ctx = Context::new();
        let basis = vec![symmetry_basis(&ctx)[5].clone()];
        let table = structure_constants(&basis, &ctx).unwrap();
        assert_eq!(table, vec![vec![vec![rat_int(0)]]]);
    }

    #[test]
    fn pde_constructor_rejects_high_order_and_empty() {
        let ctx = Context::new();
        let third = LinearPDE::new(
            &ctx,
            vars(),
            Symbol::dependent("u"),
            vec![(MultiIndex::new(vec![0, 0, 0]), c(1))],
        );
        assert!(matches!(third, Err(ExprError::UnsupportedClass(_))));
        let empty = LinearPDE::new(&ctx, vars(), Symbol::dependent("u"), vec![]);
        assert!(matches!(empty, Err(ExprError::InvalidOperation(_))));
    }

    #[test]
    fn field_display_parses_in_operator_notation() {
        let ctx = Context::new();
        let x5 = &symmetry_basis(&ctx)[4];
        assert_eq!(x5.to_string(), "2*t*∂x + t^2*∂y - x*u*∂u");
        let x6 = &symmetry_basis(&ctx)[5];
        assert_eq!(x6.to_string(), "∂t");
    }
}
