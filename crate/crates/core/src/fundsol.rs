//! Invariance algebra of a point source: impose the source-fixing conditions
//! on a general combination of symmetry fields and solve the resulting linear
//! system exactly over the rational-function field in the source parameters.
//!
//! A fundamental solution with pole at the source point `x0` is carried to
//! itself by a symmetry `X = Σ aᵢXᵢ` of the operator exactly when
//!
//! * every coordinate coefficient `ξʲ` of `X` vanishes at the source, and
//! * the multiplier balances the coefficient divergence there:
//!   `λ(x0) + Σⱼ ∂ξʲ/∂xʲ(x0) = 0`.
//!
//! Both conditions are linear in the constants `aᵢ`, so the admissible fields
//! form the nullspace of a small matrix whose entries are polynomials in the
//! source parameters. [`build_constraints`] assembles that matrix,
//! [`solve_constraints`] computes its nullspace fraction-free, and
//! [`same_span`] compares the resulting basis against any reference basis
//! (nullspace bases are only unique up to span).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_integer::Integer;
use num_traits::{One, Zero};

use crate::context::Context;
use crate::error::{ExprError, ExprResult};
use crate::expr::display::{poly_to_expr, poly_to_string};
use crate::expr::normal::NormalForm;
use crate::expr::poly::Monomial;
use crate::expr::{Poly, Rat, RatFun};
use crate::expr::{Symbol, SymbolKind};
use crate::expr::Expression;
use crate::jet::VectorField;

/// Linear constraints on the coefficients of a general symmetry combination
/// `Σ aᵢXᵢ`. Row `r` encodes the equation `Σᵢ rows[r][i]·aᵢ = 0`; entries are
/// functions of the source parameters only (all independent variables have
/// been evaluated away at the source point).
#[derive(Debug, Clone)]
pub struct ConstraintSystem {
    basis: Vec<VectorField>,
    columns: Vec<Symbol>,
    rows: Vec<Vec<Expression>>,
    row_labels: Vec<String>,
}

impl ConstraintSystem {
    /// Assemble a system directly from explicit rows, one entry per basis
    /// field. Useful for tests and for imposing extra linear conditions.
    pub fn with_rows(
        ctx: &Context,
        basis: Vec<VectorField>,
        rows: Vec<Vec<Expression>>,
    ) -> ExprResult<ConstraintSystem> {
        if let Some(first) = basis.first() {
            for f in &basis {
                if f.vars() != first.vars() {
                    return Err(ExprError::InvalidOperation(
                        "basis fields are over different variable lists".into(),
                    ));
                }
            }
        }
        let mut normalized = Vec::with_capacity(rows.len());
        for (r, row) in rows.into_iter().enumerate() {
            if row.len() != basis.len() {
                return Err(ExprError::InvalidOperation(format!(
                    "row {} has {} entries for {} basis fields",
                    r + 1,
                    row.len(),
                    basis.len()
                )));
            }
            normalized.push(
                row.into_iter()
                    .map(|e| e.normalize(ctx))
                    .collect::<ExprResult<Vec<_>>>()?,
            );
        }
        let columns = coefficient_symbols(basis.len());
        let row_labels = (1..=normalized.len()).map(|r| format!("constraint {r}")).collect();
        Ok(ConstraintSystem { basis, columns, rows: normalized, row_labels })
    }

    /// The symmetry fields whose combinations are being constrained.
    pub fn basis(&self) -> &[VectorField] {
        &self.basis
    }

    /// Column labels: one free constant per basis field (`a1`, `a2`, …).
    pub fn columns(&self) -> &[Symbol] {
        &self.columns
    }

    /// Matrix rows; `rows()[r][i]` is the coefficient of `columns()[i]`.
    pub fn rows(&self) -> &[Vec<Expression>] {
        &self.rows
    }

    /// Which condition generated each row.
    pub fn row_labels(&self) -> &[String] {
        &self.row_labels
    }

    /// Row `r` as a linear expression in the constants: `Σᵢ rows[r][i]·aᵢ`.
    pub fn row_expression(&self, r: usize) -> Expression {
        linear_combination(self.rows[r].iter().cloned().zip(self.columns.iter().cloned()))
    }
}

impl fmt::Display for ConstraintSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.rows.is_empty() {
            return writeln!(f, "(empty constraint system)");
        }
        for r in 0..self.rows.len() {
            writeln!(f, "{}: {} = 0", self.row_labels[r], self.row_expression(r))?;
        }
        Ok(())
    }
}

/// A solved pivot of the constraint system: the pivot constant expressed in
/// the free constants, e.g. `a6 = -2*t0*a2 - t0^2*a3`.
#[derive(Debug, Clone)]
pub struct Relation {
    pivot_column: usize,
    pivot: Symbol,
    dependence: Vec<(Symbol, Expression)>,
}

impl Relation {
    /// Column index of the solved constant.
    pub fn pivot_column(&self) -> usize {
        self.pivot_column
    }

    /// The solved constant.
    pub fn pivot(&self) -> &Symbol {
        &self.pivot
    }

    /// Free constants and their coefficients; empty means the pivot is zero.
    pub fn dependence(&self) -> &[(Symbol, Expression)] {
        &self.dependence
    }

    /// Right-hand side as an expression in the free constants.
    pub fn rhs(&self) -> Expression {
        linear_combination(self.dependence.iter().map(|(s, e)| (e.clone(), s.clone())))
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {}", self.pivot, self.rhs())
    }
}

/// A pivot entry that is a nonconstant polynomial in the source parameters:
/// the elimination treats it as nonzero, which is valid for generic source
/// positions but fails on the subvariety where the polynomial vanishes.
#[derive(Debug, Clone)]
pub struct StratificationWarning {
    row_label: String,
    column: Symbol,
    condition: String,
}

impl StratificationWarning {
    /// Label of the row whose pivot is parameter-dependent.
    pub fn row_label(&self) -> &str {
        &self.row_label
    }

    /// Column of the parameter-dependent pivot.
    pub fn column(&self) -> &Symbol {
        &self.column
    }

    /// The pivot polynomial assumed nonzero.
    pub fn condition(&self) -> &str {
        &self.condition
    }
}

impl fmt::Display for StratificationWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "pivot for `{}` in row `{}` is `{}`; the solution assumes it is nonzero \
             (valid for generic source position)",
            self.column, self.row_label, self.condition
        )
    }
}

/// Solved invariance algebra of the point source: a nullspace basis of the
/// constraint system reassembled into vector fields, together with the
/// eliminated relations and any genericity warnings from the elimination.
#[derive(Debug)]
pub struct FundamentalAlgebra {
    fields: Vec<VectorField>,
    coefficients: Vec<Vec<Expression>>,
    relations: Vec<Relation>,
    warnings: Vec<StratificationWarning>,
}

impl FundamentalAlgebra {
    /// Basis of the solved algebra.
    pub fn fields(&self) -> &[VectorField] {
        &self.fields
    }

    /// Dimension of the solved algebra.
    pub fn dimension(&self) -> usize {
        self.fields.len()
    }

    /// Coefficient vector of each basis field with respect to the input
    /// basis (denominators cleared, rational content divided out).
    pub fn coefficients(&self) -> &[Vec<Expression>] {
        &self.coefficients
    }

    /// Pivot constants expressed in the free constants, in elimination order.
    pub fn relations(&self) -> &[Relation] {
        &self.relations
    }

    /// Genericity warnings recorded during the elimination.
    pub fn warnings(&self) -> &[StratificationWarning] {
        &self.warnings
    }
}

/// Build the source-point constraint system for the general combination
/// `Σ aᵢ·basis[i]`: one row per variable requiring `ξʲ` to vanish at the
/// source, and a final row requiring `λ + div ξ` to vanish there. `lambdas`
/// must be the multipliers confirmed by the symmetry check, one per field.
pub fn build_constraints(
    ctx: &Context,
    basis: &[VectorField],
    lambdas: &[Expression],
    source: &[Symbol],
) -> ExprResult<ConstraintSystem> {
    if lambdas.len() != basis.len() {
        return Err(ExprError::InvalidOperation(format!(
            "{} multipliers supplied for {} basis fields",
            lambdas.len(),
            basis.len()
        )));
    }
    for s in source {
        if matches!(
            s.kind(),
            SymbolKind::IndependentVariable | SymbolKind::DependentPlaceholder
        ) {
            return Err(ExprError::InvalidOperation(format!(
                "source coordinate `{}` must be a parameter or constant symbol",
                s.name()
            )));
        }
    }
    let Some(first) = basis.first() else {
        return Ok(ConstraintSystem {
            basis: Vec::new(),
            columns: Vec::new(),
            rows: Vec::new(),
            row_labels: Vec::new(),
        });
    };
    let vars = first.vars().to_vec();
    if source.len() != vars.len() {
        return Err(ExprError::InvalidOperation(format!(
            "{} source coordinates for {} variables",
            source.len(),
            vars.len()
        )));
    }
    for f in basis {
        if f.vars() != vars.as_slice() {
            return Err(ExprError::InvalidOperation(
                "basis fields are over different variable lists".into(),
            ));
        }
    }
    let bindings: Vec<(Symbol, Expression)> = vars
        .iter()
        .cloned()
        .zip(source.iter().cloned().map(Expression::symbol))
        .collect();

    let mut rows = Vec::with_capacity(vars.len() + 1);
    let mut row_labels = Vec::with_capacity(vars.len() + 1);
    for (j, v) in vars.iter().enumerate() {
        let mut row = Vec::with_capacity(basis.len());
        for f in basis {
            row.push(eval_at_source(ctx, f.xi_component(j), &bindings)?);
        }
        rows.push(row);
        row_labels.push(format!("xi_{}(source)", v.name()));
    }
    let mut row = Vec::with_capacity(basis.len());
    for (f, lam) in basis.iter().zip(lambdas) {
        let total = (lam.clone() + f.divergence(ctx)?).normalize(ctx)?;
        row.push(eval_at_source(ctx, &total, &bindings)?);
    }
    rows.push(row);
    row_labels.push("lambda(source) + div xi(source)".to_string());

    Ok(ConstraintSystem {
        basis: basis.to_vec(),
        columns: coefficient_symbols(basis.len()),
        rows,
        row_labels,
    })
}

/// Compute an exact nullspace basis of the constraint matrix over the field
/// of rational functions in the source parameters, and reassemble each
/// nullspace vector into the vector field `Σ aᵢ·basis[i]`.
///
/// The forward pass is fraction-free (each elimination step divides exactly
/// by the previous pivot); per row the pivot is the rightmost entry that is a
/// nonzero rational constant when one exists — reproducing the hand
/// elimination shape where each condition is solved for its lone tail
/// constant — and otherwise the leftmost nonzero entry, with a recorded
/// warning that the result assumes a generic source position. Output vectors
/// are cleared of denominators, divided by their rational content, and
/// ordered by the first nonzero coefficient.
pub fn solve_constraints(
    ctx: &Context,
    sys: &ConstraintSystem,
) -> ExprResult<FundamentalAlgebra> {
    let ncols = sys.columns.len();
    if ncols == 0 {
        return Ok(FundamentalAlgebra {
            fields: Vec::new(),
            coefficients: Vec::new(),
            relations: Vec::new(),
            warnings: Vec::new(),
        });
    }

    // Rows as polynomials in the parameters, denominators cleared row-wise
    // (scaling a homogeneous equation changes nothing).
    let mut matrix: Vec<Vec<Poly>> = Vec::with_capacity(sys.rows.len());
    for row in &sys.rows {
        let rfs = row
            .iter()
            .map(|e| as_rational_entry(ctx, e))
            .collect::<ExprResult<Vec<_>>>()?;
        let mut den = Poly::one();
        for rf in &rfs {
            den = poly_lcm(&den, rf.den());
        }
        let den = RatFun::from_poly(den);
        let mut prow = Vec::with_capacity(ncols);
        for rf in &rfs {
            let cleared = rf.mul(&den)?;
            debug_assert!(cleared.den().is_one(), "row denominator was the lcm");
            prow.push(cleared.num().clone());
        }
        matrix.push(prow);
    }

    // Fraction-free forward elimination with per-row pivot choice.
    let mut pivots: Vec<(usize, usize)> = Vec::new();
    let mut pivot_cols: BTreeSet<usize> = BTreeSet::new();
    let mut warnings: Vec<StratificationWarning> = Vec::new();
    let mut prev = Poly::one();
    for r in 0..matrix.len() {
        let Some(c) = choose_pivot(&matrix[r], &pivot_cols) else {
            continue; // row reduced to zero: redundant condition
        };
        if matrix[r][c].as_constant().is_none() {
            warnings.push(StratificationWarning {
                row_label: sys.row_labels[r].clone(),
                column: sys.columns[c].clone(),
                condition: poly_to_string(&matrix[r][c]),
            });
        }
        let p = matrix[r][c].clone();
        let pivot_row = matrix[r].clone();
        for row_below in matrix.iter_mut().skip(r + 1) {
            let factor = row_below[c].clone();
            for (entry, pv) in row_below.iter_mut().zip(&pivot_row) {
                let num = p.mul(entry).sub(&factor.mul(pv));
                *entry = num
                    .exact_div(&prev)
                    .expect("fraction-free elimination divides exactly");
            }
        }
        pivots.push((r, c));
        pivot_cols.insert(c);
        prev = p;
    }

    // Back-substitution in reverse pivot order: each pivot row has zeros in
    // all earlier pivot columns (the forward pass put them there), so by the
    // time a row is processed every other unknown it mentions is known.
    let free_cols: Vec<usize> = (0..ncols).filter(|c| !pivot_cols.contains(c)).collect();
    let mut raw_vectors: Vec<Vec<RatFun>> = Vec::with_capacity(free_cols.len());
    for &f in &free_cols {
        let mut value = vec![RatFun::zero(); ncols];
        value[f] = RatFun::one();
        for &(r, c) in pivots.iter().rev() {
            let mut acc = RatFun::zero();
            for j in 0..ncols {
                if j == c || matrix[r][j].is_zero() || value[j].is_zero() {
                    continue;
                }
                acc = acc.add(&RatFun::from_poly(matrix[r][j].clone()).mul(&value[j])?)?;
            }
            value[c] = acc.neg().div(&RatFun::from_poly(matrix[r][c].clone()))?;
        }
        raw_vectors.push(value);
    }

    // Eliminated relations: the coefficient of free constant a_f in the
    // solved expression for pivot a_c is exactly entry c of the nullspace
    // vector generated by a_f.
    let mut relations = Vec::with_capacity(pivots.len());
    for &(_, c) in &pivots {
        let mut dependence = Vec::new();
        for (fi, &f) in free_cols.iter().enumerate() {
            let coef = &raw_vectors[fi][c];
            if !coef.is_zero() {
                dependence.push((sys.columns[f].clone(), ratfun_expr(coef)));
            }
        }
        relations.push(Relation {
            pivot_column: c,
            pivot: sys.columns[c].clone(),
            dependence,
        });
    }

    // Normalize each vector and reassemble the fields.
    let vars = sys.basis[0].vars().to_vec();
    let mut assembled: Vec<(usize, Vec<Poly>, VectorField)> =
        Vec::with_capacity(raw_vectors.len());
    for value in &raw_vectors {
        let cleared = clear_and_reduce(value)?;
        let lead = cleared
            .iter()
            .position(|p| !p.is_zero())
            .expect("nullspace vector has a unit free coordinate");
        let mut field = VectorField::zero(vars.clone());
        for (i, cp) in cleared.iter().enumerate() {
            if cp.is_zero() {
                continue;
            }
            field = field.add(ctx, &sys.basis[i].scale(ctx, &poly_to_expr(cp))?)?;
        }
        assembled.push((lead, cleared, field));
    }
    assembled.sort_by_key(|(lead, _, _)| *lead);

    let mut fields = Vec::with_capacity(assembled.len());
    let mut coefficients = Vec::with_capacity(assembled.len());
    for (_, cleared, field) in assembled {
        coefficients.push(cleared.iter().map(poly_to_expr).collect());
        fields.push(field);
    }

    Ok(FundamentalAlgebra { fields, coefficients, relations, warnings })
}

/// True when both lists span the same space of vector fields over the
/// rational functions in the parameters: every element of `a` solves as a
/// combination of `b` and vice versa.
pub fn same_span(ctx: &Context, a: &[VectorField], b: &[VectorField]) -> ExprResult<bool> {
    Ok(span_contains(ctx, b, a)? && span_contains(ctx, a, b)?)
}

/// True when every field in `targets` is a rational-function-in-parameters
/// combination of `spanning`.
pub(crate) fn span_contains(
    ctx: &Context,
    spanning: &[VectorField],
    targets: &[VectorField],
) -> ExprResult<bool> {
    let Some(first) = targets.first() else {
        return Ok(true);
    };
    let vars = first.vars();
    for f in spanning.iter().chain(targets.iter()) {
        if f.vars() != vars {
            return Err(ExprError::InvalidOperation(
                "span comparison requires fields over the same variable list".into(),
            ));
        }
    }
    let basis_coords = spanning
        .iter()
        .map(|f| field_coordinates(ctx, f))
        .collect::<ExprResult<Vec<_>>>()?;
    for target in targets {
        let target_coords = field_coordinates(ctx, target)?;
        let mut keys: BTreeSet<(usize, Monomial)> = target_coords.keys().cloned().collect();
        for bc in &basis_coords {
            keys.extend(bc.keys().cloned());
        }
        let mut rows = Vec::with_capacity(keys.len());
        let mut rhs = Vec::with_capacity(keys.len());
        for k in &keys {
            rows.push(
                basis_coords
                    .iter()
                    .map(|bc| bc.get(k).cloned().unwrap_or_else(RatFun::zero))
                    .collect::<Vec<_>>(),
            );
            rhs.push(target_coords.get(k).cloned().unwrap_or_else(RatFun::zero));
        }
        if solve_ratfun(rows, rhs)?.is_none() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Verify the defining source-point conditions for a single field: every
/// `ξʲ` vanishes at the source and `λ + div ξ` vanishes there, identically
/// in the parameters.
pub fn satisfies_source_conditions(
    ctx: &Context,
    field: &VectorField,
    lambda: &Expression,
    source: &[Symbol],
) -> ExprResult<bool> {
    if source.len() != field.vars().len() {
        return Err(ExprError::InvalidOperation(format!(
            "{} source coordinates for {} variables",
            source.len(),
            field.vars().len()
        )));
    }
    let bindings: Vec<(Symbol, Expression)> = field
        .vars()
        .iter()
        .cloned()
        .zip(source.iter().cloned().map(Expression::symbol))
        .collect();
    for j in 0..field.vars().len() {
        if !field.xi_component(j).substitute(ctx, &bindings)?.is_zero(ctx)? {
            return Ok(false);
        }
    }
    let total = (lambda.clone() + field.divergence(ctx)?).substitute(ctx, &bindings)?;
    total.is_zero(ctx)
}

/// One free constant per basis field: `a1`, `a2`, ….
fn coefficient_symbols(n: usize) -> Vec<Symbol> {
    (1..=n).map(|i| Symbol::constant(&format!("a{i}"))).collect()
}

/// Substitute the source point for the variables and insist that nothing
/// variable-dependent survives (a field mentioning an undeclared variable
/// would otherwise leak it into the constraint matrix).
fn eval_at_source(
    ctx: &Context,
    e: &Expression,
    bindings: &[(Symbol, Expression)],
) -> ExprResult<Expression> {
    let out = e.substitute(ctx, bindings)?;
    if let Some(v) = out.free_symbols().iter().find(|s| s.is_independent()) {
        return Err(ExprError::InvalidOperation(format!(
            "constraint entry still depends on independent variable `{}` \
             after evaluation at the source",
            v.name()
        )));
    }
    Ok(out)
}

/// Normalize a constraint entry into the rational-function field.
fn as_rational_entry(ctx: &Context, e: &Expression) -> ExprResult<RatFun> {
    NormalForm::from_expr(ctx, e)?.as_rational().ok_or_else(|| {
        ExprError::UnsupportedClass(
            "constraint entries must be rational functions of the parameters".into(),
        )
    })
}

/// Pivot column for a row: rightmost nonzero constant entry when one exists
/// (solving each condition for its lone tail constant, the shape hand
/// eliminations produce), else the leftmost nonzero entry.
fn choose_pivot(row: &[Poly], used: &BTreeSet<usize>) -> Option<usize> {
    let mut fallback = None;
    for c in (0..row.len()).rev() {
        if used.contains(&c) || row[c].is_zero() {
            continue;
        }
        if row[c].as_constant().is_some() {
            return Some(c);
        }
        fallback = Some(c); // loop runs right-to-left: ends at the leftmost
    }
    fallback
}

/// Least common multiple of two polynomials (up to a rational factor, which
/// is irrelevant where this is used: scaling rows and clearing denominators).
fn poly_lcm(a: &Poly, b: &Poly) -> Poly {
    if a.is_one() {
        return b.clone();
    }
    if b.is_one() {
        return a.clone();
    }
    let g = a.gcd(b);
    a.mul(b).exact_div(&g).expect("the gcd divides the product")
}

/// `gcd` on rationals: gcd of numerators over lcm of denominators, so that
/// dividing a coefficient list by it yields coprime integers.
fn rat_gcd(a: &Rat, b: &Rat) -> Rat {
    Rat::new(a.numer().gcd(b.numer()), a.denom().lcm(b.denom()))
}

/// Clear denominators from a nullspace vector and divide by the overall
/// rational content. The generating free coordinate stays a positive
/// multiple of one, which fixes the overall sign deterministically.
fn clear_and_reduce(values: &[RatFun]) -> ExprResult<Vec<Poly>> {
    let mut den = Poly::one();
    for v in values {
        den = poly_lcm(&den, v.den());
    }
    let den = RatFun::from_poly(den);
    let mut polys = Vec::with_capacity(values.len());
    for v in values {
        let cleared = v.mul(&den)?;
        debug_assert!(cleared.den().is_one(), "vector denominator was the lcm");
        polys.push(cleared.num().clone());
    }
    let mut content: Option<Rat> = None;
    for p in &polys {
        for (_, coef) in p.terms() {
            content = Some(match content {
                None => coef.clone(),
                Some(g) => rat_gcd(&g, coef),
            });
        }
    }
    if let Some(content) = content {
        let inv = content.recip();
        polys = polys.iter().map(|p| p.scale(&inv)).collect();
    }
    Ok(polys)
}

/// Rational function as a display expression (`num` or `num/den`).
fn ratfun_expr(rf: &RatFun) -> Expression {
    if rf.den().is_one() {
        poly_to_expr(rf.num())
    } else {
        Expression::div(poly_to_expr(rf.num()), poly_to_expr(rf.den()))
    }
}

/// `Σ coefᵢ·aᵢ` as a display-friendly expression; zero terms are skipped and
/// unit coefficients collapse onto the constant.
fn linear_combination<I: IntoIterator<Item = (Expression, Symbol)>>(parts: I) -> Expression {
    let mut terms = Vec::new();
    for (coef, sym) in parts {
        if matches!(&coef, Expression::Rational(r) if r.is_zero()) {
            continue;
        }
        let s = Expression::symbol(sym);
        terms.push(match &coef {
            Expression::Rational(r) if r.is_one() => s,
            _ => Expression::mul(coef, s),
        });
    }
    match terms.len() {
        0 => Expression::integer(0),
        1 => terms.remove(0),
        _ => Expression::Sum(terms),
    }
}

/// Coordinates of a field over the rational functions in the parameters:
/// one coordinate per (component index, variable monomial) pair. Components
/// must be polynomial in the variables (denominators may involve parameters).
fn field_coordinates(
    ctx: &Context,
    f: &VectorField,
) -> ExprResult<BTreeMap<(usize, Monomial), RatFun>> {
    let mut out = BTreeMap::new();
    for (idx, comp) in f.components().into_iter().enumerate() {
        let rf = as_rational_component(ctx, comp)?;
        let den = rf.den().clone();
        let mut parts: BTreeMap<Monomial, Poly> = BTreeMap::new();
        for (mon, coef) in rf.num().terms() {
            let (var_mon, par_mon) = split_monomial(mon);
            let piece = Poly::from_terms(vec![(par_mon, coef.clone())]);
            parts
                .entry(var_mon)
                .and_modify(|p| *p = p.add(&piece))
                .or_insert(piece);
        }
        for (var_mon, num) in parts {
            let value = RatFun::new(num, den.clone())?;
            if !value.is_zero() {
                out.insert((idx, var_mon), value);
            }
        }
    }
    Ok(out)
}

fn as_rational_component(ctx: &Context, e: &Expression) -> ExprResult<RatFun> {
    let rf = NormalForm::from_expr(ctx, e)?.as_rational().ok_or_else(|| {
        ExprError::UnsupportedClass(
            "span comparison requires rational field components".into(),
        )
    })?;
    if rf.den().symbols().iter().any(|s| s.is_independent()) {
        return Err(ExprError::UnsupportedClass(
            "span comparison requires components polynomial in the variables".into(),
        ));
    }
    Ok(rf)
}

/// Split a monomial into its variable part and its parameter/constant part.
fn split_monomial(m: &Monomial) -> (Monomial, Monomial) {
    let mut var_part = BTreeMap::new();
    let mut par_part = BTreeMap::new();
    for (s, e) in m.factors() {
        if s.is_independent() {
            var_part.insert(s.clone(), *e);
        } else {
            par_part.insert(s.clone(), *e);
        }
    }
    (Monomial::from_map(var_part), Monomial::from_map(par_part))
}

/// Exact Gauss–Jordan solve over the rational-function field; free unknowns
/// are set to zero; `None` when the system is inconsistent.
fn solve_ratfun(
    mut a: Vec<Vec<RatFun>>,
    mut b: Vec<RatFun>,
) -> ExprResult<Option<Vec<RatFun>>> {
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
        let inv = a[rank][col].inverse()?;
        for entry in a[rank].iter_mut() {
            *entry = entry.mul(&inv)?;
        }
        b[rank] = b[rank].mul(&inv)?;
        let pivot_row = a[rank].clone();
        for r2 in 0..rows {
            if r2 != rank && !a[r2][col].is_zero() {
                let f = a[r2][col].clone();
                for (entry, pv) in a[r2].iter_mut().zip(&pivot_row) {
                    let delta = pv.mul(&f)?;
                    *entry = entry.sub(&delta)?;
                }
                let delta = b[rank].mul(&f)?;
                b[r2] = b[r2].sub(&delta)?;
            }
        }
        pivot_row_of_col[col] = Some(rank);
        rank += 1;
        if rank == rows {
            break;
        }
    }
    if b[rank..].iter().any(|rhs| !rhs.is_zero()) {
        return Ok(None);
    }
    let mut sol = vec![RatFun::zero(); cols];
    for col in 0..cols {
        if let Some(r) = pivot_row_of_col[col] {
            sol[col] = b[r].clone();
        }
    }
    Ok(Some(sol))
}
