//! Canonical normal form for the supported expression class:
//! finite sums of `rational-function * product-of-radicals * exp(rational-function)`.
//!
//! Each term carries a *key* — its sorted radical list plus the canonical
//! exponential argument — and a reduced rational-function coefficient. Terms
//! with equal keys are merged, so a normal form is zero exactly when it has no
//! terms. Soundness rests on two facts: exponentials of distinct rational
//! functions are linearly independent over the rational functions, and
//! radicals are canonicalized to prime constant bases and registered,
//! squarefree, pairwise-coprime polynomial bases, which keeps distinct keys
//! genuinely independent.

use std::cmp::Ordering;

use num_bigint::BigInt;

use num_traits::{One, Signed, ToPrimitive, Zero};

use super::poly::{Poly, Rat};
use super::ratfun::{ratfun_cmp, RatFun};
use super::symbol::Symbol;
use super::Expression;
use crate::context::Context;
use crate::error::{ExprError, ExprResult};

/// Base of a radical factor.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum RadBase {
    /// A positive integer with no divisor below the trial-division bound
    /// (prime in practice).
    Const(BigInt),
    /// A registered-positive signed primitive polynomial.
    Poly(Poly),
}

/// A radical factor `base^exp` with `0 < exp < 1`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Radical {
    pub base: RadBase,
    pub exp: Rat,
}

/// One generalized term: `coef * Π radicals * exp(exparg)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GTerm {
    pub coef: RatFun,
    pub radicals: Vec<Radical>,
    pub exparg: RatFun,
}

impl GTerm {
    fn key_cmp(&self, other: &GTerm) -> Ordering {
        self.radicals
            .cmp(&other.radicals)
            .then_with(|| ratfun_cmp(&self.exparg, &other.exparg))
    }

    fn is_pure_rational(&self) -> bool {
        self.radicals.is_empty() && self.exparg.is_zero()
    }
}

/// A normalized expression: generalized terms with distinct keys, sorted by
/// key, each with a nonzero coefficient.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalForm {
    terms: Vec<GTerm>,
}

impl NormalForm {
    /// The zero form.
    pub fn zero() -> Self {
        NormalForm { terms: Vec::new() }
    }

    /// The constant `1`.
    pub fn one() -> Self {
        NormalForm::constant(Rat::one())
    }

    /// A rational constant.
    pub fn constant(c: Rat) -> Self {
        NormalForm::from_ratfun(RatFun::constant(c))
    }

    /// A rational function viewed as a normal form.
    pub fn from_ratfun(rf: RatFun) -> Self {
        if rf.is_zero() {
            return NormalForm::zero();
        }
        NormalForm {
            terms: vec![GTerm { coef: rf, radicals: Vec::new(), exparg: RatFun::zero() }],
        }
    }

    /// Term view.
    pub fn terms(&self) -> &[GTerm] {
        &self.terms
    }

    /// True when the form is identically zero.
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// When the whole form is a single rational function (or zero), return it.
    pub fn as_rational(&self) -> Option<RatFun> {
        match self.terms.len() {
            0 => Some(RatFun::zero()),
            1 if self.terms[0].is_pure_rational() => Some(self.terms[0].coef.clone()),
            _ => None,
        }
    }

    /// All symbols occurring anywhere in the form, sorted.
    pub fn free_symbols(&self) -> Vec<Symbol> {
        let mut out: Vec<Symbol> = Vec::new();
        let mut push = |s: Symbol| {
            if let Err(pos) = out.binary_search(&s) {
                out.insert(pos, s);
            }
        };
        for t in &self.terms {
            for s in t.coef.symbols() {
                push(s);
            }
            for r in &t.radicals {
                if let RadBase::Poly(p) = &r.base {
                    for s in p.symbols() {
                        push(s);
                    }
                }
            }
            for s in t.exparg.symbols() {
                push(s);
            }
        }
        out
    }

    /// True when the symbol occurs anywhere in the form.
    pub fn contains(&self, s: &Symbol) -> bool {
        self.terms.iter().any(|t| {
            t.coef.contains(s)
                || t.exparg.contains(s)
                || t.radicals.iter().any(|r| match &r.base {
                    RadBase::Poly(p) => p.contains(s),
                    RadBase::Const(_) => false,
                })
        })
    }

    fn insert_term(&mut self, term: GTerm, cap: usize) -> ExprResult<()> {
        if term.coef.is_zero() {
            return Ok(());
        }
        match self.terms.binary_search_by(|t| t.key_cmp(&term)) {
            Ok(i) => {
                let merged = rf_add_capped(&self.terms[i].coef, &term.coef, cap)?;
                if merged.is_zero() {
                    self.terms.remove(i);
                } else {
                    self.terms[i].coef = merged;
                }
            }
            Err(i) => {
                if self.terms.len() + 1 > cap {
                    return Err(ExprError::ResourceCap { needed: self.terms.len() + 1, cap });
                }
                self.terms.insert(i, term);
            }
        }
        Ok(())
    }

    /// Sum of two forms.
    pub fn add(&self, other: &NormalForm, ctx: &Context) -> ExprResult<NormalForm> {
        let cap = ctx.term_cap();
        let mut out = self.clone();
        for t in &other.terms {
            out.insert_term(t.clone(), cap)?;
        }
        Ok(out)
    }

    /// Negation.
    pub fn neg(&self) -> NormalForm {
        NormalForm {
            terms: self
                .terms
                .iter()
                .map(|t| GTerm { coef: t.coef.neg(), radicals: t.radicals.clone(), exparg: t.exparg.clone() })
                .collect(),
        }
    }

    /// Difference.
    pub fn sub(&self, other: &NormalForm, ctx: &Context) -> ExprResult<NormalForm> {
        self.add(&other.neg(), ctx)
    }

    /// Product of two forms.
    pub fn mul(&self, other: &NormalForm, ctx: &Context) -> ExprResult<NormalForm> {
        let cap = ctx.term_cap();
        let pairs = self.terms.len().saturating_mul(other.terms.len());
        if pairs > cap {
            return Err(ExprError::ResourceCap { needed: pairs, cap });
        }
        let mut out = NormalForm::zero();
        for a in &self.terms {
            for b in &other.terms {
                let t = gterm_mul(a, b, cap)?;
                out.insert_term(t, cap)?;
            }
        }
        Ok(out)
    }

    /// Scale by a rational constant.
    pub fn scale(&self, c: &Rat) -> NormalForm {
        if c.is_zero() {
            return NormalForm::zero();
        }
        NormalForm {
            terms: self
                .terms
                .iter()
                .map(|t| GTerm { coef: t.coef.scale(c), radicals: t.radicals.clone(), exparg: t.exparg.clone() })
                .collect(),
        }
    }

    /// Raise to an exact rational power.
    pub fn pow_rat(&self, r: &Rat, ctx: &Context) -> ExprResult<NormalForm> {
        if r.is_integer() {
            let n = r
                .to_integer()
                .to_i64()
                .ok_or_else(|| ExprError::InvalidOperation("integer exponent too large".into()))?;
            return self.pow_int(n, ctx);
        }
        // fractional power: only a single generalized term (or zero) stays in class
        if self.terms.is_empty() {
            return if r.is_positive() {
                Ok(NormalForm::zero())
            } else {
                Err(ExprError::DivisionByZero)
            };
        }
        if self.terms.len() > 1 {
            return Err(ExprError::UnsupportedClass(
                "fractional power of a sum of generalized terms".into(),
            ));
        }
        gterm_pow_rat(&self.terms[0], r, ctx).map(|t| NormalForm { terms: t.map(|t| vec![t]).unwrap_or_default() })
    }

    /// Integer power (negative exponents require an invertible form).
    pub fn pow_int(&self, n: i64, ctx: &Context) -> ExprResult<NormalForm> {
        if n == 0 {
            return Ok(NormalForm::one());
        }
        if n.unsigned_abs() > 1_000_000 {
            return Err(ExprError::InvalidOperation("integer exponent too large".into()));
        }
        let base = if n < 0 { self.inverse(ctx)? } else { self.clone() };
        let mut result = NormalForm::one();
        let mut sq = base;
        let mut k = n.unsigned_abs();
        loop {
            if k & 1 == 1 {
                result = result.mul(&sq, ctx)?;
            }
            k >>= 1;
            if k == 0 {
                break;
            }
            sq = sq.mul(&sq, ctx)?;
        }
        Ok(result)
    }

    /// Reciprocal. Only zero (error) and single-term forms are invertible in
    /// the supported class; `1/(1 + exp(x))`, for instance, is not.
    pub fn inverse(&self, ctx: &Context) -> ExprResult<NormalForm> {
        match self.terms.len() {
            0 => Err(ExprError::DivisionByZero),
            1 => {
                let t = &self.terms[0];
                let mut coef = t.coef.inverse()?;
                let mut radicals = Vec::with_capacity(t.radicals.len());
                for r in &t.radicals {
                    let e = -&r.exp;
                    let (mult, rad) = resplit_base(&r.base, &e, ctx.term_cap())?;
                    coef = rf_mul_capped(&coef, &mult, ctx.term_cap())?;
                    if let Some(rad) = rad {
                        radicals.push(rad);
                    }
                }
                radicals.sort();
                Ok(NormalForm {
                    terms: vec![GTerm { coef, radicals, exparg: t.exparg.neg() }],
                })
            }
            _ => Err(ExprError::UnsupportedClass(
                "division by a sum of distinct generalized terms".into(),
            )),
        }
    }

    /// Partial derivative with respect to one symbol.
    ///
    /// Works per term: `(c * Π b_i^{f_i} * e^g)' = (c' + c*(Σ f_i b_i'/b_i + g')) * Π b_i^{f_i} * e^g`,
    /// so keys never change and the term list stays canonical.
    pub fn derivative(&self, s: &Symbol, ctx: &Context) -> ExprResult<NormalForm> {
        let cap = ctx.term_cap();
        let mut terms = Vec::with_capacity(self.terms.len());
        for t in &self.terms {
            let mut chain = t.exparg.derivative(s)?;
            for r in &t.radicals {
                if let RadBase::Poly(p) = &r.base {
                    if p.contains(s) {
                        let ratio = RatFun::new(p.derivative(s), p.clone())?;
                        chain = rf_add_capped(&chain, &ratio.scale(&r.exp), cap)?;
                    }
                }
            }
            let mut coef = t.coef.derivative(s)?;
            if !chain.is_zero() {
                coef = rf_add_capped(&coef, &rf_mul_capped(&t.coef, &chain, cap)?, cap)?;
            }
            if !coef.is_zero() {
                terms.push(GTerm { coef, radicals: t.radicals.clone(), exparg: t.exparg.clone() });
            }
        }
        Ok(NormalForm { terms })
    }

    /// Normalize an expression tree into this canonical form.
    pub fn from_expr(ctx: &Context, e: &Expression) -> ExprResult<NormalForm> {
        match e {
            Expression::Rational(r) => Ok(NormalForm::constant(r.clone())),
            Expression::Symbol(s) => {
                Ok(NormalForm::from_ratfun(RatFun::from_poly(Poly::symbol(s.clone()))))
            }
            Expression::Sum(items) => {
                let mut acc = NormalForm::zero();
                for item in items {
                    acc = acc.add(&NormalForm::from_expr(ctx, item)?, ctx)?;
                }
                Ok(acc)
            }
            Expression::Product(items) => {
                let mut acc = NormalForm::one();
                for item in items {
                    acc = acc.mul(&NormalForm::from_expr(ctx, item)?, ctx)?;
                }
                Ok(acc)
            }
            Expression::Power(base, r) => NormalForm::from_expr(ctx, base)?.pow_rat(r, ctx),
            Expression::Exp(arg) => {
                let nf = NormalForm::from_expr(ctx, arg)?;
                let rf = nf.as_rational().ok_or_else(|| {
                    ExprError::UnsupportedClass(
                        "exponential of an expression that is not a rational function".into(),
                    )
                })?;
                if rf.is_zero() {
                    return Ok(NormalForm::one());
                }
                Ok(NormalForm {
                    terms: vec![GTerm { coef: RatFun::one(), radicals: Vec::new(), exparg: rf }],
                })
            }
        }
    }

    /// Render back into a canonical expression tree. Re-normalizing the
    /// result reproduces this normal form exactly.
    pub fn to_expr(&self) -> Expression {
        match self.terms.len() {
            0 => Expression::integer(0),
            1 => gterm_to_expr(&self.terms[0]),
            _ => Expression::Sum(self.terms.iter().map(gterm_to_expr).collect()),
        }
    }
}

fn rf_mul_capped(a: &RatFun, b: &RatFun, cap: usize) -> ExprResult<RatFun> {
    let num = a.num().mul_capped(b.num(), cap)?;
    let den = a.den().mul_capped(b.den(), cap)?;
    RatFun::new(num, den)
}

fn rf_add_capped(a: &RatFun, b: &RatFun, cap: usize) -> ExprResult<RatFun> {
    let l = a.num().mul_capped(b.den(), cap)?;
    let r = b.num().mul_capped(a.den(), cap)?;
    RatFun::new(l.add(&r), a.den().mul_capped(b.den(), cap)?)
}

fn gterm_mul(a: &GTerm, b: &GTerm, cap: usize) -> ExprResult<GTerm> {
    let mut coef = rf_mul_capped(&a.coef, &b.coef, cap)?;
    let mut radicals: Vec<Radical> = Vec::with_capacity(a.radicals.len() + b.radicals.len());
    let mut ai = a.radicals.iter().peekable();
    let mut bi = b.radicals.iter().peekable();
    loop {
        match (ai.peek(), bi.peek()) {
            (None, None) => break,
            (Some(_), None) => radicals.push(ai.next().unwrap().clone()),
            (None, Some(_)) => radicals.push(bi.next().unwrap().clone()),
            (Some(ra), Some(rb)) => match ra.base.cmp(&rb.base) {
                Ordering::Less => radicals.push(ai.next().unwrap().clone()),
                Ordering::Greater => radicals.push(bi.next().unwrap().clone()),
                Ordering::Equal => {
                    let ra = ai.next().unwrap();
                    let rb = bi.next().unwrap();
                    let e = &ra.exp + &rb.exp;
                    let (mult, rad) = resplit_base(&ra.base, &e, cap)?;
                    coef = rf_mul_capped(&coef, &mult, cap)?;
                    if let Some(rad) = rad {
                        radicals.push(rad);
                    }
                }
            },
        }
    }
    let exparg = rf_add_capped(&a.exparg, &b.exparg, cap)?;
    Ok(GTerm { coef, radicals, exparg })
}

/// Split `base^e` into a rational-function multiplier (the integer part of
/// the exponent) and an optional residual radical with exponent in `(0, 1)`.
fn resplit_base(base: &RadBase, e: &Rat, cap: usize) -> ExprResult<(RatFun, Option<Radical>)> {
    let fl = e.floor();
    let frac = e - &fl;
    let int_part = fl.to_integer();
    let mult = match base {
        RadBase::Const(n) => RatFun::constant(pow_bigint(n, &int_part)?),
        RadBase::Poly(p) => {
            let k = int_part
                .to_i64()
                .ok_or_else(|| ExprError::InvalidOperation("exponent too large".into()))?;
            match k.cmp(&0) {
                Ordering::Equal => RatFun::one(),
                Ordering::Greater => {
                    RatFun::from_poly(p.pow_capped(u32::try_from(k).map_err(|_| {
                        ExprError::InvalidOperation("exponent too large".into())
                    })?, cap)?)
                }
                Ordering::Less => RatFun::new(
                    Poly::one(),
                    p.pow_capped(u32::try_from(-k).map_err(|_| {
                        ExprError::InvalidOperation("exponent too large".into())
                    })?, cap)?,
                )?,
            }
        }
    };
    let rad = if frac.is_zero() {
        None
    } else {
        Some(Radical { base: base.clone(), exp: frac })
    };
    Ok((mult, rad))
}

fn pow_bigint(n: &BigInt, k: &BigInt) -> ExprResult<Rat> {
    let kk = k
        .to_i64()
        .ok_or_else(|| ExprError::InvalidOperation("exponent too large".into()))?;
    let e = u32::try_from(kk.unsigned_abs())
        .map_err(|_| ExprError::InvalidOperation("exponent too large".into()))?;
    let p = Rat::from_integer(n.pow(e));
    if kk < 0 {
        Ok(Rat::one() / p)
    } else {
        Ok(p)
    }
}

fn gterm_pow_rat(t: &GTerm, r: &Rat, ctx: &Context) -> ExprResult<Option<GTerm>> {
    let cap = ctx.term_cap();
    // numerator^r / denominator^r with registry-backed factorization
    let (num_mult, num_rads) = poly_pow_rat(ctx, t.coef.num(), r)?;
    let (den_mult, den_rads) = poly_pow_rat(ctx, t.coef.den(), &-r)?;
    let mut coef = rf_mul_capped(&num_mult, &den_mult, cap)?;
    let mut radicals: Vec<Radical> = Vec::new();
    let mut push = |rad: Radical, coef: &mut RatFun| -> ExprResult<()> {
        // bases from numerator, denominator, and prior radicals may coincide
        if let Some(pos) = radicals.iter().position(|q| q.base == rad.base) {
            let e = &radicals[pos].exp + &rad.exp;
            let old = radicals.remove(pos);
            let (mult, merged) = resplit_base(&old.base, &e, cap)?;
            *coef = rf_mul_capped(coef, &mult, cap)?;
            if let Some(m) = merged {
                radicals.push(m);
            }
        } else {
            radicals.push(rad);
        }
        Ok(())
    };
    for rad in num_rads.into_iter().chain(den_rads) {
        push(rad, &mut coef)?;
    }
    for old in &t.radicals {
        let e = &old.exp * r;
        let (mult, rad) = resplit_base(&old.base, &e, cap)?;
        coef = rf_mul_capped(&coef, &mult, cap)?;
        if let Some(rad) = rad {
            push(rad, &mut coef)?;
        }
    }
    radicals.sort();
    let exparg = t.exparg.scale(r);
    if coef.is_zero() {
        return Ok(None);
    }
    Ok(Some(GTerm { coef, radicals, exparg }))
}

/// `p^r` for a polynomial base and fractional `r`: factor `p` into its
/// rational content and registered positive bases, then distribute the power.
fn poly_pow_rat(ctx: &Context, p: &Poly, r: &Rat) -> ExprResult<(RatFun, Vec<Radical>)> {
    debug_assert!(!p.is_zero());
    let cap = ctx.term_cap();
    let (content, prim) = p.primitive_decompose();
    let signed_prim = if content.is_negative() { prim.neg() } else { prim };
    let content_abs = content.abs();

    // constant part via prime factorization
    let (mult_rat, const_rads) = rat_pow_rat(&content_abs, r)?;

    // polynomial part via trial division against the positivity registry
    let mut mult_rf = RatFun::one();
    let mut radicals: Vec<Radical> = const_rads
        .into_iter()
        .map(|(b, e)| Radical { base: RadBase::Const(b), exp: e })
        .collect();
    let mut remaining = signed_prim;
    if remaining.as_constant() != Some(Rat::one()) {
        for q in ctx.positives() {
            let mut count: u32 = 0;
            while let Some(quo) = remaining.exact_div(q) {
                remaining = quo;
                count += 1;
                if remaining.as_constant().is_some() {
                    break;
                }
            }
            if count > 0 {
                let e = Rat::from_integer(BigInt::from(count)) * r;
                let (m, rad) = resplit_base(&RadBase::Poly(q.clone()), &e, cap)?;
                mult_rf = rf_mul_capped(&mult_rf, &m, cap)?;
                if let Some(rad) = rad {
                    radicals.push(rad);
                }
            }
        }
        match remaining.as_constant() {
            Some(c) if c.is_one() => {}
            Some(c) => {
                // a residual constant here is -1 (primitive quotients), which
                // would make the registered product carry the wrong sign
                return Err(ExprError::DomainAssumption(format!(
                    "fractional power of a base with unresolved sign (residual constant {c})"
                )));
            }
            None => {
                return Err(ExprError::DomainAssumption(format!(
                    "fractional power of `{}`: base is not a product of registered positive factors",
                    super::display::poly_to_string(&remaining)
                )));
            }
        }
    }

    mult_rf = mult_rf.scale(&mult_rat);
    radicals.sort();
    Ok((mult_rf, radicals))
}

/// `c^r` for a positive rational constant: factor numerator and denominator
/// by trial division and distribute the exponent over the factors.
fn rat_pow_rat(c: &Rat, r: &Rat) -> ExprResult<(Rat, Vec<(BigInt, Rat)>)> {
    if !c.is_positive() {
        return Err(ExprError::DomainAssumption(format!(
            "fractional power of the non-positive constant {c}"
        )));
    }
    let mut exps: Vec<(BigInt, Rat)> = Vec::new();
    let mut push = |base: BigInt, e: Rat| {
        if let Some(slot) = exps.iter_mut().find(|(b, _)| *b == base) {
            slot.1 += e;
        } else {
            exps.push((base, e));
        }
    };
    for (n, sign) in [(c.numer().clone(), 1i64), (c.denom().clone(), -1i64)] {
        for (prime, count) in trial_factor(n) {
            let e = r * Rat::from_integer(BigInt::from(count as i64 * sign));
            push(prime, e);
        }
    }
    let mut mult = Rat::one();
    let mut radicals = Vec::new();
    for (base, e) in exps {
        let fl = e.floor();
        let frac = &e - &fl;
        mult *= pow_bigint(&base, &fl.to_integer())?;
        if !frac.is_zero() {
            radicals.push((base, frac));
        }
    }
    radicals.sort();
    Ok((mult, radicals))
}

/// Trial division up to 2^16; any leftover cofactor is returned as its own
/// base (its reconstruction is deterministic, so canonical forms still match).
fn trial_factor(n: BigInt) -> Vec<(BigInt, u32)> {
    let mut out = Vec::new();
    let mut n = n;
    if n <= BigInt::one() {
        return out;
    }
    let mut d = BigInt::from(2);
    let bound = BigInt::from(1u32 << 16);
    while &d * &d <= n && d <= bound {
        let mut count = 0;
        while (&n % &d).is_zero() {
            n /= &d;
            count += 1;
        }
        if count > 0 {
            out.push((d.clone(), count));
        }
        d += if d == BigInt::from(2) { BigInt::one() } else { BigInt::from(2) };
    }
    if n > BigInt::one() {
        out.push((n, 1));
    }
    out
}

fn gterm_to_expr(t: &GTerm) -> Expression {
    let mut factors: Vec<Expression> = Vec::new();
    let numex = super::display::poly_to_expr(t.coef.num());
    let has_more =
        !t.coef.den().is_one() || !t.radicals.is_empty() || !t.exparg.is_zero();
    if !(t.coef.num().is_one() && has_more) {
        factors.push(numex);
    }
    if !t.coef.den().is_one() {
        factors.push(Expression::Power(
            Box::new(super::display::poly_to_expr(t.coef.den())),
            -Rat::one(),
        ));
    }
    for r in &t.radicals {
        let base = match &r.base {
            RadBase::Const(n) => Expression::Rational(Rat::from_integer(n.clone())),
            RadBase::Poly(p) => super::display::poly_to_expr(p),
        };
        factors.push(Expression::Power(Box::new(base), r.exp.clone()));
    }
    if !t.exparg.is_zero() {
        factors.push(Expression::Exp(Box::new(ratfun_to_expr(&t.exparg))));
    }
    match factors.len() {
        0 => Expression::integer(1),
        1 => factors.pop().unwrap(),
        _ => Expression::Product(factors),
    }
}

fn ratfun_to_expr(rf: &RatFun) -> Expression {
    let num = super::display::poly_to_expr(rf.num());
    if rf.den().is_one() {
        return num;
    }
    let den = Expression::Power(Box::new(super::display::poly_to_expr(rf.den())), -Rat::one());
    Expression::Product(vec![num, den])
}
