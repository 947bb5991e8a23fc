//! Sparse multivariate polynomials over exact rationals.
//!
//! Monomials are ordered graded-lexicographically (total degree first, then
//! lexicographic with alphabetically-earlier symbols taking precedence), which
//! is a proper monomial order, so leading terms behave under multiplication.
//! The polynomial GCD uses a primitive pseudo-remainder sequence, recursing on
//! the coefficient ring, which keeps every derived canonical form (reduced
//! rational functions, exponent arguments, radical bases) unique.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::symbol::Symbol;
use crate::error::{ExprError, ExprResult};

/// Exact rational scalar used by the whole symbolic engine.
pub type Rat = BigRational;

/// Build a rational from an integer.
pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Build a rational from a numerator/denominator pair.
pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// A power product of symbols with positive integer exponents, kept sorted by
/// symbol. The empty product is the monomial `1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Monomial(Vec<(Symbol, u32)>);

impl Monomial {
    /// The monomial `1`.
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    /// The monomial consisting of a single symbol.
    pub fn symbol(s: Symbol) -> Self {
        Monomial(vec![(s, 1)])
    }

    /// Exponent pairs, sorted by symbol.
    pub fn factors(&self) -> &[(Symbol, u32)] {
        &self.0
    }

    /// Total degree.
    pub fn degree(&self) -> u32 {
        self.0.iter().map(|(_, e)| e).sum()
    }

    /// Exponent of a given symbol (zero when absent).
    pub fn exponent(&self, s: &Symbol) -> u32 {
        self.0
            .iter()
            .find(|(sym, _)| sym == s)
            .map(|(_, e)| *e)
            .unwrap_or(0)
    }

    /// Product of two monomials.
    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut map: BTreeMap<Symbol, u32> = BTreeMap::new();
        for (s, e) in self.0.iter().chain(other.0.iter()) {
            *map.entry(s.clone()).or_insert(0) += e;
        }
        Monomial(map.into_iter().collect())
    }

    /// `self / other` when every exponent of `other` fits under `self`.
    pub fn try_div(&self, other: &Monomial) -> Option<Monomial> {
        let mut out = Vec::with_capacity(self.0.len());
        let mut rhs = other.0.iter().peekable();
        for (s, e) in &self.0 {
            let mut e = *e;
            if let Some((rs, re)) = rhs.peek() {
                if rs == s {
                    if *re > e {
                        return None;
                    }
                    e -= re;
                    rhs.next();
                }
            }
            if e > 0 {
                out.push((s.clone(), e));
            }
        }
        if rhs.peek().is_some() {
            return None; // other has a symbol self lacks
        }
        Some(Monomial(out))
    }

    pub(crate) fn from_map(map: BTreeMap<Symbol, u32>) -> Monomial {
        Monomial(map.into_iter().filter(|(_, e)| *e > 0).collect())
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Monomial {
    /// Graded-lex: higher total degree wins; on ties, the monomial with the
    /// higher exponent on the alphabetically earliest differing symbol wins.
    fn cmp(&self, other: &Self) -> Ordering {
        match self.degree().cmp(&other.degree()) {
            Ordering::Equal => {}
            ord => return ord,
        }
        let mut a = self.0.iter().peekable();
        let mut b = other.0.iter().peekable();
        loop {
            match (a.peek(), b.peek()) {
                (None, None) => return Ordering::Equal,
                // remaining factors on one side only: that side has positive
                // exponent on a symbol the other lacks
                (Some((sa, _)), None) => {
                    let _ = sa;
                    return Ordering::Greater;
                }
                (None, Some(_)) => return Ordering::Less,
                (Some((sa, ea)), Some((sb, eb))) => match sa.cmp(sb) {
                    // self has the earlier symbol with positive exponent
                    Ordering::Less => return Ordering::Greater,
                    Ordering::Greater => return Ordering::Less,
                    Ordering::Equal => match ea.cmp(eb) {
                        Ordering::Equal => {
                            a.next();
                            b.next();
                        }
                        ord => return ord,
                    },
                },
            }
        }
    }
}

/// Sparse polynomial: monomials paired with nonzero rational coefficients,
/// sorted in descending monomial order. The zero polynomial has no terms.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Poly {
    terms: Vec<(Monomial, Rat)>,
}

impl Poly {
    /// The zero polynomial.
    pub fn zero() -> Self {
        Poly { terms: Vec::new() }
    }

    /// The constant polynomial `1`.
    pub fn one() -> Self {
        Poly::constant(Rat::one())
    }

    /// A constant polynomial.
    pub fn constant(c: Rat) -> Self {
        if c.is_zero() {
            Poly::zero()
        } else {
            Poly { terms: vec![(Monomial::one(), c)] }
        }
    }

    /// The polynomial consisting of a single symbol.
    pub fn symbol(s: Symbol) -> Self {
        Poly { terms: vec![(Monomial::symbol(s), Rat::one())] }
    }

    /// Build from unsorted `(monomial, coefficient)` pairs, merging duplicates.
    pub fn from_terms(pairs: Vec<(Monomial, Rat)>) -> Self {
        let mut map: BTreeMap<Monomial, Rat> = BTreeMap::new();
        for (m, c) in pairs {
            let entry = map.entry(m).or_insert_with(Rat::zero);
            *entry += c;
        }
        let mut terms: Vec<(Monomial, Rat)> =
            map.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        terms.reverse(); // BTreeMap iterates ascending; we store descending
        Poly { terms }
    }

    /// Term view, descending monomial order.
    pub fn terms(&self) -> &[(Monomial, Rat)] {
        &self.terms
    }

    /// True when this is the zero polynomial.
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// True when this is the constant `1`.
    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms[0].0 == Monomial::one() && self.terms[0].1.is_one()
    }

    /// Returns the value when the polynomial is constant (including zero).
    pub fn as_constant(&self) -> Option<Rat> {
        match self.terms.len() {
            0 => Some(Rat::zero()),
            1 if self.terms[0].0 == Monomial::one() => Some(self.terms[0].1.clone()),
            _ => None,
        }
    }

    /// Number of terms.
    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    /// Leading term in graded-lex order.
    pub fn leading(&self) -> Option<&(Monomial, Rat)> {
        self.terms.first()
    }

    /// Total degree (zero polynomial reports 0).
    pub fn total_degree(&self) -> u32 {
        self.terms.iter().map(|(m, _)| m.degree()).max().unwrap_or(0)
    }

    /// Degree in one symbol.
    pub fn degree_in(&self, s: &Symbol) -> u32 {
        self.terms.iter().map(|(m, _)| m.exponent(s)).max().unwrap_or(0)
    }

    /// All symbols that occur with positive exponent, sorted.
    pub fn symbols(&self) -> Vec<Symbol> {
        let mut out: Vec<Symbol> = Vec::new();
        for (m, _) in &self.terms {
            for (s, _) in m.factors() {
                if let Err(pos) = out.binary_search(s) {
                    out.insert(pos, s.clone());
                }
            }
        }
        out
    }

    /// True when the symbol occurs in the polynomial.
    pub fn contains(&self, s: &Symbol) -> bool {
        self.terms.iter().any(|(m, _)| m.exponent(s) > 0)
    }

    /// Sum of two polynomials.
    pub fn add(&self, other: &Poly) -> Poly {
        let mut out: Vec<(Monomial, Rat)> = Vec::with_capacity(self.terms.len() + other.terms.len());
        let mut a = self.terms.iter().peekable();
        let mut b = other.terms.iter().peekable();
        loop {
            match (a.peek(), b.peek()) {
                (None, None) => break,
                (Some(_), None) => out.push(a.next().unwrap().clone()),
                (None, Some(_)) => out.push(b.next().unwrap().clone()),
                (Some((ma, _)), Some((mb, _))) => match ma.cmp(mb) {
                    Ordering::Greater => out.push(a.next().unwrap().clone()),
                    Ordering::Less => out.push(b.next().unwrap().clone()),
                    Ordering::Equal => {
                        let (m, ca) = a.next().unwrap();
                        let (_, cb) = b.next().unwrap();
                        let c = ca + cb;
                        if !c.is_zero() {
                            out.push((m.clone(), c));
                        }
                    }
                },
            }
        }
        Poly { terms: out }
    }

    /// Negation.
    pub fn neg(&self) -> Poly {
        Poly { terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect() }
    }

    /// Difference.
    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.neg())
    }

    /// Product (uncapped; see [`Poly::mul_capped`] for budgeted use).
    pub fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        let mut pairs = Vec::with_capacity(self.terms.len() * other.terms.len());
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                pairs.push((ma.mul(mb), ca * cb));
            }
        }
        Poly::from_terms(pairs)
    }

    /// Product that refuses to materialize more than `cap` intermediate terms.
    pub fn mul_capped(&self, other: &Poly, cap: usize) -> ExprResult<Poly> {
        let needed = self.terms.len().saturating_mul(other.terms.len());
        if needed > cap {
            return Err(ExprError::ResourceCap { needed, cap });
        }
        let out = self.mul(other);
        if out.term_count() > cap {
            return Err(ExprError::ResourceCap { needed: out.term_count(), cap });
        }
        Ok(out)
    }

    /// Scale by a rational.
    pub fn scale(&self, c: &Rat) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly { terms: self.terms.iter().map(|(m, k)| (m.clone(), k * c)).collect() }
    }

    /// Integer power with a term budget.
    pub fn pow_capped(&self, n: u32, cap: usize) -> ExprResult<Poly> {
        let mut result = Poly::one();
        let mut base = self.clone();
        let mut n = n;
        loop {
            if n & 1 == 1 {
                result = result.mul_capped(&base, cap)?;
            }
            n >>= 1;
            if n == 0 {
                break;
            }
            base = base.mul_capped(&base, cap)?;
        }
        Ok(result)
    }

    /// Integer power, uncapped (small internal uses).
    pub fn pow(&self, n: u32) -> Poly {
        let mut result = Poly::one();
        for _ in 0..n {
            result = result.mul(self);
        }
        result
    }

    /// Partial derivative with respect to one symbol.
    pub fn derivative(&self, s: &Symbol) -> Poly {
        let mut pairs = Vec::new();
        for (m, c) in &self.terms {
            let e = m.exponent(s);
            if e == 0 {
                continue;
            }
            let mut map: BTreeMap<Symbol, u32> =
                m.factors().iter().cloned().collect();
            if e == 1 {
                map.remove(s);
            } else {
                map.insert(s.clone(), e - 1);
            }
            pairs.push((Monomial::from_map(map), c * Rat::from_integer(BigInt::from(e))));
        }
        Poly::from_terms(pairs)
    }

    /// Substitute polynomials for symbols, with a term budget.
    pub fn substitute(&self, map: &dyn Fn(&Symbol) -> Option<Poly>, cap: usize) -> ExprResult<Poly> {
        let mut acc = Poly::zero();
        for (m, c) in &self.terms {
            let mut term = Poly::constant(c.clone());
            for (s, e) in m.factors() {
                let base = match map(s) {
                    Some(p) => p,
                    None => Poly::symbol(s.clone()),
                };
                term = term.mul_capped(&base.pow_capped(*e, cap)?, cap)?;
            }
            acc = acc.add(&term);
            if acc.term_count() > cap {
                return Err(ExprError::ResourceCap { needed: acc.term_count(), cap });
            }
        }
        Ok(acc)
    }

    /// Exact division: returns `self / divisor` when the remainder is zero.
    pub fn exact_div(&self, divisor: &Poly) -> Option<Poly> {
        if divisor.is_zero() {
            return None;
        }
        if self.is_zero() {
            return Some(Poly::zero());
        }
        let (dm, dc) = divisor.leading().unwrap();
        let mut rem = self.clone();
        let mut quo_terms: Vec<(Monomial, Rat)> = Vec::new();
        while !rem.is_zero() {
            let (rm, rc) = rem.leading().unwrap();
            let qm = rm.try_div(dm)?;
            let qc = rc / dc;
            let partial = Poly { terms: vec![(qm.clone(), qc.clone())] };
            rem = rem.sub(&partial.mul(divisor));
            quo_terms.push((qm, qc));
        }
        Some(Poly::from_terms(quo_terms))
    }

    /// Rational content with the sign of the leading coefficient: the unique
    /// `c` with `self = c * prim` where `prim` has coprime integer
    /// coefficients and positive leading coefficient. Zero reports `(0, 0)`.
    pub fn primitive_decompose(&self) -> (Rat, Poly) {
        if self.is_zero() {
            return (Rat::zero(), Poly::zero());
        }
        let mut num_gcd = BigInt::zero();
        let mut den_lcm = BigInt::one();
        for (_, c) in &self.terms {
            num_gcd = num_integer::gcd(num_gcd, c.numer().abs());
            den_lcm = num_integer::lcm(den_lcm, c.denom().clone());
        }
        let mut content = Rat::new(num_gcd, den_lcm);
        if self.terms[0].1.is_negative() {
            content = -content;
        }
        let inv = Rat::one() / content.clone();
        (content, self.scale(&inv))
    }

    /// Coefficients as a dense univariate polynomial in `v` (index = power of
    /// `v`), each coefficient a polynomial in the remaining symbols.
    pub fn as_univariate(&self, v: &Symbol) -> Vec<Poly> {
        let deg = self.degree_in(v) as usize;
        let mut coeffs = vec![Poly::zero(); deg + 1];
        for (m, c) in &self.terms {
            let e = m.exponent(v) as usize;
            let rest: Vec<(Symbol, u32)> = m
                .factors()
                .iter()
                .filter(|(s, _)| s != v)
                .cloned()
                .collect();
            coeffs[e] = coeffs[e].add(&Poly { terms: vec![(Monomial(rest), c.clone())] });
        }
        coeffs
    }

    /// Rebuild from dense univariate coefficients in `v`.
    pub fn from_univariate(coeffs: &[Poly], v: &Symbol) -> Poly {
        let mut acc = Poly::zero();
        let vp = Poly::symbol(v.clone());
        for (e, c) in coeffs.iter().enumerate() {
            acc = acc.add(&c.mul(&vp.pow(e as u32)));
        }
        acc
    }

    /// Greatest common divisor, normalized to be primitive with positive
    /// leading coefficient (`gcd(0, p)` is the normalized `p`; the GCD of two
    /// nonzero constants is `1`).
    pub fn gcd(&self, other: &Poly) -> Poly {
        if self.is_zero() {
            return other.primitive_decompose().1;
        }
        if other.is_zero() {
            return self.primitive_decompose().1;
        }
        let a = self.primitive_decompose().1;
        let b = other.primitive_decompose().1;
        let mut vars = a.symbols();
        for s in b.symbols() {
            if let Err(pos) = vars.binary_search(&s) {
                vars.insert(pos, s);
            }
        }
        if vars.is_empty() {
            return Poly::one();
        }
        // recurse in the last (largest) symbol
        let v = vars.last().unwrap().clone();
        gcd_univariate(&a, &b, &v)
    }
}

/// GCD recursion step: both inputs nonzero and primitive as whole polynomials.
fn gcd_univariate(a: &Poly, b: &Poly, v: &Symbol) -> Poly {
    let ac = a.as_univariate(v);
    let bc = b.as_univariate(v);
    // content w.r.t. v and its primitive part
    let (a_cont, a_prim) = univ_content_prim(&ac);
    let (b_cont, b_prim) = univ_content_prim(&bc);
    let cont_gcd = a_cont.gcd(&b_cont);

    // primitive pseudo-remainder sequence
    let mut r0;
    let mut r1;
    if univ_degree(&a_prim) >= univ_degree(&b_prim) {
        r0 = a_prim;
        r1 = b_prim;
    } else {
        r0 = b_prim;
        r1 = a_prim;
    }
    loop {
        if univ_is_zero(&r1) {
            let (_, g) = univ_content_prim(&r0);
            let g = Poly::from_univariate(&g, v);
            let g = g.mul(&cont_gcd);
            return g.primitive_decompose().1;
        }
        if univ_degree(&r1) == 0 {
            // nonzero constant in v: the univariate part is trivial
            return cont_gcd.primitive_decompose().1;
        }
        let r2 = pseudo_rem(&r0, &r1);
        r0 = r1;
        let (_, prim) = univ_content_prim(&r2);
        r1 = prim;
    }
}

fn univ_is_zero(c: &[Poly]) -> bool {
    c.iter().all(|p| p.is_zero())
}

fn univ_degree(c: &[Poly]) -> usize {
    c.iter().rposition(|p| !p.is_zero()).unwrap_or(0)
}

fn univ_trim(mut c: Vec<Poly>) -> Vec<Poly> {
    while c.len() > 1 && c.last().map(|p| p.is_zero()).unwrap_or(false) {
        c.pop();
    }
    c
}

/// Content (GCD of the coefficients) and primitive part of a dense univariate
/// polynomial with polynomial coefficients.
fn univ_content_prim(c: &[Poly]) -> (Poly, Vec<Poly>) {
    let mut cont = Poly::zero();
    for p in c {
        if !p.is_zero() {
            cont = cont.gcd(p);
        }
    }
    if cont.is_zero() {
        return (Poly::zero(), vec![Poly::zero()]);
    }
    let prim = c
        .iter()
        .map(|p| p.exact_div(&cont).expect("content divides coefficients"))
        .collect();
    (cont, univ_trim(prim))
}

/// One pseudo-division: returns a remainder of `lc(b)^k * a mod b` with degree
/// below `deg b` (primitive reduction afterwards absorbs the extra factor).
fn pseudo_rem(a: &[Poly], b: &[Poly]) -> Vec<Poly> {
    let db = univ_degree(b);
    let lb = b[db].clone();
    let mut r: Vec<Poly> = a.to_vec();
    while !univ_is_zero(&r) && univ_degree(&r) >= db {
        let dr = univ_degree(&r);
        let lr = r[dr].clone();
        // r <- lb*r - lr*x^(dr-db)*b
        let mut next = vec![Poly::zero(); dr.max(db) + 1];
        for (i, ri) in r.iter().enumerate() {
            next[i] = lb.mul(ri);
        }
        for (i, bi) in b.iter().enumerate() {
            let j = i + dr - db;
            next[j] = next[j].sub(&lr.mul(bi));
        }
        r = univ_trim(next);
        // degree strictly dropped because leading terms cancel
        debug_assert!(univ_is_zero(&r) || univ_degree(&r) < dr);
    }
    r
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        Poly::add(self, rhs)
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        Poly::sub(self, rhs)
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        Poly::mul(self, rhs)
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly::neg(self)
    }
}

impl PartialOrd for Poly {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Poly {
    /// Deterministic total order on canonical term lists (used to key
    /// radicals and exponential arguments, not mathematically meaningful).
    fn cmp(&self, other: &Self) -> Ordering {
        let mut a = self.terms.iter();
        let mut b = other.terms.iter();
        loop {
            match (a.next(), b.next()) {
                (None, None) => return Ordering::Equal,
                (Some(_), None) => return Ordering::Greater,
                (None, Some(_)) => return Ordering::Less,
                (Some((ma, ca)), Some((mb, cb))) => {
                    match ma.cmp(mb).then_with(|| ca.cmp(cb)) {
                        Ordering::Equal => continue,
                        ord => return ord,
                    }
                }
            }
        }
    }
}
