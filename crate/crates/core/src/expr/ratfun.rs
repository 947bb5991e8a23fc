//! Reduced rational functions: quotients of polynomials kept in a canonical
//! form (numerator and denominator coprime, denominator monic in graded-lex
//! order), so structural equality is mathematical equality.

use std::cmp::Ordering;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_traits::{One, Zero};

use super::poly::{Poly, Rat};
use super::symbol::Symbol;
use crate::error::{ExprError, ExprResult};

/// A canonical quotient of two polynomials.
///
/// Invariants: `den` is never zero, `gcd(num, den)` is constant, `den` has
/// leading coefficient `1`, and the zero function is `0/1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RatFun {
    num: Poly,
    den: Poly,
}

impl RatFun {
    /// The zero function.
    pub fn zero() -> Self {
        RatFun { num: Poly::zero(), den: Poly::one() }
    }

    /// The constant function `1`.
    pub fn one() -> Self {
        RatFun { num: Poly::one(), den: Poly::one() }
    }

    /// A rational constant.
    pub fn constant(c: Rat) -> Self {
        RatFun { num: Poly::constant(c), den: Poly::one() }
    }

    /// A polynomial viewed as a rational function.
    pub fn from_poly(p: Poly) -> Self {
        RatFun { num: p, den: Poly::one() }
    }

    /// Build and reduce `num / den`. Fails when `den` is zero.
    pub fn new(num: Poly, den: Poly) -> ExprResult<Self> {
        if den.is_zero() {
            return Err(ExprError::DivisionByZero);
        }
        if num.is_zero() {
            return Ok(RatFun::zero());
        }
        let g = num.gcd(&den);
        let mut num = num.exact_div(&g).expect("gcd divides numerator");
        let mut den = den.exact_div(&g).expect("gcd divides denominator");
        // make the denominator monic, folding the scale into the numerator
        let lc = den.leading().expect("nonzero").1.clone();
        if !lc.is_one() {
            let inv = Rat::one() / lc;
            num = num.scale(&inv);
            den = den.scale(&inv);
        }
        Ok(RatFun { num, den })
    }

    /// Numerator (canonical).
    pub fn num(&self) -> &Poly {
        &self.num
    }

    /// Denominator (canonical, monic).
    pub fn den(&self) -> &Poly {
        &self.den
    }

    /// True when this is the zero function.
    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// True when this is the constant `1`.
    pub fn is_one(&self) -> bool {
        self.num.is_one() && self.den.is_one()
    }

    /// Returns the value when the function is a rational constant.
    pub fn as_constant(&self) -> Option<Rat> {
        if self.den.is_one() {
            self.num.as_constant()
        } else {
            None
        }
    }

    /// True when the denominator is `1`.
    pub fn is_polynomial(&self) -> bool {
        self.den.is_one()
    }

    /// All symbols occurring in numerator or denominator.
    pub fn symbols(&self) -> Vec<Symbol> {
        let mut out = self.num.symbols();
        for s in self.den.symbols() {
            if let Err(pos) = out.binary_search(&s) {
                out.insert(pos, s);
            }
        }
        out
    }

    /// True when the symbol occurs anywhere in the function.
    pub fn contains(&self, s: &Symbol) -> bool {
        self.num.contains(s) || self.den.contains(s)
    }

    /// Sum.
    pub fn add(&self, other: &RatFun) -> ExprResult<RatFun> {
        // a/b + c/d = (a*d + c*b) / (b*d); reduction restores canonicity
        let num = self.num.mul(&other.den).add(&other.num.mul(&self.den));
        let den = self.den.mul(&other.den);
        RatFun::new(num, den)
    }

    /// Difference.
    pub fn sub(&self, other: &RatFun) -> ExprResult<RatFun> {
        self.add(&other.neg())
    }

    /// Negation.
    pub fn neg(&self) -> RatFun {
        RatFun { num: self.num.neg(), den: self.den.clone() }
    }

    /// Product.
    pub fn mul(&self, other: &RatFun) -> ExprResult<RatFun> {
        RatFun::new(self.num.mul(&other.num), self.den.mul(&other.den))
    }

    /// Scale by a rational constant.
    pub fn scale(&self, c: &Rat) -> RatFun {
        if c.is_zero() {
            return RatFun::zero();
        }
        RatFun { num: self.num.scale(c), den: self.den.clone() }
    }

    /// Quotient. Fails when `other` is zero.
    pub fn div(&self, other: &RatFun) -> ExprResult<RatFun> {
        if other.is_zero() {
            return Err(ExprError::DivisionByZero);
        }
        RatFun::new(self.num.mul(&other.den), self.den.mul(&other.num))
    }

    /// Reciprocal. Fails when zero.
    pub fn inverse(&self) -> ExprResult<RatFun> {
        if self.is_zero() {
            return Err(ExprError::DivisionByZero);
        }
        RatFun::new(self.den.clone(), self.num.clone())
    }

    /// Integer power (negative exponents invert).
    pub fn pow_int(&self, n: i64) -> ExprResult<RatFun> {
        if n == 0 {
            return Ok(RatFun::one());
        }
        let base = if n < 0 { self.inverse()? } else { self.clone() };
        let mut acc = RatFun::one();
        for _ in 0..n.unsigned_abs() {
            acc = acc.mul(&base)?;
        }
        Ok(acc)
    }

    /// Partial derivative (quotient rule, reduced).
    pub fn derivative(&self, s: &Symbol) -> ExprResult<RatFun> {
        let num = self
            .num
            .derivative(s)
            .mul(&self.den)
            .sub(&self.num.mul(&self.den.derivative(s)));
        let den = self.den.mul(&self.den);
        RatFun::new(num, den)
    }
}

impl Add for &RatFun {
    type Output = ExprResult<RatFun>;
    fn add(self, rhs: &RatFun) -> Self::Output {
        RatFun::add(self, rhs)
    }
}

impl Sub for &RatFun {
    type Output = ExprResult<RatFun>;
    fn sub(self, rhs: &RatFun) -> Self::Output {
        RatFun::sub(self, rhs)
    }
}

impl Mul for &RatFun {
    type Output = ExprResult<RatFun>;
    fn mul(self, rhs: &RatFun) -> Self::Output {
        RatFun::mul(self, rhs)
    }
}

impl Div for &RatFun {
    type Output = ExprResult<RatFun>;
    fn div(self, rhs: &RatFun) -> Self::Output {
        RatFun::div(self, rhs)
    }
}

impl Neg for &RatFun {
    type Output = RatFun;
    fn neg(self) -> RatFun {
        RatFun::neg(self)
    }
}

/// Deterministic comparison used when rational functions key canonical forms.
pub fn ratfun_cmp(a: &RatFun, b: &RatFun) -> Ordering {
    a.num.cmp(&b.num).then_with(|| a.den.cmp(&b.den))
}
