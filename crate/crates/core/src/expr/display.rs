//! Pretty-printing. The output of [`std::fmt::Display`] for [`Expression`]
//! parses back under the expression grammar, and printing a normalized
//! expression then re-parsing and re-normalizing reproduces it exactly.

use std::fmt;

use num_traits::{One, Signed};

use super::poly::{Monomial, Poly, Rat};
use super::Expression;

/// Precedence levels for parenthesization: sums < products < powers < atoms.
#[derive(PartialEq, PartialOrd, Clone, Copy)]
enum Prec {
    Sum,
    Product,
    Power,
    Atom,
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(f, self, Prec::Sum)
    }
}

fn write_expr(f: &mut fmt::Formatter<'_>, e: &Expression, min: Prec) -> fmt::Result {
    let prec = prec_of(e);
    if (prec as u8) < (min as u8) {
        write!(f, "(")?;
        write_expr(f, e, Prec::Sum)?;
        write!(f, ")")?;
        return Ok(());
    }
    match e {
        Expression::Rational(r) => write_rational(f, r),
        Expression::Symbol(s) => write!(f, "{s}"),
        Expression::Sum(items) => {
            if items.is_empty() {
                return write!(f, "0");
            }
            for (i, item) in items.iter().enumerate() {
                if i == 0 {
                    write_expr(f, item, Prec::Product)?;
                } else if let Some(flipped) = strip_negation(item) {
                    write!(f, " - ")?;
                    write_expr(f, &flipped, Prec::Product)?;
                } else {
                    write!(f, " + ")?;
                    write_expr(f, item, Prec::Product)?;
                }
            }
            Ok(())
        }
        Expression::Product(_) => write_product(f, e),
        Expression::Power(base, r) => write_power(f, base, r),
        Expression::Exp(arg) => {
            write!(f, "exp(")?;
            write_expr(f, arg, Prec::Sum)?;
            write!(f, ")")
        }
    }
}

fn write_product(f: &mut fmt::Formatter<'_>, e: &Expression) -> fmt::Result {
    let mut factors = Vec::new();
    flatten_into(e, &mut factors);
    // factors with negative exponents render as trailing divisions
    let mut numer: Vec<&Expression> = Vec::new();
    let mut denom: Vec<(&Expression, Rat)> = Vec::new();
    for item in factors {
        match item {
            Expression::Power(base, r) if r.is_negative() => denom.push((base, -r)),
            _ => numer.push(item),
        }
    }
    match numer.split_first() {
        None => write!(f, "1")?,
        Some((Expression::Rational(r), rest)) if *r == -Rat::one() && !rest.is_empty() => {
            write!(f, "-")?;
            for (i, item) in rest.iter().enumerate() {
                if i > 0 {
                    write!(f, "*")?;
                }
                write_expr(f, item, Prec::Power)?;
            }
        }
        Some(_) => {
            for (i, item) in numer.iter().enumerate() {
                if i > 0 {
                    write!(f, "*")?;
                }
                write_expr(f, item, Prec::Power)?;
            }
        }
    }
    for (base, r) in denom {
        write!(f, "/")?;
        if r.is_one() {
            write_expr(f, base, Prec::Atom)?;
        } else {
            write_power(f, base, &r)?;
        }
    }
    Ok(())
}

/// Recursively flatten nested products into a single factor list.
fn flatten_into<'a>(e: &'a Expression, out: &mut Vec<&'a Expression>) {
    match e {
        Expression::Product(items) => {
            for item in items {
                flatten_into(item, out);
            }
        }
        _ => out.push(e),
    }
}

fn prec_of(e: &Expression) -> Prec {
    match e {
        // Negative and fractional literals are valid bare wherever a factor
        // may appear ('-' factor; n/d reads as scale-then-divide), but must
        // be parenthesized as the base of a power.
        Expression::Rational(r) => {
            if !r.is_negative() && r.is_integer() {
                Prec::Atom
            } else {
                Prec::Power
            }
        }
        Expression::Symbol(_) | Expression::Exp(_) => Prec::Atom,
        Expression::Sum(_) => Prec::Sum,
        Expression::Product(_) => Prec::Product,
        Expression::Power(_, _) => Prec::Power,
    }
}

fn write_rational(f: &mut fmt::Formatter<'_>, r: &Rat) -> fmt::Result {
    if r.is_integer() {
        write!(f, "{}", r.numer())
    } else {
        write!(f, "{}/{}", r.numer(), r.denom())
    }
}

fn write_power(f: &mut fmt::Formatter<'_>, base: &Expression, r: &Rat) -> fmt::Result {
    if r.is_one() {
        return write_expr(f, base, Prec::Atom);
    }
    write_expr(f, base, Prec::Atom)?;
    if r.is_integer() && !r.is_negative() {
        write!(f, "^{}", r.numer())
    } else if r.is_integer() {
        write!(f, "^({})", r.numer())
    } else {
        write!(f, "^({}/{})", r.numer(), r.denom())
    }
}

/// If the expression is a negation — a negative literal, or a product whose
/// leading rational factor is negative — return its positive counterpart.
fn strip_negation(e: &Expression) -> Option<Expression> {
    match e {
        Expression::Rational(r) if r.is_negative() => Some(Expression::Rational(-r)),
        Expression::Product(_) => {
            let mut factors = Vec::new();
            flatten_into(e, &mut factors);
            let (first, rest) = factors.split_first()?;
            let Expression::Rational(r) = first else {
                return None;
            };
            if !r.is_negative() {
                return None;
            }
            let flipped = -r;
            let mut out: Vec<Expression> = Vec::with_capacity(factors.len());
            if !flipped.is_one() || rest.is_empty() {
                out.push(Expression::Rational(flipped));
            }
            out.extend(rest.iter().map(|&x| x.clone()));
            match out.len() {
                1 => Some(out.pop().unwrap()),
                _ => Some(Expression::Product(out)),
            }
        }
        _ => None,
    }
}

/// Render a polynomial as a canonical expression tree (terms in descending
/// monomial order, rational coefficient first in each product).
pub(crate) fn poly_to_expr(p: &Poly) -> Expression {
    if p.is_zero() {
        return Expression::integer(0);
    }
    let mut terms = Vec::with_capacity(p.term_count());
    for (m, c) in p.terms() {
        terms.push(monomial_term_to_expr(m, c));
    }
    if terms.len() == 1 {
        terms.pop().unwrap()
    } else {
        Expression::Sum(terms)
    }
}

fn monomial_term_to_expr(m: &Monomial, c: &Rat) -> Expression {
    let mut factors: Vec<Expression> = Vec::new();
    if !c.is_one() || m.factors().is_empty() {
        factors.push(Expression::Rational(c.clone()));
    }
    for (s, e) in m.factors() {
        let sym = Expression::Symbol(s.clone());
        if *e == 1 {
            factors.push(sym);
        } else {
            factors.push(Expression::Power(Box::new(sym), Rat::from_integer((*e).into())));
        }
    }
    if factors.len() == 1 {
        factors.pop().unwrap()
    } else {
        Expression::Product(factors)
    }
}

/// Compact display form of a polynomial (used in diagnostics).
pub(crate) fn poly_to_string(p: &Poly) -> String {
    poly_to_expr(p).to_string()
}
