//! Text front end: expressions, vector fields, PDE definitions, and whole
//! problem files.
//!
//! The expression grammar (normative):
//!
//! ```text
//! expr     := term (('+' | '-') term)*
//! term     := factor (('*' | '/') factor)*
//! factor   := atom ['^' exponent] | '-' factor
//! atom     := number | symbol | '(' expr ')' | 'exp' '(' expr ')'
//! exponent := integer | '(' integer ')' | '(' integer '/' integer ')'
//! number   := integer | decimal
//! ```
//!
//! Decimal literals are exact rationals (`0.25` parses to `1/4`), never
//! floats, so the symbolic zero test stays sound. Exponents must be integer
//! or rational literals; fractional powers additionally require the base to
//! be registered positive in the [`Context`] before the expression is
//! normalized.
//!
//! Vector fields accept two syntaxes: keyed components
//! (`xi_t = 2*t; xi_x = x; alpha = -2`) and operator sums
//! (`2*t*Dt + x*Dx + 3*y*Dy - 2*u*Du`), where `D<var>` is the derivative
//! operator along a declared variable (`∂` is accepted as an alias). The
//! coefficient of each `D<var>` must be free of the dependent variable, and
//! the `Du` coefficient must be `α(x)·u` — fields act on scalars by
//! `Σ ξʲ ∂ⱼ + α·u·∂ᵤ`.
//!
//! PDE definitions use derivative suffixes on the dependent name
//! (`pde: u_t - u_xx + x*u_y = 0`); the multi-index is read from the suffix,
//! and anything beyond second order is rejected.
//!
//! Problem files (`.lft`, UTF-8, `#` line comments) are line-oriented;
//! a line starting with whitespace continues the previous logical line.
//! Sections: `vars:`, `dep:`, `params:`, `consts:`, `positive:`, `pde:`,
//! `field <name>:`, `expect <name>:`, `ansatz multiplier:`,
//! `ansatz similarity <name>:`, `ansatz profile <name>:`, `ansatz fields:`,
//! `kernel source:`, `task:`. Declarations must precede the first
//! expression-bearing section. Error positions refer to logical lines, so
//! columns on continued lines are relative to the joined text.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use thiserror::Error;

use crate::context::Context;
use crate::expr::{Expression, Rat, Symbol};
use crate::jet::{LinearPDE, MultiIndex, VectorField};

/// A parse failure, located in the source text (1-based line and column).
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, col {col}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl ParseError {
    fn new(line: usize, col: usize, message: impl Into<String>) -> ParseError {
        ParseError { line, col, message: message.into() }
    }
}

/// Convenience alias for single-item parses.
pub type ParseResult<T> = Result<T, ParseError>;

/// All failures found in a problem file, in source order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProblemError {
    pub errors: Vec<ParseError>,
}

impl fmt::Display for ProblemError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.errors.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ProblemError {}

// ---------------------------------------------------------------------------
// Declarations
// ---------------------------------------------------------------------------

/// The symbol table expressions are parsed against: ordered independent
/// variables, one dependent variable, source parameters, and free constants.
#[derive(Debug, Clone)]
pub struct Declarations {
    vars: Vec<Symbol>,
    dep: Symbol,
    params: Vec<Symbol>,
    consts: Vec<Symbol>,
}

impl Declarations {
    /// Build a validated symbol table. Names must be unique identifiers
    /// (ASCII letter followed by letters, digits, or underscores) and must
    /// avoid the reserved spellings that would make the grammar ambiguous:
    /// `exp`, `alpha`, an `xi_` or `__` prefix, a `D<name>` collision with
    /// another declared name, and (for non-dependent names) the dependent
    /// variable's derivative-suffix pattern `<dep>_...`.
    pub fn new(
        vars: &[&str],
        dep: &str,
        params: &[&str],
        consts: &[&str],
    ) -> Result<Declarations, String> {
        let mut all: Vec<&str> = Vec::new();
        for group in [vars, std::slice::from_ref(&dep), params, consts] {
            for &name in group {
                validate_name(name)?;
                if all.contains(&name) {
                    return Err(format!("duplicate declaration of `{name}`"));
                }
                all.push(name);
            }
        }
        for &a in &all {
            for &b in &all {
                if a.len() == b.len() + 1 && a.starts_with('D') && &a[1..] == b {
                    return Err(format!(
                        "`{a}` is ambiguous with the derivative operator for `{b}`"
                    ));
                }
            }
        }
        let dep_prefix = format!("{dep}_");
        for &n in &all {
            if n != dep && n.starts_with(&dep_prefix) {
                return Err(format!(
                    "`{n}` collides with the derivative notation `{dep_prefix}...`"
                ));
            }
        }
        Ok(Declarations {
            vars: vars.iter().map(|n| Symbol::independent(n)).collect(),
            dep: Symbol::dependent(dep),
            params: params.iter().map(|n| Symbol::parameter(n)).collect(),
            consts: consts.iter().map(|n| Symbol::constant(n)).collect(),
        })
    }

    /// Ordered independent variables.
    pub fn vars(&self) -> &[Symbol] {
        &self.vars
    }

    /// The dependent variable.
    pub fn dep(&self) -> &Symbol {
        &self.dep
    }

    /// Source parameters.
    pub fn params(&self) -> &[Symbol] {
        &self.params
    }

    /// Free constants.
    pub fn consts(&self) -> &[Symbol] {
        &self.consts
    }

    /// Resolve a declared name to its symbol.
    pub fn lookup(&self, name: &str) -> Option<Symbol> {
        if self.dep.name() == name {
            return Some(self.dep.clone());
        }
        self.vars
            .iter()
            .chain(&self.params)
            .chain(&self.consts)
            .find(|s| s.name() == name)
            .cloned()
    }
}

fn validate_name(name: &str) -> Result<(), String> {
    let mut chars = name.chars();
    let head_ok = chars.next().is_some_and(|c| c.is_ascii_alphabetic());
    if !head_ok || !chars.all(|c| c.is_ascii_alphanumeric() || c == '_') {
        return Err(format!(
            "invalid name `{name}`: expected an ASCII letter followed by letters, digits, or `_`"
        ));
    }
    if name == "exp" || name == "alpha" {
        return Err(format!("`{name}` is reserved"));
    }
    if name.starts_with("xi_") || name.starts_with("__") {
        return Err(format!("`{name}`: the prefixes `xi_` and `__` are reserved"));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Lexer
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Num(Rat),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Semi,
    Equals,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Num(r) => write!(f, "number `{r}`"),
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Plus => write!(f, "`+`"),
            Tok::Minus => write!(f, "`-`"),
            Tok::Star => write!(f, "`*`"),
            Tok::Slash => write!(f, "`/`"),
            Tok::Caret => write!(f, "`^`"),
            Tok::LParen => write!(f, "`(`"),
            Tok::RParen => write!(f, "`)`"),
            Tok::Semi => write!(f, "`;`"),
            Tok::Equals => write!(f, "`=`"),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

/// Tokenize a snippet. Positions are 1-based; `base_col` is the column of
/// the snippet's first character within its source line.
fn lex(text: &str, base_line: usize, base_col: usize) -> ParseResult<Vec<Token>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = base_col + i;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c == '#' {
            break; // comment to end of snippet
        }
        let simple = match c {
            '+' => Some(Tok::Plus),
            '-' => Some(Tok::Minus),
            '*' => Some(Tok::Star),
            '/' => Some(Tok::Slash),
            '^' => Some(Tok::Caret),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            ';' => Some(Tok::Semi),
            '=' => Some(Tok::Equals),
            _ => None,
        };
        if let Some(tok) = simple {
            out.push(Token { tok, line: base_line, col });
            i += 1;
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let whole: String = chars[start..i].iter().collect();
            let mut numer: BigInt = whole.parse().expect("digit run parses");
            let mut denom = BigInt::from(1);
            if i < chars.len() && chars[i] == '.' {
                i += 1;
                let frac_start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                if i == frac_start {
                    return Err(ParseError::new(
                        base_line,
                        col,
                        "malformed number: expected digits after `.`",
                    ));
                }
                let frac: String = chars[frac_start..i].iter().collect();
                let scale = BigInt::from(10).pow((i - frac_start) as u32);
                numer = numer * &scale + frac.parse::<BigInt>().expect("digit run parses");
                denom = scale;
            }
            out.push(Token {
                tok: Tok::Num(Rat::new(numer, denom)),
                line: base_line,
                col,
            });
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' || c == '∂' {
            let start = i;
            if c == '∂' {
                i += 1; // the alias prefix itself
            }
            let name_start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let mut name: String = chars[name_start..i].iter().collect();
            if c == '∂' {
                if name.is_empty() {
                    return Err(ParseError::new(
                        base_line,
                        col,
                        "expected a name after `∂`",
                    ));
                }
                name = format!("D{}", name.trim_start_matches('_'));
            } else {
                name = chars[start..i].iter().collect();
            }
            out.push(Token { tok: Tok::Ident(name), line: base_line, col });
            continue;
        }
        return Err(ParseError::new(
            base_line,
            col,
            format!("unexpected character `{c}`"),
        ));
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Expression parser
// ---------------------------------------------------------------------------

/// How identifiers beyond the plain declarations are interpreted.
enum Mode {
    /// Only declared symbols.
    Plain,
    /// `D<var>` / `D<dep>` resolve to placeholder symbols for the linear
    /// extraction of vector-field components.
    Operators,
    /// `<dep>` and `<dep>_<suffix>` resolve to placeholder jet symbols.
    Jet,
}

struct ExprParser<'a> {
    toks: &'a [Token],
    pos: usize,
    decls: &'a Declarations,
    extra: &'a [Symbol],
    mode: Mode,
    /// Jet placeholders discovered while parsing (Jet mode only).
    jets: BTreeMap<MultiIndex, Symbol>,
    /// End-of-input position for error reports.
    end_line: usize,
    end_col: usize,
}

impl<'a> ExprParser<'a> {
    fn new(
        toks: &'a [Token],
        decls: &'a Declarations,
        extra: &'a [Symbol],
        mode: Mode,
        end_line: usize,
        end_col: usize,
    ) -> ExprParser<'a> {
        ExprParser { toks, pos: 0, decls, extra, mode, jets: BTreeMap::new(), end_line, end_col }
    }

    fn peek(&self) -> Option<&Token> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Option<&Token> {
        let t = self.toks.get(self.pos);
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn here(&self) -> (usize, usize) {
        match self.peek() {
            Some(t) => (t.line, t.col),
            None => (self.end_line, self.end_col),
        }
    }

    fn err(&self, message: impl Into<String>) -> ParseError {
        let (line, col) = self.here();
        ParseError::new(line, col, message)
    }

    fn expect(&mut self, want: &Tok) -> ParseResult<()> {
        match self.peek() {
            Some(t) if t.tok == *want => {
                self.pos += 1;
                Ok(())
            }
            Some(t) => Err(ParseError::new(
                t.line,
                t.col,
                format!("expected {want}, found {}", t.tok),
            )),
            None => Err(self.err(format!("expected {want}, found end of input"))),
        }
    }

    fn expect_end(&self) -> ParseResult<()> {
        match self.peek() {
            None => Ok(()),
            Some(t) => Err(ParseError::new(
                t.line,
                t.col,
                format!("unexpected {} after the expression", t.tok),
            )),
        }
    }

    fn parse_expr(&mut self) -> ParseResult<Expression> {
        let mut acc = self.parse_term()?;
        loop {
            match self.peek().map(|t| t.tok.clone()) {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    acc = acc + self.parse_term()?;
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    acc = acc - self.parse_term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn parse_term(&mut self) -> ParseResult<Expression> {
        let mut acc = self.parse_factor()?;
        loop {
            match self.peek().map(|t| t.tok.clone()) {
                Some(Tok::Star) => {
                    self.pos += 1;
                    acc = acc * self.parse_factor()?;
                }
                Some(Tok::Slash) => {
                    self.pos += 1;
                    acc = acc / self.parse_factor()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn parse_factor(&mut self) -> ParseResult<Expression> {
        if matches!(self.peek().map(|t| &t.tok), Some(Tok::Minus)) {
            self.pos += 1;
            return Ok(-self.parse_factor()?);
        }
        let atom = self.parse_atom()?;
        if matches!(self.peek().map(|t| &t.tok), Some(Tok::Caret)) {
            self.pos += 1;
            let exponent = self.parse_exponent()?;
            return Ok(Expression::powr(atom, exponent));
        }
        Ok(atom)
    }

    fn parse_atom(&mut self) -> ParseResult<Expression> {
        let (line, col) = self.here();
        let Some(token) = self.next() else {
            return Err(ParseError::new(line, col, "expected an expression, found end of input"));
        };
        match token.tok.clone() {
            Tok::Num(r) => Ok(Expression::Rational(r)),
            Tok::LParen => {
                let inner = self.parse_expr()?;
                self.expect(&Tok::RParen)?;
                Ok(inner)
            }
            Tok::Ident(name) if name == "exp" => {
                self.expect(&Tok::LParen)
                    .map_err(|_| ParseError::new(line, col, "expected `(` after `exp`"))?;
                let arg = self.parse_expr()?;
                self.expect(&Tok::RParen)?;
                Ok(Expression::exp(arg))
            }
            Tok::Ident(name) => self.resolve_ident(&name, line, col),
            other => Err(ParseError::new(
                line,
                col,
                format!("expected an expression, found {other}"),
            )),
        }
    }

    fn resolve_ident(&mut self, name: &str, line: usize, col: usize) -> ParseResult<Expression> {
        // Mode-specific interpretations take priority over the plain table,
        // so `u` inside a PDE is a jet atom rather than the bare dependent
        // symbol.
        if let Mode::Jet = self.mode {
            let dep = self.decls.dep().name();
            if name == dep {
                let sym = self.jet_symbol(MultiIndex::empty());
                return Ok(Expression::symbol(sym));
            }
            if let Some(suffix) = name.strip_prefix(&format!("{dep}_")) {
                let indices = derivative_indices(suffix, self.decls.vars())
                    .map_err(|m| ParseError::new(line, col, m))?;
                let sym = self.jet_symbol(MultiIndex::new(indices));
                return Ok(Expression::symbol(sym));
            }
        }
        if let Some(s) = self.decls.lookup(name) {
            return Ok(Expression::symbol(s));
        }
        if let Some(s) = self.extra.iter().find(|s| s.name() == name) {
            return Ok(Expression::symbol(s.clone()));
        }
        if let Mode::Operators = self.mode {
            if let Some(rest) = name.strip_prefix('D') {
                if !rest.is_empty() {
                    if rest == self.decls.dep().name() {
                        return Ok(Expression::symbol(operator_placeholder(rest)));
                    }
                    if self.decls.vars().iter().any(|v| v.name() == rest) {
                        return Ok(Expression::symbol(operator_placeholder(rest)));
                    }
                }
            }
        }
        Err(ParseError::new(line, col, format!("undeclared symbol `{name}`")))
    }

    fn jet_symbol(&mut self, idx: MultiIndex) -> Symbol {
        if let Some(s) = self.jets.get(&idx) {
            return s.clone();
        }
        let name = format!(
            "__jet{}",
            idx.indices().iter().map(|i| format!("_{i}")).collect::<String>()
        );
        let sym = Symbol::constant(&name);
        self.jets.insert(idx, sym.clone());
        sym
    }

    /// `exponent := integer | '(' integer ')' | '(' integer '/' integer ')'`
    /// with an optional sign inside the parentheses.
    fn parse_exponent(&mut self) -> ParseResult<Rat> {
        const MALFORMED: &str =
            "malformed exponent: expected an integer or a parenthesized rational like (3/2)";
        let (line, col) = self.here();
        match self.next().map(|t| t.tok.clone()) {
            Some(Tok::Num(r)) if r.is_integer() => Ok(r),
            Some(Tok::LParen) => {
                let numer = self.parse_signed_integer(MALFORMED)?;
                match self.next().map(|t| t.tok.clone()) {
                    Some(Tok::RParen) => Ok(Rat::from_integer(numer)),
                    Some(Tok::Slash) => {
                        let denom = self.parse_signed_integer(MALFORMED)?;
                        self.expect(&Tok::RParen)?;
                        if denom.is_zero() {
                            return Err(ParseError::new(
                                line,
                                col,
                                "malformed exponent: zero denominator",
                            ));
                        }
                        Ok(Rat::new(numer, denom))
                    }
                    _ => Err(ParseError::new(line, col, MALFORMED)),
                }
            }
            _ => Err(ParseError::new(line, col, MALFORMED)),
        }
    }

    fn parse_signed_integer(&mut self, malformed: &str) -> ParseResult<BigInt> {
        let (line, col) = self.here();
        let negative = if matches!(self.peek().map(|t| &t.tok), Some(Tok::Minus)) {
            self.pos += 1;
            true
        } else {
            false
        };
        match self.next().map(|t| t.tok.clone()) {
            Some(Tok::Num(r)) if r.is_integer() => {
                let n = r.numer().clone();
                Ok(if negative { -n } else { n })
            }
            _ => Err(ParseError::new(line, col, malformed)),
        }
    }
}

/// Placeholder symbol for the derivative operator along `name`.
fn operator_placeholder(name: &str) -> Symbol {
    Symbol::constant(&format!("__D_{name}"))
}

/// Split a derivative suffix like `xx` or `t_x` into variable indices by
/// greedily matching the longest declared variable name; single `_`
/// separators between matches are allowed.
fn derivative_indices(suffix: &str, vars: &[Symbol]) -> Result<Vec<usize>, String> {
    let mut rest = suffix;
    let mut indices = Vec::new();
    while !rest.is_empty() {
        if let Some(r) = rest.strip_prefix('_') {
            rest = r;
            continue;
        }
        let mut best: Option<(usize, usize)> = None;
        for (j, v) in vars.iter().enumerate() {
            let n = v.name();
            if rest.starts_with(n) && best.is_none_or(|(_, l)| n.len() > l) {
                best = Some((j, n.len()));
            }
        }
        match best {
            Some((j, len)) => {
                indices.push(j);
                rest = &rest[len..];
            }
            None => {
                return Err(format!(
                    "unknown derivative suffix `{suffix}`: `{rest}` matches no declared variable"
                ))
            }
        }
    }
    if indices.is_empty() {
        return Err("empty derivative suffix".into());
    }
    Ok(indices)
}

/// Parse a plain expression against the declarations. The result is the raw
/// grammar tree; callers normalize it in their own [`Context`].
pub fn parse_expression(text: &str, decls: &Declarations) -> ParseResult<Expression> {
    parse_expression_at(text, decls, &[], 1, 1)
}

/// [`parse_expression`] with additional inert symbols in scope (used for the
/// ansatz profile, whose similarity variable is not a declaration).
pub fn parse_expression_with(
    text: &str,
    decls: &Declarations,
    extra: &[Symbol],
) -> ParseResult<Expression> {
    parse_expression_at(text, decls, extra, 1, 1)
}

fn parse_expression_at(
    text: &str,
    decls: &Declarations,
    extra: &[Symbol],
    line: usize,
    col: usize,
) -> ParseResult<Expression> {
    let toks = lex(text, line, col)?;
    let end_col = col + text.chars().count();
    let mut p = ExprParser::new(&toks, decls, extra, Mode::Plain, line, end_col);
    let e = p.parse_expr()?;
    p.expect_end()?;
    Ok(e)
}

// ---------------------------------------------------------------------------
// Linear extraction
// ---------------------------------------------------------------------------

/// Coefficients of a linear-homogeneous combination of placeholder symbols:
/// `expr = Σ coefs[i] · temps[i]` with every coefficient placeholder-free.
/// `labels[i]` names `temps[i]` in diagnostics.
fn linear_coefficients(
    ctx: &Context,
    expr: &Expression,
    temps: &[Symbol],
    labels: &[String],
    kind: &str,
) -> Result<Vec<Expression>, String> {
    let mut coefs = Vec::with_capacity(temps.len());
    for (i, t) in temps.iter().enumerate() {
        let coef = expr
            .differentiate_any(ctx, t)
            .map_err(|e| format!("cannot extract the coefficient of {}: {e}", labels[i]))?;
        if coef.free_symbols().iter().any(|s| temps.contains(s)) {
            return Err(format!("{kind} is not linear in {}", labels[i]));
        }
        coefs.push(coef);
    }
    let zeroed: Vec<(Symbol, Expression)> = temps
        .iter()
        .map(|t| (t.clone(), Expression::integer(0)))
        .collect();
    let remainder = expr
        .substitute(ctx, &zeroed)
        .map_err(|e| format!("cannot validate the {kind}: {e}"))?;
    if !remainder
        .is_zero(ctx)
        .map_err(|e| format!("cannot validate the {kind}: {e}"))?
    {
        return Err(format!(
            "{kind} has a stray term `{remainder}` outside the expected combination"
        ));
    }
    Ok(coefs)
}

// ---------------------------------------------------------------------------
// Vector fields
// ---------------------------------------------------------------------------

/// Parse a vector field in either syntax. The context supplies positivity
/// assumptions needed to normalize the components.
pub fn parse_vector_field(
    text: &str,
    decls: &Declarations,
    ctx: &Context,
) -> ParseResult<VectorField> {
    parse_vector_field_at(text, decls, ctx, 1, 1)
}

fn parse_vector_field_at(
    text: &str,
    decls: &Declarations,
    ctx: &Context,
    line: usize,
    col: usize,
) -> ParseResult<VectorField> {
    let toks = lex(text, line, col)?;
    if toks.is_empty() {
        return Err(ParseError::new(line, col, "empty vector field"));
    }
    if toks.iter().any(|t| t.tok == Tok::Equals) {
        parse_keyed_field(&toks, decls, ctx, line, col + text.chars().count())
    } else {
        parse_operator_field(&toks, decls, ctx, line, col, col + text.chars().count())
    }
}

fn parse_operator_field(
    toks: &[Token],
    decls: &Declarations,
    ctx: &Context,
    line: usize,
    col: usize,
    end_col: usize,
) -> ParseResult<VectorField> {
    let mut p = ExprParser::new(toks, decls, &[], Mode::Operators, line, end_col);
    let expr = p.parse_expr()?;
    p.expect_end()?;

    let dep = decls.dep().clone();
    let mut temps: Vec<Symbol> = Vec::new();
    let mut labels: Vec<String> = Vec::new();
    for v in decls.vars() {
        temps.push(operator_placeholder(v.name()));
        labels.push(format!("`D{}`", v.name()));
    }
    temps.push(operator_placeholder(dep.name()));
    labels.push(format!("`D{}`", dep.name()));

    let at = |m: String| ParseError::new(line, col, m);
    let coefs =
        linear_coefficients(ctx, &expr, &temps, &labels, "operator sum").map_err(at)?;

    let n = decls.vars().len();
    for (j, coef) in coefs[..n].iter().enumerate() {
        if coef.free_symbols().contains(&dep) {
            return Err(at(format!(
                "coefficient of `D{}` depends on `{}`",
                decls.vars()[j].name(),
                dep.name()
            )));
        }
    }
    // The D<dep> coefficient must be α(x)·u.
    let cu = &coefs[n];
    let alpha = cu
        .differentiate_any(ctx, &dep)
        .map_err(|e| at(format!("cannot extract α from the `D{}` coefficient: {e}", dep.name())))?;
    let proportional = alpha.free_symbols().contains(&dep);
    let exact = (alpha.clone() * Expression::symbol(dep.clone()) - cu.clone())
        .is_zero(ctx)
        .map_err(|e| at(e.to_string()))?;
    if proportional || !exact {
        return Err(at(format!(
            "`D{0}` coefficient must be of the form α(x)*{0}",
            dep.name()
        )));
    }
    VectorField::new(ctx, decls.vars().to_vec(), coefs[..n].to_vec(), alpha)
        .map_err(|e| at(e.to_string()))
}

fn parse_keyed_field(
    toks: &[Token],
    decls: &Declarations,
    ctx: &Context,
    line: usize,
    end_col: usize,
) -> ParseResult<VectorField> {
    let n = decls.vars().len();
    let mut xi: Vec<Option<Expression>> = vec![None; n];
    let mut alpha: Option<Expression> = None;

    for segment in toks.split(|t| t.tok == Tok::Semi) {
        if segment.is_empty() {
            continue; // trailing `;`
        }
        let key_tok = &segment[0];
        let Tok::Ident(key) = &key_tok.tok else {
            return Err(ParseError::new(
                key_tok.line,
                key_tok.col,
                format!("expected a component name, found {}", key_tok.tok),
            ));
        };
        if segment.len() < 2 || segment[1].tok != Tok::Equals {
            return Err(ParseError::new(
                key_tok.line,
                key_tok.col,
                format!("expected `=` after `{key}`"),
            ));
        }
        let value_toks = &segment[2..];
        let mut p = ExprParser::new(value_toks, decls, &[], Mode::Plain, line, end_col);
        let value = p.parse_expr()?;
        p.expect_end()?;
        if value.free_symbols().contains(decls.dep()) {
            return Err(ParseError::new(
                key_tok.line,
                key_tok.col,
                format!("`{key}` depends on `{}`", decls.dep().name()),
            ));
        }
        let slot = if key == "alpha" {
            &mut alpha
        } else if let Some(var) = key.strip_prefix("xi_") {
            match decls.vars().iter().position(|v| v.name() == var) {
                Some(j) => &mut xi[j],
                None => {
                    return Err(ParseError::new(
                        key_tok.line,
                        key_tok.col,
                        format!("`xi_{var}`: no declared variable `{var}`"),
                    ))
                }
            }
        } else {
            return Err(ParseError::new(
                key_tok.line,
                key_tok.col,
                format!("unknown component `{key}` (expected `xi_<var>` or `alpha`)"),
            ));
        };
        if slot.is_some() {
            return Err(ParseError::new(
                key_tok.line,
                key_tok.col,
                format!("component `{key}` given twice"),
            ));
        }
        *slot = Some(value);
    }

    let xi: Vec<Expression> = xi
        .into_iter()
        .map(|c| c.unwrap_or_else(|| Expression::integer(0)))
        .collect();
    let alpha = alpha.unwrap_or_else(|| Expression::integer(0));
    VectorField::new(ctx, decls.vars().to_vec(), xi, alpha)
        .map_err(|e| ParseError::new(line, 1, e.to_string()))
}

// ---------------------------------------------------------------------------
// PDE
// ---------------------------------------------------------------------------

/// Parse a PDE definition of the form `<linear combination> = 0`, where the
/// dependent variable enters only through derivative atoms like `u`, `u_t`,
/// `u_xx`.
pub fn parse_pde(text: &str, decls: &Declarations, ctx: &Context) -> ParseResult<LinearPDE> {
    parse_pde_at(text, decls, ctx, 1, 1)
}

fn parse_pde_at(
    text: &str,
    decls: &Declarations,
    ctx: &Context,
    line: usize,
    col: usize,
) -> ParseResult<LinearPDE> {
    let toks = lex(text, line, col)?;
    let end_col = col + text.chars().count();
    let mut p = ExprParser::new(&toks, decls, &[], Mode::Jet, line, end_col);
    let lhs = p.parse_expr()?;
    p.expect(&Tok::Equals)
        .map_err(|e| ParseError::new(e.line, e.col, "expected `= 0` after the left-hand side"))?;
    let (l, c) = p.here();
    match p.next().map(|t| t.tok.clone()) {
        Some(Tok::Num(r)) if r.is_zero() => {}
        _ => {
            return Err(ParseError::new(l, c, "right-hand side must be 0"));
        }
    }
    p.expect_end()?;

    if p.jets.is_empty() {
        return Err(ParseError::new(
            line,
            col,
            format!("PDE mentions no derivatives of `{}`", decls.dep().name()),
        ));
    }
    let (indices, temps): (Vec<MultiIndex>, Vec<Symbol>) = std::mem::take(&mut p.jets)
        .into_iter()
        .unzip();
    let labels: Vec<String> = indices
        .iter()
        .map(|idx| format!("`{}`", idx.label(decls.vars(), decls.dep().name())))
        .collect();
    let at = |m: String| ParseError::new(line, col, m);
    let coefs = linear_coefficients(ctx, &lhs, &temps, &labels, "PDE").map_err(at)?;
    for (coef, label) in coefs.iter().zip(&labels) {
        if coef.free_symbols().contains(decls.dep()) {
            return Err(at(format!(
                "the coefficient of {label} contains `{}`: the dependent variable may \
                 appear only through its derivatives",
                decls.dep().name()
            )));
        }
    }
    LinearPDE::new(
        ctx,
        decls.vars().to_vec(),
        decls.dep().clone(),
        indices.into_iter().zip(coefs).collect(),
    )
    .map_err(|e| at(e.to_string()))
}

// ---------------------------------------------------------------------------
// Problem files
// ---------------------------------------------------------------------------

/// The separable ansatz block of a problem file: `u = F · φ(ω)` plus the
/// names of the fields whose invariants justify it.
#[derive(Debug, Clone)]
pub struct AnsatzBlock {
    /// The multiplier F.
    pub multiplier: Expression,
    /// Name given to the similarity variable (e.g. `omega`).
    pub similarity_name: String,
    /// The similarity variable ω as an expression in the base coordinates.
    pub similarity: Expression,
    /// Name given to the profile (e.g. `phi`).
    pub profile_name: String,
    /// Candidate profile φ as an expression in the similarity symbol.
    pub profile: Expression,
    /// Names of declared fields expected to annihilate the two invariants
    /// `u / F` and ω (empty when the file does not say).
    pub fields: Vec<String>,
}

/// A fully parsed and validated problem file.
#[derive(Debug)]
pub struct ProblemFile {
    /// Symbol table (variables, dependent, parameters, constants).
    pub decls: Declarations,
    /// Context carrying the file's positivity assumptions.
    pub context: Context,
    /// The equation under study.
    pub pde: LinearPDE,
    /// Named candidate symmetries, in file order.
    pub fields: Vec<(String, VectorField)>,
    /// Named expected source-subalgebra generators, in file order.
    pub expects: Vec<(String, VectorField)>,
    /// Optional separable ansatz.
    pub ansatz: Option<AnsatzBlock>,
    /// Optional numeric source point, one coordinate per variable.
    pub kernel_source: Option<Vec<f64>>,
    /// Raw task directives, in file order.
    pub tasks: Vec<String>,
}

impl ProblemFile {
    /// Find a declared field by name.
    pub fn field(&self, name: &str) -> Option<&VectorField> {
        self.fields
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, f)| f)
    }

    /// Find an expected generator by name.
    pub fn expect(&self, name: &str) -> Option<&VectorField> {
        self.expects
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, f)| f)
    }
}

#[derive(Default)]
struct RawDecls {
    vars: Vec<(String, usize)>,
    dep: Option<(String, usize)>,
    params: Vec<(String, usize)>,
    consts: Vec<(String, usize)>,
}

impl RawDecls {
    fn freeze(&self, first_use_line: usize) -> Result<Declarations, Vec<ParseError>> {
        let mut errors = Vec::new();
        if self.vars.is_empty() {
            errors.push(ParseError::new(
                first_use_line,
                1,
                "no variables declared (missing `vars:` section)",
            ));
        }
        let vars: Vec<&str> = self.vars.iter().map(|(n, _)| n.as_str()).collect();
        let params: Vec<&str> = self.params.iter().map(|(n, _)| n.as_str()).collect();
        let consts: Vec<&str> = self.consts.iter().map(|(n, _)| n.as_str()).collect();
        let dep = self.dep.as_ref().map(|(n, _)| n.as_str()).unwrap_or("u");
        let dep_line = self.dep.as_ref().map(|(_, l)| *l).unwrap_or(first_use_line);
        match Declarations::new(&vars, dep, &params, &consts) {
            Ok(d) if errors.is_empty() => Ok(d),
            Ok(_) => Err(errors),
            Err(m) => {
                // Attach the message to the declaration that caused it when
                // recognizable, else to the dependent-variable line.
                let line = self
                    .vars
                    .iter()
                    .chain(&self.params)
                    .chain(&self.consts)
                    .find(|(n, _)| m.contains(&format!("`{n}`")))
                    .map(|(_, l)| *l)
                    .unwrap_or(dep_line);
                errors.push(ParseError::new(line, 1, m));
                Err(errors)
            }
        }
    }
}

/// One logical line of a problem file (after comment stripping and
/// continuation joining).
struct Line {
    no: usize,
    text: String,
}

fn logical_lines(source: &str) -> Vec<Line> {
    let mut out: Vec<Line> = Vec::new();
    for (i, raw) in source.lines().enumerate() {
        let no = i + 1;
        let uncommented = match raw.find('#') {
            Some(p) => &raw[..p],
            None => raw,
        };
        if uncommented.trim().is_empty() {
            continue;
        }
        let continues = uncommented.starts_with([' ', '\t']) && !out.is_empty();
        if continues {
            let last = out.last_mut().expect("continuation has a predecessor");
            last.text.push(' ');
            last.text.push_str(uncommented.trim());
        } else {
            out.push(Line { no, text: uncommented.trim_end().to_string() });
        }
    }
    out
}

/// Parse a whole problem file, aggregating all errors with their locations.
pub fn parse_problem(source: &str) -> Result<ProblemFile, ProblemError> {
    let mut errors: Vec<ParseError> = Vec::new();
    let mut raw = RawDecls::default();
    let mut decls: Option<Declarations> = None;
    let mut ctx = Context::new();

    let mut pde: Option<(LinearPDE, usize)> = None;
    let mut fields: Vec<(String, VectorField)> = Vec::new();
    let mut expects: Vec<(String, VectorField)> = Vec::new();
    let mut multiplier: Option<Expression> = None;
    let mut similarity: Option<(String, Expression)> = None;
    let mut profile: Option<(String, Expression)> = None;
    let mut ansatz_fields: Option<(Vec<String>, usize)> = None;
    let mut any_ansatz_line: Option<usize> = None;
    let mut kernel_source: Option<Vec<f64>> = None;
    let mut tasks: Vec<String> = Vec::new();

    for line in logical_lines(source) {
        let Some(colon) = line.text.find(':') else {
            errors.push(ParseError::new(
                line.no,
                1,
                "expected a section of the form `name: ...`",
            ));
            continue;
        };
        let head: Vec<&str> = line.text[..colon].split_whitespace().collect();
        let rest = &line.text[colon + 1..];
        let rest_col = line.text[..colon + 1].chars().count() + 1;

        // Declaration sections accumulate until the first expression-bearing
        // section freezes the symbol table.
        let is_decl = matches!(head.as_slice(), ["vars"] | ["dep"] | ["params"] | ["consts"]);
        if is_decl {
            if decls.is_some() {
                errors.push(ParseError::new(
                    line.no,
                    1,
                    "declarations must precede every expression section",
                ));
                continue;
            }
            let names: Vec<&str> = rest.split_whitespace().collect();
            match head.as_slice() {
                ["dep"] => {
                    if names.len() != 1 {
                        errors.push(ParseError::new(
                            line.no,
                            rest_col,
                            "`dep:` takes exactly one name",
                        ));
                    } else if raw.dep.is_some() {
                        errors.push(ParseError::new(
                            line.no,
                            rest_col,
                            "duplicate `dep:` section",
                        ));
                    } else {
                        raw.dep = Some((names[0].to_string(), line.no));
                    }
                }
                [section] => {
                    let bucket = match *section {
                        "vars" => &mut raw.vars,
                        "params" => &mut raw.params,
                        _ => &mut raw.consts,
                    };
                    for n in names {
                        bucket.push((n.to_string(), line.no));
                    }
                }
                _ => unreachable!("is_decl matched a one-word head"),
            }
            continue;
        }

        if decls.is_none() {
            match raw.freeze(line.no) {
                Ok(d) => decls = Some(d),
                Err(mut es) => {
                    errors.append(&mut es);
                    return Err(ProblemError { errors });
                }
            }
        }
        let d = decls.as_ref().expect("frozen above");

        match head.as_slice() {
            ["positive"] => {
                match parse_expression_at(rest, d, &[], line.no, rest_col) {
                    Ok(e) => {
                        if let Err(err) = ctx.register_positive(&e) {
                            errors.push(ParseError::new(line.no, rest_col, err.to_string()));
                        }
                    }
                    Err(e) => errors.push(e),
                }
            }
            ["pde"] => {
                if pde.is_some() {
                    errors.push(ParseError::new(line.no, 1, "duplicate `pde:` section"));
                } else {
                    match parse_pde_at(rest, d, &ctx, line.no, rest_col) {
                        Ok(p) => pde = Some((p, line.no)),
                        Err(e) => errors.push(e),
                    }
                }
            }
            ["field", name] | ["expect", name] => {
                let is_field = head[0] == "field";
                let list = if is_field { &mut fields } else { &mut expects };
                if list.iter().any(|(n, _)| n == name) {
                    errors.push(ParseError::new(
                        line.no,
                        1,
                        format!("duplicate {} `{name}`", head[0]),
                    ));
                    continue;
                }
                match parse_vector_field_at(rest, d, &ctx, line.no, rest_col) {
                    Ok(f) => list.push((name.to_string(), f)),
                    Err(e) => errors.push(e),
                }
            }
            ["ansatz", "multiplier"] => {
                any_ansatz_line.get_or_insert(line.no);
                if multiplier.is_some() {
                    errors.push(ParseError::new(line.no, 1, "duplicate `ansatz multiplier:`"));
                    continue;
                }
                match parse_expression_at(rest, d, &[], line.no, rest_col) {
                    Ok(e) => multiplier = Some(e),
                    Err(e) => errors.push(e),
                }
            }
            ["ansatz", "similarity", name] => {
                any_ansatz_line.get_or_insert(line.no);
                if similarity.is_some() {
                    errors.push(ParseError::new(line.no, 1, "duplicate `ansatz similarity`"));
                    continue;
                }
                if let Err(m) = validate_name(name) {
                    errors.push(ParseError::new(line.no, 1, m));
                    continue;
                }
                if d.lookup(name).is_some() {
                    errors.push(ParseError::new(
                        line.no,
                        1,
                        format!("similarity name `{name}` is already declared"),
                    ));
                    continue;
                }
                match parse_expression_at(rest, d, &[], line.no, rest_col) {
                    Ok(e) => similarity = Some((name.to_string(), e)),
                    Err(e) => errors.push(e),
                }
            }
            ["ansatz", "profile", name] => {
                any_ansatz_line.get_or_insert(line.no);
                if profile.is_some() {
                    errors.push(ParseError::new(line.no, 1, "duplicate `ansatz profile`"));
                    continue;
                }
                if let Err(m) = validate_name(name) {
                    errors.push(ParseError::new(line.no, 1, m));
                    continue;
                }
                let Some((omega_name, _)) = &similarity else {
                    errors.push(ParseError::new(
                        line.no,
                        1,
                        "`ansatz similarity` must come before `ansatz profile`",
                    ));
                    continue;
                };
                let omega = Symbol::constant(omega_name);
                match parse_expression_at(rest, d, std::slice::from_ref(&omega), line.no, rest_col)
                {
                    Ok(e) => profile = Some((name.to_string(), e)),
                    Err(e) => errors.push(e),
                }
            }
            ["ansatz", "fields"] => {
                any_ansatz_line.get_or_insert(line.no);
                if ansatz_fields.is_some() {
                    errors.push(ParseError::new(line.no, 1, "duplicate `ansatz fields:`"));
                    continue;
                }
                let names: Vec<String> =
                    rest.split_whitespace().map(|s| s.to_string()).collect();
                if names.is_empty() {
                    errors.push(ParseError::new(line.no, rest_col, "`ansatz fields:` is empty"));
                    continue;
                }
                ansatz_fields = Some((names, line.no));
            }
            ["kernel", "source"] => {
                if kernel_source.is_some() {
                    errors.push(ParseError::new(line.no, 1, "duplicate `kernel source:`"));
                    continue;
                }
                match parse_number_list(rest, line.no, rest_col) {
                    Ok(nums) if nums.len() == d.vars().len() => kernel_source = Some(nums),
                    Ok(nums) => errors.push(ParseError::new(
                        line.no,
                        rest_col,
                        format!(
                            "`kernel source:` needs {} coordinates (one per variable), got {}",
                            d.vars().len(),
                            nums.len()
                        ),
                    )),
                    Err(e) => errors.push(e),
                }
            }
            ["task"] => {
                let t = rest.trim();
                if t.is_empty() {
                    errors.push(ParseError::new(line.no, rest_col, "empty `task:` directive"));
                } else {
                    tasks.push(t.to_string());
                }
            }
            _ => {
                errors.push(ParseError::new(
                    line.no,
                    1,
                    format!("unknown section `{}`", line.text[..colon].trim()),
                ));
            }
        }
    }

    // Cross-section validation.
    let ansatz = match (multiplier, similarity, profile) {
        (None, None, None) => None,
        (Some(multiplier), Some((similarity_name, similarity)), Some((profile_name, profile))) => {
            let fields = match &ansatz_fields {
                Some((names, line)) => {
                    for n in names {
                        let known = fields.iter().any(|(f, _)| f == n)
                            || expects.iter().any(|(f, _)| f == n);
                        if !known {
                            errors.push(ParseError::new(
                                *line,
                                1,
                                format!("`ansatz fields:` names unknown field `{n}`"),
                            ));
                        }
                    }
                    names.clone()
                }
                None => Vec::new(),
            };
            Some(AnsatzBlock {
                multiplier,
                similarity_name,
                similarity,
                profile_name,
                profile,
                fields,
            })
        }
        _ => {
            let line = any_ansatz_line.unwrap_or(1);
            errors.push(ParseError::new(
                line,
                1,
                "incomplete ansatz block: need `ansatz multiplier:`, `ansatz similarity <name>:`, \
                 and `ansatz profile <name>:`",
            ));
            None
        }
    };

    let Some((pde, _)) = pde else {
        errors.push(ParseError::new(1, 1, "no PDE declared"));
        return Err(ProblemError { errors });
    };

    if !errors.is_empty() {
        return Err(ProblemError { errors });
    }
    Ok(ProblemFile {
        decls: decls.expect("pde line froze the declarations"),
        context: ctx,
        pde,
        fields,
        expects,
        ansatz,
        kernel_source,
        tasks,
    })
}

/// Whitespace-separated signed numbers (integers, decimals, or `n/d`).
fn parse_number_list(text: &str, line: usize, col: usize) -> ParseResult<Vec<f64>> {
    let toks = lex(text, line, col)?;
    let mut out = Vec::new();
    let mut i = 0;
    while i < toks.len() {
        let mut negative = false;
        if toks[i].tok == Tok::Minus {
            negative = true;
            i += 1;
        }
        let Some(Token { tok: Tok::Num(r), .. }) = toks.get(i) else {
            let (l, c) = toks
                .get(i)
                .map(|t| (t.line, t.col))
                .unwrap_or((line, col + text.chars().count()));
            return Err(ParseError::new(l, c, "expected a number"));
        };
        let mut value = r.clone();
        i += 1;
        if toks.get(i).map(|t| &t.tok) == Some(&Tok::Slash) {
            match toks.get(i + 1) {
                Some(Token { tok: Tok::Num(d), .. }) if !d.is_zero() => {
                    value /= d.clone();
                    i += 2;
                }
                _ => {
                    let t = &toks[i];
                    return Err(ParseError::new(t.line, t.col, "malformed fraction"));
                }
            }
        }
        if negative {
            value = -value;
        }
        out.push(value.to_f64().unwrap_or(f64::NAN));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::ExprError;
    use crate::fixtures::{
        self, ansatz_multiplier, closed_form_solution, forward_context, invariant_weight,
        model_pde, similarity_variable, source_basis, symmetry_basis,
    };

    fn decls() -> Declarations {
        Declarations::new(&["t", "x", "y"], "u", &["t0", "x0", "y0"], &["C"]).unwrap()
    }

    fn assert_same(ctx: &Context, a: &Expression, b: &Expression) {
        let diff = (a.clone() - b.clone()).is_zero(ctx).unwrap();
        assert!(diff, "expressions differ:\n  left:  {a}\n  right: {b}");
    }

    fn assert_same_field(ctx: &Context, a: &VectorField, b: &VectorField) {
        let diff = a.add(ctx, &b.neg(ctx).unwrap()).unwrap();
        assert!(
            diff.is_zero(ctx).unwrap(),
            "fields differ:\n  left:  {a}\n  right: {b}"
        );
    }

    /// Operator strings for the eight symmetries, aligned with
    /// [`fixtures::symmetry_basis`].
    fn symmetry_strings() -> [&'static str; 8] {
        [
            "Dx + t*Dy",
            "2*t*Dt + x*Dx + 3*y*Dy - 2*u*Du",
            "t^2*Dt + (t*x + 3*y)*Dx + 3*t*y*Dy - (2*t + x^2)*u*Du",
            "3*t^2*Dx + t^3*Dy + 3*(y - t*x)*u*Du",
            "2*t*Dx + t^2*Dy - x*u*Du",
            "Dt",
            "Dy",
            "u*Du",
        ]
    }

    /// Operator strings for the four source-fixing generators, aligned with
    /// [`fixtures::source_basis`].
    fn source_strings() -> [&'static str; 4] {
        [
            "2*(t - t0)*Dt + (x - x0)*Dx - (x0*(t - t0) - 3*(y - y0))*Dy - 4*u*Du",
            "(t^2 - t0^2)*Dt + (t*x + 3*y - t0*x0 - 3*y0)*Dx \
             + (3*(y - y0)*t - t0*x0*(t - t0))*Dy - (2*(t + t0) + x^2 - x0^2)*u*Du",
            "3*(t^2 - t0^2)*Dx + (t^3 - 3*t0^2*t + 2*t0^3)*Dy - 3*(t*x - y - t0*x0 + y0)*u*Du",
            "2*(t - t0)*Dx + (t - t0)^2*Dy - (x - x0)*u*Du",
        ]
    }

    #[test]
    fn literals_and_products_parse_structurally() {
        let d = decls();
        let two_t = parse_expression("2*t", &d).unwrap();
        assert_eq!(two_t, Expression::integer(2) * fixtures::t());
        // Decimals are exact rationals.
        assert_eq!(
            parse_expression("0.25", &d).unwrap(),
            Expression::rational(1, 4)
        );
        assert_eq!(
            parse_expression("1.5", &d).unwrap(),
            Expression::rational(3, 2)
        );
        let ctx = Context::new();
        // Exactness where binary floats would fail.
        let probe = parse_expression("0.1 + 0.2 - 0.3", &d).unwrap();
        assert!(probe.is_zero(&ctx).unwrap());
    }

    #[test]
    fn exponential_factor_matches_the_hand_built_tree() {
        let d = decls();
        let ctx = forward_context();
        let parsed = parse_expression("exp(-(x-x0)^2/(4*(t-t0)))", &d).unwrap();
        let built = Expression::exp(-Expression::div(
            Expression::powi(fixtures::x() - fixtures::x0(), 2),
            Expression::integer(4) * (fixtures::t() - fixtures::t0()),
        ));
        assert_same(&ctx, &parsed, &built);
    }

    #[test]
    fn fractional_powers_parse_and_demand_positivity() {
        let d = decls();
        let parsed = parse_expression("(t-t0)^(3/2)", &d).unwrap();
        assert_eq!(
            parsed,
            Expression::powr(
                fixtures::t() - fixtures::t0(),
                crate::expr::rat(3, 2)
            )
        );
        // Normalizing without the domain assumption fails...
        let plain = Context::new();
        assert!(matches!(
            parsed.normalize(&plain),
            Err(ExprError::DomainAssumption(_))
        ));
        // ...and succeeds once t - t0 is registered positive.
        let ctx = forward_context();
        parsed.normalize(&ctx).unwrap();
        // Negative rational exponents take the parenthesized form.
        let inv = parse_expression("(t-t0)^(-1/2)", &d).unwrap();
        let product = (parsed * inv).normalize(&ctx).unwrap();
        assert_same(&ctx, &product, &(fixtures::t() - fixtures::t0()));
    }

    #[test]
    fn syntax_errors_carry_line_and_column() {
        let d = decls();
        let e = parse_expression("2*", &d).unwrap_err();
        assert_eq!((e.line, e.col), (1, 3));
        let e = parse_expression("(x", &d).unwrap_err();
        assert_eq!((e.line, e.col), (1, 3));
        assert!(e.message.contains("`)`"), "{}", e.message);
        let e = parse_expression("z + 1", &d).unwrap_err();
        assert_eq!((e.line, e.col), (1, 1));
        assert!(e.message.contains("undeclared symbol `z`"));
        let e = parse_expression("x^0.5", &d).unwrap_err();
        assert!(e.message.contains("malformed exponent"), "{}", e.message);
        let e = parse_expression("x^(1/0)", &d).unwrap_err();
        assert!(e.message.contains("zero denominator"), "{}", e.message);
        let e = parse_expression("exp x", &d).unwrap_err();
        assert!(e.message.contains("after `exp`"), "{}", e.message);
        let e = parse_expression("x 2", &d).unwrap_err();
        assert!(e.message.contains("unexpected"), "{}", e.message);
        let e = parse_expression("1.x", &d).unwrap_err();
        assert!(e.message.contains("malformed number"), "{}", e.message);
    }

    #[test]
    fn every_symmetry_operator_string_matches_its_fixture() {
        let d = decls();
        let ctx = Context::new();
        let basis = symmetry_basis(&ctx);
        for (text, expected) in symmetry_strings().iter().zip(&basis) {
            let parsed = parse_vector_field(text, &d, &ctx).unwrap();
            assert_same_field(&ctx, &parsed, expected);
        }
    }

    #[test]
    fn every_source_generator_string_matches_its_fixture() {
        let d = decls();
        let ctx = Context::new();
        let basis = source_basis(&ctx);
        for (text, expected) in source_strings().iter().zip(&basis) {
            let parsed = parse_vector_field(text, &d, &ctx).unwrap();
            assert_same_field(&ctx, &parsed, expected);
        }
    }

    #[test]
    fn unicode_partial_is_an_operator_alias() {
        let d = decls();
        let ctx = Context::new();
        let basis = symmetry_basis(&ctx);
        let parsed = parse_vector_field("∂t", &d, &ctx).unwrap();
        assert_same_field(&ctx, &parsed, &basis[5]);
        let parsed = parse_vector_field("2*t*∂x + t^2*∂y - x*u*∂u", &d, &ctx).unwrap();
        assert_same_field(&ctx, &parsed, &basis[4]);
    }

    #[test]
    fn keyed_field_syntax_matches_the_operator_syntax() {
        let d = decls();
        let ctx = Context::new();
        let basis = symmetry_basis(&ctx);
        let keyed =
            parse_vector_field("xi_t = 2*t; xi_x = x; xi_y = 3*y; alpha = -2", &d, &ctx).unwrap();
        assert_same_field(&ctx, &keyed, &basis[1]);
        // Missing components default to zero.
        let partial = parse_vector_field("alpha = 1;", &d, &ctx).unwrap();
        assert_same_field(&ctx, &partial, &basis[7]);
    }

    #[test]
    fn field_form_violations_are_rejected() {
        let d = decls();
        let ctx = Context::new();
        // A bare Du coefficient must be proportional to u.
        let e = parse_vector_field("x*Du", &d, &ctx).unwrap_err();
        assert!(e.message.contains("α(x)*u"), "{}", e.message);
        let e = parse_vector_field("(u + 1)*Du", &d, &ctx).unwrap_err();
        assert!(e.message.contains("α(x)*u"), "{}", e.message);
        // Coefficients of coordinate operators must be u-free.
        let e = parse_vector_field("u*Dt", &d, &ctx).unwrap_err();
        assert!(e.message.contains("depends on `u`"), "{}", e.message);
        let e = parse_vector_field("xi_t = u", &d, &ctx).unwrap_err();
        assert!(e.message.contains("depends on `u`"), "{}", e.message);
        // Nonlinear or stray terms are not operator sums.
        let e = parse_vector_field("Dt*Dx", &d, &ctx).unwrap_err();
        assert!(e.message.contains("not linear"), "{}", e.message);
        let e = parse_vector_field("Dt + 5", &d, &ctx).unwrap_err();
        assert!(e.message.contains("stray term"), "{}", e.message);
        // Unknown pieces of either syntax.
        let e = parse_vector_field("xi_z = 1", &d, &ctx).unwrap_err();
        assert!(e.message.contains("no declared variable"), "{}", e.message);
        let e = parse_vector_field("xi_t = 1; xi_t = 2", &d, &ctx).unwrap_err();
        assert!(e.message.contains("twice"), "{}", e.message);
        let e = parse_vector_field("Dz", &d, &ctx).unwrap_err();
        assert!(e.message.contains("undeclared"), "{}", e.message);
    }

    #[test]
    fn distributed_coefficients_still_extract() {
        let d = decls();
        let ctx = Context::new();
        let a = parse_vector_field("(2*t + x)*Dx", &d, &ctx).unwrap();
        let b = parse_vector_field("2*t*Dx + x*Dx", &d, &ctx).unwrap();
        assert_same_field(&ctx, &a, &b);
        let c = parse_vector_field("t*(Dx + Dy)", &d, &ctx).unwrap();
        let e = parse_vector_field("xi_x = t; xi_y = t", &d, &ctx).unwrap();
        assert_same_field(&ctx, &c, &e);
    }

    #[test]
    fn the_model_equation_parses_to_its_fixture() {
        let d = decls();
        let ctx = Context::new();
        let parsed = parse_pde("u_t - u_xx + x*u_y = 0", &d, &ctx).unwrap();
        let expected = model_pde(&ctx);
        assert_eq!(
            parsed.terms().keys().collect::<Vec<_>>(),
            expected.terms().keys().collect::<Vec<_>>()
        );
        for (idx, coef) in parsed.terms() {
            assert_same(&ctx, coef, expected.coefficient(idx).unwrap());
        }
        assert_eq!(parsed.order(), 2);
    }

    #[test]
    fn pde_parsing_rejects_malformed_equations() {
        let d = decls();
        let ctx = Context::new();
        let e = parse_pde("u_t - u_xxx = 0", &d, &ctx).unwrap_err();
        assert!(e.message.contains("order ≤ 2 supported"), "{}", e.message);
        let e = parse_pde("u_t + u*u_x = 0", &d, &ctx).unwrap_err();
        assert!(e.message.contains("not linear"), "{}", e.message);
        let e = parse_pde("u_t - u_xx = 1", &d, &ctx).unwrap_err();
        assert!(e.message.contains("must be 0"), "{}", e.message);
        let e = parse_pde("u_t - u_xx + x*u_y", &d, &ctx).unwrap_err();
        assert!(e.message.contains("= 0"), "{}", e.message);
        let e = parse_pde("u_z = 0", &d, &ctx).unwrap_err();
        assert!(e.message.contains("unknown derivative suffix"), "{}", e.message);
        let e = parse_pde("x + u_t = 0", &d, &ctx).unwrap_err();
        assert!(e.message.contains("stray term"), "{}", e.message);
        let e = parse_pde("x = 0", &d, &ctx).unwrap_err();
        assert!(e.message.contains("no derivatives"), "{}", e.message);
    }

    #[test]
    fn derivative_suffixes_commute_and_support_separators() {
        let d = decls();
        let ctx = Context::new();
        let a = parse_pde("u_xy = 0", &d, &ctx).unwrap();
        let b = parse_pde("u_yx = 0", &d, &ctx).unwrap();
        let c = parse_pde("u_x_y = 0", &d, &ctx).unwrap();
        assert_eq!(a.terms().keys().collect::<Vec<_>>(), b.terms().keys().collect::<Vec<_>>());
        assert_eq!(a.terms().keys().collect::<Vec<_>>(), c.terms().keys().collect::<Vec<_>>());
    }

    #[test]
    fn declaration_validation_rejects_ambiguity() {
        assert!(Declarations::new(&["t", "t"], "u", &[], &[])
            .unwrap_err()
            .contains("duplicate"));
        assert!(Declarations::new(&["t"], "u", &["t"], &[])
            .unwrap_err()
            .contains("duplicate"));
        assert!(Declarations::new(&["t", "Dt"], "u", &[], &[])
            .unwrap_err()
            .contains("ambiguous"));
        assert!(Declarations::new(&["exp"], "u", &[], &[])
            .unwrap_err()
            .contains("reserved"));
        assert!(Declarations::new(&["alpha"], "u", &[], &[])
            .unwrap_err()
            .contains("reserved"));
        assert!(Declarations::new(&["xi_t"], "u", &[], &[])
            .unwrap_err()
            .contains("reserved"));
        assert!(Declarations::new(&["x"], "u", &["u_t"], &[])
            .unwrap_err()
            .contains("derivative notation"));
        assert!(Declarations::new(&["1x"], "u", &[], &[])
            .unwrap_err()
            .contains("invalid name"));
    }

    #[test]
    fn the_shipped_problem_file_parses_completely() {
        let src = include_str!(concat!(env!("CARGO_MANIFEST_DIR"), "/../../kolmogorov.lft"));
        let problem = parse_problem(src).unwrap();

        assert_eq!(
            problem.decls.vars().iter().map(|s| s.name().to_string()).collect::<Vec<_>>(),
            ["t", "x", "y"]
        );
        assert_eq!(problem.decls.dep().name(), "u");
        assert_eq!(problem.decls.params().len(), 3);

        // The context carries the forward-domain assumption.
        let half = Expression::powr(
            fixtures::t() - fixtures::t0(),
            crate::expr::rat(1, 2),
        );
        half.normalize(&problem.context).unwrap();

        // Equation, fields, and expected generators match the fixtures.
        let ctx = &problem.context;
        let expected_pde = model_pde(ctx);
        for (idx, coef) in problem.pde.terms() {
            assert_same(ctx, coef, expected_pde.coefficient(idx).unwrap());
        }
        let names: Vec<&str> = problem.fields.iter().map(|(n, _)| n.as_str()).collect();
        assert_eq!(names, ["X1", "X2", "X3", "X4", "X5", "X6", "X7", "X8"]);
        for ((_, parsed), expected) in problem.fields.iter().zip(&symmetry_basis(ctx)) {
            assert_same_field(ctx, parsed, expected);
        }
        let names: Vec<&str> = problem.expects.iter().map(|(n, _)| n.as_str()).collect();
        assert_eq!(names, ["Y1", "Y2", "Y3", "Y4"]);
        for ((_, parsed), expected) in problem.expects.iter().zip(&source_basis(ctx)) {
            assert_same_field(ctx, parsed, expected);
        }

        // Ansatz block against the fixtures.
        let ansatz = problem.ansatz.as_ref().unwrap();
        assert_same(ctx, &ansatz.multiplier, &ansatz_multiplier());
        assert_same(ctx, &ansatz.similarity, &similarity_variable());
        assert_eq!(ansatz.similarity_name, "omega");
        assert_eq!(ansatz.profile_name, "phi");
        assert_eq!(ansatz.fields, ["Y1", "Y4"]);
        // The profile is C·exp(−(3/4)ω²) in the similarity symbol.
        let omega = Expression::symbol(Symbol::constant("omega"));
        let profile = Expression::symbol(Symbol::constant("C"))
            * Expression::exp(
                Expression::rational(-3, 4) * Expression::powi(omega, 2),
            );
        assert_same(ctx, &ansatz.profile, &profile);

        assert_eq!(problem.kernel_source.as_deref(), Some(&[0.0, 0.0, 0.0][..]));
        assert!(!problem.tasks.is_empty());
    }

    #[test]
    fn problem_file_errors_are_aggregated_with_locations() {
        let src = "vars: t x y\ndep: u\nparams: t0 x0 y0\n\
                   pde: u_t - u_xx + x*u_y = 0\n\
                   field A: Dq\n\
                   field B: z*Dx\n";
        let err = parse_problem(src).unwrap_err();
        assert_eq!(err.errors.len(), 2);
        assert_eq!(err.errors[0].line, 5);
        assert_eq!(err.errors[1].line, 6);
        assert!(err.errors[1].message.contains("undeclared symbol `z`"));
        // Columns point into the expression, past the section header.
        assert!(err.errors[1].col > "field B:".len());
    }

    #[test]
    fn degenerate_problem_files_are_rejected() {
        let err = parse_problem("").unwrap_err();
        assert!(err.errors.iter().any(|e| e.message.contains("no PDE declared")));

        let err = parse_problem("vars: t x y t\npde: u_t = 0").unwrap_err();
        assert!(err.errors.iter().any(|e| e.message.contains("duplicate declaration of `t`")));

        let src = "vars: t x y\npde: u_t - u_xx + x*u_y = 0\npde: u_t = 0";
        let err = parse_problem(src).unwrap_err();
        assert!(err.errors.iter().any(|e| e.message.contains("duplicate `pde:`")));

        let src = "vars: t x y\npde: u_t - u_xx + x*u_y = 0\nvars: w";
        let err = parse_problem(src).unwrap_err();
        assert!(err.errors.iter().any(|e| e.message.contains("must precede")));

        let src = "vars: t x y\npde: u_t - u_xx + x*u_y = 0\nansatz multiplier: 1";
        let err = parse_problem(src).unwrap_err();
        assert!(err.errors.iter().any(|e| e.message.contains("incomplete ansatz")));

        let src = "vars: t x y\npde: u_t - u_xx + x*u_y = 0\nkernel source: 0 0";
        let err = parse_problem(src).unwrap_err();
        assert!(err.errors.iter().any(|e| e.message.contains("3 coordinates")));

        let src = "vars: t x y\npde: u_t - u_xx + x*u_y = 0\nnonsense: 1";
        let err = parse_problem(src).unwrap_err();
        assert!(err.errors.iter().any(|e| e.message.contains("unknown section")));
    }

    #[test]
    fn continuation_lines_join_into_logical_lines() {
        let src = "vars: t x y\ndep: u\nparams: t0 x0 y0\n\
                   pde: u_t - u_xx\n   + x*u_y = 0\n";
        let problem = parse_problem(src).unwrap();
        assert_eq!(problem.pde.terms().len(), 3);
    }

    #[test]
    fn fixture_expressions_round_trip_through_the_printer() {
        let d = decls();
        let ctx = forward_context();
        let amp = Expression::symbol(Symbol::constant("C"));
        let corpus = vec![
            invariant_weight(),
            similarity_variable(),
            ansatz_multiplier(),
            closed_form_solution(amp),
        ];
        let mut all: Vec<Expression> = corpus;
        for f in symmetry_basis(&ctx).iter().chain(&source_basis(&ctx)) {
            all.extend(f.xi().iter().cloned());
            all.push(f.alpha().clone());
        }
        for e in all {
            let normalized = e.normalize(&ctx).unwrap();
            let text = normalized.to_string();
            let reparsed = parse_expression(&text, &d)
                .unwrap_or_else(|err| panic!("`{text}` failed to reparse: {err}"));
            assert_same(&ctx, &reparsed, &normalized);
        }
    }
}
