//! Evaluation context: positivity assumptions and resource budget.

use crate::error::{ExprError, ExprResult};
use crate::expr::poly::Poly;
use crate::expr::Expression;

/// Default cap on the number of terms any normalization intermediate may hold.
pub const DEFAULT_TERM_CAP: usize = 100_000;

/// Environment variable that overrides the term cap.
pub const TERM_CAP_ENV: &str = "LIEFUND_TERM_CAP";

/// Shared state consulted by normalization:
///
/// * a registry of polynomial bases that are known positive, which licenses
///   fractional powers of them (e.g. registering `t - t0 > 0` makes
///   `(t - t0)^(3/2)` a legal expression), and
/// * the term budget that stops runaway expansions.
#[derive(Debug, Clone)]
pub struct Context {
    positives: Vec<Poly>,
    term_cap: usize,
}

impl Default for Context {
    fn default() -> Self {
        Self::new()
    }
}

impl Context {
    /// Context with no assumptions and the default term cap, honouring the
    /// `LIEFUND_TERM_CAP` environment variable when set.
    pub fn new() -> Self {
        let cap = std::env::var(TERM_CAP_ENV)
            .ok()
            .and_then(|v| v.parse::<usize>().ok())
            .filter(|&v| v > 0)
            .unwrap_or(DEFAULT_TERM_CAP);
        Context { positives: Vec::new(), term_cap: cap }
    }

    /// Context with an explicit term cap.
    pub fn with_term_cap(cap: usize) -> Self {
        Context { positives: Vec::new(), term_cap: cap }
    }

    /// The active term budget.
    pub fn term_cap(&self) -> usize {
        self.term_cap
    }

    /// Declare a polynomial expression positive on the domain of interest.
    ///
    /// The expression must normalize to a polynomial. It is stored as a
    /// signed primitive polynomial (integer coprime coefficients); the
    /// rational content is dropped since positive scalings carry no extra
    /// information. Registered bases must be squarefree and pairwise coprime
    /// so that radical canonicalization stays deterministic and sound.
    pub fn register_positive(&mut self, expr: &Expression) -> ExprResult<()> {
        let nf = crate::expr::normal::NormalForm::from_expr(self, expr)?;
        let rf = nf.as_rational().ok_or_else(|| {
            ExprError::InvalidOperation(
                "positivity registration requires a polynomial expression".into(),
            )
        })?;
        if !rf.is_polynomial() {
            return Err(ExprError::InvalidOperation(
                "positivity registration requires a polynomial expression".into(),
            ));
        }
        let (content, prim) = rf.num().primitive_decompose();
        if prim.is_zero() {
            return Err(ExprError::InvalidOperation(
                "cannot register zero as positive".into(),
            ));
        }
        // keep the sign with the primitive part: registering `t0 - t` stores
        // the polynomial whose value is asserted positive
        let signed = if content < num_traits::Zero::zero() { prim.neg() } else { prim };
        if let Some(c) = signed.as_constant() {
            // constants are handled by prime factorization, not the registry
            return if c > num_traits::Zero::zero() {
                Ok(())
            } else {
                Err(ExprError::InvalidOperation(
                    "cannot register a non-positive constant as positive".into(),
                ))
            };
        }
        if self.positives.contains(&signed) {
            return Ok(());
        }
        // squarefree check: gcd(p, dp/dv) must be constant for every variable
        for v in signed.symbols() {
            let d = signed.derivative(&v);
            if !d.is_zero() && signed.gcd(&d).as_constant().is_none() {
                return Err(ExprError::InvalidOperation(format!(
                    "positive base must be squarefree: {signed:?}"
                )));
            }
        }
        // pairwise coprimality keeps trial-division factoring canonical
        for q in &self.positives {
            let shared = signed.gcd(q);
            if shared.as_constant().is_none() {
                return Err(ExprError::InvalidOperation(
                    "positive bases must be pairwise coprime".into(),
                ));
            }
        }
        self.positives.push(signed);
        Ok(())
    }

    /// Registered positive bases, in registration order.
    pub fn positives(&self) -> &[Poly] {
        &self.positives
    }
}
