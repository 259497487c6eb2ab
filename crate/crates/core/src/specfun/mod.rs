//! Scalar special functions used by the analytic rate expressions.
//!
//! Everything here is a pure function of its arguments. The hypergeometric
//! series report their value as a [`LogValue`] when the caller needs to stay
//! clear of overflow (the exact engine evaluates `1F1` at arguments in the
//! hundreds), and as plain `f64` otherwise.

mod dd;
mod expint;
mod gamma;
mod hypergeometric;

pub use expint::{expint_en, expint_en_scaled, expint_scaled_table};
pub(crate) use gamma::ln_gamma_unchecked;
pub use gamma::{ln_factorial, ln_gamma, ln_pochhammer, EULER_GAMMA};
pub use hypergeometric::{
    hyp0f1, hyp1f1, hyp2f2, ln_hyp0f1, ln_hyp1f1, ln_hyp2f2, pfq_series, LogValue,
};

use crate::error::{Error, Result};

/// Termination controls shared by the series evaluators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AccuracyPolicy {
    /// Relative size below which a term is considered negligible.
    pub rel_tol: f64,
    /// Hard cap on the number of series terms.
    pub max_terms: usize,
}

impl Default for AccuracyPolicy {
    fn default() -> Self {
        Self {
            rel_tol: 1e-12,
            max_terms: 10_000,
        }
    }
}

impl AccuracyPolicy {
    pub fn new(rel_tol: f64, max_terms: usize) -> Result<Self> {
        let policy = Self { rel_tol, max_terms };
        policy.validate()?;
        Ok(policy)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) || !self.rel_tol.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "rel_tol must be positive, got {}",
                self.rel_tol
            )));
        }
        if self.max_terms == 0 {
            return Err(Error::InvalidConfig("max_terms must be at least 1".into()));
        }
        Ok(())
    }
}
