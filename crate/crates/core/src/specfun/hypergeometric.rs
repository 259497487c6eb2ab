//! Generalized hypergeometric series pFq(a; b; z) for real parameters.
//!
//! Two summation paths share one driver:
//! * all terms nonnegative: linear mantissa with a running log-scale offset
//!   and Kahan compensation, so results far beyond `f64::MAX` are returned
//!   as logarithms;
//! * sign changes (negative z or negative upper parameters): terms and sum
//!   in double-double, which absorbs the cancellation of alternating sums.
//!
//! The series stops once three consecutive terms fall below
//! `rel_tol · |partial sum|`, or exactly when an upper parameter is a
//! nonpositive integer.

use super::dd::Dd;
use super::AccuracyPolicy;
use crate::error::{Error, Result};

const RESCALE_ABOVE: f64 = 1e250;
const RESCALE_BY: f64 = 1e-250;
const LN_RESCALE: f64 = 575.646_273_248_511_4; // 250 ln 10
const LN_MAX: f64 = 709.782_712_893_384;
const CONSECUTIVE_SMALL: usize = 3;

/// A real number stored as sign · exp(ln_abs).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogValue {
    pub ln_abs: f64,
    pub sign: f64,
}

impl LogValue {
    pub const ONE: LogValue = LogValue {
        ln_abs: 0.0,
        sign: 1.0,
    };

    pub fn from_f64(x: f64) -> Self {
        if x == 0.0 {
            LogValue {
                ln_abs: f64::NEG_INFINITY,
                sign: 0.0,
            }
        } else {
            LogValue {
                ln_abs: x.abs().ln(),
                sign: x.signum(),
            }
        }
    }

    pub fn value(&self) -> f64 {
        if self.sign == 0.0 {
            0.0
        } else {
            self.sign * self.ln_abs.exp()
        }
    }

    /// The value, or an overflow error if it is not representable.
    pub fn finite_value(&self, what: &'static str) -> Result<f64> {
        if self.ln_abs > LN_MAX {
            return Err(Error::Overflow(what));
        }
        Ok(self.value())
    }
}

fn is_nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && x.fract() == 0.0
}

struct Kahan {
    sum: f64,
    comp: f64,
}

impl Kahan {
    fn add(&mut self, x: f64) {
        let y = x - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }

    fn scale(&mut self, f: f64) {
        self.sum *= f;
        self.comp *= f;
    }
}

fn nonconvergence(policy: &AccuracyPolicy) -> Error {
    Error::NonConvergence {
        what: "hypergeometric series",
        iterations: policy.max_terms,
    }
}

fn sum_positive(upper: &[f64], lower: &[f64], z: f64, policy: &AccuracyPolicy) -> Result<LogValue> {
    let mut term = 1.0;
    let mut acc = Kahan { sum: 1.0, comp: 0.0 };
    let mut ln_scale = 0.0;
    let mut small = 0;
    for k in 0..policy.max_terms {
        let kf = k as f64;
        let mut ratio = z / (kf + 1.0);
        for a in upper {
            ratio *= a + kf;
        }
        for b in lower {
            ratio /= b + kf;
        }
        term *= ratio;
        if term == 0.0 {
            return Ok(LogValue {
                ln_abs: acc.sum.ln() + ln_scale,
                sign: 1.0,
            });
        }
        if term > RESCALE_ABOVE {
            term *= RESCALE_BY;
            acc.scale(RESCALE_BY);
            ln_scale += LN_RESCALE;
        }
        acc.add(term);
        if term < policy.rel_tol * acc.sum {
            small += 1;
            if small >= CONSECUTIVE_SMALL {
                return Ok(LogValue {
                    ln_abs: acc.sum.ln() + ln_scale,
                    sign: 1.0,
                });
            }
        } else {
            small = 0;
        }
    }
    Err(nonconvergence(policy))
}

fn sum_alternating(
    upper: &[f64],
    lower: &[f64],
    z: f64,
    policy: &AccuracyPolicy,
) -> Result<LogValue> {
    let zd = Dd::from_f64(z);
    let mut term = Dd::ONE;
    let mut sum = Dd::ONE;
    let mut small = 0;
    for k in 0..policy.max_terms {
        let kd = Dd::from_f64(k as f64);
        let mut num = zd;
        for &a in upper {
            num = num * (Dd::from_f64(a) + kd);
        }
        let mut den = kd + Dd::ONE;
        for &b in lower {
            den = den * (Dd::from_f64(b) + kd);
        }
        if num.hi == 0.0 {
            return Ok(LogValue::from_f64(sum.to_f64()));
        }
        term = term * (num / den);
        if term.hi.abs() > 1e300 {
            return Err(Error::Overflow("alternating hypergeometric series"));
        }
        sum = sum + term;
        if term.abs().hi < policy.rel_tol * sum.abs().hi {
            small += 1;
            if small >= CONSECUTIVE_SMALL {
                return Ok(LogValue::from_f64(sum.to_f64()));
            }
        } else {
            small = 0;
        }
    }
    Err(nonconvergence(policy))
}

/// Sum of the generalized hypergeometric series with the given parameters.
pub fn pfq_series(
    upper: &[f64],
    lower: &[f64],
    z: f64,
    policy: &AccuracyPolicy,
) -> Result<LogValue> {
    policy.validate()?;
    if upper.iter().chain(lower).any(|p| !p.is_finite()) || !z.is_finite() {
        return Err(Error::domain("hypergeometric", "non-finite argument"));
    }
    if let Some(b) = lower.iter().find(|b| is_nonpositive_integer(**b)) {
        return Err(Error::domain(
            "hypergeometric",
            format!("lower parameter {b} is a nonpositive integer"),
        ));
    }
    if z == 0.0 {
        return Ok(LogValue::ONE);
    }
    let all_positive = z > 0.0 && upper.iter().chain(lower).all(|p| *p > 0.0);
    if all_positive {
        sum_positive(upper, lower, z, policy)
    } else {
        sum_alternating(upper, lower, z, policy)
    }
}

fn check_positive(function: &'static str, name: &str, v: f64) -> Result<()> {
    if !(v > 0.0) {
        return Err(Error::domain(function, format!("{name} = {v} must be positive")));
    }
    Ok(())
}

/// ln ₀F₁(; b; z).
pub fn ln_hyp0f1(b: f64, z: f64) -> Result<LogValue> {
    check_positive("hyp0f1", "b", b)?;
    pfq_series(&[], &[b], z, &AccuracyPolicy::default())
}

/// ₀F₁(; b; z) = Σ z^k / (k! (b)_k).
pub fn hyp0f1(b: f64, z: f64) -> Result<f64> {
    ln_hyp0f1(b, z)?.finite_value("hyp0f1")
}

/// ln ₁F₁(a; b; z).
pub fn ln_hyp1f1(a: f64, b: f64, z: f64) -> Result<LogValue> {
    check_positive("hyp1f1", "b", b)?;
    pfq_series(&[a], &[b], z, &AccuracyPolicy::default())
}

/// Confluent hypergeometric function ₁F₁(a; b; z).
pub fn hyp1f1(a: f64, b: f64, z: f64) -> Result<f64> {
    ln_hyp1f1(a, b, z)?.finite_value("hyp1f1")
}

/// ln ₂F₂(a1, a2; b1, b2; z).
pub fn ln_hyp2f2(a1: f64, a2: f64, b1: f64, b2: f64, z: f64) -> Result<LogValue> {
    check_positive("hyp2f2", "b1", b1)?;
    check_positive("hyp2f2", "b2", b2)?;
    pfq_series(&[a1, a2], &[b1, b2], z, &AccuracyPolicy::default())
}

/// ₂F₂(a1, a2; b1, b2; z).
pub fn hyp2f2(a1: f64, a2: f64, b1: f64, b2: f64, z: f64) -> Result<f64> {
    ln_hyp2f2(a1, a2, b1, b2, z)?.finite_value("hyp2f2")
}
