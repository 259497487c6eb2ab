//! Generalized exponential integrals E_n(x) = ∫_1^∞ t^{-n} e^{-xt} dt.
//!
//! The rate series needs e^x E_n(x) at x = (K+1)/b, which can be in the tens
//! of thousands, so the scaled form is the primitive here: the continued
//! fraction produces it directly and the unscaled value is derived from it.

use super::gamma::EULER_GAMMA;
use crate::error::{Error, Result};

const EPS: f64 = 1e-16;
const FPMIN: f64 = 1e-300;
const MAX_ITER: usize = 10_000;
const SERIES_CUTOFF: f64 = 1.5;

fn check(n: u32, x: f64) -> Result<()> {
    if n < 1 {
        return Err(Error::domain("expint", "order n must be at least 1"));
    }
    if !(x > 0.0) || x.is_nan() {
        return Err(Error::domain("expint", format!("x = {x} must be positive")));
    }
    Ok(())
}

/// Power series for E_n(x), valid for small x.
fn series(n: u32, x: f64) -> Result<f64> {
    let nm1 = n as i64 - 1;
    let mut ans = if nm1 != 0 {
        1.0 / nm1 as f64
    } else {
        -x.ln() - EULER_GAMMA
    };
    let mut fact = 1.0;
    for i in 1..MAX_ITER as i64 {
        fact *= -x / i as f64;
        let del = if i != nm1 {
            -fact / (i - nm1) as f64
        } else {
            let psi = -EULER_GAMMA + (1..=nm1).map(|j| 1.0 / j as f64).sum::<f64>();
            fact * (-x.ln() + psi)
        };
        ans += del;
        if i >= nm1 && del.abs() < ans.abs() * EPS {
            return Ok(ans);
        }
    }
    Err(Error::NonConvergence {
        what: "exponential integral series",
        iterations: MAX_ITER,
    })
}

/// Modified Lentz evaluation of the continued fraction for e^x E_n(x).
fn continued_fraction_scaled(n: u32, x: f64) -> Result<f64> {
    let nm1 = n as f64 - 1.0;
    let mut b = x + n as f64;
    let mut c = 1.0 / FPMIN;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..MAX_ITER {
        let fi = i as f64;
        let an = -fi * (nm1 + fi);
        b += 2.0;
        d = an * d + b;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = b + an / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        let del = c * d;
        h *= del;
        if (del - 1.0).abs() < EPS {
            return Ok(h);
        }
    }
    Err(Error::NonConvergence {
        what: "exponential integral continued fraction",
        iterations: MAX_ITER,
    })
}

/// e^x · E_n(x) for n ≥ 1, x > 0.
pub fn expint_en_scaled(n: u32, x: f64) -> Result<f64> {
    check(n, x)?;
    if x.is_infinite() {
        return Ok(0.0);
    }
    if x < SERIES_CUTOFF {
        Ok(series(n, x)? * x.exp())
    } else {
        continued_fraction_scaled(n, x)
    }
}

/// E_n(x) for n ≥ 1 and x ≥ 0 (x = 0 only when n ≥ 2). Underflows to zero
/// for large x.
pub fn expint_en(n: u32, x: f64) -> Result<f64> {
    if n >= 2 && x == 0.0 {
        return Ok(1.0 / (n as f64 - 1.0));
    }
    if n == 1 && x == 0.0 {
        return Err(Error::domain("expint_en", "E_1 is singular at x = 0"));
    }
    check(n, x)?;
    if x < SERIES_CUTOFF {
        return series(n, x);
    }
    Ok(continued_fraction_scaled(n, x)? * (-x).exp())
}

/// Table of e^x E_j(x) for j = 1..=n_max (index j − 1).
///
/// One value is computed directly at j ≈ x and the rest follow by recurrence
/// (upward for j > x, downward for j < x), each direction being stable.
pub fn expint_scaled_table(n_max: usize, x: f64) -> Result<Vec<f64>> {
    if n_max == 0 {
        return Ok(Vec::new());
    }
    check(1, x)?;
    let mut out = vec![0.0; n_max];
    if x.is_infinite() {
        return Ok(out);
    }
    let anchor = (x.round() as usize).clamp(1, n_max);
    out[anchor - 1] = expint_en_scaled(anchor as u32, x)?;
    for j in anchor..n_max {
        // e^x E_{j+1} = (1 − x e^x E_j) / j
        out[j] = (1.0 - x * out[j - 1]) / j as f64;
    }
    for j in (1..anchor).rev() {
        // e^x E_j = (1 − j e^x E_{j+1}) / x
        out[j - 1] = (1.0 - j as f64 * out[j]) / x;
    }
    Ok(out)
}
