//! Large-antenna limits and the deterministic equivalent of the rate.
//!
//! With A = √(K/(K+1))·H̄ the random part of the channel has entry variance
//! 1/(K+1), and for a coefficient `a` the scalars (ψ, ψ̄) solve
//!
//! ```text
//! ψ  = a / (1 + tr[(1/ψ̄) I_Nt + (ψ/a) AᴴA]⁻¹ / (K+1))
//! ψ̄ = a / (1 + tr[(1/ψ) I_Nr + (ψ̄/a) AAᴴ]⁻¹ / (K+1))
//! ```
//!
//! after which
//!
//! ```text
//! J(a) = log₂det((a/ψ) I_Nr + ψ̄ AAᴴ) + N_t log₂(a/ψ̄) − log₂(e)·δ·δ̃ / (a(K+1))
//! ```
//!
//! approximates E[log₂det(I + a HHᴴ)], δ̃ and δ being the two traces above.
//! J is evaluated with a/ψ = 1 + δ̃/(K+1) and a/ψ̄ = 1 + δ/(K+1) substituted,
//! which is the same number at the solution but makes J stationary in the
//! traces, so fixed-point error enters only to second order. Every trace
//! and determinant is taken on the smaller of AᴴA and AAᴴ.

use serde::{Deserialize, Serialize};

use crate::channel::{rate_coefficients, SystemConfig};
use crate::error::{Error, Result};
use crate::matrix::{cholesky, hermitian_inverse_diagonal, smaller_gram, ComplexMatrix};
use crate::result::{Method, RateResult};

pub const DEFAULT_FP_TOL: f64 = 1e-10;
pub const MAX_FP_ITERATIONS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedPointSolution {
    pub psi: f64,
    pub psi_bar: f64,
    pub iterations: usize,
    pub residual: f64,
}

/// Rate limit as N_t → ∞ at fixed N_r.
pub fn rate_large_nt(config: &SystemConfig) -> Result<RateResult> {
    config.validate()?;
    let rho = config.rho;
    let sinr = rho / (rho * config.delta_t.powi(2) + rho * config.delta_r.powi(2) + 1.0);
    Ok(RateResult::closed_form(
        config.nr as f64 * sinr.ln_1p() / std::f64::consts::LN_2,
        Method::AsymNt,
    ))
}

/// Rate limit as N_r → ∞ at fixed N_t; finite only with transmit
/// distortion.
pub fn rate_large_nr(config: &SystemConfig) -> Result<RateResult> {
    config.validate()?;
    if config.delta_t == 0.0 {
        return Err(Error::Unbounded);
    }
    let dt2 = config.delta_t * config.delta_t;
    Ok(RateResult::closed_form(
        config.nt as f64 * (1.0 + 1.0 / dt2).log2(),
        Method::AsymNr,
    ))
}

/// The LoS part of the model reduced to what the fixed point needs.
struct LosGram {
    nt: usize,
    nr: usize,
    k: f64,
    /// Smaller of AᴴA and AAᴴ, with A = √(K/(K+1))·H̄.
    small: ComplexMatrix,
}

impl LosGram {
    fn new(hbar: &ComplexMatrix, k: f64) -> Result<Self> {
        if !(k >= 0.0) || k.is_infinite() {
            return Err(Error::InvalidConfig(format!("K = {k} must be finite and nonnegative")));
        }
        Ok(Self {
            nt: hbar.cols(),
            nr: hbar.rows(),
            k,
            small: smaller_gram(hbar).scale(k / (k + 1.0)),
        })
    }

    fn s(&self) -> usize {
        self.small.rows()
    }

    /// tr(αI_n + c·X)⁻¹ where X is the n×n Gram (AᴴA or AAᴴ) and the
    /// smaller one shares its nonzero eigenvalues.
    fn trace_inverse(&self, n: usize, alpha: f64, c: f64) -> Result<f64> {
        let extra = (n - self.s()) as f64 / alpha;
        let diag = hermitian_inverse_diagonal(&self.small.scaled_plus_identity(c, alpha))?;
        Ok(extra + diag.iter().sum::<f64>())
    }

    /// ln det(αI_n + c·X) for the n×n Gram X.
    fn ln_det(&self, n: usize, alpha: f64, c: f64) -> Result<f64> {
        let l = cholesky(&self.small.scaled_plus_identity(c, alpha))?;
        let small: f64 = (0..l.rows()).map(|i| l[(i, i)].re.ln()).sum::<f64>() * 2.0;
        Ok(small + (n - self.s()) as f64 * alpha.ln())
    }

    /// The two traces (δ̃ over N_t, δ over N_r) at (ψ, ψ̄).
    fn traces(&self, coeff: f64, psi: f64, psi_bar: f64) -> Result<(f64, f64)> {
        let t_tilde = self.trace_inverse(self.nt, 1.0 / psi_bar, psi / coeff)?;
        let t = self.trace_inverse(self.nr, 1.0 / psi, psi_bar / coeff)?;
        Ok((t_tilde, t))
    }

    fn update_psi(&self, coeff: f64, psi: f64, psi_bar: f64) -> Result<f64> {
        let t = self.trace_inverse(self.nt, 1.0 / psi_bar, psi / coeff)?;
        Ok(coeff / (1.0 + t / (self.k + 1.0)))
    }

    fn update_psi_bar(&self, coeff: f64, psi: f64, psi_bar: f64) -> Result<f64> {
        let t = self.trace_inverse(self.nr, 1.0 / psi, psi_bar / coeff)?;
        Ok(coeff / (1.0 + t / (self.k + 1.0)))
    }

    fn residual(&self, coeff: f64, psi: f64, psi_bar: f64) -> Result<f64> {
        let r1 = (self.update_psi(coeff, psi, psi_bar)? - psi).abs() / psi;
        let r2 = (self.update_psi_bar(coeff, psi, psi_bar)? - psi_bar).abs() / psi_bar;
        Ok(r1.max(r2))
    }
}

fn check_coeff(coeff: f64) -> Result<()> {
    if !(coeff > 0.0) || coeff.is_infinite() {
        return Err(Error::InvalidConfig(format!("coefficient {coeff} must be positive and finite")));
    }
    Ok(())
}

fn solve(los: &LosGram, coeff: f64, tol: f64) -> Result<FixedPointSolution> {
    check_coeff(coeff)?;
    if !(tol > 0.0) {
        return Err(Error::InvalidConfig(format!("tolerance {tol} must be positive")));
    }
    let (mut psi, mut psi_bar) = (coeff, coeff);
    let (mut last_d, mut last_db) = (0.0f64, 0.0f64);
    let (mut damp, mut damp_b) = (1.0, 1.0);
    for it in 1..=MAX_FP_ITERATIONS {
        let d = los.update_psi(coeff, psi, psi_bar)? - psi;
        if d * last_d < 0.0 {
            damp = 0.5;
        }
        psi += damp * d;
        let db = los.update_psi_bar(coeff, psi, psi_bar)? - psi_bar;
        if db * last_db < 0.0 {
            damp_b = 0.5;
        }
        psi_bar += damp_b * db;
        last_d = d;
        last_db = db;
        if (d / psi).abs() <= tol && (db / psi_bar).abs() <= tol {
            let residual = los.residual(coeff, psi, psi_bar)?;
            if residual <= tol {
                return Ok(FixedPointSolution {
                    psi,
                    psi_bar,
                    iterations: it,
                    residual,
                });
            }
        }
    }
    Err(Error::NonConvergence {
        what: "deterministic-equivalent fixed point",
        iterations: MAX_FP_ITERATIONS,
    })
}

/// Solve the coupled equations for (ψ, ψ̄) at coefficient `coeff`.
pub fn fixed_point(hbar: &ComplexMatrix, k: f64, coeff: f64, tol: f64) -> Result<FixedPointSolution> {
    solve(&LosGram::new(hbar, k)?, coeff, tol)
}

fn j_value(los: &LosGram, coeff: f64, fp: &FixedPointSolution) -> Result<f64> {
    let (psi, psi_bar) = (fp.psi, fp.psi_bar);
    let (t_tilde, t) = los.traces(coeff, psi, psi_bar)?;
    let inv_psi = 1.0 + t_tilde / (los.k + 1.0); // a/ψ
    let inv_psi_bar = 1.0 + t / (los.k + 1.0); // a/ψ̄
    let ln_j = los.ln_det(los.nr, inv_psi, coeff / inv_psi_bar)? + los.nt as f64 * inv_psi_bar.ln()
        - t * t_tilde / (coeff * (los.k + 1.0));
    Ok(ln_j / std::f64::consts::LN_2)
}

/// Deterministic equivalent of E[log₂det(I + coeff·HHᴴ)] at a solved
/// fixed point.
pub fn deterministic_equivalent_j(
    hbar: &ComplexMatrix,
    k: f64,
    coeff: f64,
    fp: &FixedPointSolution,
) -> Result<f64> {
    check_coeff(coeff)?;
    j_value(&LosGram::new(hbar, k)?, coeff, fp)
}

/// Deterministic-equivalent rate J(a) − J(b).
pub fn rate_large_both(config: &SystemConfig, hbar: &ComplexMatrix) -> Result<RateResult> {
    config.validate()?;
    if hbar.rows() != config.nr || hbar.cols() != config.nt {
        return Err(Error::DimensionMismatch {
            expected: format!("{}x{} LoS matrix", config.nr, config.nt),
            actual: format!("{}x{}", hbar.rows(), hbar.cols()),
        });
    }
    let c = rate_coefficients(config);
    if c.a == 0.0 {
        return Ok(RateResult::closed_form(0.0, Method::AsymDe));
    }
    let los = LosGram::new(hbar, config.k_factor)?;
    let j = |coeff: f64| -> Result<f64> {
        if coeff == 0.0 {
            return Ok(0.0);
        }
        let fp = solve(&los, coeff, DEFAULT_FP_TOL)?;
        j_value(&los, coeff, &fp)
    };
    Ok(RateResult::closed_form(j(c.a)? - j(c.b)?, Method::AsymDe))
}

/// Relative rate loss (R_ideal − R)/R_ideal.
pub fn rate_loss(ideal: &RateResult, nonideal: &RateResult) -> Result<f64> {
    if !(ideal.rate > 0.0) {
        return Err(Error::DivisionByZero("rate loss with nonpositive ideal rate"));
    }
    Ok((ideal.rate - nonideal.rate) / ideal.rate)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{ula_los, UlaGeometry};
    use num_complex::Complex64;
    use proptest::prelude::*;

    #[test]
    fn large_nt_examples() {
        let cfg = SystemConfig::new(256, 4, 0.15, 0.15, 1.0, 10.0).unwrap();
        let r = rate_large_nt(&cfg).unwrap();
        assert!((r.rate - 4.0 * (1.0 + 10.0 / 1.45f64).log2()).abs() < 1e-12);
        assert!((r.rate - 11.925).abs() < 1e-3);
        let ideal = rate_large_nt(&cfg.ideal()).unwrap();
        assert!((ideal.rate - 4.0 * 11f64.log2()).abs() < 1e-12);
        let sat = rate_large_nt(&cfg.with_rho(1e12)).unwrap();
        assert!((sat.rate - 4.0 * (1.0 + 1.0 / 0.045f64).log2()).abs() < 1e-9);
    }

    #[test]
    fn large_nr_examples() {
        let cfg = SystemConfig::new(4, 256, 0.15, 0.15, 1.0, 10.0).unwrap();
        assert!((rate_large_nr(&cfg).unwrap().rate - 22.025).abs() < 1e-3);
        let half = SystemConfig::new(3, 8, 0.999_999_999, 0.1, 1.0, 10.0).unwrap();
        assert!((rate_large_nr(&half).unwrap().rate - 3.0).abs() < 1e-8);
        assert!(matches!(rate_large_nr(&cfg.ideal()), Err(Error::Unbounded)));
    }

    #[test]
    fn scalar_fixed_point_matches_bisection() {
        let h = ComplexMatrix::new(1, 1, vec![Complex64::new(1.0, 0.0)]).unwrap();
        let fp = fixed_point(&h, 1.0, 1.0, 1e-12).unwrap();
        // symmetric problem: ψ = ψ̄ = x with x = 1/(1 + 1/(2(1/x + x/2)))
        let f = |x: f64| x - 1.0 / (1.0 + 1.0 / (2.0 * (1.0 / x + x / 2.0)));
        let (mut lo, mut hi) = (1e-6, 1.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(lo) * f(mid) <= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let x = 0.5 * (lo + hi);
        assert!((fp.psi - x).abs() < 1e-9 && (fp.psi_bar - x).abs() < 1e-9);
        assert!(fp.residual <= 1e-12);
    }

    #[test]
    fn strong_los_pins_psi_to_coefficient() {
        let h = ula_los(4, &UlaGeometry::uniform_sine(4));
        let fp = fixed_point(&h, 1e6, 2.5, 1e-10).unwrap();
        assert!(fp.psi > 0.999 * 2.5 && fp.psi <= 2.5);
        assert!(fp.psi_bar > 0.999 * 2.5 && fp.psi_bar <= 2.5);
    }

    #[test]
    fn j_is_stable_under_tighter_tolerance() {
        let h = ula_los(6, &UlaGeometry::uniform_sine(4));
        let loose = fixed_point(&h, 1.0, 1.7, 1e-8).unwrap();
        let tight = fixed_point(&h, 1.0, 1.7, 1e-12).unwrap();
        let j1 = deterministic_equivalent_j(&h, 1.0, 1.7, &loose).unwrap();
        let j2 = deterministic_equivalent_j(&h, 1.0, 1.7, &tight).unwrap();
        assert!((j1 - j2).abs() < 1e-8, "{j1} vs {j2}");
    }

    #[test]
    fn deterministic_channel_limit() {
        // K → ∞: J → log₂det(I + a H̄H̄ᴴ)
        let h = ula_los(3, &UlaGeometry::new(0.5, vec![-0.3, 0.8]).unwrap());
        let a = 2.0;
        let fp = fixed_point(&h, 1e9, a, 1e-12).unwrap();
        let j = deterministic_equivalent_j(&h, 1e9, a, &fp).unwrap();
        let w = smaller_gram(&h).scaled_plus_identity(a, 1.0);
        let want = crate::matrix::log2_det_hermitian(&w).unwrap();
        assert!((j - want).abs() < 1e-6, "{j} vs {want}");
    }

    #[test]
    fn ideal_hardware_uses_single_branch_and_dominates() {
        let h = ula_los(16, &UlaGeometry::uniform_sine(16));
        let cfg = SystemConfig::new(16, 16, 0.15, 0.15, 1.0, 10.0).unwrap();
        let ideal = rate_large_both(&cfg.ideal(), &h).unwrap();
        let los = LosGram::new(&h, 1.0).unwrap();
        let a = 10.0 / 16.0;
        let fp = solve(&los, a, DEFAULT_FP_TOL).unwrap();
        assert!((ideal.rate - j_value(&los, a, &fp).unwrap()).abs() < 1e-12);
        let real = rate_large_both(&cfg, &h).unwrap();
        assert!(real.rate < ideal.rate);
        assert_eq!(rate_large_both(&cfg.with_rho(0.0), &h).unwrap().rate, 0.0);
    }

    #[test]
    fn rate_loss_examples() {
        let r = RateResult::closed_form(5.0, Method::Mc);
        assert_eq!(rate_loss(&r, &r).unwrap(), 0.0);
        let lower = RateResult::closed_form(4.0, Method::Mc);
        assert!((rate_loss(&r, &lower).unwrap() - 0.2).abs() < 1e-15);
        let zero = RateResult::closed_form(0.0, Method::Mc);
        assert!(matches!(rate_loss(&zero, &r), Err(Error::DivisionByZero(_))));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn fixed_point_is_bounded_by_coefficient(
            nt in 1usize..7, nr in 1usize..7, k in 0.0..50.0f64, coeff in 0.01..100.0f64,
        ) {
            let h = ula_los(nt, &UlaGeometry::uniform_sine(nr));
            let fp = fixed_point(&h, k, coeff, 1e-10).unwrap();
            prop_assert!(fp.psi > 0.0 && fp.psi <= coeff * (1.0 + 1e-12));
            prop_assert!(fp.psi_bar > 0.0 && fp.psi_bar <= coeff * (1.0 + 1e-12));
            prop_assert!(fp.residual <= 1e-10);
        }

        #[test]
        fn large_nr_limit_ignores_snr_and_receive_distortion(
            nt in 1usize..16, dt in 0.01..0.9f64, dr1 in 0.0..0.9f64, dr2 in 0.0..0.9f64,
            rho1 in 0.01..1e6f64, rho2 in 0.01..1e6f64,
        ) {
            let a = SystemConfig::new(nt, 100, dt, dr1, 1.0, rho1).unwrap();
            let b = SystemConfig::new(nt, 100, dt, dr2, 3.0, rho2).unwrap();
            prop_assert_eq!(rate_large_nr(&a).unwrap().rate, rate_large_nr(&b).unwrap().rate);
        }
    }
}
