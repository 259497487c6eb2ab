//! Exact ergodic rate as a series over the non-central Wishart eigenvalue
//! density, with a closed-form tail bound and the high-SNR ceiling.
//!
//! The density is written as a determinant: one row per eigenvalue of the
//! LoS Gram matrix and one column per power of λ. When eigenvalues coincide
//! (orthogonal LoS matrices, rank-deficient LoS, Rayleigh fading) the plain
//! rows become linearly dependent, so every group of `m` equal values `x`
//! contributes the derivative rows s = 0..m−1 of the limit instead:
//!
//! ```text
//! Ω(x, s; m) = Γ(α+s) / ((β)_s s!) · ₁F₁(α+s; β+s; x),  α = p−q+m, β = p−q+1
//! ```
//!
//! with the Vandermonde normalizer adjusted to Π (x_j − x_i)^{m_i m_j}. For
//! distinct nonzero values this is exactly the textbook form. All entries
//! are handled as logarithms and each row is rescaled by its largest entry
//! before any determinant is taken.

use crate::channel::{rate_coefficients, Cluster, LosSpectrum, SystemConfig};
use crate::error::{Error, Result};
use crate::matrix::RealMatrix;
use crate::result::{Method, RateResult, SeriesDiagnostics};
use crate::specfun::{
    expint_en_scaled, expint_scaled_table, ln_gamma_unchecked, ln_factorial, ln_gamma, ln_hyp0f1, ln_hyp1f1, ln_hyp2f2, ln_pochhammer,
    AccuracyPolicy,
};

/// Largest max(N_t, N_r) the exact engine accepts.
pub const MAX_EXACT_P: usize = 8;
/// Largest Rician factor the exact engine accepts.
pub const MAX_EXACT_K: f64 = 20.0;
/// Default truncation tolerance, bits/s/Hz.
pub const DEFAULT_TOL: f64 = 1e-6;
/// Allowed deviation of G·det Ω from one before a spectrum is rejected.
pub const NORMALIZATION_TOL: f64 = 1e-8;

const LN_MAX: f64 = 709.782_712_893_384;

/// One determinant row: spectrum value `x` and derivative order `s`.
#[derive(Debug, Clone, Copy)]
struct Row {
    x: f64,
    s: usize,
}

fn rows_of(clusters: &[Cluster]) -> Vec<Row> {
    clusters
        .iter()
        .flat_map(|c| (0..c.multiplicity).map(move |s| Row { x: c.value, s }))
        .collect()
}

fn check_spectrum(spectrum: &LosSpectrum) -> Result<()> {
    if spectrum.phi.len() != spectrum.q || spectrum.q == 0 || spectrum.p < spectrum.q {
        return Err(Error::DegenerateSpectrum(format!(
            "spectrum has {} entries for p = {}, q = {}",
            spectrum.phi.len(),
            spectrum.p,
            spectrum.q
        )));
    }
    if spectrum.phi.iter().any(|v| !(*v >= 0.0) || v.is_infinite()) {
        return Err(Error::DegenerateSpectrum("entries must be finite and nonnegative".into()));
    }
    Ok(())
}

/// ln of the Ω entry for a row and column m (1-based).
fn ln_omega_entry(p: usize, q: usize, row: Row, m: usize) -> Result<f64> {
    let alpha = (p - q + m) as f64;
    let beta = (p - q + 1) as f64;
    let s = row.s as u32;
    let hyp = ln_hyp1f1(alpha + s as f64, beta + s as f64, row.x)?;
    Ok(ln_gamma(alpha + s as f64)? - ln_pochhammer(beta, s)? - ln_factorial(s) + hyp.ln_abs)
}

/// Ω in log form with per-row scale factors: entry = exp(scaled + shift[i]).
struct ScaledOmega {
    rows: Vec<Row>,
    scaled: RealMatrix,
    shift: Vec<f64>,
}

fn scaled_omega(spectrum: &LosSpectrum) -> Result<ScaledOmega> {
    check_spectrum(spectrum)?;
    let (p, q) = (spectrum.p, spectrum.q);
    let rows = rows_of(&spectrum.clusters());
    let mut ln = vec![vec![0.0; q]; q];
    for (i, row) in rows.iter().enumerate() {
        for m in 1..=q {
            ln[i][m - 1] = ln_omega_entry(p, q, *row, m)?;
        }
    }
    let shift: Vec<f64> = ln
        .iter()
        .map(|r| r.iter().copied().fold(f64::NEG_INFINITY, f64::max))
        .collect();
    let scaled = RealMatrix::from_fn(q, |i, j| (ln[i][j] - shift[i]).exp());
    Ok(ScaledOmega { rows, scaled, shift })
}

/// The q×q matrix Ω (with derivative rows for repeated spectrum values).
pub fn omega_matrix(spectrum: &LosSpectrum) -> Result<RealMatrix> {
    let om = scaled_omega(spectrum)?;
    let q = spectrum.q;
    if om.shift.iter().any(|s| *s > LN_MAX) {
        return Err(Error::Overflow("omega matrix entry"));
    }
    Ok(RealMatrix::from_fn(q, |i, j| om.scaled[(i, j)] * om.shift[i].exp()))
}

/// ln G = −Σφ − q·ln (p−q)! − Σ_{i<j} m_i m_j ln(x_j − x_i) over the groups
/// of equal spectrum values.
pub fn ln_g_constant(spectrum: &LosSpectrum) -> Result<f64> {
    check_spectrum(spectrum)?;
    let clusters = spectrum.clusters();
    let mut ln_g = -spectrum.sum() - spectrum.q as f64 * ln_factorial((spectrum.p - spectrum.q) as u32);
    for (i, ci) in clusters.iter().enumerate() {
        for cj in &clusters[i + 1..] {
            let gap = cj.value - ci.value;
            if !(gap > 0.0) {
                return Err(Error::DegenerateSpectrum("coincident spectrum values".into()));
            }
            ln_g -= (ci.multiplicity * cj.multiplicity) as f64 * gap.ln();
        }
    }
    Ok(ln_g)
}

/// Cofactors of the row-scaled Ω together with ln(G · Π row scales).
struct Determinant {
    omega: ScaledOmega,
    cofactors: RealMatrix,
    ln_prefactor: f64,
}

fn determinant(spectrum: &LosSpectrum) -> Result<Determinant> {
    let omega = scaled_omega(spectrum)?;
    let q = spectrum.q;
    let ln_prefactor = ln_g_constant(spectrum)? + omega.shift.iter().sum::<f64>();
    let mut cof = RealMatrix::zeros(q);
    for i in 0..q {
        for j in 0..q {
            cof[(i, j)] = omega.scaled.cofactor(i, j)?;
        }
    }
    let det: f64 = (0..q).map(|j| omega.scaled[(0, j)] * cof[(0, j)]).sum();
    let norm = if det > 0.0 {
        (ln_prefactor + det.ln()).exp()
    } else {
        f64::NAN
    };
    if !((norm - 1.0).abs() <= NORMALIZATION_TOL) {
        return Err(Error::DegenerateSpectrum(format!(
            "density normalization G·det(Ω) = {norm:e} deviates from 1 (spectrum {:?})",
            spectrum.phi
        )));
    }
    Ok(Determinant {
        omega,
        cofactors: cof,
        ln_prefactor,
    })
}

/// Prefix sums S_z(y) = Σ_{j=1..z} e^y E_j(y), index z (S_0 = 0). A missing
/// coefficient (zero) gives the all-zero table.
fn scaled_expint_prefix(y: Option<f64>, z_max: usize) -> Result<Vec<f64>> {
    let mut out = vec![0.0; z_max + 1];
    if let Some(y) = y {
        let table = expint_scaled_table(z_max, y)?;
        let mut acc = 0.0;
        for (j, v) in table.iter().enumerate() {
            acc += v;
            out[j + 1] = acc;
        }
    }
    Ok(out)
}

fn y_of(k: f64, coeff: f64) -> Option<f64> {
    (coeff > 0.0).then(|| (k + 1.0) / coeff)
}

/// e^{y_a}E₁(y_a) − e^{y_b}E₁(y_b), the per-index ceiling of the inner sums.
fn delta_one(k: f64, a: f64, b: f64) -> Result<f64> {
    let ea = match y_of(k, a) {
        Some(y) => expint_en_scaled(1, y)?,
        None => 0.0,
    };
    let eb = match y_of(k, b) {
        Some(y) => expint_en_scaled(1, y)?,
        None => 0.0,
    };
    Ok(ea - eb)
}

/// ln of the k-th series weight Γ(α+k)·C(k,s)·x^{k−s} / (k!(β)_k) for a row,
/// or −∞ when the term is structurally zero.
fn ln_weight(p: usize, q: usize, row: Row, m: usize, k: usize) -> f64 {
    if k < row.s || (row.x == 0.0 && k > row.s) {
        return f64::NEG_INFINITY;
    }
    let alpha = (p - q + m) as f64;
    let beta = (p - q + 1) as f64;
    let power = if k == row.s {
        0.0
    } else {
        (k - row.s) as f64 * row.x.ln()
    };
    ln_gamma_unchecked(alpha + k as f64)
        - ln_factorial((k - row.s) as u32)
        - ln_factorial(row.s as u32)
        - (ln_gamma_unchecked(beta + k as f64) - ln_gamma_unchecked(beta))
        + power
}

/// ln of the tail bound for one (row, column) entry when indices k < t are
/// kept.
fn ln_tail_bound(p: usize, q: usize, row: Row, m: usize, t: usize, ln_delta1: f64) -> Result<f64> {
    let t = t.max(row.s);
    if row.x == 0.0 && t > row.s {
        return Ok(f64::NEG_INFINITY);
    }
    let alpha = (p - q + m) as f64;
    let beta = (p - q + 1) as f64;
    let j = (t - row.s) as f64;
    let power = if t == row.s { 0.0 } else { j * row.x.ln() };
    let lead = ln_gamma(alpha + t as f64 + 1.0)? + power
        - ln_factorial(row.s as u32)
        - ln_factorial((t - row.s) as u32)
        - ln_pochhammer(beta, t as u32)?;
    let hyp = ln_hyp2f2(alpha + t as f64 + 1.0, 1.0, j + 1.0, beta + t as f64, row.x)?;
    Ok(lead + hyp.ln_abs + ln_delta1)
}

fn check_engine_limits(config: &SystemConfig, spectrum: &LosSpectrum) -> Result<()> {
    config.validate()?;
    if spectrum.p != config.p() || spectrum.q != config.q() {
        return Err(Error::DimensionMismatch {
            expected: format!("spectrum for p = {}, q = {}", config.p(), config.q()),
            actual: format!("p = {}, q = {}", spectrum.p, spectrum.q),
        });
    }
    if config.p() > MAX_EXACT_P {
        return Err(Error::Unsupported(format!(
            "max(Nt, Nr) = {} exceeds {MAX_EXACT_P}; use the large-system approximations",
            config.p()
        )));
    }
    if config.k_factor > MAX_EXACT_K {
        return Err(Error::Unsupported(format!(
            "K = {} exceeds {MAX_EXACT_K}; use Monte Carlo or the large-system approximations",
            config.k_factor
        )));
    }
    Ok(())
}

fn check_tol(tol: f64) -> Result<()> {
    if !(tol > 0.0) || tol.is_infinite() {
        return Err(Error::InvalidConfig(format!("tolerance {tol} must be positive")));
    }
    Ok(())
}

/// Tail bound, in the units of the inner series, for row `n` and column `m`
/// (both zero-based) when the first `t0` terms are kept.
pub fn truncation_bound(
    config: &SystemConfig,
    spectrum: &LosSpectrum,
    n: usize,
    m: usize,
    t0: usize,
    coeffs: &crate::channel::RateCoefficients,
) -> Result<f64> {
    check_spectrum(spectrum)?;
    let q = spectrum.q;
    if n >= q || m >= q {
        return Err(Error::DimensionMismatch {
            expected: format!("indices below {q}"),
            actual: format!("({n}, {m})"),
        });
    }
    if !(coeffs.a > coeffs.b) {
        return Err(Error::InvalidConfig("the tail bound needs a > b".into()));
    }
    let row = rows_of(&spectrum.clusters())[n];
    let d1 = delta_one(config.k_factor, coeffs.a, coeffs.b)?;
    Ok(ln_tail_bound(spectrum.p, q, row, m + 1, t0, d1.ln())?.exp())
}

/// Smallest number of kept terms for which every entry's tail bound is at
/// most `tol`.
pub fn required_terms(config: &SystemConfig, spectrum: &LosSpectrum, tol: f64) -> Result<usize> {
    check_tol(tol)?;
    check_engine_limits(config, spectrum)?;
    let c = rate_coefficients(config);
    if !(c.a > c.b) {
        return Err(Error::InvalidConfig("required_terms needs rho > 0".into()));
    }
    let (p, q) = (spectrum.p, spectrum.q);
    let rows = rows_of(&spectrum.clusters());
    let ln_d1 = delta_one(config.k_factor, c.a, c.b)?.ln();
    let z_max = p + AccuracyPolicy::default().max_terms + 2;
    let sa = scaled_expint_prefix(y_of(config.k_factor, c.a), z_max)?;
    let sb = scaled_expint_prefix(y_of(config.k_factor, c.b), z_max)?;
    let ln_tol = tol.ln();
    for t in 1..=AccuracyPolicy::default().max_terms {
        // the first discarded term is a lower bound on the tail bound
        let first_term_too_big = rows.iter().any(|row| {
            (1..=q).any(|m| {
                let z = p - q + m + t;
                ln_weight(p, q, *row, m, t) + (sa[z] - sb[z]).ln() > ln_tol
            })
        });
        if first_term_too_big {
            continue;
        }
        let mut worst = f64::NEG_INFINITY;
        for row in &rows {
            for m in 1..=q {
                worst = worst.max(ln_tail_bound(p, q, *row, m, t, ln_d1)?);
            }
        }
        if worst <= ln_tol {
            return Ok(t);
        }
    }
    Err(Error::NonConvergence {
        what: "truncation bound search",
        iterations: AccuracyPolicy::default().max_terms,
    })
}

/// E[log₂ det(I + aW)] − E[log₂ det(I + bW)] by the truncated series.
fn series_rate(
    config: &SystemConfig,
    spectrum: &LosSpectrum,
    a: f64,
    b: f64,
    tol: f64,
    method: Method,
) -> Result<RateResult> {
    let policy = AccuracyPolicy::default();
    let k = config.k_factor;
    let (p, q) = (spectrum.p, spectrum.q);
    let det = determinant(spectrum)?;
    let rows = &det.omega.rows;
    let shift = &det.omega.shift;
    let z_max = p + policy.max_terms + 2;
    let sa = scaled_expint_prefix(y_of(k, a), z_max)?;
    let sb = scaled_expint_prefix(y_of(k, b), z_max)?;
    let ln_d1 = delta_one(k, a, b)?.ln();
    let ln_scale = det.ln_prefactor - std::f64::consts::LN_2.ln();

    // g̃[i][m] accumulates the row-scaled inner series
    let mut g = vec![vec![0.0f64; q]; q];
    let mut comp = vec![vec![0.0f64; q]; q];
    let ln_tol = tol.ln();
    for t in 0..policy.max_terms {
        let mut first_tail = 0.0;
        for (i, row) in rows.iter().enumerate() {
            for m in 1..=q {
                let z = p - q + m + t;
                let delta = sa[z] - sb[z];
                let term = (ln_weight(p, q, *row, m, t) - shift[i]).exp() * delta;
                // Kahan-compensated accumulation
                let y = term - comp[i][m - 1];
                let s = g[i][m - 1] + y;
                comp[i][m - 1] = (s - g[i][m - 1]) - y;
                g[i][m - 1] = s;
                let zn = z + 1;
                let next = (ln_weight(p, q, *row, m, t + 1) - shift[i]).exp() * (sa[zn] - sb[zn]);
                first_tail += det.cofactors[(i, m - 1)].abs() * next;
            }
        }
        let kept = t + 1;
        if first_tail.ln() + ln_scale > ln_tol {
            continue;
        }
        let mut bound = 0.0;
        for (i, row) in rows.iter().enumerate() {
            for m in 1..=q {
                let lb = ln_tail_bound(p, q, *row, m, kept, ln_d1)?;
                bound += det.cofactors[(i, m - 1)].abs() * (lb - shift[i]).exp();
            }
        }
        let bound = if bound > 0.0 {
            (bound.ln() + ln_scale).exp()
        } else {
            0.0
        };
        if bound <= tol {
            let mut acc = 0.0;
            for (i, gi) in g.iter().enumerate() {
                for (m, gim) in gi.iter().enumerate() {
                    acc += det.cofactors[(i, m)] * gim;
                }
            }
            let rate = acc * ln_scale.exp();
            return Ok(RateResult {
                rate,
                method,
                uncertainty: bound,
                diagnostics: Some(SeriesDiagnostics {
                    terms_used: kept,
                    bound_at_stop: bound,
                    converged: true,
                }),
            });
        }
    }
    Err(Error::NonConvergence {
        what: "exact rate series",
        iterations: policy.max_terms,
    })
}

/// Exact ergodic rate, truncated once the tail bound is at most `tol`.
pub fn exact_rate(config: &SystemConfig, spectrum: &LosSpectrum, tol: f64) -> Result<RateResult> {
    check_tol(tol)?;
    check_engine_limits(config, spectrum)?;
    let c = rate_coefficients(config);
    if config.rho == 0.0 {
        return Ok(RateResult {
            rate: 0.0,
            method: Method::ExactSeries,
            uncertainty: 0.0,
            diagnostics: Some(SeriesDiagnostics {
                terms_used: 0,
                bound_at_stop: 0.0,
                converged: true,
            }),
        });
    }
    series_rate(config, spectrum, c.a, c.b, tol, Method::ExactSeries)
}

/// Rate with exactly `terms` series terms kept. The uncertainty is the tail
/// bound weighted by |cofactor|·G/ln 2, i.e. a guaranteed bound on the
/// distance to the untruncated rate.
pub fn truncated_rate(config: &SystemConfig, spectrum: &LosSpectrum, terms: usize) -> Result<RateResult> {
    check_engine_limits(config, spectrum)?;
    let c = rate_coefficients(config);
    if !(c.a > c.b) {
        return Err(Error::InvalidConfig("truncated_rate needs rho > 0".into()));
    }
    let k = config.k_factor;
    let (p, q) = (spectrum.p, spectrum.q);
    let det = determinant(spectrum)?;
    let (rows, shift) = (&det.omega.rows, &det.omega.shift);
    let sa = scaled_expint_prefix(y_of(k, c.a), p + terms + 2)?;
    let sb = scaled_expint_prefix(y_of(k, c.b), p + terms + 2)?;
    let ln_d1 = delta_one(k, c.a, c.b)?.ln();
    let ln_scale = det.ln_prefactor - std::f64::consts::LN_2.ln();
    let (mut acc, mut bound) = (0.0, 0.0);
    for (i, row) in rows.iter().enumerate() {
        for m in 1..=q {
            let g: f64 = (0..terms)
                .map(|t| {
                    let z = p - q + m + t;
                    (ln_weight(p, q, *row, m, t) - shift[i]).exp() * (sa[z] - sb[z])
                })
                .sum();
            let cof = det.cofactors[(i, m - 1)];
            acc += cof * g;
            bound += cof.abs() * (ln_tail_bound(p, q, *row, m, terms, ln_d1)? - shift[i]).exp();
        }
    }
    let bound = if bound > 0.0 { (bound.ln() + ln_scale).exp() } else { 0.0 };
    Ok(RateResult {
        rate: acc * ln_scale.exp(),
        method: Method::ExactSeries,
        uncertainty: bound,
        diagnostics: Some(SeriesDiagnostics {
            terms_used: terms,
            bound_at_stop: bound,
            converged: bound.is_finite(),
        }),
    })
}

/// Limit of the rate as ρ → ∞.
pub fn high_snr_rate(config: &SystemConfig, spectrum: &LosSpectrum, tol: f64) -> Result<RateResult> {
    check_tol(tol)?;
    config.validate()?;
    if config.delta_t == 0.0 && config.delta_r == 0.0 {
        return Err(Error::NoCeiling);
    }
    if config.delta_r == 0.0 {
        // every eigenvalue contributes log₂(a/b) in the limit
        let rate = config.q() as f64 * (1.0 + 1.0 / (config.delta_t * config.delta_t)).log2();
        return Ok(RateResult::closed_form(rate, Method::HighSnr));
    }
    check_engine_limits(config, spectrum)?;
    let c = rate_coefficients(config);
    series_rate(config, spectrum, c.a_inf, c.b_inf, tol, Method::HighSnr)
}

/// Marginal density of an unordered eigenvalue of W at λ > 0.
pub fn eigen_pdf(lambda: f64, spectrum: &LosSpectrum, k: f64) -> Result<f64> {
    if !(lambda > 0.0) || lambda.is_infinite() {
        return Err(Error::domain("eigen_pdf", format!("lambda = {lambda} must be positive")));
    }
    if !(k >= 0.0) || k.is_infinite() {
        return Err(Error::domain("eigen_pdf", format!("K = {k} must be finite and nonnegative")));
    }
    let det = determinant(spectrum)?;
    let (p, q) = (spectrum.p, spectrum.q);
    let beta = (p - q + 1) as f64;
    let y = (k + 1.0) * lambda;
    let ln_y = y.ln();
    let mut acc = 0.0;
    for (i, row) in det.omega.rows.iter().enumerate() {
        let s = row.s as u32;
        let hyp = ln_hyp0f1(beta + s as f64, y * row.x)?.ln_abs;
        let ln_row = (s as f64) * ln_y - ln_factorial(s) - ln_pochhammer(beta, s)? + hyp;
        for m in 1..=q {
            let alpha = (p - q + m) as f64;
            let ln_term = (k + 1.0).ln() + (alpha - 1.0) * ln_y - y + ln_row - det.omega.shift[i];
            acc += det.cofactors[(i, m - 1)] * (ln_term + det.ln_prefactor).exp();
        }
    }
    Ok((acc / q as f64).max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{los_spectrum, ula_los, UlaGeometry};
    use std::f64::consts::PI;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    fn spectrum(phi: &[f64], p: usize) -> LosSpectrum {
        LosSpectrum::new(phi.to_vec(), p, phi.len()).unwrap()
    }

    fn config(nt: usize, nr: usize, d: f64, k: f64, rho: f64) -> SystemConfig {
        SystemConfig::new(nt, nr, d, d, k, rho).unwrap()
    }

    #[test]
    fn omega_examples() {
        let om = omega_matrix(&spectrum(&[1.7], 1)).unwrap();
        assert!(rel(om[(0, 0)], 1.7f64.exp()) < 1e-14);
        let om = omega_matrix(&spectrum(&[1.0, 2.0], 2)).unwrap();
        let want = [[std::f64::consts::E, 5.436_563_656_918_09], [7.389_056_098_930_65, 22.167_168_296_791_95]];
        for i in 0..2 {
            for j in 0..2 {
                assert!(rel(om[(i, j)], want[i][j]) < 1e-13, "{i},{j}");
            }
        }
        // zero row: Γ(p−q+m)
        let om = omega_matrix(&spectrum(&[0.0, 2.0], 3)).unwrap();
        assert!(rel(om[(0, 0)], 1.0) < 1e-14 && rel(om[(0, 1)], 2.0) < 1e-14);
    }

    #[test]
    fn g_constant_examples() {
        let g = ln_g_constant(&spectrum(&[1.5], 4)).unwrap();
        assert!((g - (-1.5 - 6f64.ln())).abs() < 1e-14);
        let g = ln_g_constant(&spectrum(&[1.0, 3.0], 2)).unwrap();
        assert!((g - (-4.0 - 2f64.ln())).abs() < 1e-14);
        let shifted = ln_g_constant(&spectrum(&[1.5, 3.5], 2)).unwrap();
        assert!((shifted - (g - 2.0 * 0.5)).abs() < 1e-14);
    }

    #[test]
    fn density_is_normalized_for_all_spectrum_shapes() {
        for (phi, p) in [
            (vec![0.3, 2.0, 5.0], 3),
            (vec![4.0, 4.0], 2),
            (vec![0.0, 0.0, 0.0], 5),
            (vec![0.0, 7.0], 2),
            (vec![1.0, 1.0, 9.0], 4),
        ] {
            assert!(determinant(&spectrum(&phi, p)).is_ok(), "{phi:?}");
        }
    }

    #[test]
    fn zero_snr_gives_zero_rate() {
        let cfg = config(2, 2, 0.15, 1.0, 0.0);
        let s = los_spectrum(&ula_los(2, &UlaGeometry::uniform_sine(2)), 1.0).unwrap();
        assert_eq!(exact_rate(&cfg, &s, 1e-6).unwrap().rate, 0.0);
    }

    #[test]
    fn siso_rayleigh_matches_closed_form() {
        // E[log₂(1 + ρ|h|²)] = e^{1/ρ}E₁(1/ρ)/ln 2
        let cfg = SystemConfig::new(1, 1, 0.0, 0.0, 0.0, 10.0).unwrap();
        let s = spectrum(&[0.0], 1);
        let r = exact_rate(&cfg, &s, 1e-10).unwrap();
        let want = crate::specfun::expint_en_scaled(1, 0.1).unwrap() / std::f64::consts::LN_2;
        assert!((r.rate - want).abs() < 1e-10, "{} vs {want}", r.rate);
    }

    #[test]
    fn high_snr_special_cases() {
        let s = spectrum(&[1.0, 3.0], 2);
        let cfg = SystemConfig::new(2, 2, 0.15, 0.0, 1.0, 10.0).unwrap();
        let r = high_snr_rate(&cfg, &s, 1e-6).unwrap();
        assert!((r.rate - 2.0 * (1.0 + 1.0 / 0.0225f64).log2()).abs() < 1e-12);
        assert!((r.rate - 11.013).abs() < 1e-3);
        let ideal = SystemConfig::new(2, 2, 0.0, 0.0, 1.0, 10.0).unwrap();
        assert!(matches!(high_snr_rate(&ideal, &s, 1e-6), Err(Error::NoCeiling)));
    }

    #[test]
    fn engine_limits() {
        let cfg = config(9, 2, 0.1, 1.0, 10.0);
        let s = spectrum(&[1.0, 2.0], 9);
        assert!(matches!(exact_rate(&cfg, &s, 1e-6), Err(Error::Unsupported(_))));
        let cfg = config(2, 2, 0.1, 25.0, 10.0);
        let s = spectrum(&[10.0, 90.0], 2);
        assert!(matches!(exact_rate(&cfg, &s, 1e-6), Err(Error::Unsupported(_))));
        let cfg = config(2, 3, 0.1, 1.0, 10.0);
        assert!(matches!(exact_rate(&cfg, &s, 1e-6), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn tail_bound_decreases() {
        let cfg = config(2, 2, 0.15, 1.0, 10.0);
        let g = UlaGeometry::new(0.5, vec![-PI / 6.0, PI / 4.0]).unwrap();
        let s = los_spectrum(&ula_los(2, &g), 1.0).unwrap();
        let c = rate_coefficients(&cfg);
        for n in 0..2 {
            for m in 0..2 {
                let b: Vec<f64> = [5, 10, 20, 40]
                    .iter()
                    .map(|t| truncation_bound(&cfg, &s, n, m, *t, &c).unwrap())
                    .collect();
                assert!(b.windows(2).all(|w| w[1] < w[0]), "{b:?}");
            }
        }
    }

    #[test]
    fn looser_tolerance_needs_no_more_terms() {
        let cfg = config(2, 2, 0.15, 5.0, 1.0);
        let s = los_spectrum(&ula_los(2, &UlaGeometry::uniform_sine(2)), 5.0).unwrap();
        let tight = required_terms(&cfg, &s, 1e-6).unwrap();
        let loose = required_terms(&cfg, &s, 1e-3).unwrap();
        assert!(loose <= tight);
    }

    #[test]
    fn pdf_integrates_to_one_and_is_nonnegative() {
        let g = UlaGeometry::new(0.5, vec![-PI / 6.0, PI / 4.0]).unwrap();
        for k in [1.0, 0.0] {
            let s = los_spectrum(&ula_los(2, &g), k).unwrap();
            // composite Simpson on [0, 60]; the density decays like e^{-2λ}
            let n = 6000;
            let h = 60.0 / n as f64;
            // the density is finite at the origin when p = q
            let f = |x: f64| eigen_pdf(x.max(1e-12), &s, k).unwrap();
            let mut total = f(0.0) + f(60.0);
            for i in 1..n {
                let w = if i % 2 == 1 { 4.0 } else { 2.0 };
                let v = f(i as f64 * h);
                assert!(v >= 0.0);
                total += w * v;
            }
            total *= h / 3.0;
            assert!((total - 1.0).abs() < 1e-6, "K={k}: {total}");
        }
    }
}
