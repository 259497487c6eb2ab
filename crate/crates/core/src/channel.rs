//! System model: link parameters, the ULA line-of-sight matrix, Rician
//! channel draws and the constants derived from the distortion model.

use num_complex::Complex64;
use rand_core::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{squared_singular_values, ComplexMatrix};
use crate::rng::complex_gaussian;

/// Spectrum entries closer than this fraction of max(φ) are treated as one
/// repeated value.
pub const CLUSTER_REL_GAP: f64 = 1e-5;
/// Entries below this fraction of max(φ) are treated as exact zeros.
pub const ZERO_REL: f64 = 1e-12;

/// Scalar link parameters. SNR is linear; the noise variance is fixed to 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    pub nt: usize,
    pub nr: usize,
    pub delta_t: f64,
    pub delta_r: f64,
    pub k_factor: f64,
    pub rho: f64,
}

impl SystemConfig {
    pub fn new(nt: usize, nr: usize, delta_t: f64, delta_r: f64, k_factor: f64, rho: f64) -> Result<Self> {
        let cfg = Self {
            nt,
            nr,
            delta_t,
            delta_r,
            k_factor,
            rho,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.nt == 0 || self.nr == 0 {
            return Err(Error::InvalidConfig("antenna counts must be positive".into()));
        }
        for (name, v) in [("delta_t", self.delta_t), ("delta_r", self.delta_r)] {
            if !(0.0..1.0).contains(&v) {
                return Err(Error::InvalidConfig(format!("{name} = {v} must lie in [0, 1)")));
            }
        }
        if !(self.k_factor >= 0.0) || self.k_factor.is_infinite() {
            return Err(Error::InvalidConfig(format!(
                "K = {} must be finite and nonnegative",
                self.k_factor
            )));
        }
        if !(self.rho >= 0.0) || self.rho.is_infinite() {
            return Err(Error::InvalidConfig(format!(
                "rho = {} must be finite and nonnegative",
                self.rho
            )));
        }
        Ok(())
    }

    pub fn p(&self) -> usize {
        self.nt.max(self.nr)
    }

    pub fn q(&self) -> usize {
        self.nt.min(self.nr)
    }

    /// Same link with ideal transceivers.
    pub fn ideal(&self) -> Self {
        Self {
            delta_t: 0.0,
            delta_r: 0.0,
            ..*self
        }
    }

    pub fn with_rho(&self, rho: f64) -> Self {
        Self { rho, ..*self }
    }

    pub fn with_k(&self, k_factor: f64) -> Self {
        Self { k_factor, ..*self }
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

/// Uniform linear receive array seen from the transmitter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UlaGeometry {
    pub spacing_over_wavelength: f64,
    /// One angle of arrival per receive antenna, radians in (−π/2, π/2).
    pub arrival_angles: Vec<f64>,
}

impl UlaGeometry {
    pub fn new(spacing_over_wavelength: f64, arrival_angles: Vec<f64>) -> Result<Self> {
        if !(spacing_over_wavelength > 0.0) || spacing_over_wavelength.is_infinite() {
            return Err(Error::InvalidConfig(format!(
                "element spacing {spacing_over_wavelength} must be positive"
            )));
        }
        if arrival_angles.is_empty() {
            return Err(Error::InvalidConfig("at least one arrival angle is required".into()));
        }
        let half_pi = std::f64::consts::FRAC_PI_2;
        if let Some(t) = arrival_angles.iter().find(|t| !(t.abs() < half_pi)) {
            return Err(Error::InvalidConfig(format!("arrival angle {t} outside (-pi/2, pi/2)")));
        }
        Ok(Self {
            spacing_over_wavelength,
            arrival_angles,
        })
    }

    /// θ_n = arcsin(−1 + (2n−1)/N_r), half-wavelength spacing.
    pub fn uniform_sine(nr: usize) -> Self {
        let angles = (1..=nr)
            .map(|n| (-1.0 + (2 * n - 1) as f64 / nr as f64).asin())
            .collect();
        Self {
            spacing_over_wavelength: 0.5,
            arrival_angles: angles,
        }
    }

    /// All receive antennas at θ = 0 (rank-one LoS), half-wavelength spacing.
    pub fn broadside(nr: usize) -> Self {
        Self {
            spacing_over_wavelength: 0.5,
            arrival_angles: vec![0.0; nr],
        }
    }

    /// Jitter every angle by a fixed pseudo-random offset of magnitude at
    /// most `eps`, staying inside (−π/2, π/2).
    pub fn perturbed(&self, eps: f64) -> Result<Self> {
        if !(eps >= 0.0) || eps.is_infinite() {
            return Err(Error::InvalidConfig(format!("perturbation {eps} must be nonnegative")));
        }
        let golden = 0.618_033_988_749_894_8;
        let limit = std::f64::consts::FRAC_PI_2 * (1.0 - 1e-9);
        let angles = self
            .arrival_angles
            .iter()
            .enumerate()
            .map(|(n, t)| {
                let w = 2.0 * ((n + 1) as f64 * golden).fract() - 1.0;
                (t + eps * w).clamp(-limit, limit)
            })
            .collect();
        Self::new(self.spacing_over_wavelength, angles)
    }

    pub fn nr(&self) -> usize {
        self.arrival_angles.len()
    }
}

/// LoS matrix H̄ (N_r×N_t), entry (n, m) = exp(−j·m·2π(d/λ)·sin θ_n) with
/// zero-based m; every entry has unit modulus.
pub fn ula_los(nt: usize, geometry: &UlaGeometry) -> ComplexMatrix {
    let k = std::f64::consts::TAU * geometry.spacing_over_wavelength;
    ComplexMatrix::from_fn(geometry.nr(), nt, |n, m| {
        Complex64::from_polar(1.0, -(m as f64) * k * geometry.arrival_angles[n].sin())
    })
}

/// Rician draw √(K/(K+1))·H̄ + √(1/(K+1))·H_w.
pub fn sample_rician<R: RngCore + ?Sized>(hbar: &ComplexMatrix, k: f64, rng: &mut R) -> ComplexMatrix {
    let los = (k / (k + 1.0)).sqrt();
    let scatter = (1.0 / (k + 1.0)).sqrt();
    ComplexMatrix::from_fn(hbar.rows(), hbar.cols(), |i, j| {
        hbar[(i, j)] * los + complex_gaussian(rng) * scatter
    })
}

/// Per-antenna transmit and receive distortion variances under equal power
/// allocation: (δ_t²ρ/N_t, δ_r²ρ).
pub fn distortion_sigma(config: &SystemConfig) -> (f64, f64) {
    (
        config.delta_t * config.delta_t * config.rho / config.nt as f64,
        config.delta_r * config.delta_r * config.rho,
    )
}

/// Coefficients of the two log-det terms the rate splits into, at the given
/// SNR (`a`, `b`) and in the infinite-SNR limit (`a_inf`, `b_inf`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateCoefficients {
    pub a: f64,
    pub b: f64,
    pub a_inf: f64,
    pub b_inf: f64,
}

pub fn rate_coefficients(config: &SystemConfig) -> RateCoefficients {
    let dt2 = config.delta_t * config.delta_t;
    let dr2 = config.delta_r * config.delta_r;
    let nt = config.nt as f64;
    let den = nt * (1.0 + config.rho * dr2);
    let (a_inf, b_inf) = if dr2 == 0.0 {
        (f64::INFINITY, f64::INFINITY)
    } else {
        ((1.0 + dt2) / (nt * dr2), dt2 / (nt * dr2))
    };
    RateCoefficients {
        a: config.rho * (1.0 + dt2) / den,
        b: config.rho * dt2 / den,
        a_inf,
        b_inf,
    }
}

/// A group of (numerically) equal spectrum entries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cluster {
    pub value: f64,
    pub multiplicity: usize,
}

/// Squared singular values φ of √K·H̄, ascending, with p = max(N_t, N_r)
/// and q = min(N_t, N_r).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LosSpectrum {
    pub phi: Vec<f64>,
    pub p: usize,
    pub q: usize,
}

impl LosSpectrum {
    pub fn new(mut phi: Vec<f64>, p: usize, q: usize) -> Result<Self> {
        if q == 0 || p < q {
            return Err(Error::InvalidConfig(format!("invalid dimensions p = {p}, q = {q}")));
        }
        if phi.len() != q {
            return Err(Error::DimensionMismatch {
                expected: format!("{q} spectrum entries"),
                actual: format!("{}", phi.len()),
            });
        }
        if let Some(v) = phi.iter().find(|v| !(**v >= 0.0) || v.is_infinite()) {
            return Err(Error::DegenerateSpectrum(format!("entry {v} is not a finite nonnegative value")));
        }
        phi.sort_by(f64::total_cmp);
        Ok(Self { phi, p, q })
    }

    pub fn max(&self) -> f64 {
        self.phi.last().copied().unwrap_or(0.0)
    }

    pub fn sum(&self) -> f64 {
        self.phi.iter().sum()
    }

    /// Groups of equal entries, ascending. Entries within
    /// `CLUSTER_REL_GAP·max(φ)` of a group's smallest member join it and the
    /// group is represented by its mean; a group indistinguishable from zero
    /// is pinned to exactly zero.
    pub fn clusters(&self) -> Vec<Cluster> {
        let max = self.max();
        let gap = CLUSTER_REL_GAP * max;
        let mut groups: Vec<(f64, f64, usize)> = Vec::new(); // (first, sum, count)
        for &v in &self.phi {
            match groups.last_mut() {
                Some((first, sum, count)) if v - *first <= gap => {
                    *sum += v;
                    *count += 1;
                }
                _ => groups.push((v, v, 1)),
            }
        }
        groups
            .into_iter()
            .map(|(_, sum, count)| {
                let mean = sum / count as f64;
                Cluster {
                    value: if mean <= ZERO_REL * max { 0.0 } else { mean },
                    multiplicity: count,
                }
            })
            .collect()
    }

    /// True when every entry is distinct and nonzero, i.e. the plain
    /// Vandermonde form applies without confluent rows.
    pub fn is_simple(&self) -> bool {
        let c = self.clusters();
        c.len() == self.q && c[0].value > 0.0
    }
}

/// φ = K × squared singular values of H̄.
pub fn los_spectrum(hbar: &ComplexMatrix, k: f64) -> Result<LosSpectrum> {
    if !(k >= 0.0) || k.is_infinite() {
        return Err(Error::InvalidConfig(format!("K = {k} must be finite and nonnegative")));
    }
    let sv = squared_singular_values(hbar)?;
    let p = hbar.rows().max(hbar.cols());
    let q = hbar.rows().min(hbar.cols());
    LosSpectrum::new(sv.into_iter().map(|v| k * v).collect(), p, q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RandomStream;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn config_validation() {
        assert!(SystemConfig::new(2, 2, 0.15, 0.15, 1.0, 10.0).is_ok());
        assert!(SystemConfig::new(0, 2, 0.15, 0.15, 1.0, 10.0).is_err());
        assert!(SystemConfig::new(2, 2, 1.0, 0.15, 1.0, 10.0).is_err());
        assert!(SystemConfig::new(2, 2, 0.1, -0.1, 1.0, 10.0).is_err());
        assert!(SystemConfig::new(2, 2, 0.1, 0.1, -1.0, 10.0).is_err());
        assert!(SystemConfig::new(2, 2, 0.1, 0.1, 1.0, f64::NAN).is_err());
        let c = SystemConfig::new(3, 5, 0.1, 0.1, 1.0, 10.0).unwrap();
        assert_eq!((c.p(), c.q()), (5, 3));
    }

    #[test]
    fn ula_examples() {
        let h = ula_los(1, &UlaGeometry::uniform_sine(3));
        assert!(h.data().iter().all(|z| (z - Complex64::new(1.0, 0.0)).norm() < 1e-15));
        let h = ula_los(2, &UlaGeometry::broadside(1));
        assert!(h.data().iter().all(|z| (z - Complex64::new(1.0, 0.0)).norm() < 1e-15));
        let g = UlaGeometry::new(0.5, vec![PI / 6.0]).unwrap();
        let h = ula_los(4, &g);
        for m in 0..4 {
            let want = Complex64::from_polar(1.0, -PI * m as f64 / 2.0);
            assert!((h[(0, m)] - want).norm() < 1e-14);
        }
    }

    #[test]
    fn uniform_sine_angles_are_inside_the_half_plane() {
        let g = UlaGeometry::uniform_sine(4);
        let s: Vec<f64> = g.arrival_angles.iter().map(|t| t.sin()).collect();
        let want = [-0.75, -0.25, 0.25, 0.75];
        for (a, b) in s.iter().zip(want) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!(UlaGeometry::new(0.5, vec![PI / 2.0]).is_err());
    }

    #[test]
    fn perturbation_is_bounded_and_deterministic() {
        let g = UlaGeometry::broadside(4);
        let p1 = g.perturbed(1e-3).unwrap();
        let p2 = g.perturbed(1e-3).unwrap();
        assert_eq!(p1, p2);
        for (a, b) in g.arrival_angles.iter().zip(&p1.arrival_angles) {
            assert!((a - b).abs() <= 1e-3);
        }
        let distinct: std::collections::BTreeSet<u64> =
            p1.arrival_angles.iter().map(|t| t.to_bits()).collect();
        assert_eq!(distinct.len(), 4);
    }

    #[test]
    fn coefficient_examples() {
        let c = rate_coefficients(&SystemConfig::new(3, 2, 0.0, 0.0, 1.0, 6.0).unwrap());
        assert!((c.a - 2.0).abs() < 1e-15 && c.b == 0.0 && c.a_inf.is_infinite());
        let c = rate_coefficients(&SystemConfig::new(2, 2, 0.15, 0.15, 1.0, 10.0).unwrap());
        assert!((c.a - 10.0 * 1.0225 / 2.45).abs() < 1e-12);
        assert!((c.b - 0.225 / 2.45).abs() < 1e-12);
        assert!((c.a_inf - 1.0225 / (2.0 * 0.0225)).abs() < 1e-12);
        let c = rate_coefficients(&SystemConfig::new(2, 2, 0.15, 0.15, 1.0, 0.0).unwrap());
        assert_eq!((c.a, c.b), (0.0, 0.0));
    }

    #[test]
    fn distortion_examples() {
        let cfg = SystemConfig::new(4, 2, 0.15, 0.0, 1.0, 10.0).unwrap();
        let (t, r) = distortion_sigma(&cfg);
        assert!((t - 0.05625).abs() < 1e-15 && r == 0.0);
        assert_eq!(distortion_sigma(&cfg.ideal()), (0.0, 0.0));
        assert_eq!(distortion_sigma(&cfg.with_rho(0.0)), (0.0, 0.0));
    }

    #[test]
    fn spectrum_of_generic_pair_matches_quadratic_formula() {
        let g = UlaGeometry::new(0.5, vec![-PI / 6.0, PI / 4.0]).unwrap();
        let h = ula_los(2, &g);
        let s = los_spectrum(&h, 1.0).unwrap();
        // Gram = [[2, c], [c*, 2]] with |c| = |1 + e^{jπ(sin θ1 − sin θ2)}|
        let d = PI * ((-PI / 6.0).sin() - (PI / 4.0).sin());
        let c = (2.0 + 2.0 * d.cos()).sqrt();
        assert!((s.phi[0] - (2.0 - c)).abs() < 1e-12);
        assert!((s.phi[1] - (2.0 + c)).abs() < 1e-12);
        assert!(s.is_simple());
        let s3 = los_spectrum(&h, 3.0).unwrap();
        assert!((s3.phi[1] - 3.0 * s.phi[1]).abs() < 1e-12);
    }

    #[test]
    fn repeated_and_zero_spectra_cluster() {
        // duplicated angles: rank one
        let h = ula_los(2, &UlaGeometry::broadside(2));
        let s = los_spectrum(&h, 1.0).unwrap();
        let c = s.clusters();
        assert_eq!(c.len(), 2);
        assert_eq!(c[0], Cluster { value: 0.0, multiplicity: 1 });
        assert!((c[1].value - 4.0).abs() < 1e-12);
        assert!(!s.is_simple());
        // uniform-sine square arrays are exactly orthogonal
        let h = ula_los(4, &UlaGeometry::uniform_sine(4));
        let c = los_spectrum(&h, 2.0).unwrap().clusters();
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].multiplicity, 4);
        assert!((c[0].value - 8.0).abs() < 1e-10);
        // Rayleigh
        let c = los_spectrum(&h, 0.0).unwrap().clusters();
        assert_eq!(c, vec![Cluster { value: 0.0, multiplicity: 4 }]);
    }

    #[test]
    fn rician_limits() {
        let hbar = ula_los(2, &UlaGeometry::uniform_sine(2));
        let stream = RandomStream::new(9, 0);
        let h = sample_rician(&hbar, 1e12, &mut stream.trial_rng(0));
        let dev = h
            .data()
            .iter()
            .zip(hbar.data())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(dev < 1e-5);

        let trials = 100_000;
        let mut sum = 0.0;
        let mut sum2 = 0.0;
        for t in 0..trials {
            let h = sample_rician(&hbar, 1.0, &mut stream.trial_rng(t));
            let e = h.frobenius_norm_sq();
            sum += e;
            sum2 += e * e;
        }
        let n = trials as f64;
        let mean = sum / n;
        let se = ((sum2 / n - mean * mean) / n).sqrt();
        assert!((mean - 4.0).abs() < 3.0 * se, "{mean} ± {se}");
    }

    proptest! {
        #[test]
        fn ula_entries_have_unit_modulus(
            nt in 1usize..9,
            angles in prop::collection::vec(-1.5..1.5f64, 1..9),
        ) {
            let g = UlaGeometry::new(0.5, angles.clone()).unwrap();
            let h = ula_los(nt, &g);
            prop_assert!(h.data().iter().all(|z| (z.norm() - 1.0).abs() < 1e-14));
            let s = los_spectrum(&h, 2.5).unwrap();
            let total = 2.5 * (nt * angles.len()) as f64;
            prop_assert!((s.sum() - total).abs() <= 1e-10 * total);
        }

        #[test]
        fn coefficient_gap_identity(
            nt in 1usize..64, dt in 0.0..0.9f64, dr in 0.0..0.9f64, rho in 0.0..1e4f64,
        ) {
            let cfg = SystemConfig::new(nt, 2, dt, dr, 1.0, rho).unwrap();
            let c = rate_coefficients(&cfg);
            let gap = rho / (nt as f64 * (1.0 + rho * dr * dr));
            prop_assert!((c.a - c.b - gap).abs() <= 1e-12 * gap.max(1e-300));
            if rho > 0.0 {
                prop_assert!(c.a > c.b);
            }
            if dr > 0.0 {
                prop_assert!(c.a_inf > c.b_inf);
            }
        }
    }
}
