//! Monte Carlo estimation of the ergodic rate.
//!
//! Trials are grouped into fixed chunks of [`CHUNK`] consecutive indices.
//! Each chunk keeps its own running mean/variance, and the chunks are merged
//! in index order, so the estimate is bit-identical for any number of worker
//! threads.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{sample_rician, SystemConfig};
use crate::error::{Error, Result};
use crate::matrix::{gram, hermitian_eigenvalues, log2_det_hermitian, ComplexMatrix};
use crate::result::{Method, RateResult};
use crate::rng::RandomStream;

pub const CHUNK: usize = 1024;
pub const MIN_RATE_TRIALS: usize = 100;
pub const MIN_EIGEN_TRIALS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub trials: usize,
}

impl McEstimate {
    pub fn into_rate(self) -> RateResult {
        RateResult {
            rate: self.mean,
            method: Method::Mc,
            uncertainty: self.std_error,
            diagnostics: None,
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: usize,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    fn merge(self, other: Moments) -> Moments {
        if self.n == 0 {
            return other;
        }
        if other.n == 0 {
            return self;
        }
        let n = self.n + other.n;
        let d = other.mean - self.mean;
        Moments {
            n,
            mean: self.mean + d * other.n as f64 / n as f64,
            m2: self.m2 + other.m2 + d * d * (self.n as f64 * other.n as f64) / n as f64,
        }
    }

    fn estimate(&self) -> McEstimate {
        let var = if self.n > 1 {
            self.m2 / (self.n - 1) as f64
        } else {
            0.0
        };
        McEstimate {
            mean: self.mean,
            std_error: (var / self.n as f64).sqrt(),
            trials: self.n,
        }
    }
}

/// Per-realization rate
/// log₂det((ρ(1+δ_t²)/N_t)W + (ρδ_r²+1)I) − log₂det((ρδ_t²/N_t)W + (ρδ_r²+1)I)
/// on the smaller Gram matrix W of `h`.
pub fn instantaneous_rate(h: &ComplexMatrix, config: &SystemConfig) -> Result<f64> {
    let w = gram(h, config.nt, config.nr)?;
    rate_from_gram(&w, config)
}

fn rate_from_gram(w: &ComplexMatrix, config: &SystemConfig) -> Result<f64> {
    if config.rho == 0.0 {
        return Ok(0.0);
    }
    let nt = config.nt as f64;
    let dt2 = config.delta_t * config.delta_t;
    let noise = config.rho * config.delta_r * config.delta_r + 1.0;
    let signal = log2_det_hermitian(&w.scaled_plus_identity(config.rho * (1.0 + dt2) / nt, noise))?;
    let distortion = if dt2 == 0.0 {
        w.rows() as f64 * noise.log2()
    } else {
        log2_det_hermitian(&w.scaled_plus_identity(config.rho * dt2 / nt, noise))?
    };
    Ok(signal - distortion)
}

fn check_shared_channel(configs: &[SystemConfig], hbar: &ComplexMatrix) -> Result<()> {
    let first = configs
        .first()
        .ok_or_else(|| Error::InvalidConfig("at least one configuration is required".into()))?;
    for c in configs {
        c.validate()?;
        if c.nt != first.nt || c.nr != first.nr || c.k_factor != first.k_factor {
            return Err(Error::InvalidConfig(
                "configurations sharing channel draws must agree on Nt, Nr and K".into(),
            ));
        }
    }
    if hbar.rows() != first.nr || hbar.cols() != first.nt {
        return Err(Error::DimensionMismatch {
            expected: format!("{}x{} LoS matrix", first.nr, first.nt),
            actual: format!("{}x{}", hbar.rows(), hbar.cols()),
        });
    }
    Ok(())
}

/// Rate estimates for several configurations evaluated on the same channel
/// draws (common random numbers). All configurations must share N_t, N_r
/// and K.
pub fn mc_estimates(
    configs: &[SystemConfig],
    hbar: &ComplexMatrix,
    trials: usize,
    stream: RandomStream,
) -> Result<Vec<McEstimate>> {
    check_shared_channel(configs, hbar)?;
    if trials < MIN_RATE_TRIALS {
        return Err(Error::InvalidConfig(format!(
            "at least {MIN_RATE_TRIALS} trials are required, got {trials}"
        )));
    }
    let k = configs[0].k_factor;
    let (nt, nr) = (configs[0].nt, configs[0].nr);
    let chunks = trials.div_ceil(CHUNK);
    let partial: Vec<Result<Vec<Moments>>> = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut moments = vec![Moments::default(); configs.len()];
            for t in chunk * CHUNK..((chunk + 1) * CHUNK).min(trials) {
                let mut rng = stream.trial_rng(t as u64);
                let h = sample_rician(hbar, k, &mut rng);
                let w = gram(&h, nt, nr)?;
                for (m, c) in moments.iter_mut().zip(configs) {
                    m.push(rate_from_gram(&w, c)?);
                }
            }
            Ok(moments)
        })
        .collect();
    let mut total = vec![Moments::default(); configs.len()];
    for chunk in partial {
        for (acc, m) in total.iter_mut().zip(chunk?) {
            *acc = acc.merge(m);
        }
    }
    Ok(total.iter().map(Moments::estimate).collect())
}

/// Sample mean and standard error of the per-realization rate.
pub fn mc_estimate(
    config: &SystemConfig,
    hbar: &ComplexMatrix,
    trials: usize,
    stream: RandomStream,
) -> Result<McEstimate> {
    Ok(mc_estimates(std::slice::from_ref(config), hbar, trials, stream)?[0])
}

pub fn mc_rate(
    config: &SystemConfig,
    hbar: &ComplexMatrix,
    trials: usize,
    stream: RandomStream,
) -> Result<RateResult> {
    Ok(mc_estimate(config, hbar, trials, stream)?.into_rate())
}

/// Pooled eigenvalues of the sampled Gram matrices, trial by trial.
pub fn mc_eigen_samples(
    config: &SystemConfig,
    hbar: &ComplexMatrix,
    trials: usize,
    stream: RandomStream,
) -> Result<Vec<f64>> {
    check_shared_channel(std::slice::from_ref(config), hbar)?;
    if trials < MIN_EIGEN_TRIALS {
        return Err(Error::InvalidConfig(format!(
            "at least {MIN_EIGEN_TRIALS} trials are required, got {trials}"
        )));
    }
    let chunks = trials.div_ceil(CHUNK);
    let parts: Vec<Result<Vec<f64>>> = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut out = Vec::new();
            for t in chunk * CHUNK..((chunk + 1) * CHUNK).min(trials) {
                let mut rng = stream.trial_rng(t as u64);
                let h = sample_rician(hbar, config.k_factor, &mut rng);
                let ev = hermitian_eigenvalues(&gram(&h, config.nt, config.nr)?)?;
                out.extend(ev.into_iter().map(|v| v.max(0.0)));
            }
            Ok(out)
        })
        .collect();
    let mut pooled = Vec::with_capacity(trials * config.q());
    for p in parts {
        pooled.extend(p?);
    }
    Ok(pooled)
}
