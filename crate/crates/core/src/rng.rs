//! Reproducible random streams.
//!
//! A [`RandomStream`] is a (seed, stream id) pair. Trial `i` of a stream
//! always draws from its own ChaCha8 keystream, keyed by the pair and
//! selected by `i`, so a simulation gives the same numbers no matter how its
//! trials are distributed over workers.

use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RandomStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl RandomStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    /// A sibling stream with a different id under the same seed.
    pub fn substream(&self, stream_id: u64) -> Self {
        Self {
            seed: self.seed,
            stream_id,
        }
    }

    /// Generator for one trial.
    pub fn trial_rng(&self, trial: u64) -> ChaCha8Rng {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&self.seed.to_le_bytes());
        key[8..16].copy_from_slice(&self.stream_id.to_le_bytes());
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(trial);
        rng
    }
}

/// Uniform draw on (0, 1] with 53 random bits.
pub fn uniform_open_closed<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    ((rng.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Circularly symmetric complex Gaussian with unit variance (each real
/// component has variance 1/2), by Box–Muller.
pub fn complex_gaussian<R: RngCore + ?Sized>(rng: &mut R) -> Complex64 {
    let u1 = uniform_open_closed(rng);
    let u2 = uniform_open_closed(rng);
    let r = (-u1.ln()).sqrt();
    Complex64::from_polar(r, std::f64::consts::TAU * u2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_stream_same_draws() {
        let s = RandomStream::new(42, 7);
        let a: Vec<u64> = (0..4).map(|_| s.trial_rng(3).next_u64()).collect();
        assert!(a.windows(2).all(|w| w[0] == w[1]));
        let mut x = s.trial_rng(3);
        let mut y = s.trial_rng(3);
        for _ in 0..100 {
            assert_eq!(x.next_u64(), y.next_u64());
        }
    }

    #[test]
    fn trials_and_streams_differ() {
        let s = RandomStream::new(42, 7);
        assert_ne!(s.trial_rng(0).next_u64(), s.trial_rng(1).next_u64());
        assert_ne!(s.trial_rng(0).next_u64(), s.substream(8).trial_rng(0).next_u64());
        assert_ne!(
            s.trial_rng(0).next_u64(),
            RandomStream::new(43, 7).trial_rng(0).next_u64()
        );
    }

    #[test]
    fn uniform_range() {
        let mut rng = RandomStream::new(1, 0).trial_rng(0);
        for _ in 0..10_000 {
            let u = uniform_open_closed(&mut rng);
            assert!(u > 0.0 && u <= 1.0);
        }
    }

    #[test]
    fn gaussian_moments() {
        let mut rng = RandomStream::new(5, 0).trial_rng(0);
        let n = 200_000;
        let (mut m, mut p, mut re2) = (Complex64::new(0.0, 0.0), 0.0, 0.0);
        for _ in 0..n {
            let z = complex_gaussian(&mut rng);
            m += z;
            p += z.norm_sqr();
            re2 += z.re * z.re;
        }
        let n = n as f64;
        assert!((m / n).norm() < 0.01);
        assert!((p / n - 1.0).abs() < 0.01);
        assert!((re2 / n - 0.5).abs() < 0.01);
    }
}
