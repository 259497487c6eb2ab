//! Ergodic achievable rate of MIMO links over Rician fading with residual
//! transceiver impairments: exact series, high-SNR ceiling, large-system
//! approximations and a reproducible Monte Carlo reference.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// reference constants are kept at the digits they were computed to
#![allow(clippy::excessive_precision)]

pub mod asymptotics;
pub mod channel;
pub mod error;
pub mod exact;
pub mod matrix;
pub mod monte_carlo;
pub mod result;
pub mod rng;
pub mod specfun;

pub use error::{Error, Result};
