use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// How a rate value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ExactSeries,
    HighSnr,
    Mc,
    AsymNt,
    AsymNr,
    AsymDe,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::ExactSeries,
        Method::HighSnr,
        Method::Mc,
        Method::AsymNt,
        Method::AsymNr,
        Method::AsymDe,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Method::ExactSeries => "exact_series",
            Method::HighSnr => "high_snr",
            Method::Mc => "mc",
            Method::AsymNt => "asym_nt",
            Method::AsymNr => "asym_nr",
            Method::AsymDe => "asym_de",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    /// Accepts the canonical tags and the short CLI spellings
    /// (`exact`, `highsnr`, `asym-nt`, ...).
    fn from_str(s: &str) -> Result<Self, Error> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "exact" | "exact_series" => Ok(Method::ExactSeries),
            "highsnr" | "high_snr" => Ok(Method::HighSnr),
            "mc" => Ok(Method::Mc),
            "asym_nt" => Ok(Method::AsymNt),
            "asym_nr" => Ok(Method::AsymNr),
            "asym_de" => Ok(Method::AsymDe),
            other => Err(Error::InvalidConfig(format!("unknown method '{other}'"))),
        }
    }
}

/// Truncation record of a series evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesDiagnostics {
    /// Number of leading terms kept (indices 0..terms_used).
    pub terms_used: usize,
    /// Upper bound on the discarded tail, bits/s/Hz.
    pub bound_at_stop: f64,
    pub converged: bool,
}

/// A rate in bits/s/Hz with its provenance and error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateResult {
    pub rate: f64,
    pub method: Method,
    /// Series tail bound or Monte Carlo standard error; zero for closed forms.
    pub uncertainty: f64,
    pub diagnostics: Option<SeriesDiagnostics>,
}

impl RateResult {
    pub fn closed_form(rate: f64, method: Method) -> Self {
        Self {
            rate,
            method,
            uncertainty: 0.0,
            diagnostics: None,
        }
    }
}
