//! Result rows and their CSV / JSON-lines encodings.

use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::Path;

use mimo_hwi::channel::SystemConfig;
use mimo_hwi::result::RateResult;
use serde::{Deserialize, Serialize};

use crate::args::Format;

pub const SCHEMA_VERSION: u32 = 1;

/// What the `rate` column of a row holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    /// Achievable rate, bits/s/Hz.
    Rate,
    /// Relative loss against ideal hardware, a fraction.
    Loss,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub nt: usize,
    pub nr: usize,
    pub delta_t: f64,
    pub delta_r: f64,
    pub k_factor: f64,
    pub rho: f64,
    pub snr_db: f64,
    pub method: String,
    pub quantity: Quantity,
    pub rate: f64,
    pub uncertainty: f64,
    pub terms_used: Option<usize>,
    /// Published value this row is compared against, when there is one.
    pub reference: Option<f64>,
    pub wall_time_ms: Option<f64>,
}

impl ResultRow {
    pub fn new(config: &SystemConfig, snr_db: f64, result: &RateResult) -> Self {
        Self {
            nt: config.nt,
            nr: config.nr,
            delta_t: config.delta_t,
            delta_r: config.delta_r,
            k_factor: config.k_factor,
            rho: config.rho,
            snr_db,
            method: result.method.as_str().to_string(),
            quantity: Quantity::Rate,
            rate: result.rate,
            uncertainty: result.uncertainty,
            terms_used: result.diagnostics.map(|d| d.terms_used),
            reference: None,
            wall_time_ms: None,
        }
    }

    pub fn config(&self) -> SystemConfig {
        SystemConfig {
            nt: self.nt,
            nr: self.nr,
            delta_t: self.delta_t,
            delta_r: self.delta_r,
            k_factor: self.k_factor,
            rho: self.rho,
        }
    }
}

/// Render rows, preceded in CSV by `# schema=1` and any extra `# ` comment
/// lines. JSON output is one object per line with the same fields.
pub fn render(rows: &[ResultRow], comments: &[String], format: Format) -> io::Result<Vec<u8>> {
    let mut buf = Vec::new();
    match format {
        Format::Csv => {
            writeln!(buf, "# schema={SCHEMA_VERSION}")?;
            for c in comments {
                writeln!(buf, "# {c}")?;
            }
            let mut w = csv::Writer::from_writer(&mut buf);
            for row in rows {
                w.serialize(row)?;
            }
            if rows.is_empty() {
                w.write_record(HEADER)?;
            }
            w.flush()?;
        }
        Format::Json => {
            for row in rows {
                serde_json::to_writer(&mut buf, row)?;
                buf.push(b'\n');
            }
        }
    }
    Ok(buf)
}

const HEADER: [&str; 14] = [
    "nt",
    "nr",
    "delta_t",
    "delta_r",
    "k_factor",
    "rho",
    "snr_db",
    "method",
    "quantity",
    "rate",
    "uncertainty",
    "terms_used",
    "reference",
    "wall_time_ms",
];

pub fn write_output(bytes: &[u8], out: Option<&Path>) -> io::Result<()> {
    match out {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            w.write_all(bytes)?;
            w.flush()
        }
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(bytes)?;
            stdout.flush()
        }
    }
}

/// Parse CSV output (comment lines skipped) back into rows.
pub fn parse_csv<R: Read>(reader: R) -> csv::Result<Vec<ResultRow>> {
    csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(reader)
        .deserialize()
        .collect()
}

/// Parse JSON-lines output back into rows.
pub fn parse_json_lines(text: &str) -> serde_json::Result<Vec<ResultRow>> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(serde_json::from_str)
        .collect()
}
