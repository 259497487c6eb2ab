//! Fast end-to-end sanity checks, one PASS/FAIL line each.

use mimo_hwi::asymptotics::{rate_large_both, rate_large_nt};
use mimo_hwi::channel::{los_spectrum, ula_los, SystemConfig, UlaGeometry};
use mimo_hwi::exact::{exact_rate, high_snr_rate, DEFAULT_TOL};
use mimo_hwi::monte_carlo::mc_estimate;
use mimo_hwi::rng::RandomStream;
use mimo_hwi::specfun::{expint_en_scaled, hyp1f1, ln_gamma};

use crate::args::SelftestArgs;
use crate::CliError;

type Check = (&'static str, Box<dyn Fn(&SelftestArgs) -> Result<(bool, String), mimo_hwi::Error>>);

fn checks() -> Vec<Check> {
    vec![
        (
            "ln_gamma(1/2) = ln sqrt(pi)",
            Box::new(|_| {
                let v = ln_gamma(0.5)?;
                Ok(((v - 0.5 * std::f64::consts::PI.ln()).abs() < 1e-14, format!("{v}")))
            }),
        ),
        (
            "e*E1(1)",
            Box::new(|_| {
                let v = expint_en_scaled(1, 1.0)?;
                Ok(((v - 0.596_347_362_323_194_1).abs() < 1e-12, format!("{v}")))
            }),
        ),
        (
            "1F1(1; 2; 1) = e - 1",
            Box::new(|_| {
                let v = hyp1f1(1.0, 2.0, 1.0)?;
                Ok(((v - (std::f64::consts::E - 1.0)).abs() < 1e-13, format!("{v}")))
            }),
        ),
        (
            "exact 2x2 reference value",
            Box::new(|_| {
                let cfg = SystemConfig::new(2, 2, 0.15, 0.15, 1.0, 10.0)?;
                let s = los_spectrum(&ula_los(2, &UlaGeometry::uniform_sine(2)), 1.0)?;
                let v = exact_rate(&cfg, &s, 1e-10)?.rate;
                Ok(((v - 4.975_920_174_105_149).abs() < 1e-8, format!("{v}")))
            }),
        ),
        (
            "exact agrees with Monte Carlo",
            Box::new(|a| {
                let cfg = SystemConfig::new(3, 2, 0.1, 0.15, 2.0, 10.0)?;
                let hbar = ula_los(3, &UlaGeometry::uniform_sine(2));
                let exact = exact_rate(&cfg, &los_spectrum(&hbar, 2.0)?, DEFAULT_TOL)?.rate;
                let mc = mc_estimate(&cfg, &hbar, a.trials, RandomStream::new(a.seed, 0))?;
                let ok = (exact - mc.mean).abs() <= (3.0 * mc.std_error).max(0.02);
                Ok((ok, format!("exact {exact:.5}, mc {:.5} +- {:.5}", mc.mean, mc.std_error)))
            }),
        ),
        (
            "high-SNR ceiling reached at 60 dB",
            Box::new(|_| {
                let cfg = SystemConfig::new(2, 2, 0.15, 0.15, 1.0, 1e6)?;
                let s = los_spectrum(&ula_los(2, &UlaGeometry::uniform_sine(2)), 1.0)?;
                let r = exact_rate(&cfg, &s, DEFAULT_TOL)?.rate;
                let c = high_snr_rate(&cfg, &s, DEFAULT_TOL)?.rate;
                Ok(((r - c).abs() < 0.01, format!("rate {r:.5}, ceiling {c:.5}")))
            }),
        ),
        (
            "large-Nt limit value",
            Box::new(|_| {
                let v = rate_large_nt(&SystemConfig::new(256, 4, 0.15, 0.15, 1.0, 10.0)?)?.rate;
                Ok(((v - 11.925).abs() < 5e-4, format!("{v}")))
            }),
        ),
        (
            "deterministic equivalent agrees with Monte Carlo at N = 16",
            Box::new(|a| {
                let cfg = SystemConfig::new(16, 16, 0.15, 0.15, 1.0, 10.0)?;
                let hbar = ula_los(16, &UlaGeometry::broadside(16));
                let de = rate_large_both(&cfg, &hbar)?.rate;
                let mc = mc_estimate(&cfg, &hbar, (a.trials / 10).max(100), RandomStream::new(a.seed, 1))?;
                Ok(((de - mc.mean).abs() / mc.mean < 0.02, format!("de {de:.4}, mc {:.4}", mc.mean)))
            }),
        ),
    ]
}

pub fn run(args: &SelftestArgs) -> Result<(), CliError> {
    if args.trials < 1000 {
        return Err(CliError::Usage("selftest needs --trials >= 1000".into()));
    }
    let mut failed = 0;
    for (name, check) in checks() {
        let (ok, detail) = match check(args) {
            Ok(v) => v,
            Err(e) => (false, format!("{}: {e}", e.kind())),
        };
        if !ok {
            failed += 1;
        }
        println!("{} {name} ({detail})", if ok { "PASS" } else { "FAIL" });
    }
    if failed > 0 {
        return Err(CliError::SelftestFailed(failed));
    }
    Ok(())
}
