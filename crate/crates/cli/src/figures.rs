//! Reference targets: the required-terms table and the three figure sweeps.

use std::time::Instant;

use mimo_hwi::asymptotics::{rate_large_both, rate_loss};
use mimo_hwi::channel::{db_to_linear, linear_to_db, los_spectrum, SystemConfig};
use mimo_hwi::exact::{exact_rate, high_snr_rate, required_terms, MAX_EXACT_K, MAX_EXACT_P};
use mimo_hwi::monte_carlo::{mc_estimates, McEstimate};
use mimo_hwi::result::RateResult;
use mimo_hwi::rng::RandomStream;

use crate::args::{FigArgs, Fig2Args, RhoUnits, Table1Args};
use crate::commands::{geometry, ordered_par_map, DefaultAngles, Point, Report};
use crate::output::{Quantity, ResultRow};
use crate::CliError;

/// Published rows: (SNR column, N_t, N_r, δ_t, δ_r, K, T₀).
pub const TABLE1: [(f64, usize, usize, f64, f64, f64, usize); 5] = [
    (0.0, 2, 2, 0.15, 0.15, 1.0, 11),
    (0.0, 2, 2, 0.15, 0.15, 5.0, 15),
    (10.0, 2, 2, 0.15, 0.15, 1.0, 10),
    (0.0, 4, 4, 0.15, 0.15, 1.0, 12),
    (0.0, 2, 2, 0.1, 0.1, 1.0, 12),
];

/// SNR of the array-size figures, dB.
pub const FIG_SNR_DB: f64 = 10.0;
pub const FIG_DELTA: f64 = 0.15;
pub const FIG1_K: [f64; 3] = [1.0, 5.0, 10.0];
pub const FIG3_K: [f64; 4] = [0.0, 1.0, 10.0, 100.0];
/// Published loss at N = 64 for K = 0 and K = 100.
pub const FIG3_REFERENCE: [(f64, f64); 2] = [(0.0, 0.15), (100.0, 0.305)];

fn timed<T>(timing: bool, f: impl FnOnce() -> Result<T, CliError>) -> Result<(T, Option<f64>), CliError> {
    let start = Instant::now();
    let v = f()?;
    Ok((v, timing.then(|| start.elapsed().as_secs_f64() * 1e3)))
}

fn check_fig(args: &FigArgs) -> Result<(), CliError> {
    if !(args.tol > 0.0) || args.tol.is_infinite() {
        return Err(CliError::Usage(format!("--tol {} must be positive", args.tol)));
    }
    if args.n_max == 0 {
        return Err(CliError::Usage("--n-max must be positive".into()));
    }
    Ok(())
}

pub fn cmd_table1(args: &Table1Args) -> Result<Report, CliError> {
    if !(args.tol > 0.0) || args.tol.is_infinite() {
        return Err(CliError::Usage(format!("--tol {} must be positive", args.tol)));
    }
    let rows = ordered_par_map(&TABLE1, |_, &(snr, nt, nr, dt, dr, k, published)| {
        let (rho, snr_db) = match args.rho_units {
            RhoUnits::Db => (db_to_linear(snr), snr),
            RhoUnits::Linear => (snr, linear_to_db(snr)),
        };
        let cfg = SystemConfig::new(nt, nr, dt, dr, k, rho)?;
        let point = Point::new(cfg, snr_db, &geometry(&args.geometry, nr, DefaultAngles::UniformSine)?)?;
        let ((result, terms), ms) = timed(args.output.timing, || {
            let spectrum = los_spectrum(&point.hbar, k)?;
            let result = exact_rate(&cfg, &spectrum, args.tol)?;
            // zero SNR needs no terms at all
            let terms = if rho > 0.0 { required_terms(&cfg, &spectrum, args.tol)? } else { 0 };
            Ok((result, terms))
        })?;
        let mut row = ResultRow::new(&cfg, snr_db, &result);
        row.terms_used = Some(terms);
        row.reference = Some(published as f64);
        row.wall_time_ms = ms;
        Ok(vec![row])
    })?;
    let units = match args.rho_units {
        RhoUnits::Db => "rho_units=db (published SNR column read in dB)",
        RhoUnits::Linear => "rho_units=linear (published SNR column read as linear SNR)",
    };
    Ok(Report {
        rows,
        comments: vec![
            "command=table1".into(),
            units.into(),
            format!("tol={}; terms_used = smallest T0 whose largest tail bound is <= tol; reference = published T0", args.tol),
        ],
    })
}

fn mc_row(cfg: &SystemConfig, snr_db: f64, est: McEstimate, ms: Option<f64>) -> ResultRow {
    let mut row = ResultRow::new(cfg, snr_db, &est.into_rate());
    row.wall_time_ms = ms;
    row
}

fn result_row(cfg: &SystemConfig, snr_db: f64, r: &RateResult, ms: Option<f64>) -> ResultRow {
    let mut row = ResultRow::new(cfg, snr_db, r);
    row.wall_time_ms = ms;
    row
}

pub fn cmd_fig1(args: &FigArgs) -> Result<Report, CliError> {
    check_fig(args)?;
    let trials = args.trials.unwrap_or(100_000);
    let geom = geometry(&args.geometry, 2, DefaultAngles::Broadside)?;
    let mut points = Vec::new();
    for k in FIG1_K {
        for snr_db in (-10..=40).step_by(5).map(f64::from) {
            let cfg = SystemConfig::new(2, 2, FIG_DELTA, FIG_DELTA, k, db_to_linear(snr_db))?;
            points.push(Point::new(cfg, snr_db, &geom)?);
        }
    }
    let timing = args.output.timing;
    let rows = ordered_par_map(&points, |i, p| {
        let (impaired, ideal) = (p.config, p.config.ideal());
        let spectrum = los_spectrum(&p.hbar, impaired.k_factor)?;
        let mut rows = Vec::new();
        let (mc, ms) = timed(timing, || {
            Ok(mc_estimates(&[impaired, ideal], &p.hbar, trials, RandomStream::new(args.seed, i as u64))?)
        })?;
        for (cfg, est) in [(impaired, mc[0]), (ideal, mc[1])] {
            let (exact, ems) = timed(timing, || Ok(exact_rate(&cfg, &spectrum, args.tol)?))?;
            rows.push(result_row(&cfg, p.snr_db, &exact, ems));
            rows.push(mc_row(&cfg, p.snr_db, est, ms));
        }
        let (ceiling, hms) = timed(timing, || Ok(high_snr_rate(&impaired, &spectrum, args.tol)?))?;
        rows.push(result_row(&impaired, p.snr_db, &ceiling, hms));
        Ok(rows)
    })?;
    Ok(Report {
        rows,
        comments: vec![
            format!("command=fig1 seed={} trials={trials}", args.seed),
            "exact and mc rows for impaired and ideal hardware, high_snr ceiling for impaired".into(),
        ],
    })
}

fn array_sizes(start: usize, n_max: usize) -> Vec<usize> {
    std::iter::successors(Some(start), |n| Some(n * 2)).take_while(|n| *n <= n_max).collect()
}

pub fn cmd_fig2(args: &Fig2Args) -> Result<Report, CliError> {
    let fig = &args.fig;
    check_fig(fig)?;
    if args.k_list.is_empty() {
        return Err(CliError::Usage("--K-list needs at least one value".into()));
    }
    let trials = fig.trials.unwrap_or(10_000);
    let mut points = Vec::new();
    for &k in &args.k_list {
        for n in array_sizes(1, fig.n_max) {
            let cfg = SystemConfig::new(n, n, FIG_DELTA, FIG_DELTA, k, db_to_linear(FIG_SNR_DB))?;
            points.push(Point::new(cfg, FIG_SNR_DB, &geometry(&fig.geometry, n, DefaultAngles::Broadside)?)?);
        }
    }
    let timing = fig.output.timing;
    let rows = ordered_par_map(&points, |i, p| {
        let (impaired, ideal) = (p.config, p.config.ideal());
        let (mc, ms) = timed(timing, || {
            Ok(mc_estimates(&[impaired, ideal], &p.hbar, trials, RandomStream::new(fig.seed, i as u64))?)
        })?;
        let exact_ok = impaired.p() <= MAX_EXACT_P && impaired.k_factor <= MAX_EXACT_K;
        let mut rows = Vec::new();
        for (cfg, est) in [(impaired, mc[0]), (ideal, mc[1])] {
            rows.push(mc_row(&cfg, p.snr_db, est, ms));
            let (de, dms) = timed(timing, || Ok(rate_large_both(&cfg, &p.hbar)?))?;
            rows.push(result_row(&cfg, p.snr_db, &de, dms));
            if exact_ok {
                let (exact, ems) = timed(timing, || {
                    Ok(exact_rate(&cfg, &los_spectrum(&p.hbar, cfg.k_factor)?, fig.tol)?)
                })?;
                rows.push(result_row(&cfg, p.snr_db, &exact, ems));
            }
        }
        Ok(rows)
    })?;
    Ok(Report {
        rows,
        comments: vec![
            format!("command=fig2 seed={} trials={trials} snr_db={FIG_SNR_DB}", fig.seed),
            format!("exact rows only where max(Nt, Nr) <= {MAX_EXACT_P} and K <= {MAX_EXACT_K}"),
        ],
    })
}

pub fn cmd_fig3(args: &FigArgs) -> Result<Report, CliError> {
    check_fig(args)?;
    let trials = args.trials.unwrap_or(10_000);
    let mut points = Vec::new();
    for k in FIG3_K {
        for n in array_sizes(2, args.n_max) {
            let cfg = SystemConfig::new(n, n, FIG_DELTA, FIG_DELTA, k, db_to_linear(FIG_SNR_DB))?;
            points.push(Point::new(cfg, FIG_SNR_DB, &geometry(&args.geometry, n, DefaultAngles::Broadside)?)?);
        }
    }
    let timing = args.output.timing;
    let rows = ordered_par_map(&points, |i, p| {
        let (impaired, ideal) = (p.config, p.config.ideal());
        let (mc, ms) = timed(timing, || {
            Ok(mc_estimates(&[impaired, ideal], &p.hbar, trials, RandomStream::new(args.seed, i as u64))?)
        })?;
        let (r_imp, r_ideal) = (mc[0].into_rate(), mc[1].into_rate());
        let loss = rate_loss(&r_ideal, &r_imp)?;
        // first-order propagation, ignoring the (positive) correlation of
        // the two estimates, which can only make it conservative
        let se = (mc[0].std_error.powi(2) + ((1.0 - loss) * mc[1].std_error).powi(2)).sqrt() / r_ideal.rate;
        let mut loss_row = mc_row(&impaired, p.snr_db, mc[0], ms);
        loss_row.quantity = Quantity::Loss;
        loss_row.rate = loss;
        loss_row.uncertainty = se;
        if impaired.nt == 64 {
            loss_row.reference = FIG3_REFERENCE
                .iter()
                .find(|(k, _)| *k == impaired.k_factor)
                .map(|(_, v)| *v);
        }
        Ok(vec![mc_row(&impaired, p.snr_db, mc[0], ms), mc_row(&ideal, p.snr_db, mc[1], ms), loss_row])
    })?;
    Ok(Report {
        rows,
        comments: vec![
            format!("command=fig3 seed={} trials={trials} snr_db={FIG_SNR_DB}", args.seed),
            "quantity=loss rows hold (R_ideal - R)/R_ideal from matched Monte Carlo draws".into(),
        ],
    })
}
