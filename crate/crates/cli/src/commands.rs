//! Shared evaluation plumbing and the `rate` / `sweep` commands.

use std::time::Instant;

use clap::ValueEnum;
use mimo_hwi::asymptotics::{rate_large_both, rate_large_nr, rate_large_nt};
use mimo_hwi::channel::{db_to_linear, los_spectrum, ula_los, SystemConfig, UlaGeometry};
use mimo_hwi::exact::{exact_rate, high_snr_rate};
use mimo_hwi::matrix::ComplexMatrix;
use mimo_hwi::monte_carlo::mc_rate;
use mimo_hwi::result::{Method, RateResult};
use mimo_hwi::rng::RandomStream;
use rayon::prelude::*;

use crate::args::{Command, EngineArgs, GeometryArgs, LinkArgs, OutputArgs, RateArgs, SweepArgs, SweepVar};
use crate::output::{render, write_output, ResultRow};
use crate::{figures, selftest, CliError};

/// Rows plus `#` header comments produced by one command.
#[derive(Debug, Default)]
pub struct Report {
    pub rows: Vec<ResultRow>,
    pub comments: Vec<String>,
}

pub fn run(command: Command) -> Result<(), CliError> {
    let (report, output) = match command {
        Command::Rate(args) => (cmd_rate(&args)?, args.output),
        Command::Sweep(args) => (cmd_sweep(&args)?, args.output),
        Command::Table1(args) => (figures::cmd_table1(&args)?, args.output),
        Command::Fig1(args) => (figures::cmd_fig1(&args)?, args.output),
        Command::Fig2(args) => (figures::cmd_fig2(&args)?, args.fig.output),
        Command::Fig3(args) => (figures::cmd_fig3(&args)?, args.output),
        Command::Selftest(args) => return selftest::run(&args),
    };
    emit(&report, &output)
}

fn emit(report: &Report, output: &OutputArgs) -> Result<(), CliError> {
    let bytes = render(&report.rows, &report.comments, output.format)?;
    write_output(&bytes, output.out.as_deref())?;
    Ok(())
}

/// Which angle set applies when `--angles` is absent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DefaultAngles {
    UniformSine,
    Broadside,
}

pub fn geometry(args: &GeometryArgs, nr: usize, default: DefaultAngles) -> Result<UlaGeometry, CliError> {
    let spec = args.angles.as_deref().map(str::trim);
    let angles = match spec {
        None if default == DefaultAngles::UniformSine => UlaGeometry::uniform_sine(nr).arrival_angles,
        None => UlaGeometry::broadside(nr).arrival_angles,
        Some("uniform-sine") => UlaGeometry::uniform_sine(nr).arrival_angles,
        Some("broadside") => UlaGeometry::broadside(nr).arrival_angles,
        Some(list) => {
            let parsed = list
                .split(',')
                .map(|t| t.trim().parse::<f64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| CliError::Usage(format!("--angles: {e}")))?;
            if parsed.len() != nr {
                return Err(CliError::Usage(format!(
                    "--angles lists {} angles but N_r = {nr}",
                    parsed.len()
                )));
            }
            parsed
        }
    };
    let geom = UlaGeometry::new(args.spacing, angles).map_err(|e| CliError::Usage(e.to_string()))?;
    match args.perturb_angles {
        Some(eps) => geom.perturbed(eps).map_err(|e| CliError::Usage(e.to_string())),
        None => Ok(geom),
    }
}

pub fn parse_methods(list: &str) -> Result<Vec<Method>, CliError> {
    let mut methods = Vec::new();
    for name in list.split(',').filter(|s| !s.trim().is_empty()) {
        let m: Method = name.parse().map_err(|e: mimo_hwi::Error| CliError::Usage(e.to_string()))?;
        if !methods.contains(&m) {
            methods.push(m);
        }
    }
    if methods.is_empty() {
        return Err(CliError::Usage("--method needs at least one method".into()));
    }
    Ok(methods)
}

/// One configuration to evaluate, with its LoS matrix and the SNR as given
/// on the command line.
#[derive(Debug, Clone)]
pub struct Point {
    pub config: SystemConfig,
    pub snr_db: f64,
    pub hbar: ComplexMatrix,
}

impl Point {
    pub fn new(config: SystemConfig, snr_db: f64, geometry: &UlaGeometry) -> Result<Self, CliError> {
        config.validate()?;
        if geometry.nr() != config.nr {
            return Err(CliError::Usage(format!(
                "{} arrival angles for N_r = {}",
                geometry.nr(),
                config.nr
            )));
        }
        Ok(Self {
            config,
            snr_db,
            hbar: ula_los(config.nt, geometry),
        })
    }
}

pub fn evaluate(
    point: &Point,
    method: Method,
    engine: &EngineArgs,
    stream: RandomStream,
) -> Result<RateResult, CliError> {
    let cfg = &point.config;
    let result = match method {
        Method::ExactSeries => exact_rate(cfg, &los_spectrum(&point.hbar, cfg.k_factor)?, engine.tol)?,
        Method::HighSnr => high_snr_rate(cfg, &los_spectrum(&point.hbar, cfg.k_factor)?, engine.tol)?,
        Method::Mc => mc_rate(cfg, &point.hbar, engine.trials, stream)?,
        Method::AsymNt => rate_large_nt(cfg)?,
        Method::AsymNr => rate_large_nr(cfg)?,
        Method::AsymDe => rate_large_both(cfg, &point.hbar)?,
    };
    Ok(result)
}

/// Evaluate every method at one point; the Monte Carlo stream id is the
/// point's index so results do not depend on scheduling.
pub fn evaluate_point(
    point: &Point,
    methods: &[Method],
    engine: &EngineArgs,
    stream_id: u64,
    timing: bool,
) -> Result<Vec<ResultRow>, CliError> {
    methods
        .iter()
        .map(|&m| {
            let start = Instant::now();
            let result = evaluate(point, m, engine, RandomStream::new(engine.seed, stream_id))?;
            let mut row = ResultRow::new(&point.config, point.snr_db, &result);
            if timing {
                row.wall_time_ms = Some(start.elapsed().as_secs_f64() * 1e3);
            }
            Ok(row)
        })
        .collect()
}

/// Run `f` over the points in parallel, keeping input order and reporting
/// the first failure in that order.
pub fn ordered_par_map<T, F>(items: &[T], f: F) -> Result<Vec<ResultRow>, CliError>
where
    T: Sync,
    F: Fn(usize, &T) -> Result<Vec<ResultRow>, CliError> + Sync + Send,
{
    let results: Vec<Result<Vec<ResultRow>, CliError>> =
        items.par_iter().enumerate().map(|(i, item)| f(i, item)).collect();
    let mut rows = Vec::new();
    for r in results {
        rows.extend(r?);
    }
    Ok(rows)
}

fn base_config(link: &LinkArgs) -> SystemConfig {
    SystemConfig {
        nt: link.nt,
        nr: link.nr,
        delta_t: link.delta_t,
        delta_r: link.delta_r,
        k_factor: link.k,
        rho: db_to_linear(link.snr_db),
    }
}

fn check_engine(engine: &EngineArgs) -> Result<(), CliError> {
    if !(engine.tol > 0.0) || engine.tol.is_infinite() {
        return Err(CliError::Usage(format!("--tol {} must be positive", engine.tol)));
    }
    Ok(())
}

pub fn cmd_rate(args: &RateArgs) -> Result<Report, CliError> {
    check_engine(&args.engine)?;
    let methods = parse_methods(&args.engine.method)?;
    let cfg = base_config(&args.link);
    let geom = geometry(&args.link.geometry, cfg.nr, DefaultAngles::UniformSine)?;
    let point = Point::new(cfg, args.link.snr_db, &geom)?;
    Ok(Report {
        rows: evaluate_point(&point, &methods, &args.engine, 0, args.output.timing)?,
        comments: vec![format!("command=rate seed={} trials={}", args.engine.seed, args.engine.trials)],
    })
}

fn as_count(v: f64, what: &str) -> Result<usize, CliError> {
    if v >= 1.0 && v.fract() == 0.0 && v <= 1e6 {
        Ok(v as usize)
    } else {
        Err(CliError::Usage(format!("{what} value {v} is not a positive integer")))
    }
}

pub fn cmd_sweep(args: &SweepArgs) -> Result<Report, CliError> {
    check_engine(&args.engine)?;
    let methods = parse_methods(&args.engine.method)?;
    if args.values.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(CliError::Usage("--values must be strictly increasing".into()));
    }
    let base = base_config(&args.link);
    let mut points = Vec::with_capacity(args.values.len());
    for &v in &args.values {
        let mut cfg = base;
        let mut snr_db = args.link.snr_db;
        match args.var {
            SweepVar::SnrDb => {
                snr_db = v;
                cfg.rho = db_to_linear(v);
            }
            SweepVar::K => cfg.k_factor = v,
            SweepVar::N => {
                cfg.nt = as_count(v, "N")?;
                cfg.nr = cfg.nt;
            }
            SweepVar::Nt => cfg.nt = as_count(v, "Nt")?,
            SweepVar::Nr => cfg.nr = as_count(v, "Nr")?,
        }
        let geom = geometry(&args.link.geometry, cfg.nr, DefaultAngles::UniformSine)?;
        points.push(Point::new(cfg, snr_db, &geom)?);
    }
    let rows = ordered_par_map(&points, |i, p| {
        evaluate_point(p, &methods, &args.engine, i as u64, args.output.timing)
    })?;
    Ok(Report {
        rows,
        comments: vec![format!(
            "command=sweep var={} seed={} trials={}",
            args.var.to_possible_value().map(|v| v.get_name().to_string()).unwrap_or_default(),
            args.engine.seed,
            args.engine.trials
        )],
    })
}
