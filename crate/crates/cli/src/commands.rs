//! Subcommand bodies. Each returns the text for stdout and an exit code.

use std::path::Path;

use nlgreen::bench::{
    bench_green, fit_alphas, fmt_float, reference_trajectory, report_csv, run_benchmark,
    BenchConfig, BenchError, Equation, GridSpec, Strategy,
};
use nlgreen::expr::{
    check_membership_seeded, parse_nonlin, MembershipStatus, DEFAULT_MEMBERSHIP_SEED,
};
use nlgreen::forcing::Forcing;
use nlgreen::green::{
    catalog_csv, catalog_match, green_numeric, liouville_green, GreenError, GreenFn,
};
use nlgreen::shorttime::{solve_expansion, QuadSpec, ShortTimeError};
use thiserror::Error;

use crate::config::RunConfig;

pub const EXIT_MEMBER: u8 = 0;
pub const EXIT_NON_MEMBER: u8 = 1;
pub const EXIT_UNKNOWN: u8 = 2;
pub const EXIT_BLOW_UP: u8 = 3;
pub const EXIT_USAGE: u8 = 64;
pub const EXIT_DATA: u8 = 65;
pub const EXIT_INTERNAL: u8 = 70;

#[derive(Debug, Error)]
#[error("{message}")]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    fn internal(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_INTERNAL,
            message: message.into(),
        }
    }
}

/// Result of a subcommand: stdout text, diagnostics for stderr, exit code.
#[derive(Debug, Default)]
pub struct Outcome {
    pub stdout: String,
    pub stderr: String,
    pub code: u8,
}

fn emit(out: &mut Outcome, text: String, path: Option<&Path>) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text)
            .map_err(|e| CliError::internal(format!("cannot write {}: {e}", p.display()))),
        None => {
            out.stdout.push_str(&text);
            Ok(())
        }
    }
}

fn require_nonlin(c: &RunConfig) -> Result<nlgreen::expr::NonlinExpr, CliError> {
    let src = c
        .nonlin
        .as_deref()
        .ok_or_else(|| CliError::usage("a nonlinearity is required (positional or --nonlin)"))?;
    parse_nonlin(src).map_err(|e| CliError::usage(format!("parse error: {e}")))
}

fn parse_forcing(c: &RunConfig) -> Result<Forcing, CliError> {
    Forcing::parse(c.forcing.as_deref().unwrap_or("delta"))
        .map_err(|e| CliError::usage(format!("forcing: {e}")))
}

fn default_grid(c: &RunConfig) -> GridSpec {
    c.grid.unwrap_or(GridSpec {
        n: 101,
        t0: 0.0,
        t1: c.t_max.unwrap_or(1.0),
    })
}

pub fn cmd_check(c: &RunConfig) -> Result<Outcome, CliError> {
    let expr = require_nonlin(c)?;
    let verdict = check_membership_seeded(
        &expr,
        c.tol.unwrap_or(1e-9),
        c.samples.unwrap_or(8),
        c.seed.unwrap_or(DEFAULT_MEMBERSHIP_SEED),
    )
    .map_err(|e| CliError::usage(e.to_string()))?;
    let mut text = format!("expression: {expr}\nverdict: {}\n", verdict.status);
    if !verdict.rule_trace.is_empty() {
        text.push_str("rule trace:\n");
        for step in &verdict.rule_trace {
            text.push_str(&format!("  {step}\n"));
        }
    }
    if let Some(w) = &verdict.witness {
        text.push_str(&format!("witness: {w}\n"));
    }
    for n in &verdict.notes {
        text.push_str(&format!("note: {n}\n"));
    }
    let code = match verdict.status {
        MembershipStatus::MemberStructural | MembershipStatus::MemberNumeric => EXIT_MEMBER,
        MembershipStatus::NonMember => EXIT_NON_MEMBER,
        MembershipStatus::Unknown => EXIT_UNKNOWN,
    };
    Ok(Outcome {
        stdout: text,
        stderr: String::new(),
        code,
    })
}

fn green_error(e: GreenError) -> CliError {
    match e {
        GreenError::NonMember(_) | GreenError::UndecidedMembership(_) => CliError {
            code: EXIT_DATA,
            message: format!("{e}; use --liouville for exp(w)"),
        },
        GreenError::ZeroScale
        | GreenError::BadHorizon
        | GreenError::LiouvilleConstraint(_)
        | GreenError::MissingEpsilon
        | GreenError::UnknownEntry(_)
        | GreenError::IncompatibleScale { .. } => CliError::usage(e.to_string()),
        GreenError::BlowUp { .. } | GreenError::Solver(_) => CliError {
            code: EXIT_BLOW_UP,
            message: e.to_string(),
        },
        other => CliError::internal(other.to_string()),
    }
}

fn table(header: &str, t: &[f64], v: &[f64]) -> String {
    let mut s = format!("{header}\n");
    for (a, b) in t.iter().zip(v) {
        s.push_str(&format!("{},{}\n", fmt_float(*a), fmt_float(*b)));
    }
    s
}

pub fn cmd_green(c: &RunConfig) -> Result<Outcome, CliError> {
    let grid = default_grid(c).points();
    let mut out = Outcome::default();
    let (g, blown): (GreenFn, Option<String>) = if c.liouville {
        (
            liouville_green(c.epsilon.unwrap_or(1.0)).map_err(green_error)?,
            None,
        )
    } else {
        let nonlin = require_nonlin(c)?;
        let horizon = grid.iter().copied().fold(0.0, f64::max);
        let horizon = if horizon > 0.0 { horizon } else { 1.0 };
        match green_numeric(&nonlin, c.s.unwrap_or(1.0), horizon) {
            Ok(g) => (g, None),
            Err(GreenError::BlowUp {
                attained,
                source,
                partial,
            }) => (
                *partial,
                Some(format!(
                    "warning: solution stopped at t = {attained}: {source}\n"
                )),
            ),
            Err(e) => return Err(green_error(e)),
        }
    };
    let reach = if blown.is_some() {
        g.horizon()
    } else {
        f64::INFINITY
    };
    let rows: Vec<f64> = grid.iter().copied().filter(|&t| t <= reach).collect();
    let values = g.sample(&rows).map_err(green_error)?;

    if !c.liouville {
        if let Some(cat) = catalog_match(&g.nonlin(), g.s()) {
            let entry = cat.catalog_entry().expect("catalog source");
            let (a, b) = entry.window();
            let mut worst: f64 = 0.0;
            let mut count = 0;
            for (&t, &v) in rows.iter().zip(&values) {
                if t <= b && (t >= a || t <= 0.0) {
                    worst = worst.max((v - cat.value(t).map_err(green_error)?).abs());
                    count += 1;
                }
            }
            out.stderr.push_str(&format!(
                "catalog cross-check ({}): max |G - G_catalog| = {worst:e} over {count} points\n",
                entry.name()
            ));
        }
    }
    emit(&mut out, table("t,G", &rows, &values), c.out.as_deref())?;
    if let Some(w) = blown {
        out.stderr.push_str(&w);
        out.code = EXIT_BLOW_UP;
    }
    Ok(out)
}

fn bench_error(e: BenchError) -> CliError {
    match e {
        BenchError::Fit {
            source: ShortTimeError::ForcingZeroAtOrigin,
            ..
        } => CliError {
            code: EXIT_DATA,
            message: "f(0) = 0 makes derivative matching singular; rerun with --strategy lsq"
                .into(),
        },
        BenchError::Fit {
            source: ShortTimeError::Green(g),
            ..
        }
        | BenchError::Green(g) => green_error(g),
        BenchError::Fit {
            source:
                ShortTimeError::KTooLarge(_)
                | ShortTimeError::NotSmooth(_)
                | ShortTimeError::NotDifferentiable { .. },
            ..
        }
        | BenchError::KTooLarge(_)
        | BenchError::BadGrid
        | BenchError::Forcing(_)
        | BenchError::Expr(_) => CliError::usage(e.to_string()),
        BenchError::Reference(_) => CliError {
            code: EXIT_BLOW_UP,
            message: e.to_string(),
        },
        other => CliError::internal(other.to_string()),
    }
}

/// Shared by `solve` and `bench`: the equation, forcing and numerics
/// from the run configuration.
pub fn bench_config(c: &RunConfig, default_strategy: Strategy) -> Result<BenchConfig, CliError> {
    let mut cfg = if c.liouville {
        let mut b = BenchConfig::liouville();
        b.equation = Equation::Liouville {
            epsilon: c.epsilon.unwrap_or(1.0),
        };
        b
    } else if c.nonlin.is_none() {
        BenchConfig::sinh_gordon()
    } else {
        BenchConfig::member(require_nonlin(c)?, Forcing::Delta, 1.0, default_strategy)
    };
    if c.forcing.is_some() {
        cfg.forcing = parse_forcing(c)?;
    }
    if let Some(s) = c.s {
        cfg.s = s;
    }
    if let Some(st) = c.strategy {
        cfg.strategy = st;
    }
    if let Some(k) = c.k {
        cfg.k_max = k;
    }
    if let Some(g) = c.grid {
        cfg.grid = g;
    } else if let Some(t) = c.t_max {
        cfg.grid.t1 = t;
    }
    if let Some(v) = c.eta {
        cfg.eta = v;
    }
    if let Some(v) = c.rtol {
        cfg.rtol = v;
    }
    if let Some(v) = c.atol {
        cfg.atol = v;
    }
    if let Some(v) = c.t_fit {
        cfg.t_fit = v;
    }
    if let Some(v) = c.samples {
        cfg.fit_samples = v;
    }
    Ok(cfg)
}

pub fn cmd_solve(c: &RunConfig) -> Result<Outcome, CliError> {
    let mut cfg = bench_config(c, Strategy::Match)?;
    if c.strategy.is_none() {
        cfg.strategy = Strategy::Match;
    }
    let k = c.k.unwrap_or(2);
    let grid = cfg.grid.points();
    let green = bench_green(&cfg).map_err(bench_error)?;
    let reference = match cfg.strategy {
        Strategy::LeastSquares => Some(
            reference_trajectory(&cfg, &green, cfg.rtol, cfg.atol)
                .map_err(bench_error)?
                .0,
        ),
        Strategy::Match => None,
    };
    let alphas = fit_alphas(&cfg, &green, reference.as_ref(), k).map_err(bench_error)?;
    let tab = solve_expansion(&green, &alphas, &cfg.forcing, &grid, &QuadSpec::default()).map_err(
        |source| {
            bench_error(BenchError::Fit {
                strategy: cfg.strategy,
                k,
                source,
            })
        },
    )?;
    let mut text = format!("# strategy: {}\n# K: {k}\n# alphas: ", cfg.strategy);
    text.push_str(
        &alphas
            .iter()
            .map(|a| fmt_float(*a))
            .collect::<Vec<_>>()
            .join(","),
    );
    text.push('\n');
    text.push_str(&table("t,wK", &tab.t, &tab.w));
    let mut out = Outcome::default();
    emit(&mut out, text, c.out.as_deref())?;
    Ok(out)
}

pub fn cmd_bench(c: &RunConfig) -> Result<Outcome, CliError> {
    let cfg = bench_config(c, Strategy::LeastSquares)?;
    let report = run_benchmark(&cfg).map_err(bench_error)?;
    let mut out = Outcome::default();
    for (k, m) in report.k_values.iter().zip(&report.medians) {
        out.stderr
            .push_str(&format!("median Er(K = {k}) = {m:.6}\n"));
    }
    let r = &report.reference;
    out.stderr.push_str(&format!(
        "reference: rtol = {:e}, atol = {:e}, steps = {}",
        r.rtol, r.atol, r.steps
    ));
    if let Some(shift) = r.median_shift {
        out.stderr
            .push_str(&format!(", median shift at 10x tighter = {shift:.2e}"));
    }
    out.stderr.push('\n');
    emit(&mut out, report_csv(&report), c.out.as_deref())?;
    Ok(out)
}

pub fn cmd_catalog(c: &RunConfig) -> Result<Outcome, CliError> {
    let eps = c.epsilon.or(if c.liouville { Some(1.0) } else { None });
    let mut out = Outcome::default();
    emit(
        &mut out,
        catalog_csv(c.s.unwrap_or(1.0), eps),
        c.out.as_deref(),
    )?;
    Ok(out)
}
