//! Error study `Er(K; t) = ln|w_K(t) - w_ref(t)|` against a reference
//! integration, with CSV output.

use std::fmt;
use std::io::{self, Write};
use std::path::Path;

use rayon::prelude::*;
use thiserror::Error;

use crate::expr::{parse_nonlin, ExprError, NonlinExpr};
use crate::forcing::{Forcing, ForcingError};
use crate::green::{green_numeric, liouville_green, GreenError, GreenFn};
use crate::ode::{solve_ivp_with, CauchyProblem, SolverError, SolverOptions, Trajectory};
use crate::shorttime::{
    fit_alphas_derivative_matching, fit_alphas_least_squares, solve_expansion, QuadSpec,
    ShortTimeError, MAX_K,
};

pub const CSV_HEADER: &str = "nonlin,forcing,strategy,K,t,wK,wref,Er,flag";

/// Differences below this are flagged `exact` instead of taking a log.
pub const EXACT_THRESHOLD: f64 = 1e-300;

/// Largest relative change in any median Er allowed when the reference
/// tolerance is tightened tenfold.
pub const DOMINANCE_TOL: f64 = 0.01;

/// Tightest reference `rtol` the dominance check will try.
pub const RTOL_FLOOR: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Strategy {
    /// Derivative matching at `t = 0`.
    Match,
    /// Least squares against the reference on `[0, t_fit]`.
    LeastSquares,
}

impl Strategy {
    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::Match => "match",
            Strategy::LeastSquares => "lsq",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "match" | "a" => Some(Strategy::Match),
            "lsq" | "b" => Some(Strategy::LeastSquares),
            _ => None,
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// `n` uniform points on `[t0, t1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub n: usize,
    pub t0: f64,
    pub t1: f64,
}

impl GridSpec {
    pub fn points(&self) -> Vec<f64> {
        if self.n == 1 {
            return vec![self.t0];
        }
        (0..self.n)
            .map(|i| {
                if i + 1 == self.n {
                    self.t1
                } else {
                    self.t0 + (self.t1 - self.t0) * i as f64 / (self.n - 1) as f64
                }
            })
            .collect()
    }
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            n: 101,
            t0: 0.0,
            t1: 1.0,
        }
    }
}

/// Which equation is benchmarked.
#[derive(Debug, Clone, PartialEq)]
pub enum Equation {
    /// A class member, with `G` from the homogeneous solve.
    Member(NonlinExpr),
    /// `N = exp w` with the two-branch entry for the given `ε`.
    Liouville { epsilon: f64 },
}

impl Equation {
    pub fn nonlin(&self) -> NonlinExpr {
        match self {
            Equation::Member(n) => n.clone(),
            Equation::Liouville { .. } => parse_nonlin("exp(w)").expect("static source"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub equation: Equation,
    pub forcing: Forcing,
    pub s: f64,
    pub k_min: usize,
    pub k_max: usize,
    pub grid: GridSpec,
    pub strategy: Strategy,
    /// Mollifier width of the reference when `forcing` is an ideal impulse.
    pub eta: f64,
    pub rtol: f64,
    pub atol: f64,
    /// Right end of the least-squares window.
    pub t_fit: f64,
    /// Number of least-squares sample times.
    pub fit_samples: usize,
    pub quad: QuadSpec,
}

impl BenchConfig {
    fn base(equation: Equation) -> Self {
        BenchConfig {
            equation,
            forcing: Forcing::Delta,
            s: 1.0,
            k_min: 1,
            k_max: 4,
            grid: GridSpec::default(),
            strategy: Strategy::LeastSquares,
            eta: 1e-3,
            rtol: 1e-10,
            atol: 1e-12,
            t_fit: 0.1,
            fit_samples: 200,
            quad: QuadSpec::default(),
        }
    }

    /// `w'' + sinh w = δ`, `s = 1`, least squares.
    pub fn sinh_gordon() -> Self {
        BenchConfig::base(Equation::Member(
            parse_nonlin("sinh(w)").expect("static source"),
        ))
    }

    /// `w'' + exp w = δ` with `ε = 1`, least squares.
    pub fn liouville() -> Self {
        BenchConfig::base(Equation::Liouville { epsilon: 1.0 })
    }

    /// A member equation with defaults filled in.
    pub fn member(nonlin: NonlinExpr, forcing: Forcing, s: f64, strategy: Strategy) -> Self {
        BenchConfig {
            forcing,
            s,
            strategy,
            ..BenchConfig::base(Equation::Member(nonlin))
        }
    }

    pub fn k_values(&self) -> Vec<usize> {
        (self.k_min..=self.k_max).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BenchError {
    #[error("K-max = {0} exceeds {MAX_K}")]
    KTooLarge(usize),
    #[error("grid must lie in [0, 1] with at least one point")]
    BadGrid,
    #[error("reference solver failed: {0}")]
    Reference(SolverError),
    #[error("fit failed with strategy {strategy} at K = {k}: {source}")]
    Fit {
        strategy: Strategy,
        k: usize,
        source: ShortTimeError,
    },
    #[error(transparent)]
    Green(#[from] GreenError),
    #[error(transparent)]
    Forcing(#[from] ForcingError),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error("i/o: {0}")]
    Io(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorFlag {
    Ok,
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorRow {
    pub k: usize,
    pub t: f64,
    pub wk: f64,
    pub wref: f64,
    /// `ln|w_K - w_ref|`; `None` when flagged exact.
    pub er: Option<f64>,
    pub flag: ErrorFlag,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceMeta {
    pub rtol: f64,
    pub atol: f64,
    pub eta: Option<f64>,
    pub t_start: f64,
    pub steps: usize,
    /// Largest relative median change against a tenfold tighter
    /// reference. `None` when no check was run.
    pub median_shift: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    pub nonlin: String,
    pub forcing: String,
    pub strategy: Strategy,
    pub k_values: Vec<usize>,
    pub grid: Vec<f64>,
    pub rows: Vec<ErrorRow>,
    pub alphas: Vec<Vec<f64>>,
    pub reference: ReferenceMeta,
    /// Median of non-exact `Er` per `K`, in `k_values` order.
    pub medians: Vec<f64>,
}

impl ErrorReport {
    pub fn median(&self, k: usize) -> Option<f64> {
        self.k_values
            .iter()
            .position(|&x| x == k)
            .map(|i| self.medians[i])
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Green's function used on the expansion side.
pub fn bench_green(config: &BenchConfig) -> Result<GreenFn, BenchError> {
    Ok(match &config.equation {
        Equation::Member(n) => green_numeric(n, config.s, config.grid.t1.max(config.t_fit))?,
        Equation::Liouville { epsilon } => liouville_green(*epsilon)?,
    })
}

/// Reference trajectory. An ideal impulse of mass `s` is mollified with
/// width `eta`; the integration starts at `-eta`, at rest for members and on
/// the left branch for Liouville.
pub fn reference_trajectory(
    config: &BenchConfig,
    green: &GreenFn,
    rtol: f64,
    atol: f64,
) -> Result<(Trajectory, ReferenceMeta), BenchError> {
    let nonlin = config.equation.nonlin();
    let (forcing, eta) = match &config.forcing {
        Forcing::Delta => (Forcing::mollified(config.eta, config.s)?, Some(config.eta)),
        Forcing::Mollified { mollifier, .. } => (config.forcing.clone(), Some(mollifier.eta())),
        other => (other.clone(), None),
    };
    let t_start = match eta {
        Some(e) => -e,
        None => 0.0,
    };
    let (w0, v0) = match (&config.equation, eta) {
        (Equation::Liouville { .. }, Some(_)) => {
            (green.value(t_start)?, green.derivative(t_start)?)
        }
        _ => (0.0, 0.0),
    };
    let t_end = config.grid.t1.max(config.t_fit);
    let problem = CauchyProblem::new(nonlin, forcing, config.s, w0, v0, t_start, t_end)
        .map_err(BenchError::Reference)?;
    let mut opts = SolverOptions::with_tolerances(rtol, atol);
    opts.stops = config.grid.points();
    let traj = solve_ivp_with(&problem, &opts).map_err(BenchError::Reference)?;
    let meta = ReferenceMeta {
        rtol,
        atol,
        eta,
        t_start,
        steps: traj.len() - 1,
        median_shift: None,
    };
    Ok((traj, meta))
}

/// Least-squares sample times: uniform on `(lo, t_fit]`, with `lo = 2η`
/// for impulses so the mollifier support is skipped.
pub fn fit_samples(config: &BenchConfig) -> Vec<f64> {
    let lo = if config.forcing.is_impulse() {
        2.0 * config.eta
    } else {
        0.0
    };
    let n = config.fit_samples.max(1);
    (1..=n)
        .map(|i| lo + (config.t_fit - lo) * i as f64 / n as f64)
        .collect()
}

/// `α_0..α_k` by the configured strategy. An ideal impulse under
/// derivative matching collapses to `α₀ = 1`.
pub fn fit_alphas(
    config: &BenchConfig,
    green: &GreenFn,
    reference: Option<&Trajectory>,
    k: usize,
) -> Result<Vec<f64>, BenchError> {
    let wrap = |source| BenchError::Fit {
        strategy: config.strategy,
        k,
        source,
    };
    match config.strategy {
        Strategy::Match if config.forcing == Forcing::Delta => {
            let mut a = vec![0.0; k + 1];
            a[0] = 1.0;
            Ok(a)
        }
        Strategy::Match => {
            fit_alphas_derivative_matching(green, &config.equation.nonlin(), &config.forcing, k)
                .map(|s| s.alphas)
                .map_err(wrap)
        }
        Strategy::LeastSquares => {
            let reference = reference.ok_or_else(|| {
                wrap(ShortTimeError::FitFailed {
                    strategy: "lsq",
                    message: "no reference trajectory".into(),
                })
            })?;
            fit_alphas_least_squares(
                green,
                &config.forcing,
                k,
                &fit_samples(config),
                |t| {
                    reference
                        .eval_component(t, 0)
                        .ok_or_else(|| format!("t = {t} outside reference"))
                },
                &config.quad,
            )
            .map(|s| s.alphas)
            .map_err(wrap)
        }
    }
}

/// Runs the study for every `K` in `k_min..=k_max`.
/// Runs the study starting from the configured reference tolerances and
/// tightens them tenfold until a further tenfold tightening moves every
/// median by less than [`DOMINANCE_TOL`], or [`RTOL_FLOOR`] is reached.
/// The returned report is the looser run of the last pair compared.
pub fn run_benchmark(config: &BenchConfig) -> Result<ErrorReport, BenchError> {
    // rounded so each rung is the decimal the user would write
    let tighten =
        |v: f64, n: i32| -> f64 { format!("{:.12e}", v / 10f64.powi(n)).parse().unwrap() };
    let at = |n: i32| {
        run_benchmark_with_reference(config, tighten(config.rtol, n), tighten(config.atol, n))
    };
    let mut n = 0;
    let mut current = at(0)?;
    loop {
        let tighter = at(n + 1)?;
        let shift = median_shift(&current.medians, &tighter.medians);
        if shift < DOMINANCE_TOL || config.rtol / 10f64.powi(n + 2) < RTOL_FLOOR * (1.0 - 1e-9) {
            current.reference.median_shift = Some(shift);
            return Ok(current);
        }
        current = tighter;
        n += 1;
    }
}

fn median_shift(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .filter(|(x, y)| x.is_finite() && y.is_finite())
        .map(|(x, y)| ((x - y) / y).abs())
        .fold(0.0, f64::max)
}

/// One run at fixed reference tolerances, with no dominance check.
pub fn run_benchmark_with_reference(
    config: &BenchConfig,
    rtol: f64,
    atol: f64,
) -> Result<ErrorReport, BenchError> {
    if config.k_max > MAX_K {
        return Err(BenchError::KTooLarge(config.k_max));
    }
    let grid = config.grid.points();
    if grid.is_empty() || grid.iter().any(|&t| !(0.0..=1.0).contains(&t)) {
        return Err(BenchError::BadGrid);
    }
    let green = bench_green(config)?;
    let (traj, reference) = reference_trajectory(config, &green, rtol, atol)?;
    let wref: Vec<f64> = grid
        .iter()
        .map(|&t| {
            traj.eval_component(t, 0)
                .expect("grid inside reference span")
        })
        .collect();
    let ks = config.k_values();

    // (alphas, w_K on the grid) per K
    type PerK = Result<(Vec<f64>, Vec<f64>), BenchError>;
    let per_k: Vec<PerK> = ks
        .par_iter()
        .map(|&k| {
            let alphas = fit_alphas(config, &green, Some(&traj), k)?;
            let table = solve_expansion(&green, &alphas, &config.forcing, &grid, &config.quad)
                .map_err(|source| BenchError::Fit {
                    strategy: config.strategy,
                    k,
                    source,
                })?;
            Ok((alphas, table.w))
        })
        .collect();

    let mut rows = Vec::with_capacity(ks.len() * grid.len());
    let mut alphas = Vec::with_capacity(ks.len());
    let mut medians = Vec::with_capacity(ks.len());
    for (&k, res) in ks.iter().zip(per_k) {
        let (a, wk) = res?;
        let mut finite = Vec::with_capacity(grid.len());
        for ((&t, &w), &r) in grid.iter().zip(&wk).zip(&wref) {
            let diff = (w - r).abs();
            let (er, flag) = if diff < EXACT_THRESHOLD {
                (None, ErrorFlag::Exact)
            } else {
                (Some(diff.ln()), ErrorFlag::Ok)
            };
            finite.extend(er);
            rows.push(ErrorRow {
                k,
                t,
                wk: w,
                wref: r,
                er,
                flag,
            });
        }
        alphas.push(a);
        medians.push(median(finite));
    }

    Ok(ErrorReport {
        nonlin: match &config.equation {
            Equation::Member(n) => n.to_string(),
            Equation::Liouville { .. } => "exp(w)".into(),
        },
        forcing: config.forcing.to_string(),
        strategy: config.strategy,
        k_values: ks,
        grid,
        rows,
        alphas,
        reference,
        medians,
    })
}

fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// 17 significant digits.
pub fn fmt_float(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{x:.16e}")
    }
}

/// Writes the CSV (LF line endings).
pub fn write_csv<W: Write>(report: &ErrorReport, mut out: W) -> io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    let nonlin = csv_field(&report.nonlin);
    let forcing = csv_field(&report.forcing);
    for r in &report.rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            nonlin,
            forcing,
            report.strategy,
            r.k,
            fmt_float(r.t),
            fmt_float(r.wk),
            fmt_float(r.wref),
            r.er.map(fmt_float).unwrap_or_default(),
            match r.flag {
                ErrorFlag::Ok => "ok",
                ErrorFlag::Exact => "exact",
            }
        )?;
    }
    Ok(())
}

pub fn report_csv(report: &ErrorReport) -> String {
    let mut buf = Vec::new();
    write_csv(report, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("ascii output")
}

/// Writes the CSV to `path`.
pub fn emit_report(report: &ErrorReport, path: &Path) -> Result<(), BenchError> {
    std::fs::write(path, report_csv(report))
        .map_err(|e| BenchError::Io(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_endpoints_exact() {
        let g = GridSpec::default().points();
        assert_eq!(g.len(), 101);
        assert_eq!(g[0], 0.0);
        assert_eq!(g[100], 1.0);
    }

    #[test]
    fn empty_k_range_gives_header_only() {
        let mut c = BenchConfig::sinh_gordon();
        c.k_min = 1;
        c.k_max = 0;
        let r = run_benchmark(&c).unwrap();
        assert_eq!(report_csv(&r), format!("{CSV_HEADER}\n"));
    }

    #[test]
    fn shape_two_by_three() {
        let mut c = BenchConfig::sinh_gordon();
        c.k_min = 1;
        c.k_max = 2;
        c.grid = GridSpec {
            n: 3,
            t0: 0.0,
            t1: 1.0,
        };
        let r = run_benchmark(&c).unwrap();
        assert_eq!(report_csv(&r).lines().count(), 7);
    }

    #[test]
    fn exact_points_are_flagged() {
        let row = |d: f64| {
            if d < EXACT_THRESHOLD {
                ErrorFlag::Exact
            } else {
                ErrorFlag::Ok
            }
        };
        assert_eq!(row(0.0), ErrorFlag::Exact);
        assert_eq!(fmt_float(f64::NEG_INFINITY), "-inf");
        assert_eq!(fmt_float(0.1), "1.0000000000000001e-1");
    }

    #[test]
    fn rejects_large_k() {
        let mut c = BenchConfig::sinh_gordon();
        c.k_max = 9;
        assert_eq!(run_benchmark(&c), Err(BenchError::KTooLarge(9)));
    }
}
