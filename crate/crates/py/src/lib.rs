//! Python bindings: membership checks, elliptic functions, Green's
//! functions, ODE solves, the short-time expansion and the error study.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use nlgreen::bench::{report_csv, run_benchmark, BenchConfig, GridSpec, Strategy};
use nlgreen::elliptic;
use nlgreen::expr::{check_membership_seeded, parse_nonlin, NonlinExpr, DEFAULT_MEMBERSHIP_SEED};
use nlgreen::forcing::Forcing;
use nlgreen::green::{self as gr, GreenFn};
use nlgreen::ode::{solve_ivp, CauchyProblem};
use nlgreen::shorttime::{fit_alphas_derivative_matching, solve_expansion, QuadSpec};

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn runtime_err(e: impl std::fmt::Display) -> PyErr {
    PyRuntimeError::new_err(e.to_string())
}

fn nonlin(src: &str) -> PyResult<NonlinExpr> {
    parse_nonlin(src).map_err(value_err)
}

/// Membership verdict as a dict with `status`, `rule_trace`, `witness`, `notes`.
#[pyfunction]
#[pyo3(signature = (expr, tol = 1e-9, samples = 8, seed = None))]
fn check_membership<'py>(
    py: Python<'py>,
    expr: &str,
    tol: f64,
    samples: usize,
    seed: Option<u64>,
) -> PyResult<Bound<'py, PyDict>> {
    let v = check_membership_seeded(
        &nonlin(expr)?,
        tol,
        samples,
        seed.unwrap_or(DEFAULT_MEMBERSHIP_SEED),
    )
    .map_err(value_err)?;
    let d = PyDict::new(py);
    d.set_item("status", v.status.to_string())?;
    d.set_item("member", v.status.is_member())?;
    d.set_item(
        "rule_trace",
        v.rule_trace
            .iter()
            .map(|s| s.to_string())
            .collect::<Vec<_>>(),
    )?;
    d.set_item("witness", v.witness.map(|w| w.to_string()))?;
    d.set_item("notes", v.notes)?;
    Ok(d)
}

/// `(sn, cn, dn)` for real `u` and `m`.
#[pyfunction]
fn jacobi_sn_cn_dn(u: f64, m: f64) -> PyResult<(f64, f64, f64)> {
    elliptic::jacobi_sn_cn_dn(u, m).map_err(value_err)
}

#[pyfunction]
fn jacobi_am(u: f64, m: f64) -> PyResult<f64> {
    elliptic::jacobi_am(u, m).map_err(value_err)
}

fn build_green(expr: &str, s: f64, horizon: f64, catalog: bool) -> PyResult<GreenFn> {
    let n = nonlin(expr)?;
    if catalog {
        if let Some(g) = gr::catalog_match(&n, s) {
            return Ok(g);
        }
    }
    gr::green_numeric(&n, s, horizon).map_err(runtime_err)
}

/// `G = θ·w₀` sampled on `grid`, numerically or from the catalog.
#[pyfunction]
#[pyo3(signature = (expr, s, grid, catalog = false))]
fn green(expr: &str, s: f64, grid: Vec<f64>, catalog: bool) -> PyResult<Vec<f64>> {
    let horizon = grid.iter().copied().fold(0.0, f64::max);
    let g = build_green(expr, s, if horizon > 0.0 { horizon } else { 1.0 }, catalog)?;
    g.sample(&grid).map_err(runtime_err)
}

/// Two-branch Liouville `G` on `grid`.
#[pyfunction]
fn liouville_green(epsilon: f64, grid: Vec<f64>) -> PyResult<Vec<f64>> {
    gr::liouville_green(epsilon)
        .map_err(value_err)?
        .sample(&grid)
        .map_err(runtime_err)
}

#[pyfunction]
#[pyo3(signature = (sinh_s = 1.0, epsilon = None))]
fn catalog_csv(sinh_s: f64, epsilon: Option<f64>) -> String {
    gr::catalog_csv(sinh_s, epsilon)
}

/// `w(t)` on `grid` for `w'' + N(w) = f(t)` with `w(t0) = w0`, `w'(t0) = v0`.
#[pyfunction]
#[pyo3(signature = (expr, forcing, w0, v0, t0, grid, rtol = 1e-10, atol = 1e-12))]
#[allow(clippy::too_many_arguments)]
fn solve(
    expr: &str,
    forcing: &str,
    w0: f64,
    v0: f64,
    t0: f64,
    grid: Vec<f64>,
    rtol: f64,
    atol: f64,
) -> PyResult<Vec<f64>> {
    let horizon = grid.iter().copied().fold(t0, f64::max);
    let f = Forcing::parse(forcing).map_err(value_err)?;
    let p = CauchyProblem::new(nonlin(expr)?, f, 1.0, w0, v0, t0, horizon).map_err(value_err)?;
    let traj = solve_ivp(&p, rtol, atol).map_err(runtime_err)?;
    grid.iter()
        .map(|&t| {
            traj.eval_component(t, 0)
                .ok_or_else(|| value_err(format!("t = {t} outside the solved span")))
        })
        .collect()
}

/// Short-time expansion with derivative-matched α. Returns `(alphas, w_K)`.
#[pyfunction]
fn solve_expansion_match(
    expr: &str,
    forcing: &str,
    s: f64,
    k: usize,
    grid: Vec<f64>,
) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let f = Forcing::parse(forcing).map_err(value_err)?;
    let horizon = grid.iter().copied().fold(0.0, f64::max).max(1e-3);
    let n = nonlin(expr)?;
    let g = build_green(expr, s, horizon, false)?;
    let sol = fit_alphas_derivative_matching(&g, &n, &f, k).map_err(value_err)?;
    let tab =
        solve_expansion(&g, &sol.alphas, &f, &grid, &QuadSpec::default()).map_err(runtime_err)?;
    Ok((sol.alphas, tab.w))
}

/// Error-study CSV for a preset (`sinh-gordon`, `liouville`) or a member `expr`.
#[pyfunction]
#[pyo3(signature = (preset = "sinh-gordon", expr = None, forcing = None, k_max = 4, strategy = "lsq", grid = (101, 0.0, 1.0), eta = 1e-3))]
#[allow(clippy::too_many_arguments)]
#[pyo3(name = "bench")]
fn run_bench(
    preset: &str,
    expr: Option<&str>,
    forcing: Option<&str>,
    k_max: usize,
    strategy: &str,
    grid: (usize, f64, f64),
    eta: f64,
) -> PyResult<String> {
    let strategy = Strategy::parse(strategy)
        .ok_or_else(|| value_err(format!("unknown strategy `{strategy}`")))?;
    let mut cfg = match (preset, expr) {
        (_, Some(e)) => BenchConfig::member(nonlin(e)?, Forcing::Delta, 1.0, strategy),
        ("sinh-gordon", None) => BenchConfig::sinh_gordon(),
        ("liouville", None) => BenchConfig::liouville(),
        (p, None) => return Err(value_err(format!("unknown preset `{p}`"))),
    };
    if let Some(f) = forcing {
        cfg.forcing = Forcing::parse(f).map_err(value_err)?;
    }
    cfg.strategy = strategy;
    cfg.k_max = k_max;
    cfg.grid = GridSpec {
        n: grid.0,
        t0: grid.1,
        t1: grid.2,
    };
    cfg.eta = eta;
    let report = run_benchmark(&cfg).map_err(runtime_err)?;
    Ok(report_csv(&report))
}

#[pymodule]
fn pynlgreen(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(check_membership, m)?)?;
    m.add_function(wrap_pyfunction!(jacobi_sn_cn_dn, m)?)?;
    m.add_function(wrap_pyfunction!(jacobi_am, m)?)?;
    m.add_function(wrap_pyfunction!(green, m)?)?;
    m.add_function(wrap_pyfunction!(liouville_green, m)?)?;
    m.add_function(wrap_pyfunction!(catalog_csv, m)?)?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(solve_expansion_match, m)?)?;
    m.add_function(wrap_pyfunction!(run_bench, m)?)?;
    Ok(())
}
