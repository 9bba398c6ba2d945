//! Short-time expansion `w_K(t) = Σ_{k≤K} α_k ∫ (t-τ)^k G(t-τ) f(τ) dτ`.

mod taylor;

pub use taylor::{eval_series, taylor_coefficients, taylor_from_ode, TaylorData};

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use thiserror::Error;

use crate::expr::NonlinExpr;
use crate::forcing::{Forcing, ForcingError};
use crate::green::{green_numeric, GreenError, GreenFn};
pub use crate::quad::QuadSpec;
use crate::quad::{self, QuadError};

/// Largest truncation order accepted.
pub const MAX_K: usize = 8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ShortTimeError {
    #[error("truncation order K = {0} exceeds the maximum {MAX_K}")]
    KTooLarge(usize),
    #[error(
        "f(0) = 0 makes the derivative-matching system singular; use the least-squares strategy"
    )]
    ForcingZeroAtOrigin,
    #[error("forcing is not smooth enough: {0}")]
    NotSmooth(String),
    #[error("N is not differentiable to order {order} at 0: {message}")]
    NotDifferentiable { order: usize, message: String },
    #[error("{strategy}: {message}")]
    FitFailed {
        strategy: &'static str,
        message: String,
    },
    #[error("convolution term k = {k} at t = {t}: {source}")]
    Quadrature { k: usize, t: f64, source: QuadError },
    #[error(transparent)]
    Green(#[from] GreenError),
    #[error(transparent)]
    Forcing(#[from] ForcingError),
}

/// `t^k`, with `0^0 = 1`.
fn powk(t: f64, k: usize) -> f64 {
    t.powi(k as i32)
}

/// `∫_{0⁻}^t (t-τ)^k G(t-τ) f(τ) dτ`.
///
/// An ideal impulse is sifted exactly to `t^k G(t)`. A mollified impulse is
/// integrated over its whole support, so mass left of 0 is included.
pub fn convolve_term(
    green: &GreenFn,
    k: usize,
    forcing: &Forcing,
    t: f64,
    spec: &QuadSpec,
) -> Result<f64, ShortTimeError> {
    let lo = match forcing {
        Forcing::Zero => return Ok(0.0),
        Forcing::Delta => return Ok(powk(t, k) * green.value(t)?),
        Forcing::Mollified { mollifier, .. } => -mollifier.eta(),
        Forcing::Smooth(_) => 0.0,
    };
    let hi = match forcing.support() {
        Some((_, b)) => t.min(b),
        None => t,
    };
    if hi <= lo {
        return Ok(0.0);
    }
    let integrand = |tau: f64| -> Result<f64, String> {
        let u = t - tau;
        let g = green.value(u).map_err(|e| e.to_string())?;
        let f = forcing.eval(tau).map_err(|e| e.to_string())?;
        Ok(powk(u, k) * g * f)
    };
    let mut value = 0.0;
    // The mollifier is split at 0 so each panel sees one smooth piece.
    let pieces: Vec<(f64, f64)> = if lo < 0.0 && hi > 0.0 {
        vec![(lo, 0.0), (0.0, hi)]
    } else {
        vec![(lo, hi)]
    };
    for (a, b) in pieces {
        value += quad::integrate(integrand, a, b, spec)
            .map_err(|source| ShortTimeError::Quadrature { k, t, source })?
            .value;
    }
    Ok(value)
}

/// How the α were obtained.
#[derive(Debug, Clone, PartialEq)]
pub enum FitMeta {
    /// Triangular Taylor system at `t = 0`.
    DerivativeMatching {
        taylor: TaylorData,
        forcing_derivs: Vec<f64>,
        relative_residual: f64,
    },
    /// Linear least squares against a reference on `samples`.
    LeastSquares {
        t_fit: f64,
        samples: Vec<f64>,
        reference: Vec<f64>,
        residual_norm: f64,
        singular_values: Vec<f64>,
    },
    /// Exact impulse collapse: `α₀ = 1`, rest zero.
    Impulse,
    /// Supplied by the caller.
    Given,
}

impl FitMeta {
    pub fn strategy(&self) -> &'static str {
        match self {
            FitMeta::DerivativeMatching { .. } => "match",
            FitMeta::LeastSquares { .. } => "lsq",
            FitMeta::Impulse => "impulse",
            FitMeta::Given => "given",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExpansionSolution {
    pub green: GreenFn,
    pub forcing: Forcing,
    pub k: usize,
    pub alphas: Vec<f64>,
    pub quad: QuadSpec,
    pub fit: FitMeta,
}

impl ExpansionSolution {
    pub fn new(
        green: GreenFn,
        forcing: Forcing,
        alphas: Vec<f64>,
        quad: QuadSpec,
    ) -> Result<Self, ShortTimeError> {
        check_k(alphas.len().saturating_sub(1))?;
        if alphas.is_empty() || alphas.iter().any(|a| !a.is_finite()) {
            return Err(ShortTimeError::FitFailed {
                strategy: "given",
                message: "alphas must be finite and non-empty".into(),
            });
        }
        Ok(ExpansionSolution {
            green,
            forcing,
            k: alphas.len() - 1,
            alphas,
            quad,
            fit: FitMeta::Given,
        })
    }

    /// `w_K(t)`.
    pub fn eval(&self, t: f64) -> Result<f64, ShortTimeError> {
        let mut sum = 0.0;
        for (k, &a) in self.alphas.iter().enumerate() {
            if a != 0.0 {
                sum += a * convolve_term(&self.green, k, &self.forcing, t, &self.quad)?;
            }
        }
        Ok(sum)
    }

    /// Leading `K' + 1` coefficients as a lower-order solution.
    pub fn truncated(&self, k: usize) -> ExpansionSolution {
        let mut s = self.clone();
        s.alphas.truncate(k + 1);
        s.k = s.alphas.len() - 1;
        s
    }
}

fn check_k(k: usize) -> Result<(), ShortTimeError> {
    if k > MAX_K {
        Err(ShortTimeError::KTooLarge(k))
    } else {
        Ok(())
    }
}

/// Taylor coefficient `[H_k * f]_n` of the convolution of `H_k(u) = u^k w₀(u)`
/// with `f`, from coefficients `a` of `w₀` and `b` of `f`.
fn conv_coeff(a: &[f64], b: &[f64], k: usize, n: usize) -> f64 {
    // ∫₀ᵗ (t-τ)^p τ^i dτ = p! i! / (p+i+1)! · t^(p+i+1)
    let mut acc = 0.0;
    for j in 1..a.len() {
        if j + k + 1 > n {
            break;
        }
        let i = n - j - k - 1;
        if i >= b.len() {
            continue;
        }
        acc += a[j] * b[i] * beta_int(j + k, i);
    }
    acc
}

fn beta_int(p: usize, i: usize) -> f64 {
    // p! i! / (p+i+1)! without overflow
    let mut r = 1.0 / (p + i + 1) as f64;
    for q in 1..=i {
        r *= q as f64 / (p + q) as f64;
    }
    r
}

/// Strategy (a): match Taylor coefficients of orders `2..=K+2` at 0.
pub fn fit_alphas_derivative_matching(
    green: &GreenFn,
    nonlin: &NonlinExpr,
    forcing: &Forcing,
    k_max: usize,
) -> Result<ExpansionSolution, ShortTimeError> {
    check_k(k_max)?;
    let order = k_max + 2;
    let fd = match forcing {
        Forcing::Smooth(_) | Forcing::Zero => forcing.derivs_at_zero(order - 1)?,
        _ => {
            return Err(ShortTimeError::NotSmooth(
                "derivative matching needs a smooth forcing; impulses use solve_impulse".into(),
            ))
        }
    };
    if fd[0] == 0.0 {
        return Err(ShortTimeError::ForcingZeroAtOrigin);
    }
    let taylor = TaylorData::compute(nonlin, &fd, green.s(), order)?;
    let a = taylor.g_coeffs();
    let c = taylor.w_coeffs();
    let b: Vec<f64> = fd
        .iter()
        .enumerate()
        .map(|(j, d)| d / (1..=j).map(|q| q as f64).product::<f64>())
        .collect();
    let dim = k_max + 1;
    let m = DMatrix::from_fn(dim, dim, |row, col| conv_coeff(&a, &b, col, row + 2));
    let mut alphas = vec![0.0; dim];
    for row in 0..dim {
        let mut rhs = c[row + 2];
        for (col, alpha) in alphas.iter().enumerate().take(row) {
            rhs -= m[(row, col)] * alpha;
        }
        let diag = m[(row, row)];
        if diag == 0.0 || !diag.is_finite() {
            return Err(ShortTimeError::FitFailed {
                strategy: "match",
                message: format!("zero pivot at order {}", row + 2),
            });
        }
        alphas[row] = rhs / diag;
    }
    let av = DVector::from_vec(alphas.clone());
    let cv = DVector::from_iterator(dim, (0..dim).map(|r| c[r + 2]));
    let resid = (&m * &av - &cv).norm();
    let relative_residual = if cv.norm() > 0.0 {
        resid / cv.norm()
    } else {
        resid
    };
    if !(relative_residual <= 1e-12) {
        return Err(ShortTimeError::FitFailed {
            strategy: "match",
            message: format!("triangular solve residual {relative_residual:e}"),
        });
    }
    Ok(ExpansionSolution {
        green: green.clone(),
        forcing: forcing.clone(),
        k: k_max,
        alphas,
        quad: QuadSpec::default(),
        fit: FitMeta::DerivativeMatching {
            taylor,
            forcing_derivs: fd,
            relative_residual,
        },
    })
}

/// Strategy (b): least squares of `Σ α_k (H_k * f)(t_i)` against
/// `reference(t_i)` on the given sample times.
pub fn fit_alphas_least_squares<R>(
    green: &GreenFn,
    forcing: &Forcing,
    k_max: usize,
    samples: &[f64],
    reference: R,
    quad: &QuadSpec,
) -> Result<ExpansionSolution, ShortTimeError>
where
    R: Fn(f64) -> Result<f64, String> + Sync,
{
    check_k(k_max)?;
    let dim = k_max + 1;
    if samples.len() < dim {
        return Err(ShortTimeError::FitFailed {
            strategy: "lsq",
            message: format!("{} samples for {dim} unknowns", samples.len()),
        });
    }
    let rows: Vec<Result<(Vec<f64>, f64), ShortTimeError>> = samples
        .par_iter()
        .map(|&t| {
            let cols = (0..dim)
                .map(|k| convolve_term(green, k, forcing, t, quad))
                .collect::<Result<Vec<_>, _>>()?;
            let r = reference(t).map_err(|message| ShortTimeError::FitFailed {
                strategy: "lsq",
                message,
            })?;
            Ok((cols, r))
        })
        .collect();
    let rows = rows.into_iter().collect::<Result<Vec<_>, _>>()?;
    let mut a = DMatrix::from_fn(samples.len(), dim, |i, k| rows[i].0[k]);
    let y = DVector::from_iterator(samples.len(), rows.iter().map(|r| r.1));
    // unit column norms for conditioning; t^k spans many decades
    let scales: Vec<f64> = (0..dim)
        .map(|k| {
            let n = a.column(k).norm();
            if n > 0.0 {
                n
            } else {
                1.0
            }
        })
        .collect();
    for (k, s) in scales.iter().enumerate() {
        a.column_mut(k).scale_mut(1.0 / s);
    }
    let svd = a.clone().svd(true, true);
    let singular_values: Vec<f64> = svd.singular_values.iter().copied().collect();
    let smax = singular_values.iter().copied().fold(0.0, f64::max);
    let eps = smax * 1e-14;
    let x = svd.solve(&y, eps).map_err(|m| ShortTimeError::FitFailed {
        strategy: "lsq",
        message: m.to_string(),
    })?;
    let alphas: Vec<f64> = x.iter().zip(&scales).map(|(v, s)| v / s).collect();
    if alphas.iter().any(|v| !v.is_finite()) {
        return Err(ShortTimeError::FitFailed {
            strategy: "lsq",
            message: "non-finite coefficients".into(),
        });
    }
    let residual_norm = (&a * &x - &y).norm();
    Ok(ExpansionSolution {
        green: green.clone(),
        forcing: forcing.clone(),
        k: k_max,
        alphas,
        quad: *quad,
        fit: FitMeta::LeastSquares {
            t_fit: samples.iter().copied().fold(0.0, f64::max),
            samples: samples.to_vec(),
            reference: rows.iter().map(|r| r.1).collect(),
            residual_norm,
            singular_values,
        },
    })
}

/// `w_K` and its individual terms on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpansionTable {
    pub t: Vec<f64>,
    pub w: Vec<f64>,
    /// `terms[k][i] = (H_k * f)(t_i)`.
    pub terms: Vec<Vec<f64>>,
}

/// Tabulates `w_K = Σ α_k (H_k * f)` on `grid`.
pub fn solve_expansion(
    green: &GreenFn,
    alphas: &[f64],
    forcing: &Forcing,
    grid: &[f64],
    quad: &QuadSpec,
) -> Result<ExpansionTable, ShortTimeError> {
    check_k(alphas.len().saturating_sub(1))?;
    let terms: Vec<Vec<f64>> = (0..alphas.len())
        .map(|k| {
            grid.par_iter()
                .map(|&t| convolve_term(green, k, forcing, t, quad))
                .collect::<Result<Vec<_>, ShortTimeError>>()
        })
        .collect::<Result<_, _>>()?;
    let w = (0..grid.len())
        .map(|i| alphas.iter().zip(&terms).map(|(a, col)| a * col[i]).sum())
        .collect();
    Ok(ExpansionTable {
        t: grid.to_vec(),
        w,
        terms,
    })
}

/// `G` on the grid for `f = δ`: the expansion collapses to `α₀ = 1`.
pub fn solve_impulse(
    nonlin: &NonlinExpr,
    s: f64,
    grid: &[f64],
) -> Result<Vec<f64>, ShortTimeError> {
    let horizon = grid
        .iter()
        .copied()
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let g = green_numeric(nonlin, s, horizon)?;
    Ok(g.sample(grid)?)
}
