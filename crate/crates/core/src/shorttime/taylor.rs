//! Taylor coefficients at `t = 0` of `w'' + N(w) = f`.

use super::ShortTimeError;
use crate::expr::{diff_nonlin, NonlinExpr};

/// Derivative chains at 0 of the forced problem (`w(0) = w'(0) = 0`) and of
/// the homogeneous one (`w₀(0) = 0`, `w₀'(0) = s`).
#[derive(Debug, Clone, PartialEq)]
pub struct TaylorData {
    /// `w(0), w'(0), ..., w^(M)(0)`.
    pub w_derivs: Vec<f64>,
    /// `w₀(0), w₀'(0), ..., w₀^(M)(0)`.
    pub g_derivs: Vec<f64>,
    pub order: usize,
}

/// Guard against expression swell under repeated differentiation.
const MAX_DERIVATIVE_NODES: usize = 200_000;

/// `N^(j)(x0) / j!` for `j = 0, 1, ...`, computed on demand.
struct NonlinJet {
    exprs: Vec<NonlinExpr>,
    at: f64,
    values: Vec<f64>,
}

impl NonlinJet {
    fn new(nonlin: &NonlinExpr, at: f64) -> Self {
        NonlinJet {
            exprs: vec![nonlin.clone()],
            at,
            values: Vec::new(),
        }
    }

    fn coeff(&mut self, j: usize) -> Result<f64, ShortTimeError> {
        while self.values.len() <= j {
            let idx = self.values.len();
            while self.exprs.len() <= idx {
                let next = diff_nonlin(self.exprs.last().unwrap());
                if next.root().node_count() > MAX_DERIVATIVE_NODES {
                    return Err(ShortTimeError::NotDifferentiable {
                        order: idx,
                        message: "derivative expression too large".into(),
                    });
                }
                self.exprs.push(next);
            }
            let v =
                self.exprs[idx]
                    .eval(self.at)
                    .map_err(|e| ShortTimeError::NotDifferentiable {
                        order: idx,
                        message: e.to_string(),
                    })?;
            let fact: f64 = (1..=idx).map(|i| i as f64).product();
            self.values.push(v / fact);
        }
        Ok(self.values[j])
    }
}

/// Truncated product of two series up to degree `n`.
fn mul_trunc(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n + 1];
    for (i, &x) in a.iter().enumerate().take(n + 1) {
        if x == 0.0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate().take(n + 1 - i) {
            out[i + j] += x * y;
        }
    }
    out
}

/// Taylor coefficients `c_0..c_M` of `w` with `w'' = f - N(w)`,
/// `w(0) = w0`, `w'(0) = v0`, from the Taylor coefficients `b_n` of `f`.
pub fn taylor_coefficients(
    nonlin: &NonlinExpr,
    forcing_coeffs: &[f64],
    w0: f64,
    v0: f64,
    order: usize,
) -> Result<Vec<f64>, ShortTimeError> {
    let mut c = vec![w0, v0];
    c.truncate(order + 1);
    if order < 2 {
        return Ok(c);
    }
    if forcing_coeffs.len() < order - 1 {
        return Err(ShortTimeError::NotSmooth(format!(
            "forcing needs {} Taylor coefficients, got {}",
            order - 1,
            forcing_coeffs.len()
        )));
    }
    let mut jet = NonlinJet::new(nonlin, w0);
    for n in 0..=order - 2 {
        // [N∘w]_n = Σ_j N^(j)(c0)/j! · [δ^j]_n with δ = w - c0
        let mut delta = c.clone();
        delta[0] = 0.0;
        delta.truncate(n + 1);
        let mut power = vec![0.0; n + 1];
        power[0] = 1.0;
        let mut composed = jet.coeff(0)? * power[n];
        for j in 1..=n {
            power = mul_trunc(&power, &delta, n);
            if power[n] != 0.0 {
                composed += jet.coeff(j)? * power[n];
            }
        }
        let next = (forcing_coeffs[n] - composed) / ((n + 1) as f64 * (n + 2) as f64);
        c.push(next);
    }
    Ok(c)
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

/// Derivatives `w(0), ..., w^(M)(0)` from derivatives of `f` at 0
/// (`forcing_derivs[j] = f^(j)(0)`, at least `M - 1` of them).
pub fn taylor_from_ode(
    nonlin: &NonlinExpr,
    forcing_derivs: &[f64],
    w0: f64,
    v0: f64,
    order: usize,
) -> Result<Vec<f64>, ShortTimeError> {
    let b: Vec<f64> = forcing_derivs
        .iter()
        .enumerate()
        .map(|(j, d)| d / factorial(j))
        .collect();
    let c = taylor_coefficients(nonlin, &b, w0, v0, order)?;
    Ok(c.iter()
        .enumerate()
        .map(|(n, x)| x * factorial(n))
        .collect())
}

impl TaylorData {
    /// Both chains to order `order` for forcing derivatives `forcing_derivs`
    /// and impulse scale `s`.
    pub fn compute(
        nonlin: &NonlinExpr,
        forcing_derivs: &[f64],
        s: f64,
        order: usize,
    ) -> Result<Self, ShortTimeError> {
        let zeros = vec![0.0; order.saturating_sub(1)];
        Ok(TaylorData {
            w_derivs: taylor_from_ode(nonlin, forcing_derivs, 0.0, 0.0, order)?,
            g_derivs: taylor_from_ode(nonlin, &zeros, 0.0, s, order)?,
            order,
        })
    }

    pub fn w_coeffs(&self) -> Vec<f64> {
        self.w_derivs
            .iter()
            .enumerate()
            .map(|(n, d)| d / factorial(n))
            .collect()
    }

    pub fn g_coeffs(&self) -> Vec<f64> {
        self.g_derivs
            .iter()
            .enumerate()
            .map(|(n, d)| d / factorial(n))
            .collect()
    }
}

/// Evaluates `Σ c_n t^n` by Horner's rule.
pub fn eval_series(coeffs: &[f64], t: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * t + c)
}
