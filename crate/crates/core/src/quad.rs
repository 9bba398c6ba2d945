//! Composite 8-point Gauss–Legendre quadrature with panel doubling.

use thiserror::Error;

const GL8_NODES: [f64; 4] = [
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL8_WEIGHTS: [f64; 4] = [
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

/// Points per panel of the underlying rule.
pub const RULE_POINTS: usize = 8;

/// Quadrature settings: start with `initial_panels`, double until two
/// successive estimates agree to `abs_tol + rel_tol·|I|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadSpec {
    pub initial_panels: usize,
    pub max_panels: usize,
    pub abs_tol: f64,
    pub rel_tol: f64,
}

impl Default for QuadSpec {
    fn default() -> Self {
        QuadSpec {
            initial_panels: 1,
            max_panels: 1 << 12,
            abs_tol: 1e-10,
            rel_tol: 1e-10,
        }
    }
}

impl QuadSpec {
    pub fn tolerance(&self, value: f64) -> f64 {
        self.abs_tol + self.rel_tol * value.abs()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    /// Panel count of the accepted estimate.
    pub panels: usize,
    /// `|I(2n) - I(n)|` at acceptance.
    pub error_estimate: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadError {
    #[error("non-finite integrand at x = {x}")]
    NonFinite { x: f64 },
    #[error("integrand failed at x = {x}: {message}")]
    Integrand { x: f64, message: String },
    #[error("no convergence with {panels} panels (last difference {difference:e})")]
    NoConvergence { panels: usize, difference: f64 },
}

/// Single-pass composite rule on `[a, b]` with `panels` equal panels.
pub fn composite<F>(f: &mut F, a: f64, b: f64, panels: usize) -> Result<f64, QuadError>
where
    F: FnMut(f64) -> Result<f64, String>,
{
    let panels = panels.max(1);
    let width = (b - a) / panels as f64;
    let half = 0.5 * width;
    let mut total = 0.0;
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * width;
        let mut acc = 0.0;
        for (x, w) in GL8_NODES.iter().zip(GL8_WEIGHTS.iter()) {
            for &xi in &[mid - half * x, mid + half * x] {
                let y = f(xi).map_err(|message| QuadError::Integrand { x: xi, message })?;
                if !y.is_finite() {
                    return Err(QuadError::NonFinite { x: xi });
                }
                acc += w * y;
            }
        }
        total += half * acc;
    }
    Ok(total)
}

/// Panel-doubling driver around [`composite`].
pub fn integrate<F>(mut f: F, a: f64, b: f64, spec: &QuadSpec) -> Result<QuadResult, QuadError>
where
    F: FnMut(f64) -> Result<f64, String>,
{
    if a == b {
        return Ok(QuadResult {
            value: 0.0,
            panels: 0,
            error_estimate: 0.0,
        });
    }
    let mut panels = spec.initial_panels.max(1);
    let mut prev = composite(&mut f, a, b, panels)?;
    loop {
        let next_panels = panels * 2;
        let next = composite(&mut f, a, b, next_panels)?;
        let diff = (next - prev).abs();
        if diff <= spec.tolerance(next) {
            return Ok(QuadResult {
                value: next,
                panels: next_panels,
                error_estimate: diff,
            });
        }
        if next_panels >= spec.max_panels {
            return Err(QuadError::NoConvergence {
                panels: next_panels,
                difference: diff,
            });
        }
        panels = next_panels;
        prev = next;
    }
}

/// Infallible convenience wrapper for a smooth closure.
pub fn integrate_smooth<F>(
    mut f: F,
    a: f64,
    b: f64,
    spec: &QuadSpec,
) -> Result<QuadResult, QuadError>
where
    F: FnMut(f64) -> f64,
{
    integrate(|x| Ok(f(x)), a, b, spec)
}
