//! Right-hand sides `f(t)`: zero, an ideal impulse, a mollified impulse, or
//! a smooth expression in `t`.

use std::fmt;
use std::sync::OnceLock;

use thiserror::Error;

use crate::expr::{diff_nonlin, parse_in, ExprError, NonlinExpr, Symbol};
use crate::quad::{self, QuadSpec};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ForcingError {
    #[error("the ideal impulse has no pointwise values; use a mollified impulse")]
    NotPointwise,
    #[error("forcing has no Taylor expansion at 0")]
    NotSmooth,
    #[error("mollifier width must be positive and finite, got {0}")]
    BadWidth(f64),
    #[error("forcing expression must use `t`, not `w`")]
    WrongVariable,
    #[error(transparent)]
    Expr(#[from] ExprError),
}

fn bump(x: f64) -> f64 {
    if x.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - x * x)).exp()
    }
}

/// `∫_{-1}^{1} exp(-1/(1-x²)) dx`, computed once.
pub fn bump_integral() -> f64 {
    static NORM: OnceLock<f64> = OnceLock::new();
    *NORM.get_or_init(|| {
        let spec = QuadSpec {
            initial_panels: 8,
            max_panels: 1 << 14,
            abs_tol: 1e-15,
            rel_tol: 1e-14,
        };
        quad::integrate_smooth(bump, -1.0, 1.0, &spec)
            .expect("bump integral converges")
            .value
    })
}

/// Unit-mass bump `δ_η(t) = c/η · exp(-1/(1-(t/η)²))` supported on `|t| < η`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mollifier {
    eta: f64,
}

impl Mollifier {
    pub fn new(eta: f64) -> Result<Self, ForcingError> {
        if eta > 0.0 && eta.is_finite() {
            Ok(Mollifier { eta })
        } else {
            Err(ForcingError::BadWidth(eta))
        }
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn eval(&self, t: f64) -> f64 {
        bump(t / self.eta) / (self.eta * bump_integral())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Forcing {
    Zero,
    /// Ideal unit impulse at `t = 0`; only usable where sifting applies.
    Delta,
    /// `mass · δ_η(t)`.
    Mollified {
        mollifier: Mollifier,
        mass: f64,
    },
    /// Expression in `t`.
    Smooth(NonlinExpr),
}

impl Forcing {
    pub fn mollified(eta: f64, mass: f64) -> Result<Self, ForcingError> {
        Ok(Forcing::Mollified {
            mollifier: Mollifier::new(eta)?,
            mass,
        })
    }

    pub fn smooth(expr: NonlinExpr) -> Result<Self, ForcingError> {
        if expr.symbol() != Symbol::T && !expr.root().is_constant() {
            return Err(ForcingError::WrongVariable);
        }
        Ok(Forcing::Smooth(NonlinExpr::with_symbol(
            expr.into_root(),
            Symbol::T,
        )))
    }

    /// Parses `zero`, `delta`, or an expression in `t`.
    pub fn parse(source: &str) -> Result<Self, ForcingError> {
        match source.trim() {
            "zero" | "0" => Ok(Forcing::Zero),
            "delta" => Ok(Forcing::Delta),
            s => Ok(Forcing::Smooth(parse_in(s, Symbol::T)?)),
        }
    }

    pub fn is_impulse(&self) -> bool {
        matches!(self, Forcing::Delta | Forcing::Mollified { .. })
    }

    pub fn eval(&self, t: f64) -> Result<f64, ForcingError> {
        match self {
            Forcing::Zero => Ok(0.0),
            Forcing::Delta => Err(ForcingError::NotPointwise),
            Forcing::Mollified { mollifier, mass } => Ok(mass * mollifier.eval(t)),
            Forcing::Smooth(e) => Ok(e.eval(t)?),
        }
    }

    /// Times at which an integrator should land exactly.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            Forcing::Mollified { mollifier, .. } => vec![-mollifier.eta, 0.0, mollifier.eta],
            _ => Vec::new(),
        }
    }

    /// Support of `f` on the real line, or `None` when it is unbounded.
    pub fn support(&self) -> Option<(f64, f64)> {
        match self {
            Forcing::Zero => Some((0.0, 0.0)),
            Forcing::Delta => Some((0.0, 0.0)),
            Forcing::Mollified { mollifier, .. } => Some((-mollifier.eta, mollifier.eta)),
            Forcing::Smooth(_) => None,
        }
    }

    /// `f(0), f'(0), ..., f^(count-1)(0)` by symbolic differentiation.
    pub fn derivs_at_zero(&self, count: usize) -> Result<Vec<f64>, ForcingError> {
        match self {
            Forcing::Zero => Ok(vec![0.0; count]),
            Forcing::Smooth(e) => {
                let mut out = Vec::with_capacity(count);
                let mut cur = e.clone();
                for _ in 0..count {
                    out.push(cur.eval(0.0)?);
                    cur = diff_nonlin(&cur);
                }
                Ok(out)
            }
            _ => Err(ForcingError::NotSmooth),
        }
    }
}

impl fmt::Display for Forcing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Forcing::Zero => f.write_str("zero"),
            Forcing::Delta => f.write_str("delta"),
            Forcing::Mollified { mollifier, mass } => {
                write!(f, "mollified(eta={:e},mass={})", mollifier.eta, mass)
            }
            Forcing::Smooth(e) => write!(f, "{e}"),
        }
    }
}
