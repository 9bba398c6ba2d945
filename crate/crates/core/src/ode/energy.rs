//! Conserved energy `E = ½w'² + V(w)` of the autonomous problem, with
//! `V(w) = ∫₀ʷ N`.

use thiserror::Error;

use super::{CauchyProblem, Trajectory};
use crate::expr::{Func, Node, NonlinExpr};
use crate::quad::{self, QuadSpec};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EnergyError {
    #[error("energy is only conserved for zero forcing")]
    NotAutonomous,
    #[error("potential could not be evaluated at w = {w}: {message}")]
    Potential { w: f64, message: String },
}

/// `V(w) = ∫₀ʷ N`.
#[derive(Debug, Clone, PartialEq)]
pub enum Potential {
    /// Closed-form antiderivative `A`, with `V(w) = A(w) - A(0)`.
    Symbolic {
        antiderivative: NonlinExpr,
        offset: f64,
    },
    /// Gauss–Legendre quadrature of `N` from 0.
    Quadrature(NonlinExpr),
}

impl Potential {
    pub fn eval(&self, w: f64) -> Result<f64, EnergyError> {
        match self {
            Potential::Symbolic {
                antiderivative,
                offset,
            } => antiderivative
                .eval(w)
                .map(|a| a - offset)
                .map_err(|e| EnergyError::Potential {
                    w,
                    message: e.to_string(),
                }),
            Potential::Quadrature(n) => {
                let spec = QuadSpec {
                    initial_panels: 2,
                    abs_tol: 1e-14,
                    rel_tol: 1e-13,
                    ..Default::default()
                };
                quad::integrate(|x| n.eval(x).map_err(|e| e.to_string()), 0.0, w, &spec)
                    .map(|r| r.value)
                    .map_err(|e| EnergyError::Potential {
                        w,
                        message: e.to_string(),
                    })
            }
        }
    }

    pub fn is_symbolic(&self) -> bool {
        matches!(self, Potential::Symbolic { .. })
    }
}

fn mul(a: Node, b: Node) -> Node {
    Node::mul(a, b)
}

fn antiderivative(node: &Node) -> Option<Node> {
    use Node::*;
    let w = || Var;
    Some(match node {
        Const(c) => mul(Const(*c), w()),
        Var => mul(Const(0.5), Node::powi(w(), 2)),
        Neg(a) => Node::neg(antiderivative(a)?),
        Add(a, b) => Node::add(antiderivative(a)?, antiderivative(b)?),
        Sub(a, b) => Node::sub(antiderivative(a)?, antiderivative(b)?),
        Mul(a, b) if a.is_constant() => mul((**a).clone(), antiderivative(b)?),
        Mul(a, b) if b.is_constant() => mul((**b).clone(), antiderivative(a)?),
        Div(a, b) if b.is_constant() => Node::div(antiderivative(a)?, (**b).clone()),
        PowI(a, n) if **a == Var && *n != -1 => {
            Node::div(Node::powi(w(), n + 1), Const((n + 1) as f64))
        }
        PowR(a, r) if **a == Var && *r != -1.0 => {
            Node::div(Node::powr(w(), r + 1.0), Const(r + 1.0))
        }
        Apply(f, a) if **a == Var => match f {
            Func::Sin => Node::neg(Node::apply(Func::Cos, w())),
            Func::Cos => Node::apply(Func::Sin, w()),
            Func::Sinh => Node::apply(Func::Cosh, w()),
            Func::Cosh => Node::apply(Func::Sinh, w()),
            Func::Exp => Node::apply(Func::Exp, w()),
            // ln cosh w = ln(1 + (cosh w - 1))
            Func::Tanh => Node::apply(
                Func::Ln1p,
                Node::sub(Node::apply(Func::Cosh, w()), Const(1.0)),
            ),
            _ => return None,
        },
        _ => return None,
    })
}

/// Symbolic antiderivative when the shape is recognised, quadrature otherwise.
pub fn potential(nonlin: &NonlinExpr) -> Potential {
    if let Some(a) = antiderivative(nonlin.root()) {
        let antiderivative = NonlinExpr::new(a);
        if let Ok(offset) = antiderivative.eval(0.0) {
            return Potential::Symbolic {
                antiderivative,
                offset,
            };
        }
    }
    Potential::Quadrature(nonlin.clone())
}

/// `E(t) = ½w'(t)² + V(w(t))` at every trajectory node.
pub fn energy(problem: &CauchyProblem, traj: &Trajectory) -> Result<Vec<f64>, EnergyError> {
    if !problem.is_autonomous() {
        return Err(EnergyError::NotAutonomous);
    }
    let v = potential(&problem.nonlin);
    (0..traj.len())
        .map(|i| {
            let y = traj.state(i);
            Ok(0.5 * y[1] * y[1] + v.eval(y[0])?)
        })
        .collect()
}
