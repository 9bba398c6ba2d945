use super::print::render;
use super::{ExprError, Func, Node, NonlinExpr, Symbol};

/// Leading term `coef * x^order` of a subtree near `x = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Leading {
    /// Identically zero near the origin.
    Zero,
    Term {
        coef: f64,
        order: f64,
    },
}

impl Leading {
    fn scale(self, c: f64) -> Leading {
        match self {
            Leading::Zero => Leading::Zero,
            Leading::Term { coef, order } => Leading::Term {
                coef: coef * c,
                order,
            },
        }
    }

    pub fn order(self) -> Option<f64> {
        match self {
            Leading::Zero => None,
            Leading::Term { order, .. } => Some(order),
        }
    }
}

fn combine_sum(a: Leading, b: Leading) -> Option<Leading> {
    match (a, b) {
        (Leading::Zero, x) | (x, Leading::Zero) => Some(x),
        (
            Leading::Term {
                coef: ca,
                order: ka,
            },
            Leading::Term {
                coef: cb,
                order: kb,
            },
        ) => {
            if ka < kb {
                Some(a)
            } else if kb < ka {
                Some(b)
            } else {
                let c = ca + cb;
                if c.abs() <= 1e-12 * ca.abs().max(cb.abs()) {
                    // cancellation: the true order is unknown from leading data
                    None
                } else {
                    Some(Leading::Term { coef: c, order: ka })
                }
            }
        }
    }
}

impl Node {
    /// Leading behaviour at the origin, when it can be read off the tree.
    pub fn leading_term(&self) -> Option<Leading> {
        Some(match self {
            Node::Var => Leading::Term {
                coef: 1.0,
                order: 1.0,
            },
            Node::Const(c) => {
                if *c == 0.0 {
                    Leading::Zero
                } else {
                    Leading::Term {
                        coef: *c,
                        order: 0.0,
                    }
                }
            }
            Node::Neg(a) => a.leading_term()?.scale(-1.0),
            Node::Add(a, b) => combine_sum(a.leading_term()?, b.leading_term()?)?,
            Node::Sub(a, b) => combine_sum(a.leading_term()?, b.leading_term()?.scale(-1.0))?,
            Node::Mul(a, b) => match (a.leading_term()?, b.leading_term()?) {
                (Leading::Zero, _) | (_, Leading::Zero) => Leading::Zero,
                (
                    Leading::Term {
                        coef: ca,
                        order: ka,
                    },
                    Leading::Term {
                        coef: cb,
                        order: kb,
                    },
                ) => Leading::Term {
                    coef: ca * cb,
                    order: ka + kb,
                },
            },
            Node::Div(a, b) => match (a.leading_term()?, b.leading_term()?) {
                (_, Leading::Zero) => return None,
                (Leading::Zero, _) => Leading::Zero,
                (
                    Leading::Term {
                        coef: ca,
                        order: ka,
                    },
                    Leading::Term {
                        coef: cb,
                        order: kb,
                    },
                ) => Leading::Term {
                    coef: ca / cb,
                    order: ka - kb,
                },
            },
            Node::PowI(a, n) => match a.leading_term()? {
                Leading::Zero if *n > 0 => Leading::Zero,
                Leading::Zero => return None,
                Leading::Term { coef, order } => Leading::Term {
                    coef: coef.powi(*n),
                    order: order * f64::from(*n),
                },
            },
            Node::PowR(a, r) => match a.leading_term()? {
                Leading::Zero if *r > 0.0 => Leading::Zero,
                Leading::Term { coef, order } if coef > 0.0 => Leading::Term {
                    coef: coef.powf(*r),
                    order: order * r,
                },
                _ => return None,
            },
            Node::Apply(f, a) => {
                let inner = a.leading_term()?;
                match inner {
                    Leading::Zero => match f.apply(0.0) {
                        Some(v) if v == 0.0 => Leading::Zero,
                        Some(v) => Leading::Term {
                            coef: v,
                            order: 0.0,
                        },
                        None => return None,
                    },
                    Leading::Term { coef, order } if order > 0.0 => {
                        if f.is_class_primitive() {
                            inner
                        } else {
                            match f {
                                Func::Cot | Func::Coth => Leading::Term {
                                    coef: 1.0 / coef,
                                    order: -order,
                                },
                                _ => match f.apply(0.0) {
                                    Some(v) if v != 0.0 => Leading::Term {
                                        coef: v,
                                        order: 0.0,
                                    },
                                    _ => return None,
                                },
                            }
                        }
                    }
                    Leading::Term { coef, order } if order == 0.0 => match f.apply(coef) {
                        Some(v) if v != 0.0 => Leading::Term {
                            coef: v,
                            order: 0.0,
                        },
                        _ => return None,
                    },
                    Leading::Term { .. } => return None,
                }
            }
        })
    }
}

fn domain(node: &Node, var: Symbol, argument: f64) -> ExprError {
    ExprError::Domain {
        node: render(node, var),
        argument,
    }
}

fn finite(node: &Node, var: Symbol, x: f64, y: f64) -> Result<f64, ExprError> {
    if y.is_finite() {
        Ok(y)
    } else {
        Err(domain(node, var, x))
    }
}

pub(crate) fn eval_node(node: &Node, var: Symbol, x: f64) -> Result<f64, ExprError> {
    match node {
        Node::Var => Ok(x),
        Node::Const(c) => Ok(*c),
        Node::Neg(a) => Ok(-eval_node(a, var, x)?),
        Node::Add(a, b) => finite(node, var, x, eval_node(a, var, x)? + eval_node(b, var, x)?),
        Node::Sub(a, b) => finite(node, var, x, eval_node(a, var, x)? - eval_node(b, var, x)?),
        Node::Mul(a, b) => finite(node, var, x, eval_node(a, var, x)? * eval_node(b, var, x)?),
        Node::Div(a, b) => {
            let num = eval_node(a, var, x)?;
            let den = eval_node(b, var, x)?;
            if den != 0.0 {
                return finite(node, var, x, num / den);
            }
            // Removable singularity at the origin, resolved from leading terms.
            if x == 0.0 && num == 0.0 {
                if let (Some(la), Some(lb)) = (a.leading_term(), b.leading_term()) {
                    match (la, lb) {
                        (Leading::Zero, Leading::Term { .. }) => return Ok(0.0),
                        (
                            Leading::Term {
                                coef: ca,
                                order: ka,
                            },
                            Leading::Term {
                                coef: cb,
                                order: kb,
                            },
                        ) => {
                            if ka > kb {
                                return Ok(0.0);
                            }
                            if ka == kb {
                                return Ok(ca / cb);
                            }
                        }
                        _ => {}
                    }
                }
            }
            Err(domain(node, var, x))
        }
        Node::PowI(a, n) => {
            let base = eval_node(a, var, x)?;
            if base == 0.0 && *n < 0 {
                return Err(domain(node, var, x));
            }
            finite(node, var, x, base.powi(*n))
        }
        Node::PowR(a, r) => {
            let base = eval_node(a, var, x)?;
            if base < 0.0 || (base == 0.0 && *r < 0.0) {
                return Err(domain(node, var, base));
            }
            finite(node, var, x, base.powf(*r))
        }
        Node::Apply(f, a) => {
            let arg = eval_node(a, var, x)?;
            f.apply(arg).ok_or_else(|| domain(node, var, arg))
        }
    }
}

/// Evaluates `N(w)`. Domain violations name the offending subtree.
pub fn eval_nonlin(expr: &NonlinExpr, w: f64) -> Result<f64, ExprError> {
    eval_node(expr.root(), expr.symbol(), w)
}
