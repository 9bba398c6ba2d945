//! Nonlinearities `N(w)` as expression trees.
//!
//! The same tree type also carries forcing terms `f(t)`; the only
//! difference is the name of the free variable ([`Symbol`]).

mod diff;
mod eval;
mod hierarchy;
mod membership;
mod parse;
mod print;
mod theta;

use std::fmt;

use thiserror::Error;

pub use diff::diff_nonlin;
pub use eval::{eval_nonlin, Leading};
pub use hierarchy::{generate_hierarchy, Hierarchy, HierarchyError, Sign};
pub use membership::{
    check_membership, check_membership_seeded, identity_residual, test_grid, MembershipError,
    MembershipStatus, MembershipVerdict, RuleStep, SkippedPath, TestPath, Witness,
    DEFAULT_MEMBERSHIP_SEED,
};
pub use parse::{parse_in, parse_nonlin};
pub use theta::{binomial_parity_identity, heaviside, sign, theta_power_identity};

/// Name of the free variable of an expression.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Symbol {
    /// The unknown `w` of `w'' + N(w) = f`.
    W,
    /// Time, used by forcing expressions.
    T,
}

impl Symbol {
    pub fn as_str(self) -> &'static str {
        match self {
            Symbol::W => "w",
            Symbol::T => "t",
        }
    }
}

/// Unary primitive functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Cot,
    Sinh,
    Cosh,
    Tanh,
    Coth,
    Arcsin,
    Arccos,
    Arctan,
    Arccot,
    Arcsinh,
    Arccosh,
    Arctanh,
    Arccoth,
    /// `ln(1 + x)`.
    Ln1p,
    Exp,
}

impl Func {
    pub const ALL: [Func; 18] = [
        Func::Sin,
        Func::Cos,
        Func::Tan,
        Func::Cot,
        Func::Sinh,
        Func::Cosh,
        Func::Tanh,
        Func::Coth,
        Func::Arcsin,
        Func::Arccos,
        Func::Arctan,
        Func::Arccot,
        Func::Arcsinh,
        Func::Arccosh,
        Func::Arctanh,
        Func::Arccoth,
        Func::Ln1p,
        Func::Exp,
    ];

    /// Surface name. `Ln1p` is spelled `ln` and printed as `ln(1 + x)`.
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Cot => "cot",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Tanh => "tanh",
            Func::Coth => "coth",
            Func::Arcsin => "arcsin",
            Func::Arccos => "arccos",
            Func::Arctan => "arctan",
            Func::Arccot => "arccot",
            Func::Arcsinh => "arcsinh",
            Func::Arccosh => "arccosh",
            Func::Arctanh => "arctanh",
            Func::Arccoth => "arccoth",
            Func::Ln1p => "ln",
            Func::Exp => "exp",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.iter().copied().find(|f| f.name() == name)
    }

    /// The nine odd-at-the-origin primitives with `f(0) = 0`, `f'(0) = 1`
    /// that generate the multiplicability class (together with `w^n`).
    pub fn is_class_primitive(self) -> bool {
        matches!(
            self,
            Func::Sin
                | Func::Tan
                | Func::Sinh
                | Func::Tanh
                | Func::Arcsin
                | Func::Arctan
                | Func::Arcsinh
                | Func::Arctanh
                | Func::Ln1p
        )
    }

    /// Pointwise evaluation; `None` outside the real domain.
    pub fn apply(self, x: f64) -> Option<f64> {
        let y = match self {
            Func::Sin => x.sin(),
            Func::Cos => x.cos(),
            Func::Tan => x.tan(),
            Func::Cot => {
                if x == 0.0 {
                    return None;
                }
                x.cos() / x.sin()
            }
            Func::Sinh => x.sinh(),
            Func::Cosh => x.cosh(),
            Func::Tanh => x.tanh(),
            Func::Coth => {
                if x == 0.0 {
                    return None;
                }
                1.0 / x.tanh()
            }
            Func::Arcsin => {
                if x.abs() > 1.0 {
                    return None;
                }
                x.asin()
            }
            Func::Arccos => {
                if x.abs() > 1.0 {
                    return None;
                }
                x.acos()
            }
            Func::Arctan => x.atan(),
            Func::Arccot => std::f64::consts::FRAC_PI_2 - x.atan(),
            Func::Arcsinh => x.asinh(),
            Func::Arccosh => {
                if x < 1.0 {
                    return None;
                }
                x.acosh()
            }
            Func::Arctanh => {
                if x.abs() >= 1.0 {
                    return None;
                }
                x.atanh()
            }
            Func::Arccoth => {
                if x.abs() <= 1.0 {
                    return None;
                }
                (1.0 / x).atanh()
            }
            Func::Ln1p => {
                if x <= -1.0 {
                    return None;
                }
                x.ln_1p()
            }
            Func::Exp => x.exp(),
        };
        y.is_finite().then_some(y)
    }
}

/// Expression node. Every variant carries exactly its declared children.
#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Var,
    Const(f64),
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    /// Integer power with a literal exponent.
    PowI(Box<Node>, i32),
    /// Real power with a literal exponent.
    PowR(Box<Node>, f64),
    Apply(Func, Box<Node>),
}

impl Node {
    pub fn var() -> Node {
        Node::Var
    }

    pub fn constant(c: f64) -> Node {
        Node::Const(c)
    }

    pub fn apply(f: Func, arg: Node) -> Node {
        Node::Apply(f, Box::new(arg))
    }

    pub fn powi(base: Node, n: i32) -> Node {
        Node::PowI(Box::new(base), n)
    }

    pub fn powr(base: Node, r: f64) -> Node {
        Node::PowR(Box::new(base), r)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn add(a: Node, b: Node) -> Node {
        Node::Add(Box::new(a), Box::new(b))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn sub(a: Node, b: Node) -> Node {
        Node::Sub(Box::new(a), Box::new(b))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn mul(a: Node, b: Node) -> Node {
        Node::Mul(Box::new(a), Box::new(b))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn div(a: Node, b: Node) -> Node {
        Node::Div(Box::new(a), Box::new(b))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn neg(a: Node) -> Node {
        Node::Neg(Box::new(a))
    }

    /// True if the subtree does not depend on the free variable.
    pub fn is_constant(&self) -> bool {
        match self {
            Node::Var => false,
            Node::Const(_) => true,
            Node::Neg(a) | Node::PowI(a, _) | Node::PowR(a, _) | Node::Apply(_, a) => {
                a.is_constant()
            }
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                a.is_constant() && b.is_constant()
            }
        }
    }

    /// True if any real-power node occurs in the subtree.
    pub fn has_real_power(&self) -> bool {
        match self {
            Node::Var | Node::Const(_) => false,
            Node::PowR(..) => true,
            Node::Neg(a) | Node::PowI(a, _) | Node::Apply(_, a) => a.has_real_power(),
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                a.has_real_power() || b.has_real_power()
            }
        }
    }

    pub fn node_count(&self) -> usize {
        match self {
            Node::Var | Node::Const(_) => 1,
            Node::Neg(a) | Node::PowI(a, _) | Node::PowR(a, _) | Node::Apply(_, a) => {
                1 + a.node_count()
            }
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                1 + a.node_count() + b.node_count()
            }
        }
    }
}

/// A nonlinearity `N(w)` (or, with [`Symbol::T`], a forcing `f(t)`).
#[derive(Debug, Clone, PartialEq)]
pub struct NonlinExpr {
    root: Node,
    var: Symbol,
}

impl NonlinExpr {
    pub fn new(root: Node) -> Self {
        NonlinExpr {
            root,
            var: Symbol::W,
        }
    }

    pub fn with_symbol(root: Node, var: Symbol) -> Self {
        NonlinExpr { root, var }
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn into_root(self) -> Node {
        self.root
    }

    pub fn symbol(&self) -> Symbol {
        self.var
    }

    /// `N(w) = w^n`.
    pub fn power(n: i32) -> Self {
        NonlinExpr::new(Node::powi(Node::Var, n))
    }

    /// `N(w) = f(w)` for a primitive `f`.
    pub fn primitive(f: Func) -> Self {
        NonlinExpr::new(Node::apply(f, Node::Var))
    }

    pub fn eval(&self, x: f64) -> Result<f64, ExprError> {
        eval_nonlin(self, x)
    }

    pub fn derivative(&self) -> NonlinExpr {
        diff_nonlin(self)
    }
}

impl fmt::Display for NonlinExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print::render(&self.root, self.var))
    }
}

impl std::str::FromStr for NonlinExpr {
    type Err = ExprError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_nonlin(s)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("syntax error at position {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown function `{name}` at position {offset}")]
    UnknownFunction { name: String, offset: usize },
    #[error("`{name}` takes {expected} argument(s), found {found} (position {offset})")]
    Arity {
        name: String,
        expected: usize,
        found: usize,
        offset: usize,
    },
    #[error("domain violation in `{node}` at argument {argument}")]
    Domain { node: String, argument: f64 },
}

impl ExprError {
    /// 1-based byte position for parse errors.
    pub fn offset(&self) -> Option<usize> {
        match self {
            ExprError::Syntax { offset, .. }
            | ExprError::UnknownFunction { offset, .. }
            | ExprError::Arity { offset, .. } => Some(*offset),
            ExprError::Domain { .. } => None,
        }
    }
}
