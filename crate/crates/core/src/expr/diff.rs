//! Symbolic derivative with light constant folding (no general
//! simplification).

use super::{Func, Node, NonlinExpr};

fn is_zero(n: &Node) -> bool {
    matches!(n, Node::Const(c) if *c == 0.0)
}

fn is_one(n: &Node) -> bool {
    matches!(n, Node::Const(c) if *c == 1.0)
}

fn add(a: Node, b: Node) -> Node {
    match (&a, &b) {
        _ if is_zero(&a) => b,
        _ if is_zero(&b) => a,
        (Node::Const(x), Node::Const(y)) => Node::Const(x + y),
        _ => Node::add(a, b),
    }
}

fn sub(a: Node, b: Node) -> Node {
    match (&a, &b) {
        _ if is_zero(&b) => a,
        _ if is_zero(&a) => neg(b),
        (Node::Const(x), Node::Const(y)) => Node::Const(x - y),
        _ => Node::sub(a, b),
    }
}

fn neg(a: Node) -> Node {
    match a {
        Node::Const(c) => Node::Const(-c),
        Node::Neg(inner) => *inner,
        other => Node::neg(other),
    }
}

fn mul(a: Node, b: Node) -> Node {
    match (&a, &b) {
        _ if is_zero(&a) || is_zero(&b) => Node::Const(0.0),
        _ if is_one(&a) => b,
        _ if is_one(&b) => a,
        (Node::Const(x), Node::Const(y)) => Node::Const(x * y),
        _ => Node::mul(a, b),
    }
}

fn div(a: Node, b: Node) -> Node {
    if is_zero(&a) {
        return Node::Const(0.0);
    }
    if is_one(&b) {
        return a;
    }
    Node::div(a, b)
}

fn powi(a: Node, n: i32) -> Node {
    match n {
        0 => Node::Const(1.0),
        1 => a,
        _ => Node::powi(a, n),
    }
}

fn one() -> Node {
    Node::Const(1.0)
}

/// `d/dx f(u)` expressed in `u` (without the chain factor).
fn outer_derivative(f: Func, u: &Node) -> Node {
    let app = |g: Func| Node::apply(g, u.clone());
    let u2 = || powi(u.clone(), 2);
    match f {
        Func::Sin => app(Func::Cos),
        Func::Cos => neg(app(Func::Sin)),
        Func::Tan => div(one(), powi(app(Func::Cos), 2)),
        Func::Cot => neg(div(one(), powi(app(Func::Sin), 2))),
        Func::Sinh => app(Func::Cosh),
        Func::Cosh => app(Func::Sinh),
        Func::Tanh => sub(one(), powi(app(Func::Tanh), 2)),
        Func::Coth => sub(one(), powi(app(Func::Coth), 2)),
        Func::Arcsin => div(one(), Node::powr(sub(one(), u2()), 0.5)),
        Func::Arccos => neg(div(one(), Node::powr(sub(one(), u2()), 0.5))),
        Func::Arctan => div(one(), add(one(), u2())),
        Func::Arccot => neg(div(one(), add(one(), u2()))),
        Func::Arcsinh => div(one(), Node::powr(add(u2(), one()), 0.5)),
        Func::Arccosh => div(one(), Node::powr(sub(u2(), one()), 0.5)),
        Func::Arctanh | Func::Arccoth => div(one(), sub(one(), u2())),
        Func::Ln1p => div(one(), add(one(), u.clone())),
        Func::Exp => app(Func::Exp),
    }
}

fn d(node: &Node) -> Node {
    match node {
        Node::Var => one(),
        Node::Const(_) => Node::Const(0.0),
        Node::Neg(a) => neg(d(a)),
        Node::Add(a, b) => add(d(a), d(b)),
        Node::Sub(a, b) => sub(d(a), d(b)),
        Node::Mul(a, b) => add(mul(d(a), (**b).clone()), mul((**a).clone(), d(b))),
        Node::Div(a, b) => {
            let da = d(a);
            let db = d(b);
            if is_zero(&db) {
                return div(da, (**b).clone());
            }
            div(
                sub(mul(da, (**b).clone()), mul((**a).clone(), db)),
                powi((**b).clone(), 2),
            )
        }
        Node::PowI(a, n) => mul(
            mul(Node::Const(f64::from(*n)), powi((**a).clone(), n - 1)),
            d(a),
        ),
        Node::PowR(a, r) => mul(
            mul(Node::Const(*r), Node::powr((**a).clone(), r - 1.0)),
            d(a),
        ),
        Node::Apply(f, a) => mul(outer_derivative(*f, a), d(a)),
    }
}

/// `dN/dw` as a new expression.
pub fn diff_nonlin(expr: &NonlinExpr) -> NonlinExpr {
    NonlinExpr::with_symbol(d(expr.root()), expr.symbol())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_nonlin;

    fn deriv(s: &str) -> NonlinExpr {
        diff_nonlin(&parse_nonlin(s).unwrap())
    }

    #[test]
    fn documented_examples() {
        assert_eq!(deriv("w^3").to_string(), "3 * w^2");
        assert_eq!(deriv("sinh(w)").to_string(), "cosh(w)");
        assert_eq!(deriv("arctan(w)").eval(1.0).unwrap(), 0.5);
    }

    #[test]
    fn every_primitive_matches_central_differences() {
        let h = 1e-5;
        for f in Func::ALL {
            let e = NonlinExpr::primitive(f);
            let de = diff_nonlin(&e);
            for &x in &[0.3, 0.7, -0.45, 1.3, 2.1, -1.7] {
                let (Ok(a), Ok(b), Ok(dv)) = (e.eval(x + h), e.eval(x - h), de.eval(x)) else {
                    continue;
                };
                let fd = (a - b) / (2.0 * h);
                assert!(
                    (fd - dv).abs() <= 1e-6 * dv.abs().max(1.0),
                    "{}: fd {fd} vs {dv} at {x}",
                    f.name()
                );
            }
        }
    }
}
