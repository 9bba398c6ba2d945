//! Canonical rendering. Parenthesization follows the parser's precedence
//! levels so that `parse(render(e)) == e` for every tree the parser can
//! produce.

use super::{Func, Node, Symbol};

const SUM: u8 = 1;
const PRODUCT: u8 = 2;
const UNARY: u8 = 3;
const POWER: u8 = 4;
const ATOM: u8 = 5;

fn level(node: &Node) -> u8 {
    match node {
        Node::Add(..) | Node::Sub(..) => SUM,
        Node::Mul(..) | Node::Div(..) => PRODUCT,
        Node::Neg(..) => UNARY,
        Node::Const(c) if c.is_sign_negative() => UNARY,
        Node::PowI(..) | Node::PowR(..) => POWER,
        Node::Var | Node::Const(_) | Node::Apply(..) => ATOM,
    }
}

pub(super) fn render(node: &Node, var: Symbol) -> String {
    let mut out = String::new();
    write_node(node, var, 0, &mut out);
    out
}

fn write_node(node: &Node, var: Symbol, min_level: u8, out: &mut String) {
    let paren = level(node) < min_level;
    if paren {
        out.push('(');
    }
    match node {
        Node::Var => out.push_str(var.as_str()),
        Node::Const(c) => {
            if c.is_sign_negative() {
                out.push('-');
                out.push_str(&format!("{}", c.abs()));
            } else {
                out.push_str(&format!("{c}"));
            }
        }
        Node::Neg(a) => {
            out.push('-');
            // `-2` would re-parse as a folded literal, so keep the negation visible.
            if matches!(**a, Node::Const(_)) {
                out.push('(');
                write_node(a, var, 0, out);
                out.push(')');
            } else {
                write_node(a, var, UNARY, out);
            }
        }
        Node::Add(a, b) => binary(a, " + ", b, var, SUM, out),
        Node::Sub(a, b) => binary(a, " - ", b, var, SUM, out),
        Node::Mul(a, b) => binary(a, " * ", b, var, PRODUCT, out),
        Node::Div(a, b) => binary(a, " / ", b, var, PRODUCT, out),
        Node::PowI(a, n) => {
            write_node(a, var, ATOM, out);
            out.push('^');
            if *n < 0 {
                out.push_str(&format!("(-{})", n.unsigned_abs()));
            } else {
                out.push_str(&n.to_string());
            }
        }
        Node::PowR(a, r) => {
            write_node(a, var, ATOM, out);
            out.push('^');
            // Debug formatting always carries a '.' or an exponent, which is
            // how the parser tells real exponents from integer ones.
            if r.is_sign_negative() {
                out.push_str(&format!("(-{:?})", r.abs()));
            } else {
                out.push_str(&format!("{r:?}"));
            }
        }
        Node::Apply(Func::Ln1p, a) => {
            out.push_str("ln(1 + ");
            write_node(a, var, PRODUCT, out);
            out.push(')');
        }
        Node::Apply(f, a) => {
            out.push_str(f.name());
            out.push('(');
            write_node(a, var, 0, out);
            out.push(')');
        }
    }
    if paren {
        out.push(')');
    }
}

fn binary(a: &Node, op: &str, b: &Node, var: Symbol, lvl: u8, out: &mut String) {
    write_node(a, var, lvl, out);
    out.push_str(op);
    write_node(b, var, lvl + 1, out);
}
