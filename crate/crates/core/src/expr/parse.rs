//! Recursive-descent parser.
//!
//! ```text
//! sum     := product (('+' | '-') product)*
//! product := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := atom ('^' exponent)?
//! exponent:= ['-'] number | '(' ['-'] number ')'
//! atom    := number | var | ident '(' sum (',' sum)* ')' | '(' sum ')'
//! ```
//!
//! A minus sign directly in front of a bare numeric literal folds into the
//! constant. `ln(u)` is accepted only as `ln(1 + v)` and becomes `Ln1p(v)`.
//!
//! Error offsets are 1-based byte positions; input exhausted early reports
//! `len + 1`.

use super::{ExprError, Func, Node, NonlinExpr, Symbol};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num { text: String, value: f64 },
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
    End,
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn tokens(src: &'a str) -> Result<Vec<(Tok, usize)>, ExprError> {
        let mut lx = Lexer { src, pos: 0 };
        let mut out = Vec::new();
        loop {
            let (tok, at) = lx.next()?;
            let end = tok == Tok::End;
            out.push((tok, at));
            if end {
                return Ok(out);
            }
        }
    }

    fn next(&mut self) -> Result<(Tok, usize), ExprError> {
        let bytes = self.src.as_bytes();
        while self.pos < bytes.len() && bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        let start = self.pos;
        let Some(&b) = bytes.get(self.pos) else {
            return Ok((Tok::End, start));
        };
        let single = match b {
            b'+' => Some(Tok::Plus),
            b'-' => Some(Tok::Minus),
            b'*' => Some(Tok::Star),
            b'/' => Some(Tok::Slash),
            b'^' => Some(Tok::Caret),
            b'(' => Some(Tok::LParen),
            b')' => Some(Tok::RParen),
            b',' => Some(Tok::Comma),
            _ => None,
        };
        if let Some(tok) = single {
            self.pos += 1;
            return Ok((tok, start));
        }
        if b.is_ascii_digit() || b == b'.' {
            return self.number(start);
        }
        if b.is_ascii_alphabetic() {
            while self.pos < bytes.len()
                && (bytes[self.pos].is_ascii_alphanumeric() || bytes[self.pos] == b'_')
            {
                self.pos += 1;
            }
            return Ok((Tok::Ident(self.src[start..self.pos].to_string()), start));
        }
        let ch = self.src[start..].chars().next().unwrap_or('?');
        Err(ExprError::Syntax {
            offset: start,
            message: format!("unexpected character `{ch}`"),
        })
    }

    fn number(&mut self, start: usize) -> Result<(Tok, usize), ExprError> {
        let bytes = self.src.as_bytes();
        let digits = |pos: &mut usize| {
            let s = *pos;
            while *pos < bytes.len() && bytes[*pos].is_ascii_digit() {
                *pos += 1;
            }
            *pos - s
        };
        let mut pos = self.pos;
        let mut count = digits(&mut pos);
        if pos < bytes.len() && bytes[pos] == b'.' {
            pos += 1;
            count += digits(&mut pos);
        }
        if count == 0 {
            return Err(ExprError::Syntax {
                offset: start,
                message: "malformed number".into(),
            });
        }
        if pos < bytes.len() && (bytes[pos] == b'e' || bytes[pos] == b'E') {
            let mut p = pos + 1;
            if p < bytes.len() && (bytes[p] == b'+' || bytes[p] == b'-') {
                p += 1;
            }
            if digits(&mut p) > 0 {
                pos = p;
            }
        }
        let text = &self.src[start..pos];
        let value: f64 = text.parse().map_err(|_| ExprError::Syntax {
            offset: start,
            message: format!("malformed number `{text}`"),
        })?;
        if !value.is_finite() {
            return Err(ExprError::Syntax {
                offset: start,
                message: format!("number `{text}` is out of range"),
            });
        }
        self.pos = pos;
        Ok((
            Tok::Num {
                text: text.to_string(),
                value,
            },
            start,
        ))
    }
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    idx: usize,
    var: Symbol,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.idx].0
    }

    fn offset(&self) -> usize {
        self.toks[self.idx].1
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.idx].clone();
        if self.idx + 1 < self.toks.len() {
            self.idx += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), ExprError> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected(what))
        }
    }

    fn unexpected(&self, what: &str) -> ExprError {
        let found = match self.peek() {
            Tok::End => "end of input".to_string(),
            Tok::Num { text, .. } => format!("`{text}`"),
            Tok::Ident(s) => format!("`{s}`"),
            t => format!("`{}`", tok_text(t)),
        };
        ExprError::Syntax {
            offset: self.offset(),
            message: format!("expected {what}, found {found}"),
        }
    }

    fn sum(&mut self) -> Result<Node, ExprError> {
        let mut lhs = self.product()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    lhs = Node::add(lhs, self.product()?);
                }
                Tok::Minus => {
                    self.bump();
                    lhs = Node::sub(lhs, self.product()?);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn product(&mut self) -> Result<Node, ExprError> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    lhs = Node::mul(lhs, self.unary()?);
                }
                Tok::Slash => {
                    self.bump();
                    lhs = Node::div(lhs, self.unary()?);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Node, ExprError> {
        if *self.peek() == Tok::Minus {
            self.bump();
            if matches!(self.peek(), Tok::Minus) {
                return Ok(Node::neg(self.unary()?));
            }
            let (node, bare_literal) = self.power()?;
            return Ok(match node {
                Node::Const(c) if bare_literal => Node::Const(-c),
                other => Node::neg(other),
            });
        }
        Ok(self.power()?.0)
    }

    /// Returns the node and whether it is a bare numeric literal.
    fn power(&mut self) -> Result<(Node, bool), ExprError> {
        let (base, bare) = self.atom()?;
        if *self.peek() != Tok::Caret {
            return Ok((base, bare));
        }
        self.bump();
        let open = *self.peek() == Tok::LParen;
        if open {
            self.bump();
        }
        let negative = *self.peek() == Tok::Minus;
        if negative {
            self.bump();
        }
        if !matches!(self.peek(), Tok::Num { .. }) {
            return Err(self.unexpected("a numeric exponent"));
        }
        let (Tok::Num { text, value }, at) = self.bump() else {
            unreachable!("checked above");
        };
        if open {
            self.expect(Tok::RParen, "`)`")?;
        }
        let is_real = text.contains(['.', 'e', 'E']);
        let node = if is_real {
            Node::powr(base, if negative { -value } else { value })
        } else {
            let n: i32 = text.parse().map_err(|_| ExprError::Syntax {
                offset: at,
                message: format!("integer exponent `{text}` is out of range"),
            })?;
            Node::powi(base, if negative { -n } else { n })
        };
        Ok((node, false))
    }

    fn atom(&mut self) -> Result<(Node, bool), ExprError> {
        let at = self.offset();
        match self.peek().clone() {
            Tok::Num { value, .. } => {
                self.bump();
                Ok((Node::Const(value), true))
            }
            Tok::LParen => {
                self.bump();
                let inner = self.sum()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok((inner, false))
            }
            Tok::Ident(name) => {
                self.bump();
                if name == self.var.as_str() {
                    return Ok((Node::Var, false));
                }
                let func = Func::from_name(&name);
                if *self.peek() != Tok::LParen {
                    return Err(match func {
                        Some(_) => self.unexpected("`(` after function name"),
                        None => ExprError::Syntax {
                            offset: at,
                            message: format!("unknown identifier `{name}`"),
                        },
                    });
                }
                let Some(func) = func else {
                    return Err(ExprError::UnknownFunction { name, offset: at });
                };
                self.bump();
                let mut args = Vec::new();
                if *self.peek() != Tok::RParen {
                    args.push(self.sum()?);
                    while *self.peek() == Tok::Comma {
                        self.bump();
                        args.push(self.sum()?);
                    }
                }
                self.expect(Tok::RParen, "`)`")?;
                if args.len() != 1 {
                    return Err(ExprError::Arity {
                        name,
                        expected: 1,
                        found: args.len(),
                        offset: at,
                    });
                }
                let arg = args.pop().expect("one argument");
                if func == Func::Ln1p {
                    let inner = strip_leading_one(arg).ok_or_else(|| ExprError::Syntax {
                        offset: at,
                        message: "logarithm must be written as ln(1 + u)".into(),
                    })?;
                    return Ok((Node::apply(Func::Ln1p, inner), false));
                }
                Ok((Node::apply(func, arg), false))
            }
            _ => Err(self.unexpected("an expression")),
        }
    }
}

/// Removes the constant `1` from `1 + v`, `v + 1`, or the leftmost leaf of
/// a left-leaning sum chain `1 + a + b + ...`.
fn strip_leading_one(node: Node) -> Option<Node> {
    match node {
        Node::Add(a, b) => {
            if *a == Node::Const(1.0) {
                return Some(*b);
            }
            if *b == Node::Const(1.0) {
                return Some(*a);
            }
            if matches!(*a, Node::Add(..)) {
                return strip_leading_one(*a).map(|rest| Node::add(rest, *b));
            }
            None
        }
        _ => None,
    }
}

fn tok_text(t: &Tok) -> &'static str {
    match t {
        Tok::Plus => "+",
        Tok::Minus => "-",
        Tok::Star => "*",
        Tok::Slash => "/",
        Tok::Caret => "^",
        Tok::LParen => "(",
        Tok::RParen => ")",
        Tok::Comma => ",",
        _ => "?",
    }
}

fn one_based(e: ExprError) -> ExprError {
    match e {
        ExprError::Syntax { offset, message } => ExprError::Syntax {
            offset: offset + 1,
            message,
        },
        other => other,
    }
}

/// Parses `N(w)` source text.
pub fn parse_nonlin(source: &str) -> Result<NonlinExpr, ExprError> {
    parse_in(source, Symbol::W)
}

/// Parses an expression in the given free variable.
pub fn parse_in(source: &str, var: Symbol) -> Result<NonlinExpr, ExprError> {
    if source.trim().is_empty() {
        return Err(ExprError::Syntax {
            offset: 1,
            message: "empty expression".into(),
        });
    }
    let toks = Lexer::tokens(source)
        .map_err(one_based)?
        .into_iter()
        .map(|(t, at)| (t, at + 1))
        .collect();
    let mut p = Parser { toks, idx: 0, var };
    let root = p.sum()?;
    if *p.peek() != Tok::End {
        return Err(p.unexpected("an operator or end of input"));
    }
    Ok(NonlinExpr::with_symbol(root, var))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Node {
        parse_nonlin(s).unwrap().into_root()
    }

    #[test]
    fn cubic_is_a_power_node() {
        assert_eq!(p("w^3"), Node::powi(Node::Var, 3));
    }

    #[test]
    fn hierarchy_member_shape() {
        let expected = Node::add(
            Node::mul(
                Node::powi(Node::apply(Func::Sinh, Node::Var), 2),
                Node::apply(Func::Tanh, Node::Var),
            ),
            Node::powi(Node::Var, 4),
        );
        assert_eq!(p("sinh(w)^2 * tanh(w) + w^4"), expected);
    }

    #[test]
    fn unbalanced_paren_reports_offset() {
        let err = parse_nonlin("ln(1+w").unwrap_err();
        assert_eq!(err.offset(), Some(7), "{err}");
    }

    #[test]
    fn ln_forms() {
        let ln1p = Node::apply(Func::Ln1p, Node::Var);
        assert_eq!(p("ln(1+w)"), ln1p);
        assert_eq!(p("ln(w + 1)"), ln1p);
        assert_eq!(
            p("ln(1 + w + w^2)"),
            Node::apply(Func::Ln1p, Node::add(Node::Var, Node::powi(Node::Var, 2)))
        );
        assert!(parse_nonlin("ln(w)").is_err());
    }

    #[test]
    fn unknown_function_and_arity() {
        assert!(matches!(
            parse_nonlin("foo(w)"),
            Err(ExprError::UnknownFunction { offset: 1, .. })
        ));
        assert!(matches!(
            parse_nonlin("w + sin(w, w)"),
            Err(ExprError::Arity {
                found: 2,
                offset: 5,
                ..
            })
        ));
        assert!(matches!(
            parse_nonlin("sin()"),
            Err(ExprError::Arity { found: 0, .. })
        ));
    }

    #[test]
    fn precedence() {
        // power binds tighter than unary minus
        assert_eq!(p("-w^2"), Node::neg(Node::powi(Node::Var, 2)));
        assert_eq!(p("-2^2"), Node::neg(Node::powi(Node::Const(2.0), 2)));
        assert_eq!(p("-2*w"), Node::mul(Node::Const(-2.0), Node::Var));
        assert_eq!(
            p("w - w * w / w"),
            Node::sub(
                Node::Var,
                Node::div(Node::mul(Node::Var, Node::Var), Node::Var)
            )
        );
        assert_eq!(p("w^2.5"), Node::powr(Node::Var, 2.5));
        assert_eq!(p("w^(-1)"), Node::powi(Node::Var, -1));
        assert_eq!(p("w^-0.5"), Node::powr(Node::Var, -0.5));
    }

    #[test]
    fn forcing_variable() {
        let f = parse_in("cos(t)", Symbol::T).unwrap();
        assert_eq!(f.to_string(), "cos(t)");
        assert!(parse_nonlin("cos(t)").is_err());
    }

    #[test]
    fn trailing_garbage_and_empty() {
        assert!(parse_nonlin("").is_err());
        assert!(parse_nonlin("w w").is_err());
        assert!(parse_nonlin("w $").is_err());
        assert!(parse_nonlin("sin").is_err());
        assert!(parse_nonlin("w^w").is_err());
    }

    #[test]
    fn canonical_print() {
        for src in [
            "sinh(w)^2 * tanh(w) + w^4",
            "(w^3 + w^2)^2",
            "sinh(w)^2 / w",
            "ln(1 + w) - -2",
            "-(2)",
            "w^(-1)",
            "w^2.5",
            "w * -2",
            "ln(1 + (w - w^2))",
            "w - (w - w)",
            "w / (w * w)",
        ] {
            let e = parse_nonlin(src).unwrap();
            assert_eq!(e.to_string(), src);
        }
    }
}
