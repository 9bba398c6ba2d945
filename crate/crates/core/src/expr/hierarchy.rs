//! Families of nonlinearities built from the class generators.

use std::fmt;

use thiserror::Error;

use super::{Func, Node, NonlinExpr};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

/// Hierarchy templates. Parameters are natural numbers, listed in the
/// order they appear in the template; signs likewise, leading sign first.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Hierarchy {
    /// `±w^n`
    Power,
    /// `±w^n ± w^m`
    PowerSum,
    /// `±(w^n ± w^m)^k`
    PowerSumPower,
    /// `±(sinh^n w ± sinh^m w)^k`
    SinhSinhPower,
    /// `±(sinh^n w ± tanh^m w)^k`
    SinhTanhPower,
    /// `±(tanh^n w ± tanh^m w)^k`
    TanhTanhPower,
    /// `±sinh^n w · tanh^m w`, `n ≥ m`
    SinhTimesTanh,
    /// `±sinh^n w / tanh^m w`, `n > m`
    SinhOverTanh,
    /// `±sinh^n w ± w^m`
    SinhPlusPower,
    /// `±tanh^n w ± w^m`
    TanhPlusPower,
    /// `±sinh^n w · w^m`
    SinhTimesPower,
    /// `±tanh^n w · w^m`
    TanhTimesPower,
    /// `±sinh^n w / w^m`, `n > m`
    SinhOverPower,
    /// `±ln^n(1+w)/tanh^m w ± sinh^k w ± (sin^p(w^q) ± tanh^r(w^s))^l`,
    /// parameters `(n, m, k, p, q, r, s, l)`, `n > m`
    Mixed,
}

impl Hierarchy {
    pub const ALL: [Hierarchy; 14] = [
        Hierarchy::Power,
        Hierarchy::PowerSum,
        Hierarchy::PowerSumPower,
        Hierarchy::SinhSinhPower,
        Hierarchy::SinhTanhPower,
        Hierarchy::TanhTanhPower,
        Hierarchy::SinhTimesTanh,
        Hierarchy::SinhOverTanh,
        Hierarchy::SinhPlusPower,
        Hierarchy::TanhPlusPower,
        Hierarchy::SinhTimesPower,
        Hierarchy::TanhTimesPower,
        Hierarchy::SinhOverPower,
        Hierarchy::Mixed,
    ];

    pub fn param_count(self) -> usize {
        use Hierarchy::*;
        match self {
            Power => 1,
            PowerSum | SinhTimesTanh | SinhOverTanh | SinhPlusPower | TanhPlusPower
            | SinhTimesPower | TanhTimesPower | SinhOverPower => 2,
            PowerSumPower | SinhSinhPower | SinhTanhPower | TanhTanhPower => 3,
            Mixed => 8,
        }
    }

    pub fn sign_count(self) -> usize {
        use Hierarchy::*;
        match self {
            Power | SinhTimesTanh | SinhOverTanh | SinhTimesPower | TanhTimesPower
            | SinhOverPower => 1,
            PowerSum | PowerSumPower | SinhSinhPower | SinhTanhPower | TanhTanhPower
            | SinhPlusPower | TanhPlusPower => 2,
            Mixed => 4,
        }
    }
}

impl fmt::Display for Hierarchy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Hierarchy::*;
        f.write_str(match self {
            Power => "±w^n",
            PowerSum => "±w^n ± w^m",
            PowerSumPower => "±(w^n ± w^m)^k",
            SinhSinhPower => "±(sinh^n w ± sinh^m w)^k",
            SinhTanhPower => "±(sinh^n w ± tanh^m w)^k",
            TanhTanhPower => "±(tanh^n w ± tanh^m w)^k",
            SinhTimesTanh => "±sinh^n w · tanh^m w",
            SinhOverTanh => "±sinh^n w / tanh^m w",
            SinhPlusPower => "±sinh^n w ± w^m",
            TanhPlusPower => "±tanh^n w ± w^m",
            SinhTimesPower => "±sinh^n w · w^m",
            TanhTimesPower => "±tanh^n w · w^m",
            SinhOverPower => "±sinh^n w / w^m",
            Mixed => "±ln^n(1+w)/tanh^m w ± sinh^k w ± (sin^p w^q ± tanh^r w^s)^l",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HierarchyError {
    #[error("{family} takes {expected} parameters, got {found}")]
    ParamCount {
        family: String,
        expected: usize,
        found: usize,
    },
    #[error("{family} takes {expected} signs, got {found}")]
    SignCount {
        family: String,
        expected: usize,
        found: usize,
    },
    #[error("parameters must be natural numbers (≥ 1)")]
    NotNatural,
    #[error("{family}: constraint {constraint} violated")]
    Constraint {
        family: String,
        constraint: &'static str,
    },
}

fn pow(base: Node, n: u32) -> Node {
    if n == 1 {
        base
    } else {
        Node::powi(base, n as i32)
    }
}

fn f_pow(f: Func, n: u32) -> Node {
    pow(Node::apply(f, Node::Var), n)
}

fn w_pow(n: u32) -> Node {
    pow(Node::Var, n)
}

fn lead(sign: Sign, node: Node) -> Node {
    match sign {
        Sign::Plus => node,
        Sign::Minus => Node::neg(node),
    }
}

fn join(a: Node, sign: Sign, b: Node) -> Node {
    match sign {
        Sign::Plus => Node::add(a, b),
        Sign::Minus => Node::sub(a, b),
    }
}

/// Instantiates a hierarchy template. An empty `signs` slice means all `+`.
pub fn generate_hierarchy(
    family: Hierarchy,
    params: &[u32],
    signs: &[Sign],
) -> Result<NonlinExpr, HierarchyError> {
    use Hierarchy::*;
    if params.len() != family.param_count() {
        return Err(HierarchyError::ParamCount {
            family: family.to_string(),
            expected: family.param_count(),
            found: params.len(),
        });
    }
    let signs: Vec<Sign> = if signs.is_empty() {
        vec![Sign::Plus; family.sign_count()]
    } else if signs.len() == family.sign_count() {
        signs.to_vec()
    } else {
        return Err(HierarchyError::SignCount {
            family: family.to_string(),
            expected: family.sign_count(),
            found: signs.len(),
        });
    };
    if params.iter().any(|&p| p == 0 || p > i32::MAX as u32) {
        return Err(HierarchyError::NotNatural);
    }
    let constraint = |ok: bool, constraint: &'static str| {
        if ok {
            Ok(())
        } else {
            Err(HierarchyError::Constraint {
                family: family.to_string(),
                constraint,
            })
        }
    };
    let p = params;
    let s = &signs;
    let node = match family {
        Power => lead(s[0], w_pow(p[0])),
        PowerSum => join(lead(s[0], w_pow(p[0])), s[1], w_pow(p[1])),
        PowerSumPower => lead(s[0], pow(join(w_pow(p[0]), s[1], w_pow(p[1])), p[2])),
        SinhSinhPower => lead(
            s[0],
            pow(
                join(f_pow(Func::Sinh, p[0]), s[1], f_pow(Func::Sinh, p[1])),
                p[2],
            ),
        ),
        SinhTanhPower => lead(
            s[0],
            pow(
                join(f_pow(Func::Sinh, p[0]), s[1], f_pow(Func::Tanh, p[1])),
                p[2],
            ),
        ),
        TanhTanhPower => lead(
            s[0],
            pow(
                join(f_pow(Func::Tanh, p[0]), s[1], f_pow(Func::Tanh, p[1])),
                p[2],
            ),
        ),
        SinhTimesTanh => {
            constraint(p[0] >= p[1], "n ≥ m")?;
            lead(
                s[0],
                Node::mul(f_pow(Func::Sinh, p[0]), f_pow(Func::Tanh, p[1])),
            )
        }
        SinhOverTanh => {
            constraint(p[0] > p[1], "n > m")?;
            lead(
                s[0],
                Node::div(f_pow(Func::Sinh, p[0]), f_pow(Func::Tanh, p[1])),
            )
        }
        SinhPlusPower => join(lead(s[0], f_pow(Func::Sinh, p[0])), s[1], w_pow(p[1])),
        TanhPlusPower => join(lead(s[0], f_pow(Func::Tanh, p[0])), s[1], w_pow(p[1])),
        SinhTimesPower => lead(s[0], Node::mul(f_pow(Func::Sinh, p[0]), w_pow(p[1]))),
        TanhTimesPower => lead(s[0], Node::mul(f_pow(Func::Tanh, p[0]), w_pow(p[1]))),
        SinhOverPower => {
            constraint(p[0] > p[1], "n > m")?;
            lead(s[0], Node::div(f_pow(Func::Sinh, p[0]), w_pow(p[1])))
        }
        Mixed => {
            constraint(p[0] > p[1], "n > m")?;
            let (n, m, k, pp, q, r, ss, l) = (p[0], p[1], p[2], p[3], p[4], p[5], p[6], p[7]);
            let quotient = Node::div(f_pow(Func::Ln1p, n), f_pow(Func::Tanh, m));
            let inner = join(
                pow(Node::apply(Func::Sin, w_pow(q)), pp),
                s[3],
                pow(Node::apply(Func::Tanh, w_pow(ss)), r),
            );
            join(
                join(lead(s[0], quotient), s[1], f_pow(Func::Sinh, k)),
                s[2],
                pow(inner, l),
            )
        }
    };
    Ok(NonlinExpr::new(node))
}
