//! Membership in the multiplicability class: nonlinearities with
//! `N(θ(t)·w(t)) = θ(t)·N(w(t))`.
//!
//! A structural pass recognises the generating primitives and the closure
//! rules. Whatever it cannot certify is tested numerically on smooth paths
//! `w(t) = t·(c0 + c1 t + c2 t²)` across `t ∈ [-1, 1]`.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::eval::{eval_node, Leading};
use super::theta::heaviside;
use super::{ExprError, Func, Node, NonlinExpr, Symbol};

pub const DEFAULT_MEMBERSHIP_SEED: u64 = 0x6e6c_6772_6565_6e00;

const GRID_POINTS: usize = 200;
const SHRINK_STEPS: i32 = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MembershipStatus {
    MemberStructural,
    MemberNumeric,
    NonMember,
    Unknown,
}

impl MembershipStatus {
    pub fn is_member(self) -> bool {
        matches!(
            self,
            MembershipStatus::MemberStructural | MembershipStatus::MemberNumeric
        )
    }
}

impl fmt::Display for MembershipStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MembershipStatus::MemberStructural => "member-structural",
            MembershipStatus::MemberNumeric => "member-numeric",
            MembershipStatus::NonMember => "non-member",
            MembershipStatus::Unknown => "unknown",
        })
    }
}

/// One step of a structural derivation.
#[derive(Debug, Clone, PartialEq)]
pub enum RuleStep {
    /// `w^n`, `n ∈ ℕ` (the variable itself is `n = 1`).
    PowerPrimitive(i32),
    /// One of the nine transcendental generators applied to `w`.
    Primitive(Func),
    LinearCombination,
    Product,
    IntegerPower(i32),
    /// Quotient of members whose numerator vanishes to higher order at 0.
    Quotient {
        numerator_order: f64,
        denominator_order: f64,
    },
    /// A generator applied to a member expression.
    Composition(Func),
}

impl fmt::Display for RuleStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RuleStep::PowerPrimitive(n) => write!(f, "primitive w^n (n = {n})"),
            RuleStep::Primitive(func) => write!(f, "primitive {}", primitive_label(*func)),
            RuleStep::LinearCombination => f.write_str("closure: linear combination"),
            RuleStep::Product => f.write_str("closure: product"),
            RuleStep::IntegerPower(n) => write!(f, "closure: integer power {n}"),
            RuleStep::Quotient {
                numerator_order,
                denominator_order,
            } => write!(
                f,
                "closure: quotient (vanishing orders {numerator_order} > {denominator_order})"
            ),
            RuleStep::Composition(func) => {
                write!(f, "closure: composition with {}", primitive_label(*func))
            }
        }
    }
}

fn primitive_label(f: Func) -> &'static str {
    match f {
        Func::Ln1p => "ln(1 + w)",
        other => other.name(),
    }
}

/// Smooth test path `w(t) = a·t·(c0 + c1 t + c2 t²)`, squared when the
/// expression needs nonnegative arguments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestPath {
    pub coeffs: [f64; 3],
    pub amplitude: f64,
    pub squared: bool,
}

impl TestPath {
    pub fn value(&self, t: f64) -> f64 {
        let [c0, c1, c2] = self.coeffs;
        let base = self.amplitude * t * (c0 + t * (c1 + t * c2));
        if self.squared {
            base * base
        } else {
            base
        }
    }

    /// The paths drawn for `samples` test runs from `seed`.
    pub fn draw(samples: usize, seed: u64) -> Vec<TestPath> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..samples)
            .map(|_| TestPath {
                coeffs: [
                    rng.random_range(-2.0..=2.0),
                    rng.random_range(-2.0..=2.0),
                    rng.random_range(-2.0..=2.0),
                ],
                amplitude: 1.0,
                squared: false,
            })
            .collect()
    }
}

/// Symmetric test grid on `[-1, 1]` that never contains `t = 0`.
pub fn test_grid() -> Vec<f64> {
    let h = 2.0 / GRID_POINTS as f64;
    (0..GRID_POINTS)
        .map(|j| -1.0 + (j as f64 + 0.5) * h)
        .collect()
}

/// A point where the identity fails.
#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub t: f64,
    pub path: TestPath,
    /// `N(θ·w)`, `None` when undefined.
    pub lhs: Option<f64>,
    /// `θ·N(w)`, `None` when undefined.
    pub rhs: Option<f64>,
    pub reason: String,
}

impl Witness {
    /// Re-evaluates the identity at the witness; true if it still fails.
    pub fn reproduces(&self, expr: &NonlinExpr, tol: f64) -> bool {
        match identity_at(expr, &self.path, self.t) {
            Err(_) => true,
            Ok(p) => p.violation(tol),
        }
    }
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |v: Option<f64>| v.map_or("undefined".to_string(), |x| format!("{x:e}"));
        write!(
            f,
            "t = {}, w(t) = {}: N(θ·w) = {}, θ·N(w) = {} ({})",
            self.t,
            self.path.value(self.t),
            show(self.lhs),
            show(self.rhs),
            self.reason
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SkippedPath {
    pub path: TestPath,
    pub error: ExprError,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MembershipVerdict {
    pub status: MembershipStatus,
    pub witness: Option<Witness>,
    pub rule_trace: Vec<RuleStep>,
    pub notes: Vec<String>,
    pub skipped: Vec<SkippedPath>,
}

impl MembershipVerdict {
    fn structural(trace: Vec<RuleStep>) -> Self {
        MembershipVerdict {
            status: MembershipStatus::MemberStructural,
            witness: None,
            rule_trace: trace,
            notes: Vec::new(),
            skipped: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MembershipError {
    #[error("tolerance must be positive and finite, got {0}")]
    Tolerance(f64),
    #[error("at least one sample path is required")]
    NoSamples,
    #[error("membership is defined for expressions in w")]
    WrongVariable,
}

enum Shape {
    Const(f64),
    Member,
    Other,
}

fn structural(node: &Node, trace: &mut Vec<RuleStep>) -> Shape {
    use Shape::*;
    match node {
        Node::Var => {
            trace.push(RuleStep::PowerPrimitive(1));
            Member
        }
        Node::Const(c) => Const(*c),
        Node::Neg(a) => match structural(a, trace) {
            Const(c) => Const(-c),
            Member => {
                trace.push(RuleStep::LinearCombination);
                Member
            }
            Other => Other,
        },
        Node::Add(a, b) | Node::Sub(a, b) => {
            let sa = structural(a, trace);
            let sb = structural(b, trace);
            match (sa, sb) {
                (Member, Member) => {
                    trace.push(RuleStep::LinearCombination);
                    Member
                }
                (Member, Const(c)) | (Const(c), Member) if c == 0.0 => Member,
                (Const(x), Const(y)) => {
                    if matches!(node, Node::Add(..)) {
                        Const(x + y)
                    } else {
                        Const(x - y)
                    }
                }
                _ => Other,
            }
        }
        Node::Mul(a, b) => {
            let sa = structural(a, trace);
            let sb = structural(b, trace);
            match (sa, sb) {
                (Member, Member) => {
                    trace.push(RuleStep::Product);
                    Member
                }
                (Member, Const(c)) | (Const(c), Member) if c.is_finite() => {
                    trace.push(RuleStep::LinearCombination);
                    Member
                }
                (Const(x), Const(y)) => Const(x * y),
                _ => Other,
            }
        }
        Node::Div(a, b) => {
            let sa = structural(a, trace);
            let sb = structural(b, trace);
            match (sa, sb) {
                (Member, Const(c)) if c != 0.0 && c.is_finite() => {
                    trace.push(RuleStep::LinearCombination);
                    Member
                }
                (Member, Member) => match (a.leading_term(), b.leading_term()) {
                    (
                        Some(Leading::Term { order: ka, .. }),
                        Some(Leading::Term { order: kb, .. }),
                    ) if ka > kb => {
                        trace.push(RuleStep::Quotient {
                            numerator_order: ka,
                            denominator_order: kb,
                        });
                        Member
                    }
                    _ => Other,
                },
                (Const(x), Const(y)) if y != 0.0 => Const(x / y),
                _ => Other,
            }
        }
        Node::PowI(a, n) => {
            if **a == Node::Var && *n >= 1 {
                trace.push(RuleStep::PowerPrimitive(*n));
                return Member;
            }
            match structural(a, trace) {
                Member if *n >= 1 => {
                    trace.push(RuleStep::IntegerPower(*n));
                    Member
                }
                Const(c) => Const(c.powi(*n)),
                _ => Other,
            }
        }
        Node::PowR(a, r) => match structural(a, trace) {
            Const(c) if c > 0.0 => Const(c.powf(*r)),
            _ => Other,
        },
        Node::Apply(f, a) => {
            if **a == Node::Var && f.is_class_primitive() {
                trace.push(RuleStep::Primitive(*f));
                return Member;
            }
            match structural(a, trace) {
                Member if f.is_class_primitive() => {
                    trace.push(RuleStep::Composition(*f));
                    Member
                }
                Const(c) => match f.apply(c) {
                    Some(v) => Const(v),
                    None => Other,
                },
                _ => Other,
            }
        }
    }
}

struct PointCheck {
    lhs: f64,
    rhs: f64,
    scale: f64,
}

impl PointCheck {
    fn violation(&self, tol: f64) -> bool {
        !((self.lhs - self.rhs).abs() <= tol * (1.0 + self.scale))
    }
}

fn identity_at(expr: &NonlinExpr, path: &TestPath, t: f64) -> Result<PointCheck, ExprError> {
    let w = path.value(t);
    let th = heaviside(t);
    let nw = eval_node(expr.root(), Symbol::W, w)?;
    let lhs = eval_node(expr.root(), Symbol::W, th * w)?;
    Ok(PointCheck {
        lhs,
        rhs: th * nw,
        scale: nw.abs(),
    })
}

/// Normalised residual `max|N(θ·w) − θ·N(w)| / (1 + max|N(w)|)` along a path.
pub fn identity_residual(
    expr: &NonlinExpr,
    path: &TestPath,
    grid: &[f64],
) -> Result<f64, ExprError> {
    let mut worst = 0.0f64;
    let mut scale = 0.0f64;
    for &t in grid {
        let p = identity_at(expr, path, t)?;
        worst = worst.max((p.lhs - p.rhs).abs());
        scale = scale.max(p.scale);
    }
    Ok(worst / (1.0 + scale))
}

/// Path variants tried in order: shrinking amplitude, then nonnegative.
fn variants(base: TestPath) -> impl Iterator<Item = TestPath> {
    [false, true].into_iter().flat_map(move |squared| {
        (0..=SHRINK_STEPS).map(move |r| TestPath {
            amplitude: 0.5f64.powi(r),
            squared,
            ..base
        })
    })
}

enum PathOutcome {
    Pass(TestPath),
    Fail(Witness),
    Skipped(ExprError),
}

fn run_path(expr: &NonlinExpr, base: TestPath, grid: &[f64], tol: f64) -> PathOutcome {
    let mut first_error = None;
    'variant: for path in variants(base) {
        let mut checks = Vec::with_capacity(grid.len());
        for &t in grid {
            match identity_at(expr, &path, t) {
                Ok(p) => checks.push((t, p)),
                Err(e) => {
                    first_error.get_or_insert(e);
                    continue 'variant;
                }
            }
        }
        if let Some((t, p)) = checks.iter().find(|(_, p)| p.violation(tol)) {
            return PathOutcome::Fail(Witness {
                t: *t,
                path,
                lhs: Some(p.lhs),
                rhs: Some(p.rhs),
                reason: "identity violated beyond tolerance".into(),
            });
        }
        return PathOutcome::Pass(path);
    }
    PathOutcome::Skipped(first_error.expect("at least one variant was tried"))
}

/// [`check_membership_seeded`] with the default path seed.
pub fn check_membership(
    expr: &NonlinExpr,
    tol: f64,
    samples: usize,
) -> Result<MembershipVerdict, MembershipError> {
    check_membership_seeded(expr, tol, samples, DEFAULT_MEMBERSHIP_SEED)
}

pub fn check_membership_seeded(
    expr: &NonlinExpr,
    tol: f64,
    samples: usize,
    seed: u64,
) -> Result<MembershipVerdict, MembershipError> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(MembershipError::Tolerance(tol));
    }
    if samples == 0 {
        return Err(MembershipError::NoSamples);
    }
    if expr.symbol() != Symbol::W {
        return Err(MembershipError::WrongVariable);
    }

    let mut trace = Vec::new();
    if let Shape::Member = structural(expr.root(), &mut trace) {
        return Ok(MembershipVerdict::structural(trace));
    }

    let paths = TestPath::draw(samples, seed);
    let non_member = |witness: Witness| MembershipVerdict {
        status: MembershipStatus::NonMember,
        witness: Some(witness),
        rule_trace: Vec::new(),
        notes: Vec::new(),
        skipped: Vec::new(),
    };

    // Necessary condition: for t < 0 the identity reads N(0) = 0.
    let probe_t = -0.5;
    match eval_node(expr.root(), Symbol::W, 0.0) {
        Err(e) => {
            let rhs = eval_node(expr.root(), Symbol::W, paths[0].value(probe_t))
                .ok()
                .map(|v| heaviside(probe_t) * v);
            return Ok(non_member(Witness {
                t: probe_t,
                path: paths[0],
                lhs: None,
                rhs,
                reason: format!("N(0) is undefined: {e}"),
            }));
        }
        Ok(n0) if !(n0.abs() <= tol) => {
            let rhs = eval_node(expr.root(), Symbol::W, paths[0].value(probe_t))
                .ok()
                .map(|v| heaviside(probe_t) * v);
            return Ok(non_member(Witness {
                t: probe_t,
                path: paths[0],
                lhs: Some(n0),
                rhs,
                reason: format!("N(0) = {n0} ≠ 0"),
            }));
        }
        Ok(_) => {}
    }

    let grid = test_grid();
    let mut skipped = Vec::new();
    let mut passed = 0usize;
    let mut shrunk = false;
    let mut nonnegative = false;
    for base in paths {
        match run_path(expr, base, &grid, tol) {
            PathOutcome::Pass(p) => {
                passed += 1;
                shrunk |= p.amplitude < 1.0;
                nonnegative |= p.squared;
            }
            PathOutcome::Fail(w) => return Ok(non_member(w)),
            PathOutcome::Skipped(error) => skipped.push(SkippedPath { path: base, error }),
        }
    }

    let mut notes = Vec::new();
    if nonnegative {
        notes.push("domain restricted: identity checked on nonnegative paths w(t) ≥ 0".into());
    }
    if shrunk {
        notes.push("some path amplitudes were reduced to stay in the domain".into());
    }
    if expr.root().has_real_power() {
        notes.push("real exponents are supported numerically only (unproved)".into());
    }
    if !skipped.is_empty() {
        notes.push(format!("{} of {} paths skipped", skipped.len(), samples));
    }
    Ok(MembershipVerdict {
        status: if passed > 0 {
            MembershipStatus::MemberNumeric
        } else {
            MembershipStatus::Unknown
        },
        witness: None,
        rule_trace: Vec::new(),
        notes,
        skipped,
    })
}
