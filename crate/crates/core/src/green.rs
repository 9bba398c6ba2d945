//! Green's functions `G(t) = θ(t)·w₀(t)`: closed-form catalog entries and
//! numeric homogeneous solves, plus validation against mollified impulses.

use std::f64::consts::SQRT_2;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::elliptic::{jacobi_am, jacobi_sn_cn_dn};
use crate::expr::{check_membership, parse_nonlin, MembershipStatus, NonlinExpr};
use crate::forcing::Forcing;
use crate::ode::{solve_ivp_with, CauchyProblem, SolverError, SolverOptions, Trajectory};

/// Tolerances of numeric homogeneous solves.
pub const GREEN_RTOL: f64 = 1e-12;
pub const GREEN_ATOL: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GreenError {
    #[error("`{0}` is not in the multiplicability class; an exponential-type term needs the two-branch Liouville treatment")]
    NonMember(String),
    #[error("membership of `{0}` could not be decided")]
    UndecidedMembership(String),
    #[error("impulse scale s must be nonzero and finite")]
    ZeroScale,
    #[error("horizon must be positive and finite")]
    BadHorizon,
    #[error("unknown catalog entry `{0}` (expected cubic, sine, sinh or liouville)")]
    UnknownEntry(String),
    #[error("catalog entry `{name}` has fixed scale s = {expected}, got {found}")]
    IncompatibleScale {
        name: &'static str,
        expected: f64,
        found: f64,
    },
    #[error("liouville needs epsilon > 1/16 so that tanh φ = -1/(4√ε) is solvable, got {0}")]
    LiouvilleConstraint(f64),
    #[error("liouville needs an explicit epsilon")]
    MissingEpsilon,
    #[error("solver stopped at t = {attained} before the horizon: {source}")]
    BlowUp {
        attained: f64,
        source: SolverError,
        partial: Box<GreenFn>,
    },
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("t = {t} is outside the solved range [0, {horizon}]")]
    OutsideRange { t: f64, horizon: f64 },
    #[error("evaluation failed at t = {t}: {message}")]
    Eval { t: f64, message: String },
}

/// Closed-form entries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CatalogEntry {
    /// `2^{1/4}·sn(t/2^{1/4} | -1)`, `N = w³`, `s = 1`.
    Cubic,
    /// `2·am(t/√2 | 2)`, `N = sin w`, `s = √2`.
    Sine,
    /// `2·asinh(sc(st/2 | 1 + 4/s²))`, `N = sinh w`, any `s`.
    Sinh { s: f64 },
    /// Two branches `2 ln(√(2ε)/cosh(√ε t ± φ))`, `N = exp w`, jump 1.
    Liouville { epsilon: f64, phi: f64 },
}

const FOURTH_ROOT_2: f64 = 1.189_207_115_002_721;

impl CatalogEntry {
    pub const NAMES: [&'static str; 4] = ["cubic", "sine", "sinh", "liouville"];

    pub fn name(&self) -> &'static str {
        match self {
            CatalogEntry::Cubic => "cubic",
            CatalogEntry::Sine => "sine",
            CatalogEntry::Sinh { .. } => "sinh",
            CatalogEntry::Liouville { .. } => "liouville",
        }
    }

    pub fn nonlin(&self) -> NonlinExpr {
        let src = match self {
            CatalogEntry::Cubic => "w^3",
            CatalogEntry::Sine => "sin(w)",
            CatalogEntry::Sinh { .. } => "sinh(w)",
            CatalogEntry::Liouville { .. } => "exp(w)",
        };
        parse_nonlin(src).expect("catalog source parses")
    }

    pub fn s(&self) -> f64 {
        match self {
            CatalogEntry::Cubic | CatalogEntry::Liouville { .. } => 1.0,
            CatalogEntry::Sine => SQRT_2,
            CatalogEntry::Sinh { s } => *s,
        }
    }

    /// Window on which the entry was checked against numeric solves.
    pub fn window(&self) -> (f64, f64) {
        match self {
            CatalogEntry::Liouville { .. } => (-3.0, 3.0),
            _ => (0.0, 10.0),
        }
    }

    /// True for entries with `G(0⁺) = 0`, i.e. all but Liouville.
    pub fn has_zero_start(&self) -> bool {
        !matches!(self, CatalogEntry::Liouville { .. })
    }

    pub fn notes(&self) -> &'static str {
        match self {
            CatalogEntry::Cubic => "sn with m = -1; periodic, real for all t",
            CatalogEntry::Sine => "am with m = 2; libration bounded by pi/2",
            CatalogEntry::Sinh { .. } => "real form of -2i am(i s t/2 | -4/s^2); cn stays positive",
            CatalogEntry::Liouville { .. } => "not in the class; G(0) != 0, derivative jump 1",
        }
    }

    pub fn parameters(&self) -> String {
        match self {
            CatalogEntry::Cubic => "m=-1".into(),
            CatalogEntry::Sine => "m=2".into(),
            CatalogEntry::Sinh { s } => format!("m={:?}", 1.0 + 4.0 / (s * s)),
            CatalogEntry::Liouville { epsilon, phi } => format!("epsilon={epsilon:?};phi={phi:?}"),
        }
    }

    /// Smooth factor `w₀(t)` (for Liouville, the branch selected by `sign(t)`).
    pub fn w0(&self, t: f64) -> f64 {
        match *self {
            CatalogEntry::Cubic => {
                FOURTH_ROOT_2
                    * jacobi_sn_cn_dn(t / FOURTH_ROOT_2, -1.0)
                        .expect("real window")
                        .0
            }
            CatalogEntry::Sine => 2.0 * jacobi_am(t / SQRT_2, 2.0).expect("real window"),
            CatalogEntry::Sinh { s } => {
                let (sn, cn, _) =
                    jacobi_sn_cn_dn(0.5 * s * t, 1.0 + 4.0 / (s * s)).expect("real window");
                2.0 * (sn / cn).asinh()
            }
            CatalogEntry::Liouville { epsilon, phi } => {
                let arg = epsilon.sqrt() * t + if t >= 0.0 { phi } else { -phi };
                2.0 * ((2.0 * epsilon).sqrt().ln() - ln_cosh(arg))
            }
        }
    }

    /// `w₀'(t)`.
    pub fn w0_derivative(&self, t: f64) -> f64 {
        match *self {
            CatalogEntry::Cubic => {
                let (_, cn, dn) = jacobi_sn_cn_dn(t / FOURTH_ROOT_2, -1.0).expect("real window");
                cn * dn
            }
            CatalogEntry::Sine => SQRT_2 * jacobi_sn_cn_dn(t / SQRT_2, 2.0).expect("real window").2,
            CatalogEntry::Sinh { s } => {
                let (_, cn, dn) =
                    jacobi_sn_cn_dn(0.5 * s * t, 1.0 + 4.0 / (s * s)).expect("real window");
                s * dn / cn
            }
            CatalogEntry::Liouville { epsilon, phi } => {
                let arg = epsilon.sqrt() * t + if t >= 0.0 { phi } else { -phi };
                -2.0 * epsilon.sqrt() * arg.tanh()
            }
        }
    }

    /// `G'' + N(G)` at `t ≠ 0`, with `G''` by a fourth-order central
    /// difference of `G'`. Stencils stay on one side of 0.
    pub fn residual(&self, t: f64) -> f64 {
        let h = (1e-3f64).min(0.25 * t.abs());
        let d = |x: f64| self.w0_derivative(x);
        let g2 = (d(t - 2.0 * h) - 8.0 * d(t - h) + 8.0 * d(t + h) - d(t + 2.0 * h)) / (12.0 * h);
        let n = self.nonlin().eval(self.w0(t)).unwrap_or(f64::NAN);
        g2 + n
    }
}

fn ln_cosh(x: f64) -> f64 {
    let a = x.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

impl fmt::Display for CatalogEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.name(), self.parameters())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GreenSource {
    Catalog(CatalogEntry),
    /// Homogeneous trajectory of `(w₀, w₀')` on `[0, horizon]`.
    Numeric {
        nonlin: NonlinExpr,
        traj: Arc<Trajectory>,
    },
}

/// `G(t) = θ(t)·w₀(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GreenFn {
    source: GreenSource,
    s: f64,
}

impl GreenFn {
    pub fn from_catalog(entry: CatalogEntry) -> Self {
        GreenFn {
            s: entry.s(),
            source: GreenSource::Catalog(entry),
        }
    }

    pub fn source(&self) -> &GreenSource {
        &self.source
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn nonlin(&self) -> NonlinExpr {
        match &self.source {
            GreenSource::Catalog(e) => e.nonlin(),
            GreenSource::Numeric { nonlin, .. } => nonlin.clone(),
        }
    }

    pub fn catalog_entry(&self) -> Option<&CatalogEntry> {
        match &self.source {
            GreenSource::Catalog(e) => Some(e),
            GreenSource::Numeric { .. } => None,
        }
    }

    /// Largest `t` at which `G` can be evaluated.
    pub fn horizon(&self) -> f64 {
        match &self.source {
            GreenSource::Catalog(_) => f64::INFINITY,
            GreenSource::Numeric { traj, .. } => traj.t_end(),
        }
    }

    fn is_liouville(&self) -> bool {
        matches!(
            self.source,
            GreenSource::Catalog(CatalogEntry::Liouville { .. })
        )
    }

    /// `w₀(t)` for `t ≥ 0`.
    pub fn w0(&self, t: f64) -> Result<f64, GreenError> {
        match &self.source {
            GreenSource::Catalog(e) => Ok(e.w0(t)),
            GreenSource::Numeric { traj, .. } => {
                traj.eval_component(t, 0).ok_or(GreenError::OutsideRange {
                    t,
                    horizon: traj.t_end(),
                })
            }
        }
    }

    /// `G(t)`. Zero for `t ≤ 0`, except Liouville whose `t < 0` branch is
    /// nonzero and whose `G(0)` is the common limit of both branches.
    pub fn value(&self, t: f64) -> Result<f64, GreenError> {
        if self.is_liouville() {
            return self.w0(t);
        }
        if t <= 0.0 {
            return Ok(0.0);
        }
        self.w0(t)
    }

    /// `G'(t)`; at `t = 0` the right-hand limit.
    pub fn derivative(&self, t: f64) -> Result<f64, GreenError> {
        if !self.is_liouville() && t < 0.0 {
            return Ok(0.0);
        }
        match &self.source {
            GreenSource::Catalog(e) => Ok(e.w0_derivative(t)),
            GreenSource::Numeric { traj, .. } => {
                traj.eval_component(t, 1).ok_or(GreenError::OutsideRange {
                    t,
                    horizon: traj.t_end(),
                })
            }
        }
    }

    pub fn sample(&self, grid: &[f64]) -> Result<Vec<f64>, GreenError> {
        grid.iter().map(|&t| self.value(t)).collect()
    }
}

fn check_scale(s: f64) -> Result<(), GreenError> {
    if s == 0.0 || !s.is_finite() {
        Err(GreenError::ZeroScale)
    } else {
        Ok(())
    }
}

/// Numeric `G` from the homogeneous solve, default tolerances.
pub fn green_numeric(nonlin: &NonlinExpr, s: f64, horizon: f64) -> Result<GreenFn, GreenError> {
    green_numeric_with(
        nonlin,
        s,
        horizon,
        &SolverOptions::with_tolerances(GREEN_RTOL, GREEN_ATOL),
    )
}

/// Numeric `G` with explicit solver options.
pub fn green_numeric_with(
    nonlin: &NonlinExpr,
    s: f64,
    horizon: f64,
    opts: &SolverOptions,
) -> Result<GreenFn, GreenError> {
    check_scale(s)?;
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(GreenError::BadHorizon);
    }
    let verdict = check_membership(nonlin, 1e-9, 8)
        .map_err(|_| GreenError::UndecidedMembership(nonlin.to_string()))?;
    match verdict.status {
        MembershipStatus::MemberStructural | MembershipStatus::MemberNumeric => {}
        MembershipStatus::NonMember => return Err(GreenError::NonMember(nonlin.to_string())),
        MembershipStatus::Unknown => {
            return Err(GreenError::UndecidedMembership(nonlin.to_string()))
        }
    }
    let problem = CauchyProblem::homogeneous(nonlin.clone(), s, horizon)?;
    match solve_ivp_with(&problem, opts) {
        Ok(traj) => Ok(GreenFn {
            source: GreenSource::Numeric {
                nonlin: nonlin.clone(),
                traj: Arc::new(traj),
            },
            s,
        }),
        Err(e) => match e.partial() {
            Some(partial) => Err(GreenError::BlowUp {
                attained: partial.t_end(),
                partial: Box::new(GreenFn {
                    source: GreenSource::Numeric {
                        nonlin: nonlin.clone(),
                        traj: Arc::new(partial.clone()),
                    },
                    s,
                }),
                source: e,
            }),
            None => Err(GreenError::Solver(e)),
        },
    }
}

/// `φ = -arctanh(1/(4√ε))` for `ε > 1/16`.
pub fn liouville_phi(epsilon: f64) -> Result<f64, GreenError> {
    if !(epsilon > 1.0 / 16.0) || !epsilon.is_finite() {
        return Err(GreenError::LiouvilleConstraint(epsilon));
    }
    Ok(-(0.25 / epsilon.sqrt()).atanh())
}

/// Two-branch Liouville entry.
pub fn liouville_green(epsilon: f64) -> Result<GreenFn, GreenError> {
    let phi = liouville_phi(epsilon)?;
    Ok(GreenFn::from_catalog(CatalogEntry::Liouville {
        epsilon,
        phi,
    }))
}

/// Catalog lookup. `s` must match the entry's intrinsic scale for cubic,
/// sine and liouville; sinh accepts any nonzero `s`. `epsilon` is required
/// for liouville and ignored otherwise.
pub fn green_catalog(name: &str, s: f64, epsilon: Option<f64>) -> Result<GreenFn, GreenError> {
    check_scale(s)?;
    let fixed = |name: &'static str, expected: f64, entry: CatalogEntry| {
        if (s - expected).abs() <= 1e-12 * expected {
            Ok(GreenFn::from_catalog(entry))
        } else {
            Err(GreenError::IncompatibleScale {
                name,
                expected,
                found: s,
            })
        }
    };
    match name {
        "cubic" => fixed("cubic", 1.0, CatalogEntry::Cubic),
        "sine" => fixed("sine", SQRT_2, CatalogEntry::Sine),
        "sinh" => Ok(GreenFn::from_catalog(CatalogEntry::Sinh { s })),
        "liouville" => {
            let epsilon = epsilon.ok_or(GreenError::MissingEpsilon)?;
            let g = liouville_green(epsilon)?;
            fixed("liouville", 1.0, *g.catalog_entry().unwrap())
        }
        other => Err(GreenError::UnknownEntry(other.to_string())),
    }
}

/// Finds the catalog entry matching `nonlin` and `s`, if any.
pub fn catalog_match(nonlin: &NonlinExpr, s: f64) -> Option<GreenFn> {
    let src = nonlin.to_string();
    let name = match src.as_str() {
        "w^3" => "cubic",
        "sin(w)" => "sine",
        "sinh(w)" => "sinh",
        _ => return None,
    };
    green_catalog(name, s, None).ok()
}

/// Catalog as CSV: `name,parameters,s,window_start,window_end,notes`.
/// Liouville is listed with `epsilon` when given.
pub fn catalog_csv(sinh_s: f64, epsilon: Option<f64>) -> String {
    let mut entries = vec![
        CatalogEntry::Cubic,
        CatalogEntry::Sine,
        CatalogEntry::Sinh { s: sinh_s },
    ];
    if let Some(eps) = epsilon {
        if let Ok(phi) = liouville_phi(eps) {
            entries.push(CatalogEntry::Liouville { epsilon: eps, phi });
        }
    }
    let mut out = String::from("name,parameters,s,window_start,window_end,notes\n");
    for e in entries {
        let (a, b) = e.window();
        out.push_str(&format!(
            "{},{},{:.16e},{:.16e},{:.16e},{}\n",
            e.name(),
            e.parameters(),
            e.s(),
            a,
            b,
            e.notes()
        ));
    }
    out
}

/// One row of [`validate_distributional`].
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionalRow {
    pub eta: f64,
    /// `sup |w - G|` over `[2η, horizon]`, or the failure message.
    pub sup_error: Result<f64, String>,
    /// `sup |w|` over `t < -η`, before the impulse support.
    pub rest_violation: f64,
}

/// Solves `w'' + N(w) = s·δ_η` on `[-0.2, horizon]` from rest for each `η`
/// and compares with `G` on `[2η, horizon]`.
pub fn validate_distributional(
    g: &GreenFn,
    nonlin: &NonlinExpr,
    etas: &[f64],
    horizon: f64,
) -> Result<Vec<DistributionalRow>, GreenError> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(GreenError::BadHorizon);
    }
    let t_start = -0.2;
    let samples = 2000;
    etas.iter()
        .map(|&eta| {
            let forcing = Forcing::mollified(eta, g.s()).map_err(|e| GreenError::Eval {
                t: 0.0,
                message: e.to_string(),
            })?;
            let problem =
                CauchyProblem::new(nonlin.clone(), forcing, g.s(), 0.0, 0.0, t_start, horizon)?;
            let opts = SolverOptions {
                rtol: GREEN_RTOL,
                atol: GREEN_ATOL,
                max_step: eta,
                ..Default::default()
            };
            let traj = match solve_ivp_with(&problem, &opts) {
                Ok(t) => t,
                Err(e) => {
                    return Ok(DistributionalRow {
                        eta,
                        sup_error: Err(e.to_string()),
                        rest_violation: f64::NAN,
                    })
                }
            };
            let rest_violation = traj
                .times()
                .iter()
                .enumerate()
                .filter(|(_, &t)| t < -eta)
                .map(|(i, _)| traj.state(i)[0].abs())
                .fold(0.0, f64::max);
            let lo = 2.0 * eta;
            let mut sup: f64 = 0.0;
            let node_times = traj.times().iter().copied().filter(|&t| t >= lo);
            let uniform = (0..=samples).map(|i| lo + (horizon - lo) * i as f64 / samples as f64);
            for t in node_times.chain(uniform) {
                let w = traj.eval_component(t, 0).expect("inside trajectory");
                sup = sup.max((w - g.value(t)?).abs());
            }
            Ok(DistributionalRow {
                eta,
                sup_error: Ok(sup),
                rest_violation,
            })
        })
        .collect()
}
