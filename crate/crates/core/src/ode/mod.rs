//! Initial-value problems `w'' + N(w) = f(t)` and the integrator behind them.

mod dopri;
mod energy;

pub use dopri::{integrate, SolverError, SolverOptions, Trajectory};
pub use energy::{energy, potential, EnergyError, Potential};

use crate::expr::NonlinExpr;
use crate::forcing::Forcing;

/// `w'' + N(w) = f(t)` on `[t0, horizon]` with `w(t0) = w0`, `w'(t0) = v0`.
///
/// `s` is the impulse scale of the associated Green's function; it only
/// enters the initial data through [`CauchyProblem::homogeneous`].
#[derive(Debug, Clone, PartialEq)]
pub struct CauchyProblem {
    pub nonlin: NonlinExpr,
    pub forcing: Forcing,
    pub s: f64,
    pub w0: f64,
    pub v0: f64,
    pub t0: f64,
    pub horizon: f64,
}

impl CauchyProblem {
    /// General problem; checks the time span and initial data.
    pub fn new(
        nonlin: NonlinExpr,
        forcing: Forcing,
        s: f64,
        w0: f64,
        v0: f64,
        t0: f64,
        horizon: f64,
    ) -> Result<Self, SolverError> {
        if !(horizon > t0) || !horizon.is_finite() || !t0.is_finite() {
            return Err(SolverError::Setup(format!(
                "horizon {horizon} must exceed start time {t0}"
            )));
        }
        if !(w0.is_finite() && v0.is_finite() && s.is_finite()) {
            return Err(SolverError::Setup("initial data must be finite".into()));
        }
        Ok(CauchyProblem {
            nonlin,
            forcing,
            s,
            w0,
            v0,
            t0,
            horizon,
        })
    }

    /// `w0'' + N(w0) = 0`, `w0(0) = 0`, `w0'(0) = s`.
    pub fn homogeneous(nonlin: NonlinExpr, s: f64, horizon: f64) -> Result<Self, SolverError> {
        CauchyProblem::new(nonlin, Forcing::Zero, s, 0.0, s, 0.0, horizon)
    }

    /// `w'' + N(w) = f`, `w(0) = w'(0) = 0`.
    pub fn forced(nonlin: NonlinExpr, forcing: Forcing, horizon: f64) -> Result<Self, SolverError> {
        CauchyProblem::new(nonlin, forcing, 0.0, 0.0, 0.0, 0.0, horizon)
    }

    pub fn is_autonomous(&self) -> bool {
        self.forcing == Forcing::Zero
    }

    /// Right-hand side of the first-order system `(w, v)' = (v, f - N(w))`.
    pub fn rhs(&self, t: f64, y: &[f64], dy: &mut [f64]) -> Result<(), String> {
        let n = self.nonlin.eval(y[0]).map_err(|e| e.to_string())?;
        let f = self.forcing.eval(t).map_err(|e| e.to_string())?;
        dy[0] = y[1];
        dy[1] = f - n;
        Ok(())
    }
}

/// Integrates with default step limits and the forcing's breakpoints as stops.
pub fn solve_ivp(problem: &CauchyProblem, rtol: f64, atol: f64) -> Result<Trajectory, SolverError> {
    solve_ivp_with(problem, &SolverOptions::with_tolerances(rtol, atol))
}

/// As [`solve_ivp`] with explicit options; forcing breakpoints are added to
/// `opts.stops`.
pub fn solve_ivp_with(
    problem: &CauchyProblem,
    opts: &SolverOptions,
) -> Result<Trajectory, SolverError> {
    if problem.forcing == Forcing::Delta {
        return Err(SolverError::Setup(
            "an ideal impulse cannot be integrated pointwise; use a mollified impulse".into(),
        ));
    }
    let mut opts = opts.clone();
    opts.stops.extend(problem.forcing.breakpoints());
    integrate(
        |t, y, dy| problem.rhs(t, y, dy),
        problem.t0,
        &[problem.w0, problem.v0],
        problem.horizon,
        &opts,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_nonlin;

    #[test]
    fn linear_problem_is_sine() {
        let p = CauchyProblem::homogeneous(parse_nonlin("w").unwrap(), 1.0, 10.0).unwrap();
        let traj = solve_ivp(&p, 1e-10, 1e-12).unwrap();
        let worst = traj
            .times()
            .iter()
            .enumerate()
            .map(|(i, &t)| (traj.state(i)[0] - t.sin()).abs())
            .fold(0.0, f64::max);
        assert!(worst < 1e-9, "{worst}");
    }

    #[test]
    fn ideal_impulse_rejected() {
        let p = CauchyProblem::forced(parse_nonlin("w").unwrap(), Forcing::Delta, 1.0).unwrap();
        assert!(matches!(
            solve_ivp(&p, 1e-8, 1e-10),
            Err(SolverError::Setup(_))
        ));
    }

    #[test]
    fn bad_horizon() {
        assert!(CauchyProblem::homogeneous(parse_nonlin("w").unwrap(), 1.0, 0.0).is_err());
    }

    #[test]
    fn domain_violation_reported() {
        // w grows linearly through arctanh's domain edge
        let p = CauchyProblem::new(
            parse_nonlin("0 * arctanh(w)").unwrap(),
            Forcing::Zero,
            1.0,
            0.0,
            1.0,
            0.0,
            2.0,
        )
        .unwrap();
        let err = solve_ivp(&p, 1e-8, 1e-10).unwrap_err();
        assert!(matches!(err, SolverError::Rhs { .. }), "{err}");
        assert!(err.attained_time().unwrap() < 1.0);
    }
}
