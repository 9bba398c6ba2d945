//! Dormand–Prince 5(4) with FSAL, PI step control and Hairer's
//! fourth-order continuous extension.

use thiserror::Error;

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const SAFETY: f64 = 0.9;
const BETA: f64 = 0.04;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 5.0;

/// Integrator settings.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Upper bound on `|h|`.
    pub max_step: f64,
    /// Initial step; estimated when `None`.
    pub h0: Option<f64>,
    /// Times that must be hit exactly. The right-hand side is re-evaluated
    /// after each one, so forcing may be non-smooth there.
    pub stops: Vec<f64>,
    /// Accepted plus rejected steps.
    pub max_steps: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            rtol: 1e-10,
            atol: 1e-12,
            max_step: f64::INFINITY,
            h0: None,
            stops: Vec::new(),
            max_steps: 2_000_000,
        }
    }
}

impl SolverOptions {
    pub fn with_tolerances(rtol: f64, atol: f64) -> Self {
        SolverOptions {
            rtol,
            atol,
            ..Default::default()
        }
    }
}

/// Accepted steps of one integration, with dense output.
///
/// Times are strictly monotone in the direction of integration.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    dim: usize,
    times: Vec<f64>,
    states: Vec<f64>,
    derivs: Vec<f64>,
    // Four coefficient vectors per step; the fifth is the step's start state.
    dense: Vec<f64>,
}

impl Trajectory {
    fn start(dim: usize, t0: f64, y0: &[f64], f0: &[f64]) -> Self {
        Trajectory {
            dim,
            times: vec![t0],
            states: y0.to_vec(),
            derivs: f0.to_vec(),
            dense: Vec::new(),
        }
    }

    /// Interpolant order of the dense output.
    pub const INTERPOLANT_ORDER: usize = 4;

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn state(&self, i: usize) -> &[f64] {
        &self.states[i * self.dim..(i + 1) * self.dim]
    }

    /// Right-hand side evaluated at node `i`.
    pub fn derivative(&self, i: usize) -> &[f64] {
        &self.derivs[i * self.dim..(i + 1) * self.dim]
    }

    pub fn t_start(&self) -> f64 {
        self.times[0]
    }

    pub fn t_end(&self) -> f64 {
        *self.times.last().unwrap()
    }

    pub fn last_state(&self) -> &[f64] {
        self.state(self.len() - 1)
    }

    /// Component `c` at every node.
    pub fn component(&self, c: usize) -> Vec<f64> {
        (0..self.len()).map(|i| self.state(i)[c]).collect()
    }

    fn forward(&self) -> bool {
        self.len() < 2 || self.times[1] > self.times[0]
    }

    /// True if `t` lies between the first and last node.
    pub fn covers(&self, t: f64) -> bool {
        let (a, b) = (self.t_start(), self.t_end());
        t >= a.min(b) && t <= a.max(b)
    }

    /// Index `j` of the step `[times[j], times[j+1]]` containing `t`, or the
    /// node index itself on an exact hit.
    fn locate(&self, t: f64) -> Result<usize, usize> {
        if self.forward() {
            self.times.binary_search_by(|x| x.partial_cmp(&t).unwrap())
        } else {
            self.times.binary_search_by(|x| t.partial_cmp(x).unwrap())
        }
        .map_err(|insert| insert.saturating_sub(1).min(self.len().saturating_sub(2)))
    }

    /// Dense evaluation of component `c`; `None` outside the covered range.
    pub fn eval_component(&self, t: f64, c: usize) -> Option<f64> {
        if !t.is_finite() || !self.covers(t) {
            return None;
        }
        match self.locate(t) {
            Ok(i) => Some(self.state(i)[c]),
            Err(j) => {
                let (t0, t1) = (self.times[j], self.times[j + 1]);
                let theta = (t - t0) / (t1 - t0);
                let theta1 = 1.0 - theta;
                let base = j * 4 * self.dim;
                let r = |k: usize| self.dense[base + k * self.dim + c];
                let y0 = self.state(j)[c];
                Some(y0 + theta * (r(0) + theta1 * (r(1) + theta * (r(2) + theta1 * r(3)))))
            }
        }
    }

    /// Dense evaluation of the full state.
    pub fn eval(&self, t: f64) -> Option<Vec<f64>> {
        (0..self.dim).map(|c| self.eval_component(t, c)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("invalid solver setup: {0}")]
    Setup(String),
    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepUnderflow {
        t: f64,
        h: f64,
        partial: Box<Trajectory>,
    },
    #[error("non-finite state near t = {t}")]
    NonFinite { t: f64, partial: Box<Trajectory> },
    #[error("right-hand side failed near t = {t}: {message}")]
    Rhs {
        t: f64,
        message: String,
        partial: Box<Trajectory>,
    },
    #[error("step budget of {steps} exhausted at t = {t}")]
    MaxSteps {
        t: f64,
        steps: usize,
        partial: Box<Trajectory>,
    },
}

impl SolverError {
    /// Trajectory up to the last accepted step.
    pub fn partial(&self) -> Option<&Trajectory> {
        match self {
            SolverError::Setup(_) => None,
            SolverError::StepUnderflow { partial, .. }
            | SolverError::NonFinite { partial, .. }
            | SolverError::Rhs { partial, .. }
            | SolverError::MaxSteps { partial, .. } => Some(partial),
        }
    }

    /// Last time the solution is reliable.
    pub fn attained_time(&self) -> Option<f64> {
        self.partial().map(Trajectory::t_end)
    }
}

enum Failure {
    NonFinite,
    Rhs(String),
}

fn weighted_rms(dim: usize, v: impl Fn(usize) -> f64, scale: impl Fn(usize) -> f64) -> f64 {
    let sum: f64 = (0..dim)
        .map(|i| {
            let r = v(i) / scale(i);
            r * r
        })
        .sum();
    (sum / dim as f64).sqrt()
}

struct Stepper<F> {
    f: F,
    dim: usize,
    k: [Vec<f64>; 7],
    ytmp: Vec<f64>,
    ynew: Vec<f64>,
}

impl<F> Stepper<F>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<(), String>,
{
    fn eval(&mut self, t: f64, stage: usize, y_is_tmp: bool) -> Result<(), Failure> {
        let y = if y_is_tmp { &self.ytmp } else { &self.ynew };
        (self.f)(t, y, &mut self.k[stage]).map_err(Failure::Rhs)?;
        if self.k[stage].iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(Failure::NonFinite)
        }
    }

    fn combo(&mut self, y: &[f64], h: f64, coeffs: &[(usize, f64)]) {
        for i in 0..self.dim {
            let mut acc = 0.0;
            for &(s, a) in coeffs {
                acc += a * self.k[s][i];
            }
            self.ytmp[i] = y[i] + h * acc;
        }
    }

    /// Stages 2..7 given `k[0] = f(t, y)`. Leaves the fifth-order solution in
    /// `ynew` and `f(t+h, ynew)` in `k[6]`.
    fn step(&mut self, t: f64, y: &[f64], h: f64, t_new: f64) -> Result<(), Failure> {
        self.combo(y, h, &[(0, A21)]);
        self.eval(t + C2 * h, 1, true)?;
        self.combo(y, h, &[(0, A31), (1, A32)]);
        self.eval(t + C3 * h, 2, true)?;
        self.combo(y, h, &[(0, A41), (1, A42), (2, A43)]);
        self.eval(t + C4 * h, 3, true)?;
        self.combo(y, h, &[(0, A51), (1, A52), (2, A53), (3, A54)]);
        self.eval(t + C5 * h, 4, true)?;
        self.combo(y, h, &[(0, A61), (1, A62), (2, A63), (3, A64), (4, A65)]);
        self.eval(t_new, 5, true)?;
        self.combo(y, h, &[(0, A71), (2, A73), (3, A74), (4, A75), (5, A76)]);
        std::mem::swap(&mut self.ytmp, &mut self.ynew);
        self.eval(t_new, 6, false)?;
        if self.ynew.iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(Failure::NonFinite)
        }
    }

    fn error_norm(&self, y: &[f64], h: f64, rtol: f64, atol: f64) -> f64 {
        let k = &self.k;
        weighted_rms(
            self.dim,
            |i| {
                h * (E1 * k[0][i]
                    + E3 * k[2][i]
                    + E4 * k[3][i]
                    + E5 * k[4][i]
                    + E6 * k[5][i]
                    + E7 * k[6][i])
            },
            |i| atol + rtol * y[i].abs().max(self.ynew[i].abs()),
        )
    }
}

fn initial_step<F>(
    st: &mut Stepper<F>,
    t0: f64,
    y0: &[f64],
    dir: f64,
    opts: &SolverOptions,
) -> Result<f64, Failure>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<(), String>,
{
    let dim = st.dim;
    let sk = |i: usize| opts.atol + opts.rtol * y0[i].abs();
    let dnf = weighted_rms(dim, |i| st.k[0][i], sk);
    let dny = weighted_rms(dim, |i| y0[i], sk);
    let mut h = if dnf <= 1e-10 || dny <= 1e-10 {
        1e-6
    } else {
        0.01 * dny / dnf
    };
    h = h.min(opts.max_step);
    for i in 0..dim {
        st.ytmp[i] = y0[i] + dir * h * st.k[0][i];
    }
    st.eval(t0 + dir * h, 1, true)?;
    let der2 = weighted_rms(dim, |i| st.k[1][i] - st.k[0][i], sk) / h;
    let der12 = der2.abs().max(dnf);
    let h1 = if der12 <= 1e-15 {
        (h * 1e-3).max(1e-6)
    } else {
        (0.01 / der12).powf(0.2)
    };
    Ok((100.0 * h).min(h1).min(opts.max_step))
}

/// Integrates `y' = f(t, y)` from `t0` to `t_end` (either direction).
pub fn integrate<F>(
    f: F,
    t0: f64,
    y0: &[f64],
    t_end: f64,
    opts: &SolverOptions,
) -> Result<Trajectory, SolverError>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<(), String>,
{
    if !(opts.rtol > 0.0 && opts.atol > 0.0) {
        return Err(SolverError::Setup("rtol and atol must be positive".into()));
    }
    if !(opts.max_step > 0.0) {
        return Err(SolverError::Setup("max_step must be positive".into()));
    }
    if !t0.is_finite() || !t_end.is_finite() {
        return Err(SolverError::Setup("time span must be finite".into()));
    }
    if y0.is_empty() || y0.iter().any(|v| !v.is_finite()) {
        return Err(SolverError::Setup(
            "initial state must be finite and non-empty".into(),
        ));
    }
    let dim = y0.len();
    let mut st = Stepper {
        f,
        dim,
        k: std::array::from_fn(|_| vec![0.0; dim]),
        ytmp: vec![0.0; dim],
        ynew: vec![0.0; dim],
    };
    let dir = if t_end >= t0 { 1.0 } else { -1.0 };

    let placeholder = Trajectory::start(dim, t0, y0, &vec![0.0; dim]);
    if let Err(e) = st.eval_initial(t0, y0) {
        return Err(failure_to_error(e, t0, placeholder));
    }
    let mut traj = Trajectory::start(dim, t0, y0, &st.k[0]);
    if t_end == t0 {
        return Ok(traj);
    }

    let mut stops: Vec<f64> = opts
        .stops
        .iter()
        .copied()
        .filter(|&s| s.is_finite() && dir * (s - t0) > 0.0 && dir * (t_end - s) > 0.0)
        .collect();
    stops.sort_by(|a, b| (dir * a).partial_cmp(&(dir * b)).unwrap());
    stops.dedup();
    stops.push(t_end);
    let mut next_stop = 0;

    let mut h = match opts.h0 {
        Some(h0) if h0 != 0.0 && h0.is_finite() => h0.abs().min(opts.max_step),
        _ => match initial_step(&mut st, t0, y0, dir, opts) {
            Ok(h) => h,
            Err(e) => return Err(failure_to_error(e, t0, traj)),
        },
    };

    let mut t = t0;
    let mut y = y0.to_vec();
    let mut facold: f64 = 1e-4;
    let mut reject = false;
    let mut last_failure: Option<Failure> = None;
    let mut steps = 0usize;
    let expo1 = 0.2 - BETA * 0.75;

    loop {
        if steps >= opts.max_steps {
            return Err(SolverError::MaxSteps {
                t,
                steps,
                partial: Box::new(traj),
            });
        }
        let target = stops[next_stop];
        let remaining = (target - t).abs();
        if h < 16.0 * f64::EPSILON * t.abs().max(1e-300) || h < 1e-300 {
            return Err(match last_failure {
                Some(e) => failure_to_error(e, t, traj),
                None => SolverError::StepUnderflow {
                    t,
                    h,
                    partial: Box::new(traj),
                },
            });
        }
        let hits = h >= remaining * (1.0 - 1e-12) || remaining - h < 16.0 * f64::EPSILON * t.abs();
        let hs = if hits { remaining } else { h };
        let t_new = if hits { target } else { t + dir * hs };
        let hsigned = t_new - t;
        steps += 1;

        if let Err(e) = st.step(t, &y, hsigned, t_new) {
            last_failure = Some(e);
            h = hs * MIN_FACTOR;
            reject = true;
            continue;
        }
        let err = st.error_norm(&y, hsigned, opts.rtol, opts.atol);
        if !err.is_finite() {
            last_failure = Some(Failure::NonFinite);
            h = hs * MIN_FACTOR;
            reject = true;
            continue;
        }
        let fac11 = err.powf(expo1);
        if err <= 1.0 {
            let fac =
                (fac11 / facold.powf(BETA) / SAFETY).clamp(1.0 / MAX_FACTOR, 1.0 / MIN_FACTOR);
            let mut h_next = hs / fac;
            if reject {
                h_next = h_next.min(hs);
            }
            facold = err.max(1e-4);
            last_failure = None;
            reject = false;
            record_step(&mut traj, &st, &y, hsigned, t_new);
            y.copy_from_slice(&st.ynew);
            t = t_new;
            if hits {
                if next_stop + 1 == stops.len() {
                    return Ok(traj);
                }
                next_stop += 1;
                // Forcing may have a kink at a stop, so FSAL is not reused.
                if let Err(e) = st.eval_initial(t, &y) {
                    return Err(failure_to_error(e, t, traj));
                }
                let last = traj.len() - 1;
                traj.derivs[last * dim..].copy_from_slice(&st.k[0]);
            } else {
                st.k.swap(0, 6);
            }
            h = h_next.min(opts.max_step);
        } else {
            h = hs / (fac11 / SAFETY).min(1.0 / MIN_FACTOR);
            reject = true;
        }
    }
}

impl<F> Stepper<F>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<(), String>,
{
    fn eval_initial(&mut self, t: f64, y: &[f64]) -> Result<(), Failure> {
        self.ytmp.copy_from_slice(y);
        self.eval(t, 0, true)
    }
}

fn record_step<F>(traj: &mut Trajectory, st: &Stepper<F>, y: &[f64], h: f64, t_new: f64) {
    let dim = st.dim;
    let k = &st.k;
    let base = traj.dense.len();
    traj.dense.resize(base + 4 * dim, 0.0);
    for i in 0..dim {
        let ydiff = st.ynew[i] - y[i];
        let bspl = h * k[0][i] - ydiff;
        traj.dense[base + i] = ydiff;
        traj.dense[base + dim + i] = bspl;
        traj.dense[base + 2 * dim + i] = ydiff - h * k[6][i] - bspl;
        traj.dense[base + 3 * dim + i] = h
            * (D1 * k[0][i]
                + D3 * k[2][i]
                + D4 * k[3][i]
                + D5 * k[4][i]
                + D6 * k[5][i]
                + D7 * k[6][i]);
    }
    traj.times.push(t_new);
    traj.states.extend_from_slice(&st.ynew);
    traj.derivs.extend_from_slice(&k[6]);
}

fn failure_to_error(e: Failure, t: f64, traj: Trajectory) -> SolverError {
    match e {
        Failure::NonFinite => SolverError::NonFinite {
            t,
            partial: Box::new(traj),
        },
        Failure::Rhs(message) => SolverError::Rhs {
            t,
            message,
            partial: Box::new(traj),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn oscillator(_t: f64, y: &[f64], dy: &mut [f64]) -> Result<(), String> {
        dy[0] = y[1];
        dy[1] = -y[0];
        Ok(())
    }

    #[test]
    fn harmonic_oscillator() {
        let traj = integrate(
            oscillator,
            0.0,
            &[0.0, 1.0],
            10.0,
            &SolverOptions::default(),
        )
        .unwrap();
        assert_eq!(traj.t_end(), 10.0);
        let w = traj.last_state()[0];
        assert!((w - 10f64.sin()).abs() < 1e-9, "{w}");
    }

    #[test]
    fn stops_are_hit_exactly() {
        let opts = SolverOptions {
            stops: vec![0.25, 1.0 / 3.0, 2.0, -1.0],
            ..Default::default()
        };
        let traj = integrate(oscillator, 0.0, &[0.0, 1.0], 1.0, &opts).unwrap();
        assert!(traj.times().contains(&0.25));
        assert!(traj.times().contains(&(1.0 / 3.0)));
        assert!(!traj.times().contains(&2.0));
    }

    #[test]
    fn node_evaluation_is_exact() {
        let traj = integrate(oscillator, 0.0, &[0.0, 1.0], 3.0, &SolverOptions::default()).unwrap();
        for i in 0..traj.len() {
            assert_eq!(
                traj.eval_component(traj.times()[i], 0),
                Some(traj.state(i)[0])
            );
        }
        assert_eq!(traj.eval_component(3.5, 0), None);
    }

    #[test]
    fn dense_output_between_nodes() {
        let opts = SolverOptions::with_tolerances(1e-8, 1e-10);
        let traj = integrate(oscillator, 0.0, &[0.0, 1.0], 6.0, &opts).unwrap();
        let worst = (0..600)
            .map(|i| {
                let t = i as f64 * 0.01;
                (traj.eval_component(t, 0).unwrap() - t.sin()).abs()
            })
            .fold(0.0, f64::max);
        assert!(worst < 1e-7, "{worst}");
    }

    #[test]
    fn backward_integration() {
        let traj = integrate(
            oscillator,
            0.0,
            &[0.0, 1.0],
            -2.0,
            &SolverOptions::default(),
        )
        .unwrap();
        assert!(traj.times()[1] < 0.0);
        assert!((traj.last_state()[0] - (-2f64).sin()).abs() < 1e-9);
        assert!((traj.eval_component(-1.0, 0).unwrap() - (-1f64).sin()).abs() < 1e-7);
    }

    #[test]
    fn blow_up_reports_partial() {
        // y' = y^2, y(0) = 1 blows up at t = 1
        let err = integrate(
            |_t, y, dy| {
                dy[0] = y[0] * y[0];
                Ok(())
            },
            0.0,
            &[1.0],
            2.0,
            &SolverOptions::default(),
        )
        .unwrap_err();
        let reached = err.attained_time().unwrap();
        assert!(reached > 0.99 && reached < 1.0, "{err} {reached}");
    }

    #[test]
    fn rhs_error_surfaces() {
        let err = integrate(
            |t, y, dy| {
                if t > 0.5 {
                    return Err("outside domain".into());
                }
                dy[0] = y[0];
                Ok(())
            },
            0.0,
            &[1.0],
            1.0,
            &SolverOptions::default(),
        )
        .unwrap_err();
        assert!(matches!(err, SolverError::Rhs { .. }), "{err}");
    }

    #[test]
    fn invalid_setup() {
        let err = integrate(
            oscillator,
            0.0,
            &[0.0, 1.0],
            1.0,
            &SolverOptions::with_tolerances(0.0, 1e-9),
        );
        assert!(matches!(err, Err(SolverError::Setup(_))));
    }
}
