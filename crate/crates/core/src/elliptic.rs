//! Jacobi elliptic functions `sn, cn, dn, am` of real argument for any real
//! parameter `m = k²`.
//!
//! `0 ≤ m < 1` uses the descending Landen (AGM) recurrence. `m < 0` maps to
//! `μ = -m/(1-m) ∈ [0,1)` with `v = u√(1-m)`; `m > 1` maps to `μ = 1/m` with
//! `v = u√m`. Both maps give real values for every real `u`, so the real
//! window is the whole line. A modulus `i` means `m = -1`, a modulus `√2`
//! means `m = 2`.

use std::f64::consts::PI;

use thiserror::Error;

use crate::ode::{integrate, SolverError, SolverOptions};

/// AGM stops once `|a - b| ≤ AGM_TOL · a`.
pub const AGM_TOL: f64 = 1e-15;
const AGM_MAX_ITER: usize = 64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EllipticError {
    #[error("argument u = {u} is outside the real window {window}")]
    OutsideWindow { u: f64, window: &'static str },
    #[error("parameter m = {0} is not finite")]
    BadParameter(f64),
    #[error("oracle integration failed: {0}")]
    Oracle(#[from] SolverError),
}

/// One step of the parameter reduction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Reduction {
    /// `m < 0`: `μ = -m/(1-m)`, `v = u·√(1-m)`.
    Negative { m: f64 },
    /// `m > 1`: `μ = 1/m`, `v = u·√m`.
    Reciprocal { m: f64 },
}

impl Reduction {
    fn scale(self) -> f64 {
        match self {
            Reduction::Negative { m } => (1.0 - m).sqrt(),
            Reduction::Reciprocal { m } => m.sqrt(),
        }
    }
}

/// A parameter together with the reduction chain to `0 ≤ μ ≤ 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct EllipticParam {
    m: f64,
    chain: Vec<Reduction>,
    canonical: f64,
}

impl EllipticParam {
    pub fn new(m: f64) -> Result<Self, EllipticError> {
        if !m.is_finite() {
            return Err(EllipticError::BadParameter(m));
        }
        let (chain, canonical) = if m < 0.0 {
            (vec![Reduction::Negative { m }], -m / (1.0 - m))
        } else if m > 1.0 {
            (vec![Reduction::Reciprocal { m }], 1.0 / m)
        } else {
            (Vec::new(), m)
        };
        Ok(EllipticParam {
            m,
            chain,
            canonical,
        })
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn chain(&self) -> &[Reduction] {
        &self.chain
    }

    /// Parameter in `[0, 1]` reached by the chain.
    pub fn canonical(&self) -> f64 {
        self.canonical
    }

    /// Real window of `u`; unbounded for every real `m`.
    pub fn window(&self) -> (f64, f64) {
        (f64::NEG_INFINITY, f64::INFINITY)
    }

    /// `u ↦ v` under the chain.
    pub fn reduce_argument(&self, u: f64) -> f64 {
        self.chain.iter().fold(u, |v, r| v * r.scale())
    }

    /// Inverse of [`EllipticParam::reduce_argument`].
    pub fn restore_argument(&self, v: f64) -> f64 {
        self.chain.iter().rev().fold(v, |u, r| u / r.scale())
    }

    /// Recovers `m` from the canonical parameter by inverting the chain.
    pub fn restore_parameter(&self, mu: f64) -> f64 {
        self.chain.iter().rev().fold(mu, |mu, r| match r {
            Reduction::Negative { .. } => -mu / (1.0 - mu),
            Reduction::Reciprocal { .. } => 1.0 / mu,
        })
    }
}

/// Values at one point of the canonical range.
#[derive(Debug, Clone, Copy)]
struct Canonical {
    am: f64,
    sn: f64,
    cn: f64,
    dn: f64,
}

/// Number of AGM iterations for `0 ≤ m < 1`.
pub fn agm_iterations(m: f64) -> usize {
    agm_chain(m).len()
}

/// Ratios `c_n / a_n` for `n = 1..N` and the final `a_N`.
fn agm_chain(m: f64) -> Vec<(f64, f64)> {
    let mut a: f64 = 1.0;
    let mut b = (1.0 - m).sqrt();
    let mut out = Vec::new();
    while (a - b).abs() > AGM_TOL * a && out.len() < AGM_MAX_ITER {
        let c = 0.5 * (a - b);
        let an = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = an;
        out.push((c / a, a));
    }
    out
}

fn canonical(u: f64, m: f64) -> Canonical {
    if m == 1.0 {
        let sech = 1.0 / u.cosh();
        return Canonical {
            am: u.sinh().atan(),
            sn: u.tanh(),
            cn: sech,
            dn: sech,
        };
    }
    let chain = agm_chain(m);
    if chain.is_empty() {
        let (s, c) = u.sin_cos();
        return Canonical {
            am: u,
            sn: s,
            cn: c,
            dn: 1.0,
        };
    }
    let n = chain.len();
    let a_n = chain[n - 1].1;
    let mut phi = (1u64 << n) as f64 * a_n * u;
    let mut prev = phi;
    for &(ratio, _) in chain.iter().rev() {
        prev = phi;
        phi = 0.5 * (phi + (ratio * phi.sin()).asin());
    }
    let (s, c) = phi.sin_cos();
    // The ratio form inherits the relative error of a small cos φ; near the
    // zeros of cn the cancellation-free dn² = (1-m) + m·cn² is used instead.
    let dn = if c.abs() > 0.5 {
        c / (prev - phi).cos()
    } else {
        ((1.0 - m) + m * c * c).sqrt()
    };
    Canonical {
        am: phi,
        sn: s,
        cn: c,
        dn,
    }
}

fn check(u: f64, m: f64) -> Result<EllipticParam, EllipticError> {
    let p = EllipticParam::new(m)?;
    if !u.is_finite() {
        return Err(EllipticError::OutsideWindow {
            u,
            window: "(-inf, inf)",
        });
    }
    Ok(p)
}

/// `(sn, cn, dn)(u | m)`.
pub fn jacobi_sn_cn_dn(u: f64, m: f64) -> Result<(f64, f64, f64), EllipticError> {
    let p = check(u, m)?;
    let v = p.reduce_argument(u);
    let c = canonical(v, p.canonical());
    Ok(match p.chain().first() {
        None => (c.sn, c.cn, c.dn),
        Some(Reduction::Negative { m }) => {
            let r = (1.0 - m).sqrt();
            (c.sn / (r * c.dn), c.cn / c.dn, 1.0 / c.dn)
        }
        Some(Reduction::Reciprocal { m }) => (c.sn / m.sqrt(), c.dn, c.cn),
    })
}

/// Continuous amplitude `am(u | m)` with `sn = sin am`, `cn = cos am`.
pub fn jacobi_am(u: f64, m: f64) -> Result<f64, EllipticError> {
    let p = check(u, m)?;
    let v = p.reduce_argument(u);
    let c = canonical(v, p.canonical());
    Ok(match p.chain().first() {
        None => c.am,
        Some(Reduction::Negative { m }) => {
            // tan am = tan ψ / √(1-m); keep the branch of ψ
            let n = (c.am / PI).round();
            let r = c.am - n * PI;
            n * PI + (r.sin() / (1.0 - m).sqrt()).atan2(r.cos())
        }
        // cn(u|m) = dn(v|μ) > 0, so am stays in (-π/2, π/2)
        Some(Reduction::Reciprocal { m }) => (c.sn / m.sqrt()).atan2(c.dn),
    })
}

/// Oracle values `(sn, cn, dn, am)` at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleValue {
    pub u: f64,
    pub sn: f64,
    pub cn: f64,
    pub dn: f64,
    pub am: f64,
}

fn oracle_rhs(m: f64) -> impl FnMut(f64, &[f64], &mut [f64]) -> Result<(), String> {
    move |_u, y, dy| {
        let (sn, cn, dn) = (y[0], y[1], y[2]);
        dy[0] = cn * dn;
        dy[1] = -sn * dn;
        dy[2] = -m * sn * cn;
        dy[3] = dn;
        Ok(())
    }
}

/// Integrates `sn' = cn·dn`, `cn' = -sn·dn`, `dn' = -m·sn·cn`, `am' = dn` from
/// `(0, 1, 1, 0)` and reads off every point of `us` as an exact stop.
pub fn oracle_grid(us: &[f64], m: f64, tol: f64) -> Result<Vec<OracleValue>, EllipticError> {
    EllipticParam::new(m)?;
    let mut out: Vec<Option<OracleValue>> = vec![None; us.len()];
    for forward in [true, false] {
        let idx: Vec<usize> = (0..us.len())
            .filter(|&i| if forward { us[i] > 0.0 } else { us[i] < 0.0 })
            .collect();
        if idx.is_empty() {
            continue;
        }
        let end = idx
            .iter()
            .map(|&i| us[i])
            .fold(0.0, |a: f64, b| if forward { a.max(b) } else { a.min(b) });
        let opts = SolverOptions {
            rtol: tol,
            atol: tol,
            stops: idx.iter().map(|&i| us[i]).collect(),
            ..Default::default()
        };
        let traj = integrate(oracle_rhs(m), 0.0, &[0.0, 1.0, 1.0, 0.0], end, &opts)?;
        for &i in &idx {
            let y = traj.eval(us[i]).expect("stop lies inside the trajectory");
            out[i] = Some(OracleValue {
                u: us[i],
                sn: y[0],
                cn: y[1],
                dn: y[2],
                am: y[3],
            });
        }
    }
    Ok(out
        .into_iter()
        .zip(us)
        .map(|(v, &u)| {
            v.unwrap_or(OracleValue {
                u,
                sn: 0.0,
                cn: 1.0,
                dn: 1.0,
                am: 0.0,
            })
        })
        .collect())
}

/// Oracle `(sn, cn, dn)` at a single point.
pub fn oracle_jacobi(u: f64, m: f64, tol: f64) -> Result<(f64, f64, f64), EllipticError> {
    let v = oracle_grid(&[u], m, tol)?[0];
    Ok((v.sn, v.cn, v.dn))
}

/// Oracle amplitude at a single point.
pub fn oracle_am(u: f64, m: f64, tol: f64) -> Result<f64, EllipticError> {
    Ok(oracle_grid(&[u], m, tol)?[0].am)
}
