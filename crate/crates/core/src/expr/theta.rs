//! Heaviside step and the idempotence identity `θ(t)^n = θ(t)`.

use num_bigint::{BigInt, BigUint};

/// Unit step with `θ(0) = 0`.
pub fn heaviside(t: f64) -> f64 {
    if t > 0.0 {
        1.0
    } else {
        0.0
    }
}

/// `|t| / t`, with `sign(0) = 0`.
pub fn sign(t: f64) -> f64 {
    if t > 0.0 {
        1.0
    } else if t < 0.0 {
        -1.0
    } else {
        0.0
    }
}

fn binomial_row(n: u32) -> Vec<BigUint> {
    let mut row = vec![BigUint::from(1u32)];
    for k in 0..n {
        let next = &row[k as usize] * BigUint::from(n - k) / BigUint::from(k + 1);
        row.push(next);
    }
    row
}

/// Checks `Σ_even C(n,k) = Σ_odd C(n,k) = 2^(n-1)` in exact integer arithmetic.
pub fn binomial_parity_identity(n: u32) -> bool {
    if n == 0 {
        return false;
    }
    let row = binomial_row(n);
    let (mut even, mut odd) = (BigUint::from(0u32), BigUint::from(0u32));
    for (k, c) in row.iter().enumerate() {
        if k % 2 == 0 {
            even += c;
        } else {
            odd += c;
        }
    }
    let half = BigUint::from(1u32) << (n - 1);
    even == half && odd == half
}

/// `2^n θ(t)^n` expanded as `Σ_k C(n,k) sign(t)^k`, for `t ≠ 0`.
fn binomial_expansion_of_power(row: &[BigUint], sign_t: i32) -> BigInt {
    row.iter()
        .enumerate()
        .map(|(k, c)| {
            let c = BigInt::from(c.clone());
            if sign_t < 0 && k % 2 == 1 {
                -c
            } else {
                c
            }
        })
        .sum()
}

/// True iff `θ(t)^n = θ(t)` at every grid point, both by direct powering and
/// through the sign-function binomial expansion, and the binomial parity
/// identity holds for `n`.
pub fn theta_power_identity(n: u32, grid: &[f64]) -> bool {
    if n == 0 || grid.is_empty() || !binomial_parity_identity(n) {
        return false;
    }
    let row = binomial_row(n);
    let two_pow_n = BigInt::from(1) << n;
    grid.iter().all(|&t| {
        let th = heaviside(t);
        let direct = th.powi(n as i32) == th;
        if t == 0.0 {
            return direct;
        }
        let s = if t > 0.0 { 1 } else { -1 };
        // 2^n θ^n must equal 2^n θ = 2^(n-1) (1 + sign t)
        let lhs = binomial_expansion_of_power(&row, s);
        let rhs = if s > 0 {
            two_pow_n.clone()
        } else {
            BigInt::from(0)
        };
        direct && lhs == rhs
    })
}
