//! Nonlinear Green's functions for second-order equations `w'' + N(w) = f(t)`.

pub mod bench;
pub mod elliptic;
pub mod expr;
pub mod forcing;
pub mod green;
pub mod ode;
pub mod quad;
pub mod shorttime;
