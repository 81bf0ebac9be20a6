//! Distributions of the supremum and infimum of a Lévy process killed at an
//! independent exponential or geometric time.
//!
//! The characteristic functions `Φ+` of `M_q = sup{X_s : s ≤ τ(q)}` and `Φ-`
//! of `I_q = inf{X_s : s ≤ τ(q)}` solve the zero-index Riemann–Hilbert
//! problem `Φ+(ω) Φ-(ω) = g(ω)`, where `g` is the characteristic function
//! of `X_τ`. This crate solves it by
//!
//! * singular integrals and Hilbert transforms ([`factorization`]),
//! * Carlemann's half-plane split of rational `g`, rational approximation,
//!   and the infinite-product formula for the sech-exponential family
//!   ([`rational`]),
//!
//! turns the factors into distribution tables ([`inversion`]) and checks
//! everything against Monte Carlo paths ([`mc`]).

pub mod cli;
pub mod error;
pub mod factorization;
pub mod inversion;
pub mod levy;
pub mod mc;
pub mod rational;
mod special;

pub use error::{Error, Result};
