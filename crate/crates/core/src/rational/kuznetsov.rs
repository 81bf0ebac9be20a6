//! Infinite-product Wiener–Hopf factors for the sech-exponential jump
//! family with exponential killing.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::factorization::{FactorMethod, FactorPair, FrequencyGrid};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Default number of product terms.
pub const DEFAULT_TERMS: usize = 10_000;

fn check(alpha: f64, q: f64) -> Result<()> {
    if !(alpha > -1.0 && alpha < 1.0) {
        return Err(Error::invalid("alpha", format!("{alpha} is outside (-1, 1)")));
    }
    if !(q > 0.0 && q.is_finite()) {
        return Err(Error::invalid("q", format!("{q} is not > 0")));
    }
    Ok(())
}

/// `η = (2/π) arccos(π / (q + π sec(απ/2)))`.
pub fn kuznetsov_eta(alpha: f64, q: f64) -> Result<f64> {
    check(alpha, q)?;
    let sec = 1.0 / (alpha * PI / 2.0).cos();
    Ok(2.0 / PI * (PI / (q + PI * sec)).acos())
}

/// Offsets of the two numerator and two denominator factors of term `n`,
/// which read `1 - z/(4n + offset)`.
fn offsets(alpha: f64, eta: f64) -> ([f64; 2], [f64; 2]) {
    ([1.0 - alpha, 3.0 - alpha], [eta - alpha, 4.0 - eta - alpha])
}

/// `(1/4)[(u - z) ln(u - z) - u ln u + z]`, an antiderivative in `u/4` of
/// `ln(1 - z/u)`.
fn log_antiderivative(u: f64, z: Complex64) -> Complex64 {
    let uz = u - z;
    0.25 * (uz * uz.ln() - u * u.ln() + z)
}

/// `Π_n` of the paired factors at `z`, for `n < n_terms`, times the
/// integral estimate of the omitted terms.
fn product(z: Complex64, up: [f64; 2], down: [f64; 2], n_terms: usize) -> Complex64 {
    let mut acc = Complex64::new(1.0, 0.0);
    for n in 0..n_terms {
        let base = 4.0 * n as f64;
        let num = (1.0 - z / (base + up[0])) * (1.0 - z / (base + up[1]));
        let den = (1.0 - z / (base + down[0])) * (1.0 - z / (base + down[1]));
        acc *= num / den;
    }
    // Σ_{n ≥ N} t(n) ≈ ∫_{N-1/2}^∞ t(x) dx; the antiderivatives vanish at ∞.
    let start = 4.0 * (n_terms as f64 - 0.5);
    let tail = -(log_antiderivative(start + up[0], z) + log_antiderivative(start + up[1], z)
        - log_antiderivative(start + down[0], z)
        - log_antiderivative(start + down[1], z));
    acc * tail.exp()
}

/// Truncated products `(ρ+(λ), ρ-(λ))` with the tail correction, where
/// `ρ+ρ- = q/(q - ψ)` on the real line.
pub fn kuznetsov_product(alpha: f64, q: f64, lambda: Complex64, n_terms: usize) -> Result<(Complex64, Complex64)> {
    let eta = kuznetsov_eta(alpha, q)?;
    if n_terms == 0 {
        return Err(Error::invalid("n_terms", "must be >= 1"));
    }
    let (up, down) = offsets(alpha, eta);
    let (up_m, down_m) = offsets(-alpha, eta);
    Ok((
        product(I * lambda, up, down, n_terms),
        product(-I * lambda, up_m, down_m, n_terms),
    ))
}

/// [`kuznetsov_product`] sampled on a grid.
pub fn factorize_kuznetsov(alpha: f64, q: f64, grid: &FrequencyGrid, n_terms: usize) -> Result<FactorPair> {
    kuznetsov_product(alpha, q, Complex64::new(0.0, 0.0), n_terms)?;
    let (phi_plus, phi_minus) = grid
        .nodes()
        .par_iter()
        .map(|&w| kuznetsov_product(alpha, q, w.into(), n_terms).expect("parameters checked"))
        .unzip();
    Ok(FactorPair {
        grid: *grid,
        phi_plus,
        phi_minus,
        method: FactorMethod::ProductFormula,
        certified_error: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levy::{rhs_g, JumpMeasure, KillingTime, LevyModel};

    #[test]
    fn origin_gives_ones() {
        for (a, q, n) in [(0.0, 1.0, 1), (0.5, 0.2, 17), (-0.7, 3.0, 400)] {
            let (p, m) = kuznetsov_product(a, q, Complex64::new(0.0, 0.0), n).unwrap();
            assert!((p - 1.0).norm() < 1e-15 && (m - 1.0).norm() < 1e-15);
        }
    }

    #[test]
    fn eta_symmetric_case() {
        assert!((kuznetsov_eta(0.0, PI).unwrap() - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn product_reproduces_g() {
        let model = LevyModel::new(0.0, 0.0, JumpMeasure::SechExponential { alpha: 0.3 }).unwrap();
        let g = rhs_g(&model, KillingTime::exponential(1.0).unwrap(), 1.0).unwrap();
        let (p, m) = kuznetsov_product(0.3, 1.0, Complex64::new(1.0, 0.0), 10_000).unwrap();
        assert!((p * m - g).norm() < 1e-8, "{}", (p * m - g).norm());
    }

    #[test]
    fn domain_errors() {
        assert!(kuznetsov_product(1.0, 1.0, Complex64::new(1.0, 0.0), 10).is_err());
        assert!(kuznetsov_product(0.0, 0.0, Complex64::new(1.0, 0.0), 10).is_err());
        assert!(kuznetsov_product(0.0, 1.0, Complex64::new(1.0, 0.0), 0).is_err());
    }
}
