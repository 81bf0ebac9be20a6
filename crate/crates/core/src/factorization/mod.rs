//! Numerical solution of the zero-index problem `Φ+ Φ- = g` on the real line.

mod grid;
mod hilbert;
mod plemelj;

use num_complex::Complex64;

pub use grid::FrequencyGrid;
pub use hilbert::{factorize_hilbert, factorize_hilbert_fn, unwrap_log};
pub use plemelj::{hilbert_transform, plemelj_integral, resolvent_check, TailModel};

pub(crate) use plemelj::integration_limit;

/// Residual bound for rational `g`.
pub const RATIONAL_TOLERANCE: f64 = 1e-6;
/// Residual bound for non-rational `g`.
pub const GENERAL_TOLERANCE: f64 = 1e-3;

/// How a [`FactorPair`] was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FactorMethod {
    Hilbert,
    Carlemann,
    Pade,
    ProductFormula,
}

impl FactorMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            FactorMethod::Hilbert => "hilbert",
            FactorMethod::Carlemann => "carlemann",
            FactorMethod::Pade => "pade",
            FactorMethod::ProductFormula => "kuznetsov-product",
        }
    }
}

/// Boundary values `Φ+` (characteristic function of the supremum) and `Φ-`
/// (of the infimum) sampled on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorPair {
    pub grid: FrequencyGrid,
    pub phi_plus: Vec<Complex64>,
    pub phi_minus: Vec<Complex64>,
    pub method: FactorMethod,
    /// Method-specific error estimate, when one is available.
    pub certified_error: Option<f64>,
}

impl FactorPair {
    /// `|Φ+Φ- - g|` at every node.
    pub fn residuals(&self, g: &[Complex64]) -> Vec<f64> {
        self.phi_plus
            .iter()
            .zip(&self.phi_minus)
            .zip(g)
            .map(|((p, m), g)| (p * m - g).norm())
            .collect()
    }

    /// Largest residual over `|ω| ≤ fraction · Ω`.
    pub fn max_residual(&self, g: &[Complex64], fraction: f64) -> f64 {
        let r = self.residuals(g);
        self.grid.interior(fraction).map(|j| r[j]).fold(0.0, f64::max)
    }

    /// Largest Hermitian-symmetry defect `|Φ(-ω) - conj Φ(ω)|` of either factor.
    pub fn hermitian_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for j in 1..self.grid.len() {
            let m = self.grid.mirror(j).unwrap();
            worst = worst
                .max((self.phi_plus[m] - self.phi_plus[j].conj()).norm())
                .max((self.phi_minus[m] - self.phi_minus[j].conj()).norm());
        }
        worst
    }

    /// Largest modulus of either factor over `|ω| ≤ fraction · Ω`.
    pub fn max_modulus(&self, fraction: f64) -> f64 {
        self.grid
            .interior(fraction)
            .map(|j| self.phi_plus[j].norm().max(self.phi_minus[j].norm()))
            .fold(0.0, f64::max)
    }

    pub fn at_zero(&self) -> (Complex64, Complex64) {
        let z = self.grid.zero_index();
        (self.phi_plus[z], self.phi_minus[z])
    }

    /// Sup distance of both factors to another pair on `|ω| ≤ omega`. The
    /// other pair may live on a different grid with the same half-width and
    /// a point count that is a power-of-two multiple.
    pub fn distance(&self, other: &FactorPair, omega: f64) -> f64 {
        let mut worst: f64 = 0.0;
        let mut matched = 0usize;
        for j in self.grid.within(omega) {
            let w = self.grid.node(j);
            let k = ((w / other.grid.spacing()).round() as i64 + other.grid.zero_index() as i64) as usize;
            if (other.grid.node(k) - w).abs() > 1e-9 * other.grid.spacing().max(1.0) {
                continue;
            }
            matched += 1;
            worst = worst
                .max((self.phi_plus[j] - other.phi_plus[k]).norm())
                .max((self.phi_minus[j] - other.phi_minus[k]).norm());
        }
        assert!(matched > 0, "grids share no nodes within |omega| <= {omega}");
        worst
    }
}
