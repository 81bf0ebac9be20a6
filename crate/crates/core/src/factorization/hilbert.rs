//! Factorization through the Hilbert transform of a continuous `ln g`:
//! `Φ±(ω) = √g(ω) · exp{±(i/2)(H(0) - H(ω))}` with `H = H_{ln g}`.
//!
//! `ln g` usually grows like `ln|ω|`, so `H` itself diverges; only the
//! difference `H(0) - H(ω) = (1/π) ∫ ln g(x) [1/x - 1/(x-ω)] dx` is formed.
//! Beyond the grid `ln g` is replaced by `c0 + c1 ln|x| + c2/x`, fitted on
//! the outer tenth of each side, whose contribution is summed in closed form.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;

use super::plemelj::{tail_windows, truncated_pv};
use super::{integration_limit, FactorMethod, FactorPair, FrequencyGrid};
use crate::error::{Error, Result};
use crate::levy::MAX_PHASE_STEP;
use crate::special::{dilog, log_series_shifted};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Continuous branch of `ln g` anchored at `ln g(0) = 0`, together with the
/// index (net turns of `g` from -Ω to +Ω).
pub fn unwrap_log(g: &[Complex64], grid: &FrequencyGrid) -> Result<(Vec<Complex64>, i64)> {
    assert_eq!(g.len(), grid.len(), "samples must match the grid");
    let z = grid.zero_index();
    if let Some((i, _)) = g.iter().enumerate().find(|(_, v)| !(v.norm() > 0.0) || !v.norm().is_finite()) {
        return Err(Error::invalid("g", format!("sample {i} is zero or not finite")));
    }
    let mut phase = vec![0.0; g.len()];
    phase[z] = g[z].arg();
    for j in z + 1..g.len() {
        let step = (g[j] / g[j - 1]).arg();
        if step.abs() > MAX_PHASE_STEP {
            return Err(Error::BranchUnwrapFailure { index: j - 1 });
        }
        phase[j] = phase[j - 1] + step;
    }
    for j in (0..z).rev() {
        let step = (g[j] / g[j + 1]).arg();
        if step.abs() > MAX_PHASE_STEP {
            return Err(Error::BranchUnwrapFailure { index: j });
        }
        phase[j] = phase[j + 1] + step;
    }
    let index = ((phase[g.len() - 1] - phase[0]) / (2.0 * PI)).round() as i64;
    let logs = g.iter().zip(&phase).map(|(v, &p)| Complex64::new(v.norm().ln(), p)).collect();
    Ok((logs, index))
}

/// Coefficients `(c0, c1, c2)` of `c0 + c1 ln|x| + c2/x` fitted by least
/// squares on the given nodes.
fn fit_log_tail(s: &[Complex64], grid: &FrequencyGrid, nodes: &[usize]) -> [Complex64; 3] {
    let l = integration_limit(grid);
    // Centred basis 1, ln(|x|/L), L/|x| - 1 for conditioning.
    let a = DMatrix::from_fn(nodes.len(), 3, |r, c| {
        let ax = grid.node(nodes[r]).abs();
        match c {
            0 => 1.0,
            1 => (ax / l).ln(),
            _ => l / ax - 1.0,
        }
    });
    let svd = a.svd(true, true);
    let solve = |b: DVector<f64>| svd.solve(&b, 1e-14).expect("svd solve");
    let re = solve(DVector::from_iterator(nodes.len(), nodes.iter().map(|&k| s[k].re)));
    let im = solve(DVector::from_iterator(nodes.len(), nodes.iter().map(|&k| s[k].im)));
    let e: Vec<Complex64> = (0..3).map(|i| Complex64::new(re[i], im[i])).collect();
    let sign = if grid.node(nodes[0]) > 0.0 { 1.0 } else { -1.0 };
    [e[0] - e[1] * l.ln() - e[2], e[1], e[2] * l * sign]
}

/// `∫_L^∞ b(x) [1/x - 1/(x-ω)] dx` for `b ∈ {1, ln x, 1/x}`, `r = ω/L`.
fn right_tail_kernels(r: f64, l: f64) -> [f64; 3] {
    let log1mr = (1.0 - r).ln();
    [log1mr, l.ln() * log1mr - dilog(r), -log_series_shifted(r) / l]
}

/// `H(0) - H(ω)` contribution of the fitted tails.
fn tail_difference(right: &[Complex64; 3], left: &[Complex64; 3], omega: f64, l: f64) -> Complex64 {
    let r = omega / l;
    let kr = right_tail_kernels(r, l);
    let kl = right_tail_kernels(-r, l);
    let right_part = right[0] * kr[0] + right[1] * kr[1] + right[2] * kr[2];
    // x = -y turns the left tail into minus the right kernels at -ω, with 1/x -> -1/y.
    let left_part = -(left[0] * kl[0] + left[1] * kl[1] - left[2] * kl[2]);
    (right_part + left_part) / PI
}

/// Factor sampled `g` (with `g(0) = 1`, zero index, no zeros on the grid).
pub fn factorize_hilbert(g: &[Complex64], grid: &FrequencyGrid) -> Result<FactorPair> {
    let z = grid.zero_index();
    if (g[z] - 1.0).norm() > 1e-10 {
        return Err(Error::invalid("g", format!("g(0) = {} is not 1", g[z])));
    }
    let (s, index) = unwrap_log(g, grid)?;
    if index != 0 {
        return Err(Error::NonzeroIndex { index });
    }
    let pv = truncated_pv(&s, grid);
    let (right_nodes, left_nodes) = tail_windows(grid);
    let right = fit_log_tail(&s, grid, &right_nodes);
    let left = fit_log_tail(&s, grid, &left_nodes);
    let l = integration_limit(grid);
    let n = grid.len();

    let mut diff: Vec<Complex64> = (0..n)
        .into_par_iter()
        .map(|j| {
            if j < 2 || j + 1 >= n {
                return Complex64::new(0.0, 0.0);
            }
            (pv[z] - pv[j]) / PI + tail_difference(&right, &left, grid.node(j), l)
        })
        .collect();
    diff[0] = diff[2];
    diff[1] = diff[2];
    diff[n - 1] = diff[n - 2];
    diff[z] = Complex64::new(0.0, 0.0);

    let (phi_plus, phi_minus) = s
        .iter()
        .zip(&diff)
        .map(|(s, d)| ((s / 2.0 + I * d / 2.0).exp(), (s / 2.0 - I * d / 2.0).exp()))
        .unzip();
    Ok(FactorPair {
        grid: *grid,
        phi_plus,
        phi_minus,
        method: FactorMethod::Hilbert,
        certified_error: None,
    })
}

/// Factor an evaluable `g`, doubling the grid resolution (up to 2^20
/// points) while the continuous branch of `ln g` cannot be followed.
pub fn factorize_hilbert_fn<F>(g: F, grid: &FrequencyGrid) -> Result<FactorPair>
where
    F: Fn(f64) -> Result<Complex64> + Sync,
{
    let mut current = *grid;
    loop {
        let samples: Vec<Complex64> = current.nodes().par_iter().map(|&w| g(w)).collect::<Result<_>>()?;
        match factorize_hilbert(&samples, &current) {
            Err(Error::BranchUnwrapFailure { index }) => match current.refined() {
                Some(finer) => current = finer,
                None => return Err(Error::BranchUnwrapFailure { index }),
            },
            other => return other,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_one_factors_trivially() {
        let grid = FrequencyGrid::new(50.0, 1024).unwrap();
        let pair = factorize_hilbert(&vec![Complex64::new(1.0, 0.0); grid.len()], &grid).unwrap();
        assert!(pair.phi_plus.iter().chain(&pair.phi_minus).all(|p| (p - 1.0).norm() < 1e-14));
    }

    #[test]
    fn brownian_factor_matches_closed_form() {
        let grid = FrequencyGrid::default();
        let g: Vec<Complex64> = grid.nodes().iter().map(|w| Complex64::new(2.0 / (w * w + 2.0), 0.0)).collect();
        let pair = factorize_hilbert(&g, &grid).unwrap();
        let r2 = 2f64.sqrt();
        let mut worst: f64 = 0.0;
        for j in grid.within(10.0) {
            let w = grid.node(j);
            let exact = r2 / Complex64::new(r2, -w);
            worst = worst.max((pair.phi_plus[j] - exact).norm());
        }
        assert!(worst < 1e-4, "sup error {worst}");
    }

    #[test]
    fn nonzero_index_is_rejected() {
        let grid = FrequencyGrid::new(100.0, 8192).unwrap();
        // (ω - i)/(ω + i) normalised to 1 at the origin.
        let g: Vec<Complex64> = grid
            .nodes()
            .iter()
            .map(|&w| -(Complex64::new(w, -1.0) / Complex64::new(w, 1.0)))
            .collect();
        assert!(matches!(factorize_hilbert(&g, &grid), Err(Error::NonzeroIndex { index: 1 })));
    }

    #[test]
    fn unresolved_phase_triggers_refinement() {
        // A phase that turns fast near ω = 3 but returns: index zero.
        let g = |w: f64| Ok(Complex64::from_polar(1.0, 40.0 * (-(w - 3.0) * (w - 3.0) * 400.0).exp() * (w - 3.0) * 20.0));
        let grid = FrequencyGrid::new(10.0, 256).unwrap();
        let pair = factorize_hilbert_fn(g, &grid).unwrap();
        assert!(pair.grid.len() > 256);
    }
}
