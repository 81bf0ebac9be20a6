//! Cauchy-type integrals of sampled functions on a [`FrequencyGrid`].
//!
//! All quadratures run over `[-L, L]` with `L = Ω - h` (nodes `1..n`, which
//! are symmetric about zero) using the trapezoid rule. Near-singular and
//! principal-value integrands are regularized by subtracting a local model
//! whose integral is known in closed form, so the remaining integrand is
//! smooth and the trapezoid rule keeps its spectral accuracy.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::FrequencyGrid;
use crate::error::{Error, Result};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Behaviour of the sampled function beyond `|x| > L`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TailModel {
    /// The function is taken to vanish outside the grid.
    Truncate,
    /// `s(x) ≈ a± |x|^{-exponent} + b± |x|^{-exponent-1}`, fitted on the
    /// outer quarter of each side and integrated analytically.
    Power { exponent: f64 },
}

impl TailModel {
    fn check(&self) -> Result<()> {
        match *self {
            TailModel::Truncate => Ok(()),
            TailModel::Power { exponent } if exponent > 0.0 && exponent.is_finite() => Ok(()),
            TailModel::Power { exponent } => Err(Error::TailDivergence(format!(
                "power tail |x|^-{exponent} against the 1/x kernel"
            ))),
        }
    }
}

/// Outermost node used by the quadratures and its abscissa `L`.
pub(crate) fn integration_limit(grid: &FrequencyGrid) -> f64 {
    grid.halfwidth() - grid.spacing()
}

fn trapezoid_weight(grid: &FrequencyGrid, k: usize) -> f64 {
    if k == 0 {
        0.0
    } else if k == 1 || k == grid.len() - 1 {
        0.5
    } else {
        1.0
    }
}

/// Indices of the outer tenth of `[-L, L]` on the right and left.
pub(crate) fn tail_windows(grid: &FrequencyGrid) -> (Vec<usize>, Vec<usize>) {
    let l = integration_limit(grid);
    let right = (1..grid.len()).filter(|&k| grid.node(k) >= 0.9 * l).collect();
    let left = (1..grid.len()).filter(|&k| grid.node(k) <= -0.9 * l).collect();
    (right, left)
}

/// `∫_L^∞ x^{-p} / (x - z) dx` by its power series in `z / L`.
fn power_tail_integral(p: f64, l: f64, z: Complex64) -> Result<Complex64> {
    let ratio = z / l;
    if ratio.norm() >= 0.9 {
        return Err(Error::OutsideGrid { point: z });
    }
    let mut sum = Complex64::new(0.0, 0.0);
    let mut pow = Complex64::new(1.0, 0.0);
    for n in 0..2000 {
        let term = pow / (p + n as f64);
        sum += term;
        if term.norm() < 1e-17 * sum.norm() {
            break;
        }
        pow *= ratio;
    }
    Ok(sum * l.powf(-p))
}

/// Least-squares fit of `a |x|^{-p} + b |x|^{-p-1}` on the outer quarter
/// of each side; returns `((a, b) right, (a, b) left)`.
fn power_tail_coefficients(samples: &[Complex64], grid: &FrequencyGrid, p: f64) -> ([Complex64; 2], [Complex64; 2]) {
    let l = integration_limit(grid);
    let fit = |sign: f64| {
        // Basis scaled by L so the normal equations stay well conditioned.
        let (mut g00, mut g01, mut g11) = (0.0, 0.0, 0.0);
        let (mut r0, mut r1) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
        for k in 1..grid.len() {
            let x = sign * grid.node(k);
            if x < 0.75 * l {
                continue;
            }
            let u = l / x;
            let (b0, b1) = (u.powf(p), u.powf(p + 1.0));
            g00 += b0 * b0;
            g01 += b0 * b1;
            g11 += b1 * b1;
            r0 += samples[k] * b0;
            r1 += samples[k] * b1;
        }
        let det = g00 * g11 - g01 * g01;
        let a = (r0 * g11 - r1 * g01) / det;
        let b = (r1 * g00 - r0 * g01) / det;
        [a * l.powf(p), b * l.powf(p + 1.0)]
    };
    (fit(1.0), fit(-1.0))
}

/// `∫_{|x|>L} s(x)/(x - z) dx` under the given tail model.
fn tail_contribution(samples: &[Complex64], grid: &FrequencyGrid, z: Complex64, tail: TailModel) -> Result<Complex64> {
    match tail {
        TailModel::Truncate => Ok(Complex64::new(0.0, 0.0)),
        TailModel::Power { exponent } => {
            let l = integration_limit(grid);
            let (right, left) = power_tail_coefficients(samples, grid, exponent);
            let mut total = Complex64::new(0.0, 0.0);
            for (i, p) in [exponent, exponent + 1.0].into_iter().enumerate() {
                total += right[i] * power_tail_integral(p, l, z)?;
                // x = -y maps the left tail onto ∫_L^∞ y^{-p}/(-(y + z)) dy.
                total -= left[i] * power_tail_integral(p, l, -z)?;
            }
            Ok(total)
        }
    }
}

/// Local value and derivative of the sampled function at `a` (cubic
/// Lagrange interpolation, or a sixth-order difference at a node).
fn local_jet(samples: &[Complex64], grid: &FrequencyGrid, a: f64) -> (Complex64, Complex64) {
    let h = grid.spacing();
    let pos = a / h + grid.zero_index() as f64;
    let nearest = pos.round();
    if (pos - nearest).abs() < 1e-9 {
        let j = nearest as usize;
        return (samples[j], derivative_at(samples, j, h));
    }
    let base = (pos.floor() as usize).clamp(2, grid.len() - 3) - 1;
    let t = pos - base as f64;
    let nodes = [0.0, 1.0, 2.0, 3.0];
    let mut value = Complex64::new(0.0, 0.0);
    let mut slope = Complex64::new(0.0, 0.0);
    for i in 0..4 {
        let mut li = 1.0;
        let mut dli = 0.0;
        for m in 0..4 {
            if m == i {
                continue;
            }
            let denom = nodes[i] - nodes[m];
            let mut prod = 1.0 / denom;
            for r in 0..4 {
                if r != i && r != m {
                    prod *= (t - nodes[r]) / (nodes[i] - nodes[r]);
                }
            }
            dli += prod;
            li *= (t - nodes[m]) / denom;
        }
        value += samples[base + i] * li;
        slope += samples[base + i] * dli;
    }
    (value, slope / h)
}

/// Sixth-order central difference, lower order near the ends.
pub(crate) fn derivative_at(samples: &[Complex64], j: usize, h: f64) -> Complex64 {
    let n = samples.len();
    if j >= 3 && j + 3 < n {
        (samples[j + 3] - 9.0 * samples[j + 2] + 45.0 * samples[j + 1] - 45.0 * samples[j - 1] + 9.0 * samples[j - 2]
            - samples[j - 3])
            / (60.0 * h)
    } else if j >= 2 && j + 2 < n {
        (-samples[j + 2] + 8.0 * samples[j + 1] - 8.0 * samples[j - 1] + samples[j - 2]) / (12.0 * h)
    } else if j >= 2 && j + 1 < n {
        (samples[j + 1] - samples[j - 1]) / (2.0 * h)
    } else if j + 1 < n {
        (samples[j + 1] - samples[j]) / h
    } else {
        (samples[j] - samples[j - 1]) / h
    }
}

/// `∫_{y1}^{y2} y / ((c² + y²)(y - w)) dy`; principal value when `w` is real.
fn bump_integral(y1: f64, y2: f64, c: f64, w: Complex64) -> Complex64 {
    let denom = c * c + w * w;
    let a = w / denom;
    let cc = c * c / denom;
    let log_term = if w.im == 0.0 {
        Complex64::new(((y2 - w.re) / (y1 - w.re)).abs().ln(), 0.0)
    } else {
        ((y2 - w) / (y1 - w)).ln()
    };
    a * log_term - a / 2.0 * ((c * c + y2 * y2) / (c * c + y1 * y1)).ln()
        + cc / c * ((y2 / c).atan() - (y1 / c).atan())
}

/// `∫_{-L}^{L} dx / (x - z)`; principal value when `z` is real.
fn flat_integral(l: f64, z: Complex64) -> Complex64 {
    if z.im == 0.0 {
        Complex64::new(((l - z.re) / (l + z.re)).abs().ln(), 0.0)
    } else {
        ((l - z) / (-l - z)).ln()
    }
}

/// Sokhotskyi–Plemelj integral `(1/2πi) ∫ s(x)/(x - λ) dx` of grid samples.
///
/// For real `λ` the principal value is returned, i.e. the average of the
/// limits from above and below.
pub fn plemelj_integral(samples: &[Complex64], grid: &FrequencyGrid, lambda: Complex64, tail: TailModel) -> Result<Complex64> {
    assert_eq!(samples.len(), grid.len(), "samples must match the grid");
    tail.check()?;
    let h = grid.spacing();
    let l = integration_limit(grid);
    let a = lambda.re;
    let near = lambda.im.abs() < 8.0 * h;
    if near && a.abs() > l - 4.0 * h {
        return Err(Error::OutsideGrid { point: lambda });
    }

    let mut body = Complex64::new(0.0, 0.0);
    if near {
        // s = u + r with u(x) = s(a) + s'(a) y/(1 + y²), y = x - a; r = O(y²).
        let (sa, da) = local_jet(samples, grid, a);
        let w = lambda - a;
        for k in 1..grid.len() {
            let x = grid.node(k);
            let y = x - a;
            let r = samples[k] - sa - da * y / (1.0 + y * y);
            let denom = x - lambda;
            if denom.norm() > 0.0 {
                body += trapezoid_weight(grid, k) * r / denom;
            }
        }
        body *= h;
        body += sa * flat_integral(l, lambda) + da * bump_integral(-l - a, l - a, 1.0, w);
    } else {
        for k in 1..grid.len() {
            body += trapezoid_weight(grid, k) * samples[k] / (grid.node(k) - lambda);
        }
        body *= h;
    }
    let total = body + tail_contribution(samples, grid, lambda, tail)?;
    Ok(total / (2.0 * PI * I))
}

/// Linear convolution of length-`n` data with the odd kernel `1/m`
/// (`m ≠ 0`), evaluated by FFT. Returns `Σ_k a_k / (k - j)` for each `j`.
pub(crate) struct CauchyKernel {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    kernel_hat: Vec<Complex64>,
}

impl CauchyKernel {
    pub(crate) fn new(n: usize) -> Self {
        let m = 2 * n;
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(m);
        let inverse = planner.plan_fft_inverse(m);
        let mut kernel = vec![Complex64::new(0.0, 0.0); m];
        for d in 1..n {
            // b[d] = 1/d, b[-d] = -1/d; the sum needs 1/(k - j) = -b[j - k].
            kernel[d] = Complex64::new(1.0 / d as f64, 0.0);
            kernel[m - d] = Complex64::new(-1.0 / d as f64, 0.0);
        }
        forward.process(&mut kernel);
        Self {
            n,
            forward,
            inverse,
            kernel_hat: kernel,
        }
    }

    pub(crate) fn apply(&self, data: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(data.len(), self.n);
        let m = 2 * self.n;
        let mut buf = vec![Complex64::new(0.0, 0.0); m];
        buf[..self.n].copy_from_slice(data);
        self.forward.process(&mut buf);
        for (b, k) in buf.iter_mut().zip(&self.kernel_hat) {
            *b *= k;
        }
        self.inverse.process(&mut buf);
        let scale = -1.0 / m as f64;
        buf[..self.n].iter().map(|v| v * scale).collect()
    }
}

/// `PV ∫_{-L}^{L} s(x)/(x - ω_j) dx` at every node, without tails.
///
/// Nodes whose abscissa is not strictly inside `(-L, L)` copy their inner
/// neighbour; callers only use interior nodes.
pub(crate) fn truncated_pv(samples: &[Complex64], grid: &FrequencyGrid) -> Vec<Complex64> {
    let n = grid.len();
    let h = grid.spacing();
    let l = integration_limit(grid);
    let kernel = CauchyKernel::new(n);
    let weights: Vec<Complex64> = (0..n).map(|k| Complex64::new(trapezoid_weight(grid, k), 0.0)).collect();
    let weighted: Vec<Complex64> = samples.iter().zip(&weights).map(|(s, w)| s * w).collect();
    let t = kernel.apply(&weighted);
    let wsum = kernel.apply(&weights);
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for j in 2..n - 1 {
        let w = grid.node(j);
        let smooth = t[j] - samples[j] * wsum[j] + h * weights[j].re * derivative_at(samples, j, h);
        out[j] = smooth + samples[j] * ((l - w) / (l + w)).ln();
    }
    out[0] = out[2];
    out[1] = out[2];
    out[n - 1] = out[n - 2];
    out
}

/// Hilbert transform `H_s(ω) = (1/π) PV ∫ s(x)/(x - ω) dx` on every node.
///
/// With this sign convention the boundary values of [`plemelj_integral`]
/// satisfy `φ±(ω) = ±s(ω)/2 + H_s(ω)/(2i)`. Tail terms are evaluated for
/// nodes with `|ω| < 0.9 L`; outer nodes receive only the truncated part.
pub fn hilbert_transform(samples: &[f64], grid: &FrequencyGrid, tail: TailModel) -> Result<Vec<f64>> {
    assert_eq!(samples.len(), grid.len(), "samples must match the grid");
    tail.check()?;
    let complex: Vec<Complex64> = samples.iter().map(|&s| Complex64::new(s, 0.0)).collect();
    let pv = truncated_pv(&complex, grid);
    let l = integration_limit(grid);
    let mut out = Vec::with_capacity(grid.len());
    for (j, v) in pv.iter().enumerate() {
        let w = grid.node(j);
        let tail_part = if w.abs() < 0.9 * l {
            tail_contribution(&complex, grid, Complex64::new(w, 0.0), tail)?
        } else {
            Complex64::new(0.0, 0.0)
        };
        out.push((v + tail_part).re / PI);
    }
    Ok(out)
}

/// `|φ_f(λ) - φ_f(μ) - (λ - μ) φ_{f/(x-λ)}(μ)|` with every term computed by
/// [`plemelj_integral`]. The kernel identity makes this a pure quadrature
/// self-test.
pub fn resolvent_check(
    samples: &[Complex64],
    grid: &FrequencyGrid,
    lambda: Complex64,
    mu: Complex64,
    tail: TailModel,
) -> Result<f64> {
    let lhs = plemelj_integral(samples, grid, lambda, tail)? - plemelj_integral(samples, grid, mu, tail)?;
    let shifted_tail = match tail {
        TailModel::Truncate => TailModel::Truncate,
        TailModel::Power { exponent } => TailModel::Power { exponent: exponent + 1.0 },
    };
    let divided: Vec<Complex64> = samples
        .iter()
        .enumerate()
        .map(|(k, s)| {
            let d = grid.node(k) - lambda;
            if d.norm() == 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                s / d
            }
        })
        .collect();
    let rhs = (lambda - mu) * plemelj_integral(&divided, grid, mu, shifted_tail)?;
    Ok((lhs - rhs).norm())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lorentz(grid: &FrequencyGrid) -> Vec<Complex64> {
        grid.nodes().iter().map(|x| Complex64::new(1.0 / (1.0 + x * x), 0.0)).collect()
    }

    #[test]
    fn zero_function_integrates_to_zero() {
        let grid = FrequencyGrid::new(50.0, 4096).unwrap();
        let zeros = vec![Complex64::new(0.0, 0.0); grid.len()];
        for lam in [Complex64::new(0.3, 1.0), Complex64::new(0.0, -2.0), Complex64::new(1.5, 0.0)] {
            let v = plemelj_integral(&zeros, &grid, lam, TailModel::Truncate).unwrap();
            assert_eq!(v, Complex64::new(0.0, 0.0));
        }
        let h = hilbert_transform(&vec![0.0; grid.len()], &grid, TailModel::Truncate).unwrap();
        assert!(h.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn lorentzian_at_two_i_matches_residue_value() {
        // Closing the contour in the lower half-plane: φ(λ) = -1/(2i(λ+i)) for Im λ > 0.
        let grid = FrequencyGrid::new(200.0, 1 << 14).unwrap();
        let v = plemelj_integral(&lorentz(&grid), &grid, Complex64::new(0.0, 2.0), TailModel::Power { exponent: 2.0 }).unwrap();
        assert!((v - Complex64::new(1.0 / 6.0, 0.0)).norm() < 1e-9, "{v}");
    }

    #[test]
    fn lorentzian_hilbert_pair() {
        let grid = FrequencyGrid::new(200.0, 1 << 14).unwrap();
        let s: Vec<f64> = grid.nodes().iter().map(|x| 1.0 / (1.0 + x * x)).collect();
        let h = hilbert_transform(&s, &grid, TailModel::Power { exponent: 2.0 }).unwrap();
        for j in grid.within(20.0) {
            let w = grid.node(j);
            assert!((h[j] + w / (1.0 + w * w)).abs() < 1e-9, "{w}: {}", h[j] + w / (1.0 + w * w));
        }
    }

    #[test]
    fn tail_exponent_must_be_positive() {
        let grid = FrequencyGrid::new(50.0, 1024).unwrap();
        let s = lorentz(&grid);
        let r = plemelj_integral(&s, &grid, Complex64::new(0.0, 1.0), TailModel::Power { exponent: 0.0 });
        assert!(matches!(r, Err(Error::TailDivergence(_))));
    }

    #[test]
    fn resolvent_trivial_cases() {
        let grid = FrequencyGrid::new(50.0, 2048).unwrap();
        let zeros = vec![Complex64::new(0.0, 0.0); grid.len()];
        let lam = Complex64::new(0.2, 0.7);
        assert_eq!(resolvent_check(&zeros, &grid, lam, Complex64::new(0.0, 3.0), TailModel::Truncate).unwrap(), 0.0);
        let s = lorentz(&grid);
        assert!(resolvent_check(&s, &grid, lam, lam, TailModel::Truncate).unwrap() < 1e-15);
    }

    #[test]
    fn kernel_convolution_matches_direct_sum() {
        let n = 64;
        let data: Vec<Complex64> = (0..n).map(|k| Complex64::new((k as f64).sin(), (k as f64 * 0.3).cos())).collect();
        let fast = CauchyKernel::new(n).apply(&data);
        for j in 0..n {
            let mut direct = Complex64::new(0.0, 0.0);
            for (k, d) in data.iter().enumerate() {
                if k != j {
                    direct += d / (k as f64 - j as f64);
                }
            }
            assert!((fast[j] - direct).norm() < 1e-12);
        }
    }
}
