//! Distribution functions of the supremum and infimum from their
//! characteristic functions.
//!
//! The infimum is handled through `-I ≥ 0`, whose characteristic function is
//! `conj Φ-(ω)`. An atom `a` at zero is estimated as the limit of `Re Φ(ω)`
//! at large ω and removed before inversion, so the Gil-Pelaez sine integral
//! only sees the continuous part.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::factorization::FrequencyGrid;

/// Which extremum a table describes, and hence its support.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// `M_q`, supported on `[0, ∞)`.
    Supremum,
    /// `I_q`, supported on `(-∞, 0]`.
    Infimum,
}

impl Side {
    pub fn as_str(&self) -> &'static str {
        match self {
            Side::Supremum => "sup",
            Side::Infimum => "inf",
        }
    }
}

/// Share of the frequency half-line, at its outer end, under the raised-cosine taper.
pub const TAPER_FRACTION: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InversionOptions {
    /// Known mass at zero; estimated from `Φ` when `None`.
    pub atom: Option<f64>,
    pub density: bool,
}

impl Default for InversionOptions {
    fn default() -> Self {
        Self {
            atom: None,
            density: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistributionTable {
    pub side: Side,
    /// Increasing; nonnegative for the supremum, nonpositive for the infimum.
    pub abscissae: Vec<f64>,
    pub cdf: Vec<f64>,
    pub density: Option<Vec<f64>>,
    pub atom_at_zero: f64,
    /// Sup-norm change made by the monotone projection.
    pub projection_correction: f64,
}

impl DistributionTable {
    /// Cdf at any point, by linear interpolation inside the table.
    pub fn cdf_at(&self, x: f64) -> f64 {
        let (xs, fs) = (&self.abscissae, &self.cdf);
        match self.side {
            Side::Supremum if x < 0.0 => return 0.0,
            Side::Infimum if x >= 0.0 => return 1.0,
            _ => {}
        }
        if x <= xs[0] {
            return fs[0];
        }
        if x >= xs[xs.len() - 1] {
            return fs[fs.len() - 1];
        }
        let k = xs.partition_point(|&a| a <= x);
        let (x0, x1) = (xs[k - 1], xs[k]);
        let t = (x - x0) / (x1 - x0);
        fs[k - 1] + t * (fs[k] - fs[k - 1])
    }

    /// Left limit of the cdf; differs from [`Self::cdf_at`] only at the atom.
    pub fn cdf_before(&self, x: f64) -> f64 {
        match self.side {
            Side::Supremum if x == 0.0 => 0.0,
            Side::Infimum if x == 0.0 => 1.0 - self.atom_at_zero,
            _ => self.cdf_at(x),
        }
    }

    /// `∫ e^{iωx} dF(x)` over the table (midpoint rule on cdf increments).
    pub fn characteristic_function(&self, omega: f64) -> Complex64 {
        let mut acc = Complex64::new(self.atom_at_zero, 0.0);
        let xs = &self.abscissae;
        for k in 1..xs.len() {
            let mut mass = self.cdf[k] - self.cdf[k - 1];
            if xs[k] == 0.0 && self.side == Side::Infimum {
                mass -= self.atom_at_zero;
            }
            let mid = 0.5 * (xs[k] + xs[k - 1]);
            acc += mass * Complex64::from_polar(1.0, omega * mid);
        }
        acc
    }

    /// Kolmogorov–Smirnov distance to the empirical law of `samples`,
    /// accounting for the jump of both cdfs at the atom.
    pub fn ks_distance(&self, samples: &[f64]) -> f64 {
        assert!(!samples.is_empty(), "no samples");
        let mut sorted = samples.to_vec();
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len() as f64;
        let mut worst: f64 = 0.0;
        let mut i = 0;
        while i < sorted.len() {
            let v = sorted[i];
            let mut j = i;
            while j < sorted.len() && sorted[j] == v {
                j += 1;
            }
            let below = i as f64 / n;
            let upto = j as f64 / n;
            worst = worst
                .max((self.cdf_before(v) - below).abs())
                .max((self.cdf_at(v) - upto).abs());
            i = j;
        }
        worst
    }
}

fn taper(omega: f64, halfwidth: f64) -> f64 {
    let start = (1.0 - TAPER_FRACTION) * halfwidth;
    if omega <= start {
        1.0
    } else if omega >= halfwidth {
        0.0
    } else {
        0.5 * (1.0 + (PI * (omega - start) / (TAPER_FRACTION * halfwidth)).cos())
    }
}

/// Characteristic function of the nonnegative variable: `Φ+` itself, or
/// `conj Φ-` for `-I`.
fn oriented(phi: &[Complex64], side: Side) -> Vec<Complex64> {
    match side {
        Side::Supremum => phi.to_vec(),
        Side::Infimum => phi.iter().map(|p| p.conj()).collect(),
    }
}

/// Mass at zero, `lim Re Φ(ω)` as `ω → ∞`. `Re Φ` minus the atom decays
/// like a power of ω, so its means over the windows `[Ω/16, Ω/8)`,
/// `[Ω/8, Ω/4)`, `[Ω/4, Ω/2)` form a geometric sequence whose limit is
/// taken by Aitken extrapolation. Falls back to the last window mean when
/// the sequence is not contracting. Clipped to `[0, 1]`.
pub fn estimate_atom(phi: &[Complex64], grid: &FrequencyGrid) -> f64 {
    let omega = grid.halfwidth();
    let window_mean = |lo: f64, hi: f64| {
        let (sum, count) = (grid.zero_index()..grid.len())
            .filter(|&j| grid.node(j) >= lo && grid.node(j) < hi)
            .fold((0.0, 0usize), |(s, c), j| (s + phi[j].re, c + 1));
        sum / count as f64
    };
    let r1 = window_mean(omega / 16.0, omega / 8.0);
    let r2 = window_mean(omega / 8.0, omega / 4.0);
    let r3 = window_mean(omega / 4.0, omega / 2.0);
    let (d1, d2) = (r2 - r1, r3 - r2);
    let ratio = d2 / d1;
    let a = if d1.abs() > 1e-14 && ratio > 0.0 && ratio < 1.0 {
        r3 + d2 * ratio / (1.0 - ratio)
    } else {
        r3
    };
    a.clamp(0.0, 1.0)
}

/// Pool-adjacent-violators projection onto nondecreasing sequences.
fn isotonic(values: &[f64]) -> Vec<f64> {
    let mut blocks: Vec<(f64, usize)> = Vec::with_capacity(values.len());
    for &v in values {
        blocks.push((v, 1));
        while blocks.len() > 1 {
            let (m2, c2) = blocks[blocks.len() - 1];
            let (m1, c1) = blocks[blocks.len() - 2];
            if m1 <= m2 {
                break;
            }
            blocks.pop();
            let c = c1 + c2;
            *blocks.last_mut().unwrap() = ((m1 * c1 as f64 + m2 * c2 as f64) / c as f64, c);
        }
    }
    blocks
        .into_iter()
        .flat_map(|(m, c)| std::iter::repeat_n(m, c))
        .collect()
}

/// Largest `|x|` the grid spacing resolves without aliasing.
pub fn resolvable_range(grid: &FrequencyGrid) -> f64 {
    PI / (2.0 * grid.spacing())
}

/// Distribution table of the supremum (`phi = Φ+`) or infimum
/// (`phi = Φ-`) at the distances `x_grid` from zero (nonnegative,
/// increasing).
pub fn invert_to_distribution(
    phi: &[Complex64],
    grid: &FrequencyGrid,
    side: Side,
    x_grid: &[f64],
    options: InversionOptions,
) -> Result<DistributionTable> {
    assert_eq!(phi.len(), grid.len(), "samples must match the grid");
    if x_grid.is_empty() || x_grid[0] < 0.0 || x_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("x_grid", "must be nonnegative and strictly increasing"));
    }
    let x_max = x_grid[x_grid.len() - 1];
    let limit = resolvable_range(grid);
    if x_max >= limit {
        return Err(Error::GridTooCoarse {
            x_max,
            max_spacing: PI / (2.0 * x_max),
        });
    }

    let phi_y = oriented(phi, side);
    let atom = match options.atom {
        Some(a) => a,
        None => estimate_atom(&phi_y, grid),
    };
    let mass = 1.0 - atom;
    let z = grid.zero_index();
    let h = grid.spacing();
    // Continuous part on the nonnegative half-grid, tapered, with trapezoid weights.
    let half: Vec<(f64, Complex64)> = (z..grid.len())
        .map(|j| {
            let w = grid.node(j);
            let end = if j == z || j + 1 == grid.len() { 0.5 } else { 1.0 };
            (w, (phi_y[j] - atom) * taper(w, grid.halfwidth()) * end * h)
        })
        .collect();

    // Im Φ'(0), by a sixth-order central difference using Φ(-ω) = conj Φ(ω).
    let im = |k: usize| phi_y[z + k].im;
    let mean = (90.0 * im(1) - 18.0 * im(2) + 2.0 * im(3)) / (60.0 * h);

    let raw: Vec<(f64, f64)> = x_grid
        .par_iter()
        .map(|&y| {
            let term = |k: usize| {
                let (w, v) = half[k];
                (Complex64::from_polar(1.0, -w * y) * v).im / w
            };
            // The integrand tends to E[Y] - y(1 - a) at ω = 0.
            let at_zero = 0.5 * h * (mean - y * mass);
            let sine: f64 = at_zero + (1..half.len()).map(term).sum::<f64>();
            let cdf = atom + 0.5 * mass - sine / PI;
            let dens = if options.density {
                let cosine: f64 = half.iter().map(|&(w, v)| (Complex64::from_polar(1.0, -w * y) * v).re).sum();
                cosine / PI
            } else {
                0.0
            };
            (cdf, dens)
        })
        .collect();

    let mut cdf: Vec<f64> = raw
        .iter()
        .zip(x_grid)
        .map(|(&(c, _), &y)| if y == 0.0 { atom } else { c })
        .collect();
    let mut density: Vec<f64> = raw.iter().map(|r| r.1).collect();
    let mut abscissae = x_grid.to_vec();
    if side == Side::Infimum {
        // P(I ≤ -y) = 1 - P(-I < y) = 1 - F(y) for y > 0.
        abscissae = x_grid.iter().rev().map(|y| -y).collect();
        cdf = cdf
            .iter()
            .rev()
            .zip(&abscissae)
            .map(|(c, &x)| if x == 0.0 { 1.0 } else { 1.0 - c })
            .collect();
        density.reverse();
    }
    let projected: Vec<f64> = isotonic(&cdf).into_iter().map(|v| v.clamp(0.0, 1.0)).collect();
    let correction = projected.iter().zip(&cdf).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    Ok(DistributionTable {
        side,
        abscissae,
        cdf: projected,
        density: options.density.then_some(density),
        atom_at_zero: atom,
        projection_correction: correction,
    })
}

/// Resolution cells (of width `π/Ω`) next to the origin excluded from the
/// leakage measure: the tapered kernel spreads a density jump at 0 over them.
pub const LEAKAGE_GUARD_CELLS: usize = 16;

/// Mass that the tapered inverse transform of the continuous part places
/// on the wrong side of zero, beyond a guard band of
/// [`LEAKAGE_GUARD_CELLS`] cells and within the alias-free range.
pub fn sidedness_leakage(phi: &[Complex64], grid: &FrequencyGrid, side: Side) -> f64 {
    let n = grid.len();
    let phi_y = oriented(phi, side);
    let atom = estimate_atom(&phi_y, grid);
    let h = grid.spacing();
    let mut buf: Vec<Complex64> = (0..n)
        .map(|j| (phi_y[j] - atom) * taper(grid.node(j).abs(), grid.halfwidth()) * h / (2.0 * PI))
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let dx = 2.0 * PI / (n as f64 * h);
    let guard = LEAKAGE_GUARD_CELLS as f64 * dx;
    let reach = resolvable_range(grid);
    (n / 2..n)
        .map(|k| {
            let x = (k as f64 - n as f64) * dx;
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            (x, sign * buf[k].re)
        })
        .filter(|&(x, _)| x <= -guard && x >= -reach)
        .map(|(_, f)| f.abs() * dx)
        .sum()
}

/// Evenly spaced distances `0, x_max/(n-1), ..., x_max`.
pub fn uniform_x_grid(x_max: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2 && x_max > 0.0);
    (0..n).map(|k| x_max * k as f64 / (n - 1) as f64).collect()
}
