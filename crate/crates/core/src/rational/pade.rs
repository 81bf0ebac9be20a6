//! Rational approximation of a non-rational `g` on the real line, followed
//! by the exact half-plane split of the approximant.
//!
//! The approximant is a multipoint Padé (barycentric, AAA-style) interpolant
//! with support points chosen greedily in mirror pairs `±ω`, always
//! including `ω = 0` so that it equals `g(0) = 1` exactly.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use super::function::{carlemann_split, RationalFunction, Root, REAL_AXIS_CLEARANCE};
use crate::error::{Error, Result};
use crate::factorization::{FactorMethod, FactorPair, FrequencyGrid, GENERAL_TOLERANCE};

/// Numerator and denominator degrees `(m, n)` with `m ≤ n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PadeOrder {
    pub numerator: usize,
    pub denominator: usize,
}

impl PadeOrder {
    pub fn new(numerator: usize, denominator: usize) -> Result<Self> {
        if numerator > denominator {
            return Err(Error::invalid("order", format!("({numerator}, {denominator}) needs m <= n")));
        }
        Ok(Self { numerator, denominator })
    }

    pub fn diagonal(n: usize) -> Self {
        Self {
            numerator: n,
            denominator: n,
        }
    }
}

/// Diagonal degrees tried by [`pade_factorize_auto`].
pub const AUTO_DEGREES: [usize; 4] = [4, 8, 16, 32];
/// Zero/pole pairs closer than this are cancelled before splitting.
pub const DOUBLET_TOLERANCE: f64 = 1e-6;
const SAMPLES_PER_FAMILY: usize = 1000;
const INTERPOLATION_TOLERANCE: f64 = 1e-13;

/// Real-axis sample set: a `tan`-mapped family covering all of ℝ plus a
/// uniform family on `[-Ω, Ω]`, symmetric about 0 and sorted.
fn sample_points(grid: &FrequencyGrid) -> Vec<f64> {
    let half_pi = std::f64::consts::FRAC_PI_2;
    let mut positive: Vec<f64> = (1..=SAMPLES_PER_FAMILY)
        .map(|k| (half_pi * k as f64 / (SAMPLES_PER_FAMILY + 1) as f64).tan())
        .chain((1..=SAMPLES_PER_FAMILY).map(|k| grid.halfwidth() * k as f64 / SAMPLES_PER_FAMILY as f64))
        .collect();
    positive.sort_by(f64::total_cmp);
    positive.dedup_by(|a, b| (*a - *b).abs() < 1e-12 * b.abs());
    positive
        .iter()
        .rev()
        .map(|x| -x)
        .chain(std::iter::once(0.0))
        .chain(positive.iter().copied())
        .collect()
}

/// Barycentric rational `Σ w_j f_j/(z - z_j) / Σ w_j/(z - z_j)`.
#[derive(Debug, Clone)]
struct Barycentric {
    nodes: Vec<f64>,
    values: Vec<Complex64>,
    weights: Vec<Complex64>,
}

impl Barycentric {
    fn eval(&self, z: Complex64) -> Complex64 {
        let mut num = Complex64::new(0.0, 0.0);
        let mut den = Complex64::new(0.0, 0.0);
        for ((&x, &f), &w) in self.nodes.iter().zip(&self.values).zip(&self.weights) {
            let d = z - x;
            if d.norm() == 0.0 {
                return f;
            }
            num += w * f / d;
            den += w / d;
        }
        num / den
    }
}

fn fit(points: &[f64], values: &[Complex64], degree: usize) -> Barycentric {
    let n = points.len();
    let mid = n / 2;
    let mut support = vec![mid];
    let mut current = Barycentric {
        nodes: vec![0.0],
        values: vec![values[mid]],
        weights: vec![Complex64::new(1.0, 0.0)],
    };
    let scale = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    while support.len() < degree + 1 {
        let (worst, err) = (0..n)
            .filter(|i| !support.contains(i))
            .map(|i| (i, (current.eval(points[i].into()) - values[i]).norm()))
            .fold((usize::MAX, -1.0), |a, b| if b.1 > a.1 { b } else { a });
        if worst == usize::MAX || err <= INTERPOLATION_TOLERANCE * scale {
            break;
        }
        let mirror = n - 1 - worst;
        support.push(worst.min(mirror));
        support.push(worst.max(mirror));

        let rows: Vec<usize> = (0..n).filter(|i| !support.contains(i)).collect();
        let loewner = DMatrix::from_fn(rows.len(), support.len(), |r, c| {
            let (i, j) = (rows[r], support[c]);
            (values[i] - values[j]) / (points[i] - points[j])
        });
        let svd = loewner.svd(false, true);
        let v_t = svd.v_t.expect("right singular vectors requested");
        let smallest = svd
            .singular_values
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map(|(k, _)| k)
            .unwrap();
        current = Barycentric {
            nodes: support.iter().map(|&j| points[j]).collect(),
            values: support.iter().map(|&j| values[j]).collect(),
            weights: (0..support.len()).map(|c| v_t[(smallest, c)].conj()).collect(),
        };
    }
    current
}

/// Roots of `Σ_j c_j/(z - z_j)`: the finite eigenvalues of the pencil
/// `E - λB` with `E = [[0, cᵀ], [1, diag(z)]]` and `B = diag(0, 1, ..., 1)`,
/// computed through the shift-inverted matrix `(E - σB)⁻¹B`.
fn barycentric_roots(nodes: &[f64], coeffs: &[Complex64]) -> Result<Vec<Root>> {
    let m = nodes.len() + 1;
    let reach = nodes.iter().fold(1.0f64, |a, x| a.max(x.abs()));
    let b = DMatrix::from_fn(m, m, |i, j| Complex64::new(if i == j && i > 0 { 1.0 } else { 0.0 }, 0.0));
    for shift in [Complex64::new(0.1234, 0.5678), Complex64::new(-0.731, 1.917), Complex64::new(2.31, -0.377)] {
        let sigma = shift * reach.sqrt();
        let shifted = DMatrix::from_fn(m, m, |i, j| match (i, j) {
            (0, 0) => Complex64::new(0.0, 0.0),
            (0, j) => coeffs[j - 1],
            (_, 0) => Complex64::new(1.0, 0.0),
            (i, j) if i == j => nodes[i - 1] - sigma,
            _ => Complex64::new(0.0, 0.0),
        });
        let Some(inverse) = shifted.try_inverse() else { continue };
        let Some(mu) = (inverse * &b).eigenvalues() else { continue };
        let roots = mu
            .iter()
            .filter(|mu| mu.norm() > 1e-10 / reach)
            .map(|mu| Root::simple(sigma + 1.0 / mu))
            .filter(|r| r.location.norm() < 1e8 * reach)
            .collect();
        return Ok(roots);
    }
    Err(Error::invalid("approximant", "eigenvalue computation failed"))
}

/// Rational approximant of `g` of the given order, with zeros and poles
/// located and near-cancelling pairs removed.
pub fn rational_approximant<F>(g: F, order: PadeOrder, grid: &FrequencyGrid) -> Result<RationalFunction>
where
    F: Fn(f64) -> Result<Complex64> + Sync,
{
    let points = sample_points(grid);
    let values: Vec<Complex64> = points.par_iter().map(|&w| g(w)).collect::<Result<_>>()?;
    if let Some(k) = values.iter().position(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::invalid("g", format!("not finite at {}", points[k])));
    }
    let at_zero = values[points.len() / 2];
    if (at_zero - 1.0).norm() > 1e-10 {
        return Err(Error::invalid("g", format!("g(0) = {at_zero} is not 1")));
    }
    // Mirror pairs keep the approximant Hermitian, so the degree is even.
    let degree = order.denominator / 2 * 2;
    let bary = fit(&points, &values, degree);
    let weighted: Vec<Complex64> = bary.weights.iter().zip(&bary.values).map(|(w, f)| w * f).collect();
    // Roots beyond the requested degrees are rounding artefacts near infinity.
    let nearest = |mut roots: Vec<Root>, keep: usize| {
        roots.sort_by(|a, b| a.location.norm().total_cmp(&b.location.norm()));
        roots.truncate(keep);
        roots
    };
    let zeros = nearest(barycentric_roots(&bary.nodes, &weighted)?, order.numerator);
    let poles = nearest(barycentric_roots(&bary.nodes, &bary.weights)?, order.denominator);
    let approximant = RationalFunction::normalized(zeros, poles)?.cancel_doublets(DOUBLET_TOLERANCE);
    if let Some(p) = approximant.poles().iter().find(|p| p.location.im.abs() <= REAL_AXIS_CLEARANCE) {
        return Err(Error::SpuriousRealPole { location: p.location });
    }
    Ok(approximant)
}

/// Factor `g` through a rational approximant of the given order. The sup
/// error of `Φ+Φ-` against `g` over the inner two thirds of the grid is
/// reported as the certified error and must not exceed `bound`.
pub fn pade_factorize<F>(g: F, order: PadeOrder, grid: &FrequencyGrid, bound: f64) -> Result<FactorPair>
where
    F: Fn(f64) -> Result<Complex64> + Sync,
{
    let approximant = rational_approximant(&g, order, grid)?;
    let split = carlemann_split(&approximant)?;
    let mut pair = split.sample(grid);
    pair.method = FactorMethod::Pade;
    let exact: Vec<Complex64> = grid.nodes().par_iter().map(|&w| g(w)).collect::<Result<_>>()?;
    let error = pair.max_residual(&exact, 2.0 / 3.0);
    if !(error <= bound) {
        return Err(Error::ApproximationTooCoarse { error, bound });
    }
    pair.certified_error = Some(error);
    Ok(pair)
}

/// [`pade_factorize`] over the diagonal orders in [`AUTO_DEGREES`], returning
/// the first that meets `bound` (default [`GENERAL_TOLERANCE`]).
pub fn pade_factorize_auto<F>(g: F, grid: &FrequencyGrid, bound: Option<f64>) -> Result<FactorPair>
where
    F: Fn(f64) -> Result<Complex64> + Sync,
{
    let bound = bound.unwrap_or(GENERAL_TOLERANCE);
    let mut last = None;
    for n in AUTO_DEGREES {
        match pade_factorize(&g, PadeOrder::diagonal(n), grid, bound) {
            Ok(pair) => return Ok(pair),
            Err(
                e @ (Error::ApproximationTooCoarse { .. }
                | Error::SpuriousRealPole { .. }
                | Error::IndexMismatch { .. }
                | Error::RealAxisSingularity { .. }
                | Error::ContourThroughRoot { .. }),
            ) => last = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last.expect("at least one order tried"))
}
