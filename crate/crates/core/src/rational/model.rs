//! Exact rational form of `g = q/(q - ψ)` for the families whose exponent is
//! rational: Brownian motion with drift, Kou, and mixed-gamma jumps.

use num_complex::Complex64;
use rayon::prelude::*;

use super::function::{carlemann_split, RationalFunction, Root};
use super::roots::{find_halfplane_roots, HalfPlane, SearchBox};
use crate::error::{Error, Result};
use crate::factorization::{FactorPair, FrequencyGrid};
use crate::levy::{JumpMeasure, KilledProcess, KillingTime};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Dense polynomial, coefficients in ascending order.
#[derive(Debug, Clone, PartialEq)]
struct Polynomial(Vec<Complex64>);

impl Polynomial {
    fn constant(c: Complex64) -> Self {
        Self(vec![c])
    }

    fn mul(&self, other: &Self) -> Self {
        let mut out = vec![Complex64::new(0.0, 0.0); self.0.len() + other.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in other.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self(out)
    }

    fn pow(&self, k: u32) -> Self {
        (0..k).fold(Self::constant(1.0.into()), |acc, _| acc.mul(self))
    }

    fn sub_scaled(&self, other: &Self, c: Complex64) -> Self {
        let n = self.0.len().max(other.0.len());
        let at = |p: &Self, i: usize| p.0.get(i).copied().unwrap_or_default();
        Self((0..n).map(|i| at(self, i) - c * at(other, i)).collect())
    }

    fn trimmed(mut self) -> Self {
        let scale = self.0.iter().map(|c| c.norm()).fold(0.0, f64::max);
        while self.0.len() > 1 && self.0.last().unwrap().norm() <= 1e-15 * scale {
            self.0.pop();
        }
        self
    }

    fn degree(&self) -> usize {
        self.0.len() - 1
    }

    fn eval(&self, z: Complex64) -> Complex64 {
        self.0.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c)
    }

    /// All roots, located half-plane by half-plane inside the Cauchy bound.
    fn roots(&self) -> Result<Vec<Root>> {
        let n = self.degree();
        if n == 0 {
            return Ok(vec![]);
        }
        let lead = self.0[n];
        let bound = 1.0 + self.0[..n].iter().map(|c| (c / lead).norm()).fold(0.0, f64::max);
        let r = 1.05 * bound;
        let f = |z: Complex64| Ok(self.eval(z));
        let mut roots = find_halfplane_roots(f, HalfPlane::Lower, SearchBox::new((-r, r), (-r, 0.0))?)?;
        roots.extend(find_halfplane_roots(f, HalfPlane::Upper, SearchBox::new((-r, r), (0.0, r))?)?);
        let found: u32 = roots.iter().map(|r| r.multiplicity).sum();
        if found as usize != n {
            return Err(Error::RealAxisSingularity {
                location: Complex64::new(0.0, 0.0),
                clearance: 0.0,
            });
        }
        Ok(roots)
    }
}

struct JumpComponent {
    rate: f64,
    shape: u32,
    weight: f64,
    upward: bool,
}

fn components(jumps: &JumpMeasure) -> Result<Vec<JumpComponent>> {
    let gamma = |terms: &[crate::levy::GammaTerm], upward| {
        terms
            .iter()
            .map(|t| JumpComponent {
                rate: t.rate,
                shape: t.shape,
                weight: t.weight,
                upward,
            })
            .collect::<Vec<_>>()
    };
    Ok(match jumps {
        JumpMeasure::None => vec![],
        JumpMeasure::MixedGammaPositive(t) => gamma(t, true),
        JumpMeasure::MixedGammaNegative(t) => gamma(t, false),
        JumpMeasure::Kou {
            lambda,
            p,
            eta_plus,
            eta_minus,
        } => vec![
            JumpComponent {
                rate: *eta_plus,
                shape: 1,
                weight: lambda * p,
                upward: true,
            },
            JumpComponent {
                rate: *eta_minus,
                shape: 1,
                weight: lambda * (1.0 - p),
                upward: false,
            },
        ]
        .into_iter()
        .filter(|c| c.weight > 0.0)
        .collect(),
        other => {
            return Err(Error::invalid("jumps", format!("{other:?} has no rational exponent")));
        }
    })
}

/// `(α - iλ)` for upward jumps, `(α + iλ)` for downward ones.
fn linear_factor(rate: f64, upward: bool) -> Polynomial {
    let slope = if upward { -I } else { I };
    Polynomial(vec![rate.into(), slope])
}

/// `g` as an explicit rational function. Only exponential killing of a
/// family with rational exponent qualifies.
pub fn rational_g(process: &KilledProcess) -> Result<RationalFunction> {
    let q = match process.kill() {
        KillingTime::Exponential { q } => q,
        KillingTime::Geometric { .. } => {
            return Err(Error::invalid("kill", "geometric killing does not give a rational g"));
        }
    };
    let model = process.model();
    let comps = components(model.jumps())?;

    // Distinct (rate, side) groups with their highest power.
    let mut groups: Vec<(f64, bool, u32)> = Vec::new();
    for c in &comps {
        match groups.iter_mut().find(|g| g.0 == c.rate && g.1 == c.upward) {
            Some(g) => g.2 = g.2.max(c.shape),
            None => groups.push((c.rate, c.upward, c.shape)),
        }
    }
    let denominator_without = |skip: Option<(f64, bool, u32)>| {
        groups.iter().fold(Polynomial::constant(1.0.into()), |acc, &(rate, up, power)| {
            let reduce = match skip {
                Some((r, u, k)) if r == rate && u == up => k,
                _ => 0,
            };
            acc.mul(&linear_factor(rate, up).pow(power - reduce))
        })
    };
    let denominator = denominator_without(None);

    let intensity: f64 = comps.iter().map(|c| c.weight).sum();
    let sigma = model.sigma();
    let base = Polynomial(vec![
        (q + intensity).into(),
        -I * model.mu(),
        (0.5 * sigma * sigma).into(),
    ]);
    let mut numerator = base.mul(&denominator);
    for c in &comps {
        let rest = denominator_without(Some((c.rate, c.upward, c.shape)));
        numerator = numerator.sub_scaled(&rest, (c.weight * c.rate.powi(c.shape as i32)).into());
    }
    let numerator = numerator.trimmed();

    let zeros = groups
        .iter()
        .map(|&(rate, up, power)| Root::new(if up { -I * rate } else { I * rate }, power))
        .collect();
    RationalFunction::normalized(zeros, numerator.roots()?)
}

/// Exact factorization by splitting the zeros and poles of a rational `g`.
pub fn factorize_carlemann(process: &KilledProcess, grid: &FrequencyGrid) -> Result<FactorPair> {
    let g = rational_g(process)?;
    let split = carlemann_split(&g)?;
    let mut pair = split.sample(grid);
    let exact: Vec<Complex64> = grid.nodes().par_iter().map(|&w| process.g(w)).collect::<Result<_>>()?;
    pair.certified_error = Some(pair.max_residual(&exact, 1.0));
    Ok(pair)
}
