use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::factorization::{FactorMethod, FactorPair, FrequencyGrid};

/// A zero or pole with its multiplicity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub location: Complex64,
    pub multiplicity: u32,
}

impl Root {
    pub fn new(location: Complex64, multiplicity: u32) -> Self {
        Self { location, multiplicity }
    }

    pub fn simple(location: Complex64) -> Self {
        Self::new(location, 1)
    }
}

/// Zeros closer than this (relative) are merged, and zero/pole pairs this
/// close are cancelled at construction.
const COINCIDENCE: f64 = 1e-12;

/// `scale · Π (z - z_i)^{m_i} / Π (z - p_j)^{n_j}`.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalFunction {
    scale: Complex64,
    zeros: Vec<Root>,
    poles: Vec<Root>,
}

fn merge(mut roots: Vec<Root>) -> Vec<Root> {
    let mut out: Vec<Root> = Vec::with_capacity(roots.len());
    roots.retain(|r| r.multiplicity > 0);
    for r in roots {
        match out
            .iter_mut()
            .find(|o| (o.location - r.location).norm() <= COINCIDENCE * (1.0 + r.location.norm()))
        {
            Some(o) => o.multiplicity += r.multiplicity,
            None => out.push(r),
        }
    }
    out
}

fn cancel(zeros: &mut Vec<Root>, poles: &mut Vec<Root>, tol: impl Fn(Complex64) -> f64) {
    for z in zeros.iter_mut() {
        for p in poles.iter_mut() {
            if z.multiplicity == 0 || p.multiplicity == 0 {
                continue;
            }
            if (z.location - p.location).norm() <= tol(z.location) {
                let k = z.multiplicity.min(p.multiplicity);
                z.multiplicity -= k;
                p.multiplicity -= k;
            }
        }
    }
    zeros.retain(|r| r.multiplicity > 0);
    poles.retain(|r| r.multiplicity > 0);
}

fn factor_product(roots: &[Root], z: Complex64) -> Complex64 {
    roots
        .iter()
        .map(|r| (z - r.location).powu(r.multiplicity))
        .product()
}

impl RationalFunction {
    pub fn new(scale: Complex64, zeros: Vec<Root>, poles: Vec<Root>) -> Self {
        let mut zeros = merge(zeros);
        let mut poles = merge(poles);
        cancel(&mut zeros, &mut poles, |z| COINCIDENCE * (1.0 + z.norm()));
        Self { scale, zeros, poles }
    }

    /// Rational function with the given zeros and poles, scaled to equal 1 at 0.
    pub fn normalized(zeros: Vec<Root>, poles: Vec<Root>) -> Result<Self> {
        let mut f = Self::new(Complex64::new(1.0, 0.0), zeros, poles);
        let v = f.raw_at_zero();
        if !(v.norm() > 0.0 && v.norm().is_finite()) {
            return Err(Error::invalid("rational", "zero or pole at the origin; cannot normalise"));
        }
        f.scale = 1.0 / v;
        Ok(f)
    }

    pub fn constant(value: Complex64) -> Self {
        Self::new(value, vec![], vec![])
    }

    pub fn scale(&self) -> Complex64 {
        self.scale
    }

    pub fn zeros(&self) -> &[Root] {
        &self.zeros
    }

    pub fn poles(&self) -> &[Root] {
        &self.poles
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.scale * factor_product(&self.zeros, z) / factor_product(&self.poles, z)
    }

    fn raw_at_zero(&self) -> Complex64 {
        factor_product(&self.zeros, Complex64::new(0.0, 0.0)) / factor_product(&self.poles, Complex64::new(0.0, 0.0))
    }

    /// Value at the origin from the factored form.
    pub fn value_at_zero(&self) -> Complex64 {
        self.scale * self.raw_at_zero()
    }

    /// Half-turns of the argument along ℝ: zeros above and poles below
    /// count +1, zeros below and poles above count -1. Twice the index.
    pub fn half_turns(&self) -> i64 {
        let side = |r: &Root| if r.location.im > 0.0 { r.multiplicity as i64 } else { -(r.multiplicity as i64) };
        self.zeros.iter().map(side).sum::<i64>() - self.poles.iter().map(side).sum::<i64>()
    }

    /// Cancels zero/pole pairs closer than `tol` (Froissart doublets),
    /// keeping the value at the origin.
    pub fn cancel_doublets(&self, tol: f64) -> Self {
        let before = self.value_at_zero();
        let mut zeros = self.zeros.clone();
        let mut poles = self.poles.clone();
        cancel(&mut zeros, &mut poles, |_| tol);
        let mut out = Self {
            scale: Complex64::new(1.0, 0.0),
            zeros,
            poles,
        };
        out.scale = before / out.raw_at_zero();
        out
    }

    /// Smallest distance from any zero or pole to the real axis.
    pub fn real_axis_clearance(&self) -> f64 {
        self.zeros
            .iter()
            .chain(&self.poles)
            .map(|r| r.location.im.abs())
            .fold(f64::INFINITY, f64::min)
    }

    fn restricted(&self, keep: impl Fn(&Root) -> bool) -> Result<Self> {
        Self::normalized(
            self.zeros.iter().copied().filter(&keep).collect(),
            self.poles.iter().copied().filter(&keep).collect(),
        )
    }
}

/// Clearance from ℝ required of every zero and pole before splitting.
pub const REAL_AXIS_CLEARANCE: f64 = 1e-9;

/// `g = g_plus · g_minus`, with `g_plus` analytic and zero-free in the upper
/// half-plane and `g_minus` in the lower; both equal 1 at the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfPlaneSplit {
    pub g_plus: RationalFunction,
    pub g_minus: RationalFunction,
}

impl HalfPlaneSplit {
    pub fn sample(&self, grid: &FrequencyGrid) -> FactorPair {
        let nodes = grid.nodes();
        FactorPair {
            grid: *grid,
            phi_plus: nodes.iter().map(|&w| self.g_plus.eval(w.into())).collect(),
            phi_minus: nodes.iter().map(|&w| self.g_minus.eval(w.into())).collect(),
            method: FactorMethod::Carlemann,
            certified_error: None,
        }
    }
}

/// Carlemann's factorization by inspection: zeros and poles below ℝ go to
/// `g_plus`, those above to `g_minus`.
pub fn carlemann_split(g: &RationalFunction) -> Result<HalfPlaneSplit> {
    if let Some(r) = g
        .zeros
        .iter()
        .chain(&g.poles)
        .find(|r| r.location.im.abs() <= REAL_AXIS_CLEARANCE)
    {
        return Err(Error::RealAxisSingularity {
            location: r.location,
            clearance: REAL_AXIS_CLEARANCE,
        });
    }
    let half_turns = g.half_turns();
    if half_turns != 0 {
        return Err(Error::IndexMismatch {
            index: half_turns.signum() * ((half_turns.abs() + 1) / 2),
        });
    }
    let at_zero = g.value_at_zero();
    if (at_zero - 1.0).norm() > 1e-10 {
        return Err(Error::invalid("g", format!("g(0) = {at_zero} is not 1")));
    }
    Ok(HalfPlaneSplit {
        g_plus: g.restricted(|r| r.location.im < 0.0)?,
        g_minus: g.restricted(|r| r.location.im > 0.0)?,
    })
}
