//! Lévy models, their characteristic exponents, killing times and the
//! right-hand side `g` of the factorization problem `Φ+ Φ- = g`.
//!
//! The characteristic exponent follows `E[exp(iωX_t)] = exp(t ψ(ω))`, so
//! `Re ψ ≤ 0` on the real line for every model defined here. Finite-activity
//! families are written without a small-jump compensator: `mu` is the drift
//! of the process between jumps.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// One gamma component `c · α^j x^{j-1} e^{-αx} / (j-1)!` of a mixed-gamma
/// jump density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaTerm {
    pub weight: f64,
    pub rate: f64,
    pub shape: u32,
}

/// Jump part of a Lévy triple. Every variant has a closed-form exponent.
#[derive(Debug, Clone, PartialEq)]
pub enum JumpMeasure {
    None,
    /// Mixed-gamma density on the positive half-line; total mass is the sum
    /// of the weights.
    MixedGammaPositive(Vec<GammaTerm>),
    /// Mirror image of [`JumpMeasure::MixedGammaPositive`] on the negative half-line.
    MixedGammaNegative(Vec<GammaTerm>),
    /// Double-exponential jumps with intensity `lambda`.
    Kou {
        lambda: f64,
        p: f64,
        eta_plus: f64,
        eta_minus: f64,
    },
    /// `c1 x^{-1-α}` on the right and `c2 |x|^{-1-α}` on the left.
    ///
    /// The exponent keeps the repeated `(c1 + c2)` factor of the classical
    /// closed form this family is usually quoted with, so the scale is
    /// `(c1 + c2)^2` rather than the textbook stable constant. `eta_shift`
    /// adds the linear term `iωη`.
    StableTails {
        c1: f64,
        c2: f64,
        alpha: f64,
        eta_shift: f64,
    },
    /// `ν(dx) = e^{αx} sech(x) dx`, a finite-activity measure for `|α| < 1`.
    SechExponential { alpha: f64 },
}

impl JumpMeasure {
    pub fn validate(&self) -> Result<()> {
        match self {
            JumpMeasure::None => Ok(()),
            JumpMeasure::MixedGammaPositive(terms) | JumpMeasure::MixedGammaNegative(terms) => {
                if terms.is_empty() {
                    return Err(Error::invalid("jumps.terms", "mixed gamma needs at least one term"));
                }
                for t in terms {
                    if !(t.weight > 0.0 && t.weight.is_finite()) {
                        return Err(Error::invalid("jumps.terms.weight", format!("{} is not > 0", t.weight)));
                    }
                    if !(t.rate > 0.0 && t.rate.is_finite()) {
                        return Err(Error::invalid("jumps.terms.rate", format!("{} is not > 0", t.rate)));
                    }
                    if t.shape == 0 {
                        return Err(Error::invalid("jumps.terms.shape", "shape must be >= 1"));
                    }
                }
                Ok(())
            }
            JumpMeasure::Kou {
                lambda,
                p,
                eta_plus,
                eta_minus,
            } => {
                if !(*lambda > 0.0 && lambda.is_finite()) {
                    return Err(Error::invalid("jumps.lambda", format!("{lambda} is not > 0")));
                }
                if !(0.0..=1.0).contains(p) {
                    return Err(Error::invalid("jumps.p", format!("{p} is outside [0, 1]")));
                }
                if !(*eta_plus > 0.0 && eta_plus.is_finite()) {
                    return Err(Error::invalid("jumps.eta_plus", format!("{eta_plus} is not > 0")));
                }
                if !(*eta_minus > 0.0 && eta_minus.is_finite()) {
                    return Err(Error::invalid("jumps.eta_minus", format!("{eta_minus} is not > 0")));
                }
                Ok(())
            }
            JumpMeasure::StableTails {
                c1,
                c2,
                alpha,
                eta_shift,
            } => {
                if !(*c1 >= 0.0 && c1.is_finite()) {
                    return Err(Error::invalid("jumps.c1", format!("{c1} is not >= 0")));
                }
                if !(*c2 >= 0.0 && c2.is_finite()) {
                    return Err(Error::invalid("jumps.c2", format!("{c2} is not >= 0")));
                }
                let ok = (*alpha > 0.0 && *alpha < 1.0) || (*alpha > 1.0 && *alpha < 2.0);
                if !ok {
                    return Err(Error::invalid("jumps.alpha", format!("{alpha} is outside (0,1) U (1,2)")));
                }
                if !eta_shift.is_finite() {
                    return Err(Error::invalid("jumps.eta_shift", "must be finite"));
                }
                Ok(())
            }
            JumpMeasure::SechExponential { alpha } => {
                if !(*alpha > -1.0 && *alpha < 1.0) {
                    return Err(Error::invalid("jumps.alpha", format!("{alpha} is outside (-1, 1)")));
                }
                Ok(())
            }
        }
    }

    /// Total jump intensity for finite-activity variants.
    pub fn intensity(&self) -> Option<f64> {
        match self {
            JumpMeasure::None => Some(0.0),
            JumpMeasure::MixedGammaPositive(t) | JumpMeasure::MixedGammaNegative(t) => {
                Some(t.iter().map(|t| t.weight).sum())
            }
            JumpMeasure::Kou { lambda, .. } => Some(*lambda),
            JumpMeasure::StableTails { .. } => None,
            JumpMeasure::SechExponential { alpha } => Some(PI / (PI * alpha / 2.0).cos()),
        }
    }

    fn strip_halfwidth(&self) -> f64 {
        match self {
            JumpMeasure::None => f64::INFINITY,
            JumpMeasure::MixedGammaPositive(t) | JumpMeasure::MixedGammaNegative(t) => {
                t.iter().map(|t| t.rate).fold(f64::INFINITY, f64::min)
            }
            JumpMeasure::Kou {
                eta_plus, eta_minus, ..
            } => eta_plus.min(*eta_minus),
            JumpMeasure::StableTails { .. } => 0.0,
            JumpMeasure::SechExponential { alpha } => 1.0 - alpha.abs(),
        }
    }

    fn exponent(&self, z: Complex64) -> Complex64 {
        match self {
            JumpMeasure::None => Complex64::new(0.0, 0.0),
            JumpMeasure::MixedGammaPositive(terms) => terms
                .iter()
                .map(|t| t.weight * ((t.rate / (t.rate - I * z)).powu(t.shape) - 1.0))
                .sum(),
            JumpMeasure::MixedGammaNegative(terms) => terms
                .iter()
                .map(|t| t.weight * ((t.rate / (t.rate + I * z)).powu(t.shape) - 1.0))
                .sum(),
            JumpMeasure::Kou {
                lambda,
                p,
                eta_plus,
                eta_minus,
            } => {
                let up = p * eta_plus / (eta_plus - I * z);
                let down = (1.0 - p) * eta_minus / (eta_minus + I * z);
                lambda * (up + down - 1.0)
            }
            JumpMeasure::StableTails {
                c1,
                c2,
                alpha,
                eta_shift,
            } => {
                // Only evaluated on the real axis (strip half-width 0).
                let w = z.re;
                if w == 0.0 {
                    return Complex64::new(0.0, 0.0);
                }
                let skew = (c1 - c2) * w.signum() * (PI * alpha / 2.0).tan();
                let bracket = Complex64::new(c1 + c2, -skew);
                -(c1 + c2) * w.abs().powf(*alpha) * bracket + I * w * eta_shift
            }
            JumpMeasure::SechExponential { alpha } => {
                let arg = PI * (z - I * alpha) / 2.0;
                PI * sech(arg) - PI / (PI * alpha / 2.0).cos()
            }
        }
    }

    /// Whether `q/(q - ψ)` is a rational function of ω for this family.
    pub fn has_rational_exponent(&self) -> bool {
        matches!(
            self,
            JumpMeasure::None
                | JumpMeasure::Kou { .. }
                | JumpMeasure::MixedGammaPositive(_)
                | JumpMeasure::MixedGammaNegative(_)
        )
    }
}

/// `1/cosh(w)` without overflow for large `|Re w|`.
fn sech(w: Complex64) -> Complex64 {
    let v = if w.re < 0.0 { -w } else { w };
    let e = (-v).exp();
    2.0 * e / (1.0 + e * e)
}

/// Lévy triple `(μ, σ, ν)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LevyModel {
    mu: f64,
    sigma: f64,
    jumps: JumpMeasure,
}

impl LevyModel {
    pub fn new(mu: f64, sigma: f64, jumps: JumpMeasure) -> Result<Self> {
        if !mu.is_finite() {
            return Err(Error::invalid("mu", "must be finite"));
        }
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(Error::invalid("sigma", format!("{sigma} is not >= 0")));
        }
        jumps.validate()?;
        Ok(Self { mu, sigma, jumps })
    }

    pub fn brownian(mu: f64, sigma: f64) -> Result<Self> {
        Self::new(mu, sigma, JumpMeasure::None)
    }

    pub fn degenerate() -> Self {
        Self {
            mu: 0.0,
            sigma: 0.0,
            jumps: JumpMeasure::None,
        }
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn jumps(&self) -> &JumpMeasure {
        &self.jumps
    }

    pub fn is_degenerate(&self) -> bool {
        self.mu == 0.0 && self.sigma == 0.0 && self.jumps == JumpMeasure::None
    }
}

/// Killing time `τ(q)`, independent of the process.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KillingTime {
    /// `τ ~ Exp(q)`.
    Exponential { q: f64 },
    /// `P(τ = k) = (1 - q) q^k` for `k = 0, 1, 2, ...`, on unit time steps.
    Geometric { q: f64 },
}

impl KillingTime {
    pub fn exponential(q: f64) -> Result<Self> {
        if !(q > 0.0 && q.is_finite()) {
            return Err(Error::invalid("kill.q", format!("exponential rate {q} is not > 0")));
        }
        Ok(KillingTime::Exponential { q })
    }

    pub fn geometric(q: f64) -> Result<Self> {
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::invalid("kill.q", format!("geometric parameter {q} is outside (0, 1)")));
        }
        Ok(KillingTime::Geometric { q })
    }

    pub fn q(&self) -> f64 {
        match *self {
            KillingTime::Exponential { q } | KillingTime::Geometric { q } => q,
        }
    }
}

/// Closed-form characteristic exponent of a [`LevyModel`].
#[derive(Debug, Clone, PartialEq)]
pub struct CharExponent {
    model: LevyModel,
    strip_halfwidth: f64,
}

impl CharExponent {
    /// Half-width of the horizontal strip around ℝ where ψ is analytic;
    /// `0` means real-line evaluation only.
    pub fn strip_halfwidth(&self) -> f64 {
        self.strip_halfwidth
    }

    pub fn model(&self) -> &LevyModel {
        &self.model
    }

    pub fn eval_real(&self, omega: f64) -> Complex64 {
        self.eval_unchecked(Complex64::new(omega, 0.0))
    }

    /// ψ at a complex point strictly inside the analyticity strip.
    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        let inside = if self.strip_halfwidth == 0.0 {
            z.im == 0.0
        } else {
            z.im.abs() < self.strip_halfwidth
        };
        if !inside || !z.re.is_finite() {
            return Err(Error::NonAnalytic { point: z });
        }
        Ok(self.eval_unchecked(z))
    }

    /// Analytic continuation of ψ without the strip check. Rational families
    /// continue meromorphically to the whole plane.
    pub(crate) fn eval_unchecked(&self, z: Complex64) -> Complex64 {
        let m = &self.model;
        I * m.mu * z - 0.5 * m.sigma * m.sigma * z * z + m.jumps.exponent(z)
    }
}

pub fn char_exponent(model: &LevyModel) -> CharExponent {
    CharExponent {
        strip_halfwidth: model.jumps.strip_halfwidth(),
        model: model.clone(),
    }
}

/// Denominators below this modulus make `g` numerically meaningless.
const DENOMINATOR_FLOOR: f64 = 1e-14;

/// Characteristic function of `X_τ`, the right-hand side of `Φ+ Φ- = g`.
pub fn rhs_g(model: &LevyModel, kill: KillingTime, omega: f64) -> Result<Complex64> {
    g_from_psi(char_exponent(model).eval_real(omega), kill, omega)
}

pub(crate) fn g_from_psi(psi: Complex64, kill: KillingTime, omega: f64) -> Result<Complex64> {
    let (num, den) = match kill {
        KillingTime::Exponential { q } => (Complex64::new(q, 0.0), q - psi),
        KillingTime::Geometric { q } => (Complex64::new(1.0 - q, 0.0), 1.0 - q * psi.exp()),
    };
    if den.norm() < DENOMINATOR_FLOOR {
        return Err(Error::DenominatorVanishes { omega });
    }
    Ok(num / den)
}

/// `g` of a model/kill pair as a reusable evaluator.
#[derive(Debug, Clone)]
pub struct KilledProcess {
    exponent: CharExponent,
    kill: KillingTime,
}

impl KilledProcess {
    pub fn new(model: &LevyModel, kill: KillingTime) -> Self {
        Self {
            exponent: char_exponent(model),
            kill,
        }
    }

    pub fn model(&self) -> &LevyModel {
        self.exponent.model()
    }

    pub fn exponent(&self) -> &CharExponent {
        &self.exponent
    }

    pub fn kill(&self) -> KillingTime {
        self.kill
    }

    pub fn g(&self, omega: f64) -> Result<Complex64> {
        g_from_psi(self.exponent.eval_real(omega), self.kill, omega)
    }

    pub fn sample_g(&self, omegas: &[f64]) -> Result<Vec<Complex64>> {
        omegas.iter().map(|&w| self.g(w)).collect()
    }

    /// True when `g` is rational in ω, so Carlemann's split applies exactly.
    pub fn has_rational_g(&self) -> bool {
        matches!(self.kill, KillingTime::Exponential { .. }) && self.model().jumps.has_rational_exponent()
    }
}

/// Largest phase step tolerated between consecutive samples.
pub const MAX_PHASE_STEP: f64 = PI / 2.0;

/// Net number of counterclockwise turns of `g` around 0, traversing the
/// samples in order (ω from -Ω to +Ω).
pub fn winding_number(g_samples: &[Complex64]) -> Result<i64> {
    if let Some((i, _)) = g_samples.iter().enumerate().find(|(_, g)| g.norm() < DENOMINATOR_FLOOR) {
        return Err(Error::invalid("g_samples", format!("sample {i} vanishes")));
    }
    let mut total = 0.0;
    for (index, pair) in g_samples.windows(2).enumerate() {
        let step = (pair[1] / pair[0]).arg();
        if step.abs() > MAX_PHASE_STEP {
            return Err(Error::BranchJumpTooLarge { index, jump: step });
        }
        total += step;
    }
    Ok((total / (2.0 * PI)).round() as i64)
}
