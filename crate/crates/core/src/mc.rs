//! Monte Carlo paths of killed Lévy processes: empirical extrema and
//! empirical characteristic functions.
//!
//! Exponential killing is simulated in continuous time on a step `dt`, with
//! jump times drawn exactly and, when `bridge` is on, the Brownian-bridge
//! extremum of every diffusion segment. Geometric killing observes the
//! process at whole unit times only, so the extrema are those of the random
//! walk `X_0, X_1, ..., X_τ`, whose unit increments are drawn exactly.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, Gamma, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::levy::{GammaTerm, JumpMeasure, KillingTime, LevyModel};

/// Paths needing more steps than this on average are refused.
pub const MAX_EXPECTED_STEPS: f64 = 1e7;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub n_paths: usize,
    pub dt: f64,
    pub seed: u64,
    /// Brownian-bridge extremum between grid points when `σ > 0`.
    pub bridge: bool,
}

impl SimConfig {
    pub const DEFAULT_DT: f64 = 0.01;

    pub fn new(n_paths: usize, dt: f64, seed: u64) -> Result<Self> {
        let cfg = Self {
            n_paths,
            dt,
            seed,
            bridge: true,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_paths == 0 {
            return Err(Error::invalid("mc.n_paths", "must be >= 1"));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::invalid("mc.dt", format!("{} is not > 0", self.dt)));
        }
        Ok(())
    }
}

/// Per-path supremum, infimum and terminal value.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExtremaSample {
    pub sup: Vec<f64>,
    pub inf: Vec<f64>,
    pub terminal: Vec<f64>,
}

impl ExtremaSample {
    pub fn len(&self) -> usize {
        self.sup.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sup.is_empty()
    }

    /// One `sup,inf,terminal` row per path after a versioned header.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "# levy-extrema samples v1")?;
        writeln!(out, "sup,inf,terminal")?;
        for i in 0..self.len() {
            writeln!(out, "{},{},{}", self.sup[i], self.inf[i], self.terminal[i])?;
        }
        Ok(())
    }
}

/// Sampler for a single jump size.
#[derive(Debug, Clone)]
enum JumpLaw {
    Gamma { terms: Vec<(f64, Gamma<f64>)>, sign: f64 },
    DoubleExponential { p: f64, eta_plus: f64, eta_minus: f64 },
    SechExponential { alpha: f64 },
}

fn gamma_law(terms: &[GammaTerm], sign: f64) -> Result<JumpLaw> {
    let total: f64 = terms.iter().map(|t| t.weight).sum();
    let mut cumulative = 0.0;
    let mut laws = Vec::with_capacity(terms.len());
    for t in terms {
        cumulative += t.weight / total;
        let law = Gamma::new(t.shape as f64, 1.0 / t.rate)
            .map_err(|e| Error::UnsimulableModel(format!("gamma jump term: {e}")))?;
        laws.push((cumulative, law));
    }
    Ok(JumpLaw::Gamma { terms: laws, sign })
}

impl JumpLaw {
    fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        match self {
            JumpLaw::Gamma { terms, sign } => {
                let u: f64 = rng.random();
                let (_, law) = terms.iter().find(|(c, _)| u < *c).unwrap_or(&terms[terms.len() - 1]);
                sign * rng.sample(law)
            }
            JumpLaw::DoubleExponential { p, eta_plus, eta_minus } => {
                let e: f64 = rng.sample(Exp1);
                if rng.random::<f64>() < *p {
                    e / eta_plus
                } else {
                    -e / eta_minus
                }
            }
            JumpLaw::SechExponential { alpha } => sech_jump(*alpha, rng),
        }
    }
}

/// Draw from the density `∝ e^{αx} sech(x)` by rejection from the
/// asymmetric Laplace envelope `2e^{αx - |x|}`; acceptance is at least 1/2.
fn sech_jump(alpha: f64, rng: &mut ChaCha8Rng) -> f64 {
    loop {
        let e: f64 = rng.sample(Exp1);
        let x = if rng.random::<f64>() < (1.0 + alpha) / 2.0 {
            e / (1.0 - alpha)
        } else {
            -e / (1.0 + alpha)
        };
        if rng.random::<f64>() * (1.0 + (-2.0 * x.abs()).exp()) < 1.0 {
            return x;
        }
    }
}

/// Chambers–Mallows–Stuck sampler for the law with characteristic function
/// `exp(-|ω|^α (1 - iβ sgn(ω) tan(πα/2)))`, `α ≠ 1`.
#[derive(Debug, Clone, Copy)]
struct StableLaw {
    alpha: f64,
    shift: f64,
    scale: f64,
}

impl StableLaw {
    fn new(alpha: f64, beta: f64) -> Self {
        let t = beta * (PI * alpha / 2.0).tan();
        Self {
            alpha,
            shift: t.atan() / alpha,
            scale: (1.0 + t * t).powf(1.0 / (2.0 * alpha)),
        }
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        let a = self.alpha;
        let v = PI * (rng.random::<f64>() - 0.5);
        let w: f64 = rng.sample(Exp1);
        let av = a * (v + self.shift);
        self.scale * av.sin() / v.cos().powf(1.0 / a) * ((v - av).cos() / w).powf((1.0 - a) / a)
    }
}

/// Increment laws of one model.
#[derive(Debug, Clone)]
struct Dynamics {
    mu: f64,
    sigma: f64,
    intensity: f64,
    jumps: Option<JumpLaw>,
    /// Stable law and `γ^α`, the scale per unit time.
    stable: Option<(StableLaw, f64)>,
    bridge: bool,
}

impl Dynamics {
    fn new(model: &LevyModel, bridge: bool) -> Result<Self> {
        let mut d = Self {
            mu: model.mu(),
            sigma: model.sigma(),
            intensity: 0.0,
            jumps: None,
            stable: None,
            bridge,
        };
        match model.jumps() {
            JumpMeasure::None => {}
            JumpMeasure::MixedGammaPositive(t) => d.jumps = Some(gamma_law(t, 1.0)?),
            JumpMeasure::MixedGammaNegative(t) => d.jumps = Some(gamma_law(t, -1.0)?),
            &JumpMeasure::Kou {
                p, eta_plus, eta_minus, ..
            } => d.jumps = Some(JumpLaw::DoubleExponential { p, eta_plus, eta_minus }),
            &JumpMeasure::SechExponential { alpha } => {
                if !(alpha.abs() < 1.0) {
                    return Err(Error::UnsimulableModel(format!("sech-exponential alpha {alpha} outside (-1, 1)")));
                }
                d.jumps = Some(JumpLaw::SechExponential { alpha });
            }
            &JumpMeasure::StableTails {
                c1,
                c2,
                alpha,
                eta_shift,
            } => {
                if (alpha - 1.0).abs() < 1e-9 {
                    return Err(Error::UnsimulableModel("stable index 1 is not supported".into()));
                }
                d.mu += eta_shift;
                if c1 + c2 > 0.0 {
                    let beta = (c1 - c2) / (c1 + c2);
                    d.stable = Some((StableLaw::new(alpha, beta), (c1 + c2) * (c1 + c2)));
                }
            }
        }
        if d.jumps.is_some() {
            d.intensity = model.jumps().intensity().unwrap_or(0.0);
        }
        Ok(d)
    }

    /// Increment of the continuous part (drift, diffusion, stable) over `h`.
    fn continuous(&self, h: f64, rng: &mut ChaCha8Rng) -> f64 {
        let mut x = self.mu * h;
        if self.sigma > 0.0 {
            x += self.sigma * h.sqrt() * rng.sample::<f64, _>(StandardNormal);
        }
        if let Some((law, scale_pow)) = &self.stable {
            x += (scale_pow * h).powf(1.0 / law.alpha) * law.sample(rng);
        }
        x
    }

    /// Exact unit-time increment, for the random walk under geometric killing.
    fn unit_increment(&self, rng: &mut ChaCha8Rng) -> f64 {
        let mut x = self.continuous(1.0, rng);
        if let Some(law) = &self.jumps {
            let mut t: f64 = rng.sample::<f64, _>(Exp1) / self.intensity;
            while t < 1.0 {
                x += law.sample(rng);
                t += rng.sample::<f64, _>(Exp1) / self.intensity;
            }
        }
        x
    }

    /// Extrema of a diffusion segment of length `h` from `x` to `y`.
    fn segment_extrema(&self, x: f64, y: f64, h: f64, rng: &mut ChaCha8Rng) -> (f64, f64) {
        if !(self.bridge && self.sigma > 0.0 && self.stable.is_none()) {
            return (x.max(y), x.min(y));
        }
        let var = self.sigma * self.sigma * h;
        let d2 = (y - x) * (y - x);
        let u1: f64 = 1.0 - rng.random::<f64>();
        let u2: f64 = 1.0 - rng.random::<f64>();
        let hi = 0.5 * (x + y + (d2 - 2.0 * var * u1.ln()).sqrt());
        let lo = 0.5 * (x + y - (d2 - 2.0 * var * u2.ln()).sqrt());
        (hi, lo)
    }
}

/// One continuous-time path up to `tau`.
fn continuous_path(dyn_: &Dynamics, tau: f64, dt: f64, rng: &mut ChaCha8Rng) -> (f64, f64, f64) {
    let (mut x, mut hi, mut lo) = (0.0f64, 0.0f64, 0.0f64);
    let mut next_jump = if dyn_.jumps.is_some() {
        rng.sample::<f64, _>(Exp1) / dyn_.intensity
    } else {
        f64::INFINITY
    };
    let mut t = 0.0;
    while t < tau {
        let end = (t + dt).min(tau).min(next_jump);
        let h = end - t;
        let y = x + dyn_.continuous(h, rng);
        let (seg_hi, seg_lo) = dyn_.segment_extrema(x, y, h, rng);
        hi = hi.max(seg_hi);
        lo = lo.min(seg_lo);
        x = y;
        t = end;
        if t == next_jump && t < tau {
            x += dyn_.jumps.as_ref().expect("jump time implies jump law").sample(rng);
            hi = hi.max(x);
            lo = lo.min(x);
            next_jump = t + rng.sample::<f64, _>(Exp1) / dyn_.intensity;
        }
    }
    (hi, lo, x)
}

/// Number of unit steps before killing: `P(k) = (1 - q) q^k`, `k ≥ 0`.
fn geometric_steps(q: f64, rng: &mut ChaCha8Rng) -> u64 {
    let u: f64 = 1.0 - rng.random::<f64>();
    (u.ln() / q.ln()).floor() as u64
}

fn walk_path(dyn_: &Dynamics, steps: u64, rng: &mut ChaCha8Rng) -> (f64, f64, f64) {
    let (mut x, mut hi, mut lo) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..steps {
        x += dyn_.unit_increment(rng);
        hi = hi.max(x);
        lo = lo.min(x);
    }
    (hi, lo, x)
}

/// Simulates `cfg.n_paths` independent paths. Path `i` uses its own
/// ChaCha8 stream `i` of the seed, so the result does not depend on the
/// thread count.
pub fn simulate_extrema(model: &LevyModel, kill: KillingTime, cfg: &SimConfig) -> Result<ExtremaSample> {
    cfg.validate()?;
    let dyn_ = Dynamics::new(model, cfg.bridge)?;
    if let KillingTime::Exponential { q } = kill {
        let expected = 1.0 / (q * cfg.dt);
        if expected > MAX_EXPECTED_STEPS {
            return Err(Error::UnsimulableModel(format!(
                "{expected:.3e} expected steps per path (q = {q}, dt = {}) exceed {MAX_EXPECTED_STEPS:e}",
                cfg.dt
            )));
        }
    }
    let triples: Vec<(f64, f64, f64)> = (0..cfg.n_paths)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(i as u64);
            match kill {
                KillingTime::Exponential { q } => {
                    let tau = rng.sample::<f64, _>(Exp1) / q;
                    continuous_path(&dyn_, tau, cfg.dt, &mut rng)
                }
                KillingTime::Geometric { q } => {
                    let steps = geometric_steps(q, &mut rng);
                    walk_path(&dyn_, steps, &mut rng)
                }
            }
        })
        .collect();
    let mut out = ExtremaSample {
        sup: Vec::with_capacity(triples.len()),
        inf: Vec::with_capacity(triples.len()),
        terminal: Vec::with_capacity(triples.len()),
    };
    for (hi, lo, x) in triples {
        out.sup.push(hi);
        out.inf.push(lo);
        out.terminal.push(x);
    }
    Ok(out)
}

/// `(1/n) Σ exp(iωx_k)` at each ω.
pub fn empirical_cf(samples: &[f64], omegas: &[f64]) -> Result<Vec<Complex64>> {
    if samples.is_empty() {
        return Err(Error::invalid("samples", "empty sample"));
    }
    let n = samples.len() as f64;
    Ok(omegas
        .par_iter()
        .map(|&w| {
            let sum: Complex64 = samples.iter().map(|&x| Complex64::from_polar(1.0, w * x)).sum();
            sum / n
        })
        .collect())
}

/// `sup_ω |cf_M cf_I - cf_X|`, the empirical independence defect.
pub fn product_deviation(sample: &ExtremaSample, omegas: &[f64]) -> Result<f64> {
    let m = empirical_cf(&sample.sup, omegas)?;
    let i = empirical_cf(&sample.inf, omegas)?;
    let x = empirical_cf(&sample.terminal, omegas)?;
    Ok((0..omegas.len()).map(|k| (m[k] * i[k] - x[k]).norm()).fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(n: usize, dt: f64) -> SimConfig {
        SimConfig::new(n, dt, 7).unwrap()
    }

    #[test]
    fn degenerate_paths_stay_at_zero() {
        let s = simulate_extrema(&LevyModel::degenerate(), KillingTime::exponential(1.0).unwrap(), &cfg(200, 0.01)).unwrap();
        assert!(s.sup.iter().chain(&s.inf).chain(&s.terminal).all(|&v| v == 0.0));
    }

    #[test]
    fn ordering_holds_on_every_path() {
        let kou = LevyModel::new(
            0.1,
            0.5,
            JumpMeasure::Kou {
                lambda: 2.0,
                p: 0.4,
                eta_plus: 3.0,
                eta_minus: 2.0,
            },
        )
        .unwrap();
        for kill in [KillingTime::exponential(1.0).unwrap(), KillingTime::geometric(0.6).unwrap()] {
            let s = simulate_extrema(&kou, kill, &cfg(2000, 0.01)).unwrap();
            for k in 0..s.len() {
                assert!(s.inf[k] <= 0.0 && 0.0 <= s.sup[k]);
                assert!(s.inf[k] <= s.terminal[k] && s.terminal[k] <= s.sup[k]);
            }
        }
    }

    #[test]
    fn brownian_supremum_tail() {
        let bm = LevyModel::brownian(0.0, 1.0).unwrap();
        let n = 40_000;
        let s = simulate_extrema(&bm, KillingTime::exponential(1.0).unwrap(), &cfg(n, 1e-2)).unwrap();
        let p = s.sup.iter().filter(|&&m| m > 1.0).count() as f64 / n as f64;
        let exact = (-2f64.sqrt()).exp();
        let se = (exact * (1.0 - exact) / n as f64).sqrt();
        assert!((p - exact).abs() < 4.0 * se, "{p} vs {exact}");
    }

    #[test]
    fn seed_determinism() {
        let bm = LevyModel::brownian(0.2, 1.0).unwrap();
        let kill = KillingTime::exponential(2.0).unwrap();
        let a = simulate_extrema(&bm, kill, &cfg(500, 0.01)).unwrap();
        let b = simulate_extrema(&bm, kill, &cfg(500, 0.01)).unwrap();
        assert_eq!(a, b);
        let c = simulate_extrema(&bm, kill, &SimConfig::new(500, 0.01, 8).unwrap()).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn sech_jumps_match_density_moments() {
        // Mean of e^{αx} sech(x) / λ is (π/2) tan(πα/2).
        let alpha = 0.3;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 200_000;
        let mean = (0..n).map(|_| sech_jump(alpha, &mut rng)).sum::<f64>() / n as f64;
        let exact = PI / 2.0 * (PI * alpha / 2.0).tan();
        assert!((mean - exact).abs() < 0.02, "{mean} vs {exact}");
    }

    #[test]
    fn stable_sampler_matches_characteristic_function() {
        let (alpha, beta) = (1.5, 0.4);
        let law = StableLaw::new(alpha, beta);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let xs: Vec<f64> = (0..100_000).map(|_| law.sample(&mut rng)).collect();
        let cf = empirical_cf(&xs, &[0.7]).unwrap()[0];
        let w: f64 = 0.7;
        let exact = (-(w.powf(alpha)) * Complex64::new(1.0, -beta * (PI * alpha / 2.0).tan())).exp();
        assert!((cf - exact).norm() < 0.01, "{cf} vs {exact}");
    }

    #[test]
    fn empirical_cf_of_zeros_is_one() {
        let cf = empirical_cf(&[0.0; 10], &[-3.0, 0.5, 9.0]).unwrap();
        assert!(cf.iter().all(|c| *c == Complex64::new(1.0, 0.0)));
        assert!(empirical_cf(&[], &[1.0]).is_err());
    }

    #[test]
    fn geometric_step_law() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 100_000;
        let zeros = (0..n).filter(|_| geometric_steps(0.5, &mut rng) == 0).count() as f64 / n as f64;
        assert!((zeros - 0.5).abs() < 0.01);
    }

    #[test]
    fn csv_has_header_and_rows() {
        let s = ExtremaSample {
            sup: vec![1.0, 0.5],
            inf: vec![-0.25, 0.0],
            terminal: vec![0.5, 0.0],
        };
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "# levy-extrema samples v1\nsup,inf,terminal\n1,-0.25,0.5\n0.5,0,0\n");
    }

    #[test]
    fn rejects_bad_config() {
        assert!(SimConfig::new(0, 0.01, 1).is_err());
        assert!(SimConfig::new(10, 0.0, 1).is_err());
        let bm = LevyModel::brownian(0.0, 1.0).unwrap();
        let tiny = SimConfig::new(10, 1e-9, 1).unwrap();
        assert!(matches!(
            simulate_extrema(&bm, KillingTime::exponential(1e-3).unwrap(), &tiny),
            Err(Error::UnsimulableModel(_))
        ));
    }
}
