//! Run configuration: a TOML file, validated into library types, with
//! command-line overrides applied on top.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::Error;
use crate::factorization::FrequencyGrid;
use crate::levy::{GammaTerm, JumpMeasure, KilledProcess, KillingTime, LevyModel};
use crate::mc::SimConfig;
use crate::rational::DEFAULT_TERMS;

/// A configuration problem, located by its dotted field path.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

impl ConfigError {
    fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            path: path.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() {
            write!(f, "{}", self.message)
        } else {
            write!(f, "{}: {}", self.path, self.message)
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Auto,
    Hilbert,
    Carlemann,
    Pade,
    KuznetsovProduct,
}

impl Method {
    pub fn parse(name: &str) -> Option<Self> {
        Some(match name {
            "auto" => Method::Auto,
            "hilbert" => Method::Hilbert,
            "carlemann" => Method::Carlemann,
            "pade" => Method::Pade,
            "kuznetsov-product" => Method::KuznetsovProduct,
            _ => return None,
        })
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Auto => "auto",
            Method::Hilbert => "hilbert",
            Method::Carlemann => "carlemann",
            Method::Pade => "pade",
            Method::KuznetsovProduct => "kuznetsov-product",
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTerm {
    weight: f64,
    rate: f64,
    shape: u32,
}

#[derive(Debug, Deserialize, Default)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
enum RawJumps {
    #[default]
    None,
    Kou {
        lambda: f64,
        p: f64,
        eta_plus: f64,
        eta_minus: f64,
    },
    MixedGammaPositive {
        terms: Vec<RawTerm>,
    },
    MixedGammaNegative {
        terms: Vec<RawTerm>,
    },
    Stable {
        c1: f64,
        c2: f64,
        alpha: f64,
        #[serde(default)]
        eta_shift: f64,
    },
    Sech {
        alpha: f64,
    },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    #[serde(default)]
    mu: f64,
    #[serde(default)]
    sigma: f64,
    #[serde(default)]
    jumps: RawJumps,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
enum RawKill {
    Exponential { q: f64 },
    Geometric { q: f64 },
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    omega: Option<f64>,
    n_points: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInversion {
    x_max: Option<f64>,
    n_points: Option<usize>,
    #[serde(default = "yes")]
    plots: bool,
}

fn yes() -> bool {
    true
}

impl Default for RawInversion {
    fn default() -> Self {
        Self {
            x_max: None,
            n_points: None,
            plots: true,
        }
    }
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawMc {
    n_paths: Option<usize>,
    dt: Option<f64>,
    seed: Option<u64>,
    bridge: Option<bool>,
    #[serde(default)]
    export_samples: bool,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawTolerances {
    ks: Option<f64>,
    product: Option<f64>,
    bias_allowance: Option<f64>,
    pade_bound: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    model: RawModel,
    kill: RawKill,
    #[serde(default)]
    grid: RawGrid,
    method: Option<Method>,
    kuznetsov_terms: Option<usize>,
    #[serde(default)]
    inversion: RawInversion,
    mc: Option<RawMc>,
    out: Option<PathBuf>,
    #[serde(default)]
    tolerances: RawTolerances,
}

/// Command-line values that replace the file's.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub method: Option<String>,
    pub omega: Option<f64>,
    pub n_points: Option<usize>,
    pub seed: Option<u64>,
    pub n_paths: Option<usize>,
    pub dt: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InversionSettings {
    pub x_max: f64,
    pub n_points: usize,
    pub plots: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tolerances {
    pub ks: f64,
    /// Bound on the empirical product deviations; `5/√n + bias_allowance`
    /// when absent.
    pub product: Option<f64>,
    pub bias_allowance: f64,
    pub pade_bound: Option<f64>,
}

impl Tolerances {
    pub fn product_bound(&self, n_paths: usize) -> f64 {
        self.product
            .unwrap_or(5.0 / (n_paths as f64).sqrt() + self.bias_allowance)
    }
}

/// A validated run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub model: LevyModel,
    pub kill: KillingTime,
    pub grid: FrequencyGrid,
    pub method: Method,
    pub kuznetsov_terms: usize,
    pub inversion: InversionSettings,
    pub mc: Option<SimConfig>,
    /// Write `samples.csv` during `verify`.
    pub export_samples: bool,
    pub out: PathBuf,
    pub tolerances: Tolerances,
}

impl RunConfig {
    pub fn process(&self) -> KilledProcess {
        KilledProcess::new(&self.model, self.kill)
    }
}

pub const DEFAULT_X_MAX: f64 = 10.0;
pub const DEFAULT_X_POINTS: usize = 1001;
pub const DEFAULT_KS_TOLERANCE: f64 = 0.02;
pub const DEFAULT_N_PATHS: usize = 100_000;

/// Reads, parses and validates a configuration file.
pub fn load(path: &Path, overrides: &Overrides) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::new("", format!("cannot read {}: {e}", path.display())))?;
    parse(&text, overrides)
}

/// Parses and validates configuration text.
pub fn parse(text: &str, overrides: &Overrides) -> Result<RunConfig, ConfigError> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| {
        let line = e.span().map(|s| text[..s.start].matches('\n').count() + 1);
        let message = match line {
            Some(l) => format!("line {l}: {}", e.message()),
            None => e.message().to_string(),
        };
        ConfigError::new("", message)
    })?;
    validate(raw, overrides)
}

fn positive(path: &str, v: f64) -> Result<f64, ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(ConfigError::new(path, format!("{v} is not a positive number")))
    }
}

/// Prefixes a library parameter error with the section it came from.
fn located(section: &str, e: Error) -> ConfigError {
    match e {
        Error::InvalidParameter { name, reason } => {
            let name = name.strip_prefix(section).map(|s| s.trim_start_matches('.')).unwrap_or(name);
            ConfigError::new(format!("{section}.{name}"), reason)
        }
        other => ConfigError::new(section, other.to_string()),
    }
}

fn terms(raw: Vec<RawTerm>) -> Vec<GammaTerm> {
    raw.into_iter()
        .map(|t| GammaTerm {
            weight: t.weight,
            rate: t.rate,
            shape: t.shape,
        })
        .collect()
}

fn validate(raw: RawConfig, ov: &Overrides) -> Result<RunConfig, ConfigError> {
    let jumps = match raw.model.jumps {
        RawJumps::None => JumpMeasure::None,
        RawJumps::Kou {
            lambda,
            p,
            eta_plus,
            eta_minus,
        } => JumpMeasure::Kou {
            lambda,
            p,
            eta_plus,
            eta_minus,
        },
        RawJumps::MixedGammaPositive { terms: t } => JumpMeasure::MixedGammaPositive(terms(t)),
        RawJumps::MixedGammaNegative { terms: t } => JumpMeasure::MixedGammaNegative(terms(t)),
        RawJumps::Stable {
            c1,
            c2,
            alpha,
            eta_shift,
        } => JumpMeasure::StableTails {
            c1,
            c2,
            alpha,
            eta_shift,
        },
        RawJumps::Sech { alpha } => JumpMeasure::SechExponential { alpha },
    };
    let model = LevyModel::new(raw.model.mu, raw.model.sigma, jumps).map_err(|e| located("model", e))?;
    let kill = match raw.kill {
        RawKill::Exponential { q } => KillingTime::exponential(q),
        RawKill::Geometric { q } => KillingTime::geometric(q),
    }
    .map_err(|e| located("kill", e))?;

    let omega = positive("grid.omega", ov.omega.or(raw.grid.omega).unwrap_or(FrequencyGrid::DEFAULT_HALFWIDTH))?;
    let n_points = ov.n_points.or(raw.grid.n_points).unwrap_or(FrequencyGrid::DEFAULT_POINTS);
    let grid = FrequencyGrid::new(omega, n_points).map_err(|e| match e {
        Error::InvalidParameter { name, reason } if name.contains("omega") => ConfigError::new("grid.omega", reason),
        Error::InvalidParameter { reason, .. } => ConfigError::new("grid.n_points", reason),
        other => ConfigError::new("grid", other.to_string()),
    })?;

    let method = match &ov.method {
        Some(name) => {
            Method::parse(name).ok_or_else(|| ConfigError::new("method", format!("unknown method {name:?}")))?
        }
        None => raw.method.unwrap_or(Method::Auto),
    };
    let process = KilledProcess::new(&model, kill);
    match method {
        Method::Carlemann if !process.has_rational_g() => {
            return Err(ConfigError::new(
                "method",
                "carlemann needs a rational g (Brownian, Kou or mixed-gamma jumps with exponential killing)",
            ));
        }
        Method::KuznetsovProduct
            if !(matches!(model.jumps(), JumpMeasure::SechExponential { .. })
                && model.mu() == 0.0
                && model.sigma() == 0.0
                && matches!(kill, KillingTime::Exponential { .. })) =>
        {
            return Err(ConfigError::new(
                "method",
                "kuznetsov-product needs a pure sech-exponential jump model (mu = sigma = 0) with exponential killing",
            ));
        }
        _ => {}
    }
    let kuznetsov_terms = raw.kuznetsov_terms.unwrap_or(DEFAULT_TERMS);
    if kuznetsov_terms == 0 {
        return Err(ConfigError::new("kuznetsov_terms", "must be >= 1"));
    }

    let x_max = positive("inversion.x_max", raw.inversion.x_max.unwrap_or(DEFAULT_X_MAX))?;
    let x_points = raw.inversion.n_points.unwrap_or(DEFAULT_X_POINTS);
    if x_points < 2 {
        return Err(ConfigError::new("inversion.n_points", "must be >= 2"));
    }

    let mc_present = raw.mc.is_some() || ov.seed.is_some() || ov.n_paths.is_some() || ov.dt.is_some();
    let mut export_samples = false;
    let mc = if mc_present {
        let m = raw.mc.unwrap_or_default();
        export_samples = m.export_samples;
        let seed = ov
            .seed
            .or(m.seed)
            .ok_or_else(|| ConfigError::new("mc.seed", "a seed is required"))?;
        let n_paths = ov.n_paths.or(m.n_paths).unwrap_or(DEFAULT_N_PATHS);
        if n_paths == 0 {
            return Err(ConfigError::new("mc.n_paths", "must be >= 1"));
        }
        let dt = positive("mc.dt", ov.dt.or(m.dt).unwrap_or(SimConfig::DEFAULT_DT))?;
        Some(SimConfig {
            n_paths,
            dt,
            seed,
            bridge: m.bridge.unwrap_or(true),
        })
    } else {
        None
    };

    let t = raw.tolerances;
    let ks = positive("tolerances.ks", t.ks.unwrap_or(DEFAULT_KS_TOLERANCE))?;
    let product = t.product.map(|v| positive("tolerances.product", v)).transpose()?;
    let bias_allowance = t.bias_allowance.unwrap_or(0.0);
    if !(bias_allowance >= 0.0 && bias_allowance.is_finite()) {
        return Err(ConfigError::new("tolerances.bias_allowance", "must be >= 0"));
    }
    let pade_bound = t.pade_bound.map(|v| positive("tolerances.pade_bound", v)).transpose()?;

    Ok(RunConfig {
        model,
        kill,
        grid,
        method,
        kuznetsov_terms,
        inversion: InversionSettings {
            x_max,
            n_points: x_points,
            plots: raw.inversion.plots,
        },
        mc,
        export_samples,
        out: ov.out.clone().or(raw.out).unwrap_or_else(|| PathBuf::from("out")),
        tolerances: Tolerances {
            ks,
            product,
            bias_allowance,
            pade_bound,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const KOU: &str = r#"
method = "auto"

[model]
mu = 0.1
sigma = 1.0
[model.jumps]
type = "kou"
lambda = 1.0
p = 0.5
eta_plus = 2.0
eta_minus = 3.0

[kill]
type = "exponential"
q = 0.5

[mc]
seed = 42
"#;

    #[test]
    fn parses_kou_config() {
        let cfg = parse(KOU, &Overrides::default()).unwrap();
        assert_eq!(cfg.method, Method::Auto);
        assert_eq!(cfg.kill, KillingTime::Exponential { q: 0.5 });
        assert_eq!(cfg.grid, FrequencyGrid::default());
        let mc = cfg.mc.unwrap();
        assert_eq!((mc.seed, mc.n_paths, mc.bridge), (42, DEFAULT_N_PATHS, true));
    }

    #[test]
    fn flags_win_over_file() {
        let ov = Overrides {
            method: Some("hilbert".into()),
            omega: Some(100.0),
            n_points: Some(4096),
            seed: Some(7),
            n_paths: Some(10),
            dt: Some(1e-3),
            out: Some("elsewhere".into()),
        };
        let cfg = parse(KOU, &ov).unwrap();
        assert_eq!(cfg.method, Method::Hilbert);
        assert_eq!(cfg.grid, FrequencyGrid::new(100.0, 4096).unwrap());
        let mc = cfg.mc.unwrap();
        assert_eq!((mc.seed, mc.n_paths, mc.dt), (7, 10, 1e-3));
        assert_eq!(cfg.out, PathBuf::from("elsewhere"));
    }

    #[test]
    fn errors_name_the_field() {
        let bad_p = KOU.replace("p = 0.5", "p = 1.5");
        assert_eq!(parse(&bad_p, &Overrides::default()).unwrap_err().path, "model.jumps.p");
        let bad_q = KOU.replace("q = 0.5", "q = -1.0");
        assert_eq!(parse(&bad_q, &Overrides::default()).unwrap_err().path, "kill.q");
        let no_seed = KOU.replace("seed = 42", "");
        assert_eq!(parse(&no_seed, &Overrides::default()).unwrap_err().path, "mc.seed");
        let negative = format!("{KOU}\n[inversion]\nx_max = -1.0\n");
        assert_eq!(parse(&negative, &Overrides::default()).unwrap_err().path, "inversion.x_max");
        let ov = Overrides {
            method: Some("kuznetsov-product".into()),
            ..Overrides::default()
        };
        assert_eq!(parse(KOU, &ov).unwrap_err().path, "method");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let typo = KOU.replace("sigma = 1.0", "sigmaa = 1.0");
        let err = parse(&typo, &Overrides::default()).unwrap_err();
        assert!(err.message.contains("sigmaa"), "{err}");
    }

    #[test]
    fn degenerate_defaults() {
        let cfg = parse("[model]\n[kill]\ntype = \"exponential\"\nq = 1.0\n", &Overrides::default()).unwrap();
        assert!(cfg.model.is_degenerate());
        assert!(cfg.mc.is_none());
        assert!(cfg.inversion.plots);
    }
}
