//! The `factorize`, `invert` and `verify` commands.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::config::{Method, RunConfig};
use super::output::{distribution_csv, line_plot_svg, phi_csv, verify_csv, VerifyRow, SCHEMA_VERSION};
use super::CliError;
use crate::error::{Error, Result};
use crate::factorization::{factorize_hilbert_fn, FactorPair};
use crate::inversion::{
    invert_to_distribution, sidedness_leakage, uniform_x_grid, DistributionTable, InversionOptions, Side,
};
use crate::levy::{winding_number, JumpMeasure, KilledProcess};
use crate::mc::{empirical_cf, simulate_extrema};
use crate::rational::{factorize_carlemann, factorize_kuznetsov, pade_factorize_auto};

/// Half-width of the frequency window used for cross-checks and the
/// empirical characteristic-function comparisons.
pub const CHECK_OMEGA: f64 = 5.0;

/// Share of the grid over which the interior residual is reported.
pub const INTERIOR_FRACTION: f64 = 2.0 / 3.0;

#[derive(Debug, Clone, Serialize)]
pub struct GridReport {
    pub omega: f64,
    pub n_points: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct CrossCheck {
    pub reference: String,
    pub omega_max: f64,
    pub sup_distance: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FactorReport {
    pub requested_method: String,
    pub method: String,
    pub grid: GridReport,
    pub winding_number: i64,
    pub max_residual: f64,
    pub max_interior_residual: f64,
    pub certified_error: Option<f64>,
    pub hermitian_defect: f64,
    pub cross_check: Option<CrossCheck>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SideReport {
    pub atom_at_zero: f64,
    pub projection_correction: f64,
    pub leakage: f64,
    pub cdf_at_x_max: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct InversionReport {
    pub x_max: f64,
    pub n_points: usize,
    pub sup: SideReport,
    pub inf: SideReport,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub n_paths: usize,
    pub dt: f64,
    pub seed: u64,
    pub bridge: bool,
    pub ks_sup: f64,
    pub ks_inf: f64,
    pub ks_tolerance: f64,
    pub max_deviation: f64,
    pub max_independence_deviation: f64,
    pub product_tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
struct Report<'a> {
    schema: u32,
    command: &'a str,
    factorization: &'a FactorReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    inversion: Option<&'a InversionReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    verification: Option<&'a VerifyReport>,
}

/// A factor pair with `g` on the same grid and the summary of the run.
#[derive(Debug, Clone)]
pub struct Factorized {
    pub pair: FactorPair,
    pub g: Vec<Complex64>,
    pub report: FactorReport,
}

fn sample_g(process: &KilledProcess, pair: &FactorPair) -> Result<Vec<Complex64>> {
    pair.grid.nodes().par_iter().map(|&w| process.g(w)).collect()
}

fn run_method(cfg: &RunConfig, process: &KilledProcess, method: Method) -> Result<FactorPair> {
    let g = |w: f64| process.g(w);
    match method {
        Method::Hilbert => factorize_hilbert_fn(g, &cfg.grid),
        Method::Carlemann => factorize_carlemann(process, &cfg.grid),
        Method::Pade => pade_factorize_auto(g, &cfg.grid, cfg.tolerances.pade_bound),
        Method::KuznetsovProduct => match cfg.model.jumps() {
            JumpMeasure::SechExponential { alpha } => {
                factorize_kuznetsov(*alpha, cfg.kill.q(), &cfg.grid, cfg.kuznetsov_terms)
            }
            _ => Err(Error::invalid("method", "kuznetsov-product needs sech-exponential jumps")),
        },
        Method::Auto => {
            if process.has_rational_g() {
                factorize_carlemann(process, &cfg.grid)
            } else {
                match factorize_hilbert_fn(g, &cfg.grid) {
                    Err(Error::BranchUnwrapFailure { .. }) => pade_factorize_auto(g, &cfg.grid, cfg.tolerances.pade_bound),
                    other => other,
                }
            }
        }
    }
}

/// Factorizes `g` with the configured method and cross-checks the result
/// against an independent method on `|ω| ≤ 5`.
pub fn factorize(cfg: &RunConfig) -> Result<Factorized> {
    let process = cfg.process();
    let pair = run_method(cfg, &process, cfg.method)?;
    let g = sample_g(&process, &pair)?;
    let winding = winding_number(&g)?;
    if winding != 0 {
        return Err(Error::NonzeroIndex { index: winding });
    }

    let reference = if pair.method.as_str() != Method::Hilbert.as_str() {
        Some(Method::Hilbert)
    } else if process.has_rational_g() {
        Some(Method::Carlemann)
    } else {
        None
    };
    let cross_check = reference.map(|m| match run_method(cfg, &process, m) {
        Ok(other) => CrossCheck {
            reference: m.as_str().into(),
            omega_max: CHECK_OMEGA,
            sup_distance: Some(pair.distance(&other, CHECK_OMEGA)),
            error: None,
        },
        Err(e) => CrossCheck {
            reference: m.as_str().into(),
            omega_max: CHECK_OMEGA,
            sup_distance: None,
            error: Some(format!("{}: {e}", e.name())),
        },
    });

    let report = FactorReport {
        requested_method: cfg.method.as_str().into(),
        method: pair.method.as_str().into(),
        grid: GridReport {
            omega: pair.grid.halfwidth(),
            n_points: pair.grid.len(),
        },
        winding_number: winding,
        max_residual: pair.max_residual(&g, 1.0),
        max_interior_residual: pair.max_residual(&g, INTERIOR_FRACTION),
        certified_error: pair.certified_error,
        hermitian_defect: pair.hermitian_defect(),
        cross_check,
    };
    Ok(Factorized { pair, g, report })
}

/// Distribution tables of the supremum and infimum.
pub fn invert(cfg: &RunConfig, f: &Factorized) -> Result<(DistributionTable, DistributionTable, InversionReport)> {
    let x = uniform_x_grid(cfg.inversion.x_max, cfg.inversion.n_points);
    let grid = &f.pair.grid;
    let sup = invert_to_distribution(&f.pair.phi_plus, grid, Side::Supremum, &x, InversionOptions::default())?;
    let inf = invert_to_distribution(&f.pair.phi_minus, grid, Side::Infimum, &x, InversionOptions::default())?;
    let side = |t: &DistributionTable, phi: &[Complex64], s: Side| SideReport {
        atom_at_zero: t.atom_at_zero,
        projection_correction: t.projection_correction,
        leakage: sidedness_leakage(phi, grid, s),
        cdf_at_x_max: match s {
            Side::Supremum => t.cdf[t.cdf.len() - 1],
            Side::Infimum => 1.0 - t.cdf[0],
        },
    };
    let report = InversionReport {
        x_max: cfg.inversion.x_max,
        n_points: cfg.inversion.n_points,
        sup: side(&sup, &f.pair.phi_plus, Side::Supremum),
        inf: side(&inf, &f.pair.phi_minus, Side::Infimum),
    };
    Ok((sup, inf, report))
}

fn write(dir: &Path, name: &str, contents: &str) -> std::result::Result<(), CliError> {
    fs::write(dir.join(name), contents).map_err(|e| CliError::Io(format!("{}: {e}", dir.join(name).display())))
}

fn write_report(cfg: &RunConfig, report: &Report<'_>) -> std::result::Result<(), CliError> {
    let text = serde_json::to_string_pretty(report).map_err(|e| CliError::Io(e.to_string()))?;
    write(&cfg.out, "report.json", &(text + "\n"))
}

fn prepare(cfg: &RunConfig) -> std::result::Result<(), CliError> {
    fs::create_dir_all(&cfg.out).map_err(|e| CliError::Io(format!("{}: {e}", cfg.out.display())))
}

pub fn cmd_factorize(cfg: &RunConfig) -> std::result::Result<FactorReport, CliError> {
    prepare(cfg)?;
    let f = factorize(cfg)?;
    write(&cfg.out, "phi.csv", &phi_csv(&f.pair, &f.g))?;
    write_report(
        cfg,
        &Report {
            schema: SCHEMA_VERSION,
            command: "factorize",
            factorization: &f.report,
            inversion: None,
            verification: None,
        },
    )?;
    Ok(f.report)
}

fn write_tables(cfg: &RunConfig, sup: &DistributionTable, inf: &DistributionTable) -> std::result::Result<(), CliError> {
    write(&cfg.out, "dist_sup.csv", &distribution_csv(sup))?;
    write(&cfg.out, "dist_inf.csv", &distribution_csv(inf))?;
    if cfg.inversion.plots {
        for (t, label) in [(sup, "sup"), (inf, "inf")] {
            let title = if label == "sup" { "supremum" } else { "infimum" };
            write(
                &cfg.out,
                &format!("cdf_{label}.svg"),
                &line_plot_svg(&format!("cdf of the {title}"), "x", &t.abscissae, &t.cdf),
            )?;
            if let Some(d) = &t.density {
                write(
                    &cfg.out,
                    &format!("density_{label}.svg"),
                    &line_plot_svg(&format!("density of the {title}"), "x", &t.abscissae, d),
                )?;
            }
        }
    }
    Ok(())
}

pub fn cmd_invert(cfg: &RunConfig) -> std::result::Result<InversionReport, CliError> {
    prepare(cfg)?;
    let f = factorize(cfg)?;
    let (sup, inf, report) = invert(cfg, &f)?;
    write_tables(cfg, &sup, &inf)?;
    write_report(
        cfg,
        &Report {
            schema: SCHEMA_VERSION,
            command: "invert",
            factorization: &f.report,
            inversion: Some(&report),
            verification: None,
        },
    )?;
    Ok(report)
}

/// Monte Carlo check of the analytic pipeline. Writes everything, then
/// fails with exit code 4 if a threshold is exceeded.
pub fn cmd_verify(cfg: &RunConfig) -> std::result::Result<VerifyReport, CliError> {
    let sim = cfg.mc.ok_or_else(|| {
        CliError::Config(super::config::ConfigError {
            path: "mc".into(),
            message: "verify needs an [mc] section or --seed".into(),
        })
    })?;
    prepare(cfg)?;
    let f = factorize(cfg)?;
    let (sup, inf, inversion) = invert(cfg, &f)?;
    write_tables(cfg, &sup, &inf)?;
    let sample = simulate_extrema(&cfg.model, cfg.kill, &sim)?;
    if cfg.export_samples {
        let mut buf = Vec::new();
        sample.write_csv(&mut buf).map_err(|e| CliError::Io(e.to_string()))?;
        write(&cfg.out, "samples.csv", &String::from_utf8(buf).expect("ascii csv"))?;
    }

    let grid = &f.pair.grid;
    let nodes: Vec<usize> = grid.within(CHECK_OMEGA).collect();
    let omegas: Vec<f64> = nodes.iter().map(|&j| grid.node(j)).collect();
    let cf_sup = empirical_cf(&sample.sup, &omegas)?;
    let cf_inf = empirical_cf(&sample.inf, &omegas)?;
    let cf_x = empirical_cf(&sample.terminal, &omegas)?;
    let rows: Vec<VerifyRow> = nodes
        .iter()
        .enumerate()
        .map(|(k, &j)| VerifyRow {
            omega: omegas[k],
            analytic: f.pair.phi_plus[j] * f.pair.phi_minus[j],
            empirical: cf_x[k],
            empirical_product: cf_sup[k] * cf_inf[k],
        })
        .collect();
    write(&cfg.out, "verify.csv", &verify_csv(&rows))?;

    let max_deviation = rows.iter().map(|r| (r.analytic - r.empirical).norm()).fold(0.0, f64::max);
    let max_independence = rows
        .iter()
        .map(|r| (r.empirical_product - r.empirical).norm())
        .fold(0.0, f64::max);
    let ks_sup = sup.ks_distance(&sample.sup);
    let ks_inf = inf.ks_distance(&sample.inf);
    let product_tolerance = cfg.tolerances.product_bound(sim.n_paths);
    let passed = ks_sup < cfg.tolerances.ks
        && ks_inf < cfg.tolerances.ks
        && max_deviation < product_tolerance
        && max_independence < product_tolerance;
    let report = VerifyReport {
        n_paths: sim.n_paths,
        dt: sim.dt,
        seed: sim.seed,
        bridge: sim.bridge,
        ks_sup,
        ks_inf,
        ks_tolerance: cfg.tolerances.ks,
        max_deviation,
        max_independence_deviation: max_independence,
        product_tolerance,
        passed,
    };
    write_report(
        cfg,
        &Report {
            schema: SCHEMA_VERSION,
            command: "verify",
            factorization: &f.report,
            inversion: Some(&inversion),
            verification: Some(&report),
        },
    )?;
    if passed {
        Ok(report)
    } else {
        Err(CliError::Verification(format!(
            "KS sup {ks_sup:.4}, KS inf {ks_inf:.4} (limit {}); cf deviation {max_deviation:.4}, independence {max_independence:.4} (limit {product_tolerance:.4})",
            cfg.tolerances.ks
        )))
    }
}
