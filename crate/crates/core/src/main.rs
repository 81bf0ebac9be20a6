use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use levy_extrema::cli::{self, CliError, Overrides};

#[derive(Parser)]
#[command(name = "levy-extrema", version, about = "Wiener-Hopf factors and extrema distributions of killed Levy processes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Factorize g and write phi.csv and report.json.
    Factorize(Common),
    /// Factorize, then write the supremum and infimum distribution tables.
    Invert(Common),
    /// Compare the analytic tables with Monte Carlo paths.
    Verify(Common),
}

#[derive(Args)]
struct Common {
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// auto, hilbert, carlemann, pade or kuznetsov-product.
    #[arg(long)]
    method: Option<String>,
    /// Frequency grid half-width.
    #[arg(long)]
    omega: Option<f64>,
    /// Frequency grid size (a power of two).
    #[arg(long)]
    n_points: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    n_paths: Option<usize>,
    #[arg(long)]
    dt: Option<f64>,
}

fn run(cli: Cli) -> Result<String, CliError> {
    let (common, which) = match cli.command {
        Command::Factorize(c) => (c, "factorize"),
        Command::Invert(c) => (c, "invert"),
        Command::Verify(c) => (c, "verify"),
    };
    let overrides = Overrides {
        out: common.out,
        method: common.method,
        omega: common.omega,
        n_points: common.n_points,
        seed: common.seed,
        n_paths: common.n_paths,
        dt: common.dt,
    };
    let cfg = cli::load(&common.config, &overrides)?;
    let out = cfg.out.display().to_string();
    Ok(match which {
        "factorize" => {
            let r = cli::cmd_factorize(&cfg)?;
            format!("{}: max residual {:.3e}, winding {} -> {out}", r.method, r.max_residual, r.winding_number)
        }
        "invert" => {
            let r = cli::cmd_invert(&cfg)?;
            format!("atoms sup {:.4} inf {:.4} -> {out}", r.sup.atom_at_zero, r.inf.atom_at_zero)
        }
        _ => {
            let r = cli::cmd_verify(&cfg)?;
            format!(
                "KS sup {:.4} inf {:.4}; independence {:.4} (limit {:.4}) -> {out}",
                r.ks_sup, r.ks_inf, r.max_independence_deviation, r.product_tolerance
            )
        }
    })
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
