//! Batch front end: parse a TOML config, run one computation, drop CSV/JSON
//! artifacts (each with a `.meta.json` sidecar) into the output directory.
//!
//! Exit codes: 0 success, 2 validation error, 3 numerical failure
//! (blow-up / convergence), 4 I/O error.

mod commands;
mod config;
mod sidecar;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::RunConfig;
use rough_merton::error::{Error, Result};

#[derive(Parser)]
#[command(
    name = "rough-merton",
    version,
    about = "Optimal Merton portfolios under rough Heston models",
    after_help = "Config is TOML with sections [grid], [run], [market], [kernel], [heston], \
                  [marchaud], [riccati], [roughness], [partition], [convergence]. Unknown keys \
                  are rejected. Flags override config; --set section.key=value is repeatable."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Path to the TOML config file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory for artifacts (created if missing).
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Override [run].seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override [run].n_paths.
    #[arg(long)]
    paths: Option<usize>,
    /// Override the grid resolution: with [grid].horizon set, re-derives
    /// n_steps ~ horizon/dt; otherwise replaces [grid].dt.
    #[arg(long)]
    dt: Option<f64>,
    /// Override any config key, e.g. --set heston.sigma=0.4 (repeatable).
    #[arg(long = "set", value_name = "section.key=value")]
    set: Vec<String>,
}

const GRID_KEYS: &str = "[grid]{n_steps, dt|horizon}";
const RUN_KEYS: &str = "[run]{seed, n_paths, antithetic}";
const MARKET_KEYS: &str = "[market]{r, theta, rho, gamma_ra, horizon, w0}";
const KERNEL_KEYS: &str = "[kernel]{kind, c, alpha?, lambda?}";
const HESTON_KEYS: &str = "[heston]{v0, kappa, phi_mean, sigma}";

#[derive(Subcommand)]
enum Command {
    /// Resolvent curve of the configured kernel plus identity-residual report.
    #[command(after_help = format!("Reads {KERNEL_KEYS}, {GRID_KEYS}."))]
    Kernels(CommonArgs),
    /// Solve f = K*(c0 + c1 f + c2 f^2) and report the residual.
    #[command(after_help = format!("Reads {KERNEL_KEYS}, [riccati]{{c0, c1, c2}}, {GRID_KEYS}."))]
    Riccati(CommonArgs),
    /// Simulate correlated (V, S) path bundles (CSV + VMPB binary).
    #[command(after_help = format!("Reads {KERNEL_KEYS}, {HESTON_KEYS}, {MARKET_KEYS}, {GRID_KEYS}, {RUN_KEYS}."))]
    Simulate(CommonArgs),
    /// Moment-scaling Hurst estimate from a CSV series or synthetic fBm.
    #[command(after_help = format!(
        "Reads [roughness]{{qs, lags, input_csv | hurst + n_paths}}; the synthetic source also reads {GRID_KEYS} and [run]{{seed}}."
    ))]
    Roughness(CommonArgs),
    /// Martingale-distortion solution: strategy, curves, value, conditions.
    #[command(after_help = format!("Reads {KERNEL_KEYS}, {HESTON_KEYS}, {MARKET_KEYS}, {GRID_KEYS}."))]
    Distortion(CommonArgs),
    /// Quantization, Feynman-Kac value (rho = 0) and convergence table.
    #[command(after_help = format!(
        "Reads [marchaud]{{nu0, alpha_m, z0, kappa, phi_mean, sigma, floor_eps}}, {MARKET_KEYS}, \
         [partition]{{xi_min, xi_max, n, spacing}}, [convergence]{{n_list}}, {GRID_KEYS}, {RUN_KEYS}."
    ))]
    Approx(ApproxArgs),
    /// Run distortion and its Monte Carlo martingale check side by side.
    #[command(after_help = format!("Reads {KERNEL_KEYS}, {HESTON_KEYS}, {MARKET_KEYS}, {GRID_KEYS}, {RUN_KEYS}."))]
    Compare(CommonArgs),
}

#[derive(Args)]
struct ApproxArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Convergence atom counts, e.g. --convergence 10,20,40 (or n=10,20,40).
    #[arg(long)]
    convergence: Option<String>,
}

fn parse_set_overrides(raw: &[String]) -> Result<Vec<(String, String)>> {
    raw.iter()
        .map(|s| {
            s.split_once('=')
                .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
                .ok_or_else(|| {
                    Error::InvalidParameter(format!("--set expects section.key=value, got {s:?}"))
                })
        })
        .collect()
}

fn load_config(args: &CommonArgs) -> Result<RunConfig> {
    let overrides = parse_set_overrides(&args.set)?;
    let mut cfg = RunConfig::load(&args.config, &overrides)?;
    let run = cfg.run.get_or_insert_with(Default::default);
    if let Some(seed) = args.seed {
        run.seed = Some(seed);
    }
    if let Some(paths) = args.paths {
        run.n_paths = Some(paths);
    }
    if let Some(dt) = args.dt {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "--dt must be positive, got {dt}"
            )));
        }
        let grid = cfg
            .grid
            .as_mut()
            .ok_or_else(|| Error::InvalidParameter("--dt given but config has no [grid]".into()))?;
        if let Some(h) = grid.horizon {
            grid.n_steps = (h / dt).round().max(1.0) as usize;
        } else {
            grid.dt = Some(dt);
        }
    }
    Ok(cfg)
}

fn parse_convergence(raw: &str) -> Result<Vec<usize>> {
    let trimmed = raw.strip_prefix("n=").unwrap_or(raw);
    trimmed
        .split(',')
        .map(|s| {
            s.trim().parse::<usize>().map_err(|_| {
                Error::InvalidParameter(format!("bad atom count in --convergence: {s:?}"))
            })
        })
        .collect()
}

fn run(cli: Cli) -> Result<()> {
    let (args, name, convergence): (&CommonArgs, &str, Option<Vec<usize>>) = match &cli.command {
        Command::Kernels(a) => (a, "kernels", None),
        Command::Riccati(a) => (a, "riccati", None),
        Command::Simulate(a) => (a, "simulate", None),
        Command::Roughness(a) => (a, "roughness", None),
        Command::Distortion(a) => (a, "distortion", None),
        Command::Approx(a) => (
            &a.common,
            "approx",
            a.convergence
                .as_deref()
                .map(parse_convergence)
                .transpose()?,
        ),
        Command::Compare(a) => (a, "compare", None),
    };
    let cfg = load_config(args)?;
    std::fs::create_dir_all(&args.out)?;
    let artifacts = match &cli.command {
        Command::Kernels(_) => commands::kernels(&cfg, &args.out)?,
        Command::Riccati(_) => commands::riccati(&cfg, &args.out)?,
        Command::Simulate(_) => commands::simulate(&cfg, &args.out)?,
        Command::Roughness(_) => commands::roughness(&cfg, &args.out)?,
        Command::Distortion(_) => commands::distortion(&cfg, &args.out)?,
        Command::Approx(_) => commands::approx(&cfg, &args.out, convergence)?,
        Command::Compare(_) => commands::compare(&cfg, &args.out)?,
    };
    for artifact in &artifacts {
        sidecar::write_sidecar(artifact, name, cfg.seed(), &cfg)?;
        println!("{}", artifact.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
