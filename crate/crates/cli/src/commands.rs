//! One function per subcommand. Each returns the artifact paths it wrote;
//! `main` attaches sidecars and prints the list.

use std::path::{Path, PathBuf};

use serde::Serialize;

use rough_merton::distortion::solve_distortion;
use rough_merton::error::{Error, Result};
use rough_merton::export;
use rough_merton::kernels::{resolvent_second_kind, tol_res};
use rough_merton::markov_approx::{
    build_quantization, convergence_study, feynman_kac_value, laplace_check,
};
use rough_merton::models::mc::mc_stats;
use rough_merton::models::{simulate_fbm, simulate_volterra_heston, simulate_wealth};
use rough_merton::riccati::{solve_riccati, tol_riccati, RiccatiCoefficients};
use rough_merton::roughness::{estimate_hurst, estimate_hurst_pooled};

use crate::config::RunConfig;

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(value)?)?;
    Ok(())
}

pub fn kernels(cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>> {
    let spec = cfg.kernel()?;
    let grid = cfg.grid()?;
    let curve = resolvent_second_kind(&spec, &grid)?;
    let residual = curve.identity_residual(&spec)?;
    let tol = tol_res(&spec, grid.dt());

    let curve_path = out.join("resolvent.csv");
    export::write_resolvent_csv(&curve_path, &curve)?;

    #[derive(Serialize)]
    struct Report {
        residual: f64,
        tolerance: f64,
        pass: bool,
        dt: f64,
        n_steps: usize,
    }
    let report_path = out.join("kernels_report.json");
    write_json(
        &report_path,
        &Report {
            residual,
            tolerance: tol,
            pass: residual <= tol,
            dt: grid.dt(),
            n_steps: grid.n_steps(),
        },
    )?;
    Ok(vec![curve_path, report_path])
}

pub fn riccati(cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>> {
    let spec = cfg.kernel()?;
    let grid = cfg.grid()?;
    let rc = cfg
        .riccati
        .as_ref()
        .ok_or_else(|| Error::InvalidParameter("missing [riccati] section".into()))?;
    let coeffs = RiccatiCoefficients::new(rc.c0, rc.c1, rc.c2)?;
    let sol = solve_riccati(&spec, coeffs, &grid)?;
    let residual = sol.residual()?;
    let tol = tol_riccati(&spec, grid.dt());

    let curve_path = out.join("riccati.csv");
    export::write_riccati_csv(&curve_path, &sol)?;

    #[derive(Serialize)]
    struct Report {
        residual: f64,
        tolerance: f64,
        pass: bool,
        terminal: f64,
        corrector_iters: usize,
    }
    let report_path = out.join("riccati_report.json");
    write_json(
        &report_path,
        &Report {
            residual,
            tolerance: tol,
            pass: residual <= tol,
            terminal: sol.terminal(),
            corrector_iters: sol.corrector_iters,
        },
    )?;
    Ok(vec![curve_path, report_path])
}

pub fn simulate(cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>> {
    let heston = cfg.heston()?;
    let market = cfg.market()?;
    let grid = cfg.grid()?;
    let bundle = simulate_volterra_heston(
        &heston,
        &market,
        &grid,
        cfg.n_paths(),
        cfg.seed(),
        cfg.antithetic(),
    )?;
    let csv_path = out.join("paths.csv");
    export::write_bundle_csv(&csv_path, &bundle)?;
    let bin_path = out.join("paths.vmpb");
    export::write_bundle_binary(&bin_path, &bundle)?;
    Ok(vec![csv_path, bin_path])
}

pub fn roughness(cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>> {
    let section = cfg
        .roughness
        .as_ref()
        .ok_or_else(|| Error::InvalidParameter("missing [roughness] section".into()))?;
    let report = match (&section.input_csv, section.hurst) {
        (Some(path), None) => {
            let text = std::fs::read_to_string(path)?;
            let series: Vec<f64> = text
                .lines()
                .filter_map(|l| l.trim().parse::<f64>().ok())
                .collect();
            if series.len() < 10 {
                return Err(Error::InsufficientData(format!(
                    "series at {path} has only {} usable values",
                    series.len()
                )));
            }
            estimate_hurst(&series, &section.qs, &section.lags)?
        }
        (None, Some(hurst)) => {
            let grid = cfg.grid()?;
            let n_paths = section.n_paths.unwrap_or(1);
            let paths = simulate_fbm(hurst, &grid, n_paths, cfg.seed())?;
            let refs: Vec<&[f64]> = paths.paths().collect();
            estimate_hurst_pooled(&refs, &section.qs, &section.lags)?
        }
        (Some(_), Some(_)) => {
            return Err(Error::InvalidParameter(
                "[roughness] takes input_csv or hurst, not both".into(),
            ))
        }
        (None, None) => {
            return Err(Error::InvalidParameter(
                "[roughness] needs input_csv or a synthetic hurst".into(),
            ))
        }
    };
    let csv_path = out.join("scaling.csv");
    export::write_scaling_csv(&csv_path, &report)?;
    let json_path = out.join("scaling.json");
    export::write_scaling_summary_json(&json_path, &report)?;
    Ok(vec![csv_path, json_path])
}

pub fn distortion(cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>> {
    let heston = cfg.heston()?;
    let market = cfg.market()?;
    let grid = cfg.grid()?;
    let sol = solve_distortion(&market, &heston, &grid)?;
    let strategy_path = out.join("strategy.csv");
    export::write_strategy_csv(&strategy_path, &sol)?;
    let curves_path = out.join("curves.csv");
    export::write_distortion_curves_csv(&curves_path, &sol)?;
    let summary_path = out.join("summary.json");
    export::write_distortion_summary_json(&summary_path, &sol)?;
    Ok(vec![strategy_path, curves_path, summary_path])
}

pub fn approx(
    cfg: &RunConfig,
    out: &Path,
    convergence_list: Option<Vec<usize>>,
) -> Result<Vec<PathBuf>> {
    let p = cfg.marchaud()?;
    let market = cfg.market()?;
    let grid = cfg.grid()?;
    let spec = cfg.partition()?;
    let quant = build_quantization(p.alpha_m, &spec)?;

    let mut artifacts = Vec::new();
    let quant_path = out.join("quantization.csv");
    export::write_quantization_csv(&quant_path, &quant)?;
    artifacts.push(quant_path);

    let value = feynman_kac_value(&p, &market, &quant, &grid, cfg.n_paths(), cfg.seed())?;
    #[derive(Serialize)]
    struct ValueReport {
        value: rough_merton::markov_approx::ApproxValue,
        laplace_at_1: rough_merton::markov_approx::LaplaceCheck,
    }
    let value_path = out.join("value.json");
    write_json(
        &value_path,
        &ValueReport {
            value,
            laplace_at_1: laplace_check(&quant, 1.0)?,
        },
    )?;
    artifacts.push(value_path);

    let n_list = convergence_list.or_else(|| cfg.convergence.as_ref().map(|c| c.n_list.clone()));
    if let Some(n_list) = n_list {
        let table = convergence_study(
            &p,
            &market,
            &spec,
            &n_list,
            &grid,
            cfg.n_paths(),
            cfg.seed(),
        )?;
        let conv_path = out.join("convergence.csv");
        export::write_convergence_csv(&conv_path, &table)?;
        artifacts.push(conv_path);
    }
    Ok(artifacts)
}

pub fn compare(cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>> {
    let heston = cfg.heston()?;
    let market = cfg.market()?;
    let grid = cfg.grid()?;
    let sol = solve_distortion(&market, &heston, &grid)?;

    let mut bundle = simulate_volterra_heston(
        &heston,
        &market,
        &grid,
        cfg.n_paths(),
        cfg.seed(),
        cfg.antithetic(),
    )?;
    simulate_wealth(&mut bundle, &market, &sol.strategy)?;
    let gamma_ra = market.gamma_ra;
    let utilities: Vec<f64> = bundle
        .wealth
        .as_ref()
        .expect("wealth just simulated")
        .paths()
        .map(|p| p[grid.n_steps()].powf(gamma_ra) / gamma_ra)
        .collect();
    let stats = mc_stats(&utilities);
    let diff = stats.mean - sol.j0;
    let diff_in_se = if stats.std_err > 0.0 {
        diff / stats.std_err
    } else {
        f64::INFINITY
    };

    #[derive(Serialize)]
    struct Comparison {
        j0_analytic: f64,
        mc_mean_utility: f64,
        mc_std_err: f64,
        diff: f64,
        diff_in_std_errs: f64,
        consistent_within_3se: bool,
        n_paths: usize,
        seed: u64,
    }
    let report = Comparison {
        j0_analytic: sol.j0,
        mc_mean_utility: stats.mean,
        mc_std_err: stats.std_err,
        diff,
        diff_in_std_errs: diff_in_se,
        consistent_within_3se: diff.abs() <= 3.0 * stats.std_err,
        n_paths: cfg.n_paths(),
        seed: cfg.seed(),
    };
    let strategy_path = out.join("strategy.csv");
    export::write_strategy_csv(&strategy_path, &sol)?;
    let compare_path = out.join("compare.json");
    write_json(&compare_path, &report)?;
    Ok(vec![strategy_path, compare_path])
}
