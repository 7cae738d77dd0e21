//! Hurst-exponent recovery by moment scaling: empirical q-variations
//! `m(q, Δ) = mean |x_{t+Δ} - x_t|^q` follow `K_q Δ^{ζ_q}` for self-similar
//! inputs, and `ζ_q ≈ H q`. Two regression stages: log m on log Δ per q
//! (with intercept, absorbing `K_q`), then ζ on q through the origin.
//!
//! Increments overlap — it maximizes the sample and is the convention this
//! estimator is normally run with on volatility series.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::special::kahan_sum;

/// Moment-scaling regression report.
#[derive(Debug, Clone, Serialize)]
pub struct ScalingReport {
    pub qs: Vec<f64>,
    pub lags: Vec<usize>,
    /// Empirical moments, `m[qi][li]` for q index and lag index.
    pub m_qd: Vec<Vec<f64>>,
    /// Fitted slope ζ_q per q.
    pub zeta_q: Vec<f64>,
    /// R² of each per-q log-log fit.
    pub zeta_r2: Vec<f64>,
    /// Slope of ζ_q on q through the origin.
    pub h_hat: f64,
    /// R² of the through-origin fit.
    pub h_r2: f64,
}

/// Empirical q-variation at one lag: `mean_t |x_{t+lag} - x_t|^q`,
/// overlapping windows.
pub fn q_variation(series: &[f64], q: f64, lag: usize) -> Result<f64> {
    if !(q.is_finite() && q > 0.0) {
        return Err(Error::Domain(format!(
            "moment order q must be positive, got {q}"
        )));
    }
    if lag == 0 || series.len() <= lag {
        return Err(Error::InsufficientData(format!(
            "series of length {} cannot support lag {lag}",
            series.len()
        )));
    }
    let n = series.len() - lag;
    let total = kahan_sum((0..n).map(|t| (series[t + lag] - series[t]).abs().powf(q)));
    Ok(total / n as f64)
}

/// Two-stage scaling regression on one series.
pub fn estimate_hurst(series: &[f64], qs: &[f64], lags: &[usize]) -> Result<ScalingReport> {
    let m_qd = moment_matrix(&[series], qs, lags)?;
    report_from_moments(qs, lags, m_qd)
}

/// Pooled variant: moments averaged over several independent paths of equal
/// length (increments never straddle path boundaries). The estimator is the
/// same; the sample is bigger.
pub fn estimate_hurst_pooled(
    paths: &[&[f64]],
    qs: &[f64],
    lags: &[usize],
) -> Result<ScalingReport> {
    if paths.is_empty() {
        return Err(Error::InsufficientData("no paths supplied".into()));
    }
    let m_qd = moment_matrix(paths, qs, lags)?;
    report_from_moments(qs, lags, m_qd)
}

fn moment_matrix(paths: &[&[f64]], qs: &[f64], lags: &[usize]) -> Result<Vec<Vec<f64>>> {
    if qs.len() < 2 {
        return Err(Error::InsufficientData(
            "need at least two moment orders".into(),
        ));
    }
    if lags.len() < 3 {
        return Err(Error::InsufficientData("need at least three lags".into()));
    }
    qs.iter()
        .map(|&q| {
            lags.iter()
                .map(|&lag| {
                    let per_path: Vec<f64> = paths
                        .iter()
                        .map(|p| q_variation(p, q, lag))
                        .collect::<Result<_>>()?;
                    // Equal path lengths: pooled mean = mean of per-path means.
                    Ok(kahan_sum(per_path.iter().copied()) / per_path.len() as f64)
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect()
}

fn report_from_moments(qs: &[f64], lags: &[usize], m_qd: Vec<Vec<f64>>) -> Result<ScalingReport> {
    let log_lags: Vec<f64> = lags.iter().map(|&l| (l as f64).ln()).collect();
    let mut zeta_q = Vec::with_capacity(qs.len());
    let mut zeta_r2 = Vec::with_capacity(qs.len());
    for (qi, row) in m_qd.iter().enumerate() {
        if !row.iter().all(|&m| m > 0.0) {
            return Err(Error::DegenerateRegression(format!(
                "non-positive moment at q = {}; constant series?",
                qs[qi]
            )));
        }
        let log_m: Vec<f64> = row.iter().map(|&m| m.ln()).collect();
        let (slope, r2) = ols_with_intercept(&log_lags, &log_m)?;
        zeta_q.push(slope);
        zeta_r2.push(r2);
    }
    let (h_hat, h_r2) = ols_through_origin(qs, &zeta_q)?;
    if !h_hat.is_finite() {
        return Err(Error::DegenerateRegression(
            "H estimate is not finite".into(),
        ));
    }
    Ok(ScalingReport {
        qs: qs.to_vec(),
        lags: lags.to_vec(),
        m_qd,
        zeta_q,
        zeta_r2,
        h_hat,
        h_r2,
    })
}

fn ols_with_intercept(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|&v| (v - mx) * (v - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::DegenerateRegression(
            "zero variance in regressor".into(),
        ));
    }
    let sxy: f64 = x
        .iter()
        .zip(y.iter())
        .map(|(&a, &b)| (a - mx) * (b - my))
        .sum();
    let slope = sxy / sxx;
    let syy: f64 = y.iter().map(|&v| (v - my) * (v - my)).sum();
    let r2 = if syy == 0.0 {
        1.0
    } else {
        (sxy * sxy) / (sxx * syy)
    };
    Ok((slope, r2))
}

fn ols_through_origin(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    let sxx: f64 = x.iter().map(|&v| v * v).sum();
    if sxx == 0.0 {
        return Err(Error::DegenerateRegression("zero moment orders".into()));
    }
    let sxy: f64 = x.iter().zip(y.iter()).map(|(&a, &b)| a * b).sum();
    let slope = sxy / sxx;
    let ss_res: f64 = x
        .iter()
        .zip(y.iter())
        .map(|(&a, &b)| (b - slope * a) * (b - slope * a))
        .sum();
    let ss_tot: f64 = y.iter().map(|&v| v * v).sum();
    let r2 = if ss_tot == 0.0 {
        1.0
    } else {
        1.0 - ss_res / ss_tot
    };
    Ok((slope, r2))
}
