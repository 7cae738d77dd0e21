//! Self-financing wealth under a deterministic strategy schedule, log-Euler:
//!
//! ```text
//! log Π_{j+1} = log Π_j + (r + θ π_j V_j - π_j² V_j / 2) dt + π_j sqrt(V_j) ΔW1_j
//! ```
//!
//! The log scheme keeps wealth strictly positive for every admissible path.

use crate::error::Result;
use crate::grid::TimeGrid;
use crate::models::{MarketParams, PathBundle, PathMatrix, Schedule};

/// One wealth path from a variance path and W1 increments.
pub(crate) fn wealth_path(
    m: &MarketParams,
    grid: &TimeGrid,
    pi: &[f64],
    v: &[f64],
    w1: &[f64],
    out: &mut [f64],
) {
    let dt = grid.dt();
    let mut log_w = m.w0.ln();
    out[0] = m.w0;
    for j in 0..grid.n_steps() {
        let p = pi[j];
        let vj = v[j].max(0.0);
        log_w += (m.r + m.theta * p * vj - 0.5 * p * p * vj) * dt + p * vj.sqrt() * w1[j];
        out[j + 1] = log_w.exp();
    }
}

/// Add wealth paths to a simulated bundle. The schedule must cover the grid.
pub fn simulate_wealth(
    bundle: &mut PathBundle,
    m: &MarketParams,
    strategy: &Schedule,
) -> Result<()> {
    let grid = bundle.grid;
    let pi = strategy.values_on(&grid)?;
    let mut rows = Vec::with_capacity(bundle.n_paths);
    for (v, w1) in bundle.v.paths().zip(bundle.w1.paths()) {
        let mut out = vec![0.0; grid.n_nodes()];
        wealth_path(m, &grid, &pi, v, w1, &mut out);
        rows.push(out);
    }
    bundle.wealth = Some(PathMatrix::from_rows(rows));
    Ok(())
}
