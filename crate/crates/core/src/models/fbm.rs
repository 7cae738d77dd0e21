//! Exact fractional Brownian motion on a grid by one-time Cholesky
//! factorization of the node covariance
//! `C_ij = (t_i^{2H} + t_j^{2H} - |t_i - t_j|^{2H}) / 2`.
//!
//! Exactness keeps the scaling tests honest; the price is the dense factor,
//! hence the 4096-node cap.

use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::models::mc::{map_paths, PathDraws};
use crate::models::PathMatrix;

const MAX_NODES: usize = 4096;
const JITTER: f64 = 1e-12;

/// Simulate `n_paths` exact fBm paths with Hurst index `hurst`; node 0 is 0.
pub fn simulate_fbm(hurst: f64, grid: &TimeGrid, n_paths: usize, seed: u64) -> Result<PathMatrix> {
    if !(hurst > 0.0 && hurst < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "hurst must lie in (0,1), got {hurst}"
        )));
    }
    if grid.n_steps() > MAX_NODES {
        return Err(Error::InvalidParameter(format!(
            "dense factorization is capped at {MAX_NODES} steps, got {}; use a smaller grid",
            grid.n_steps()
        )));
    }
    let n = grid.n_steps();
    let two_h = 2.0 * hurst;
    // Lower-triangular packed covariance of (W_{t_1}, ..., W_{t_n}).
    let mut cov = vec![0.0; n * (n + 1) / 2];
    for i in 0..n {
        let ti = grid.node(i + 1);
        for j in 0..=i {
            let tj = grid.node(j + 1);
            cov[i * (i + 1) / 2 + j] =
                0.5 * (ti.powf(two_h) + tj.powf(two_h) - (ti - tj).abs().powf(two_h));
        }
    }

    let factor = match cholesky_packed(cov.clone(), n) {
        Ok(l) => l,
        Err(_) => {
            // PD in exact arithmetic; one round of diagonal jitter covers
            // round-off for H near the ends.
            for i in 0..n {
                cov[i * (i + 1) / 2 + i] += JITTER;
            }
            cholesky_packed(cov, n).map_err(|_| {
                Error::Factorization(
                    "fBm covariance is numerically singular even after jitter; use a smaller grid"
                        .into(),
                )
            })?
        }
    };

    let rows = map_paths(n_paths, |p| {
        let mut draws = PathDraws::new(seed, p, false);
        let z: Vec<f64> = (0..n).map(|_| draws.normal()).collect();
        let mut path = vec![0.0; n + 1];
        for i in 0..n {
            let row = &factor[i * (i + 1) / 2..i * (i + 1) / 2 + i + 1];
            let mut acc = 0.0;
            for (l, zk) in row.iter().zip(z.iter()) {
                acc += l * zk;
            }
            path[i + 1] = acc;
        }
        path
    });
    Ok(PathMatrix::from_rows(rows))
}

/// In-place Cholesky of a packed lower-triangular symmetric matrix.
fn cholesky_packed(mut a: Vec<f64>, n: usize) -> std::result::Result<Vec<f64>, ()> {
    for i in 0..n {
        for j in 0..=i {
            let mut sum = a[i * (i + 1) / 2 + j];
            for k in 0..j {
                sum -= a[i * (i + 1) / 2 + k] * a[j * (j + 1) / 2 + k];
            }
            if i == j {
                if sum <= 0.0 {
                    return Err(());
                }
                a[i * (i + 1) / 2 + j] = sum.sqrt();
            } else {
                a[i * (i + 1) / 2 + j] = sum / a[j * (j + 1) / 2 + j];
            }
        }
    }
    Ok(a)
}
