//! Square-root (CIR) factor `dZ = κ(φ - Z) dt + σ sqrt(Z) dB` under the
//! full-truncation Euler scheme: the internal state may dip below zero, the
//! drift and diffusion read its positive part, and the emitted path is
//! clamped at zero.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::models::mc::{map_paths, PathDraws};
use crate::models::PathMatrix;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct CirParams {
    pub z0: f64,
    pub kappa: f64,
    pub phi_mean: f64,
    pub sigma: f64,
}

impl CirParams {
    pub fn new(z0: f64, kappa: f64, phi_mean: f64, sigma: f64) -> Result<Self> {
        for (name, v) in [
            ("z0", z0),
            ("kappa", kappa),
            ("phi_mean", phi_mean),
            ("sigma", sigma),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be >= 0, got {v}"
                )));
            }
        }
        Ok(CirParams {
            z0,
            kappa,
            phi_mean,
            sigma,
        })
    }

    /// E[Z_t] = φ + (z0 - φ) e^{-κt}.
    pub fn mean_at(&self, t: f64) -> f64 {
        self.phi_mean + (self.z0 - self.phi_mean) * (-self.kappa * t).exp()
    }

    /// Var(Z_t) in closed form.
    pub fn variance_at(&self, t: f64) -> f64 {
        let k = self.kappa;
        let e1 = (-k * t).exp();
        let e2 = (-2.0 * k * t).exp();
        self.z0 * self.sigma * self.sigma / k * (e1 - e2)
            + self.phi_mean * self.sigma * self.sigma / (2.0 * k) * (1.0 - e1) * (1.0 - e1)
    }
}

/// One full-truncation Euler step of the internal (unclamped) state.
#[inline]
pub(crate) fn cir_step(p: &CirParams, z: f64, dt: f64, db: f64) -> f64 {
    let zp = z.max(0.0);
    z + p.kappa * (p.phi_mean - zp) * dt + p.sigma * zp.sqrt() * db
}

/// Fill one path of clamped node values; the Brownian increments used are
/// returned through `db_out` when the caller needs the shared driver.
pub(crate) fn cir_path(
    p: &CirParams,
    grid: &TimeGrid,
    draws: &mut PathDraws,
    out: &mut [f64],
    mut db_out: Option<&mut [f64]>,
) {
    let dt = grid.dt();
    let sqrt_dt = dt.sqrt();
    let mut state = p.z0;
    out[0] = state.max(0.0);
    for j in 0..grid.n_steps() {
        let db = sqrt_dt * draws.normal();
        if let Some(buf) = db_out.as_deref_mut() {
            buf[j] = db;
        }
        state = cir_step(p, state, dt, db);
        out[j + 1] = state.max(0.0);
    }
}

/// Simulate `n_paths` CIR paths; returns clamped node values.
pub fn simulate_cir(
    p: &CirParams,
    grid: &TimeGrid,
    n_paths: usize,
    seed: u64,
    antithetic: bool,
) -> PathMatrix {
    let rows = map_paths(n_paths, |i| {
        let mut draws = PathDraws::new(seed, i, antithetic);
        let mut out = vec![0.0; grid.n_nodes()];
        cir_path(p, grid, &mut draws, &mut out, None);
        out
    });
    PathMatrix::from_rows(rows)
}
