//! Model parameter bundles and path simulation.
//!
//! Market under the risk-neutral-free physical measure:
//!
//! ```text
//! dS_t = S_t (r + θ V_t) dt + S_t sqrt(V_t) dW1_t
//! dB_t = ρ dW1_t + sqrt(1-ρ²) dW2_t          (variance driver)
//! dΠ_t = Π_t (r + θ π_t V_t) dt + Π_t π_t sqrt(V_t) dW1_t
//! ```
//!
//! Simulation is embarrassingly parallel across paths; every path owns an RNG
//! substream keyed by its index, so output is bit-identical regardless of the
//! thread count (and of whether the `parallel` feature is enabled at all).

mod cir;
mod fbm;
mod marchaud;
pub mod mc;
mod volterra;
mod wealth;

pub use cir::{simulate_cir, CirParams};
pub use fbm::simulate_fbm;
pub use marchaud::{
    h_factor as marchaud_h_factor, simulate_marchaud_factors, MarchaudFactorPaths, MarchaudState,
};
pub use volterra::{simulate_volterra_heston, volterra_monte_carlo, VolterraPathView};
pub use wealth::simulate_wealth;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::kernels::KernelSpec;
use crate::special::kahan_sum;

/// Market-side parameters: rates, risk premium, correlation, risk aversion,
/// horizon and initial wealth.
///
/// θ = 0 and r = 0 are admitted (they are the degenerate configurations the
/// sanity checks lean on), everything else is validated strictly.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MarketParams {
    pub r: f64,
    pub theta: f64,
    pub rho: f64,
    pub gamma_ra: f64,
    pub horizon: f64,
    pub w0: f64,
}

impl MarketParams {
    pub fn new(r: f64, theta: f64, rho: f64, gamma_ra: f64, horizon: f64, w0: f64) -> Result<Self> {
        if !(r.is_finite() && r >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "risk-free rate must be >= 0, got {r}"
            )));
        }
        if !theta.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "theta must be finite, got {theta}"
            )));
        }
        if !(rho.is_finite() && rho > -1.0 && rho < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "rho must lie in (-1, 1), got {rho}"
            )));
        }
        if !(gamma_ra.is_finite() && gamma_ra > 0.0 && gamma_ra < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "risk aversion gamma must lie in (0, 1), got {gamma_ra}"
            )));
        }
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "horizon must be positive, got {horizon}"
            )));
        }
        if !(w0.is_finite() && w0 > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "initial wealth must be positive, got {w0}"
            )));
        }
        Ok(MarketParams {
            r,
            theta,
            rho,
            gamma_ra,
            horizon,
            w0,
        })
    }
}

/// Volterra Heston variance parameters:
/// `V_t = v0 + κ ∫_0^t K(t-u)(φ - V_u) du + σ ∫_0^t K(t-u) sqrt(V_u) dB_u`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct VolterraHestonParams {
    pub v0: f64,
    pub kappa: f64,
    pub phi_mean: f64,
    pub sigma: f64,
    pub kernel: KernelSpec,
}

impl VolterraHestonParams {
    pub fn new(v0: f64, kappa: f64, phi_mean: f64, sigma: f64, kernel: KernelSpec) -> Result<Self> {
        for (name, v) in [
            ("v0", v0),
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
        if !kernel.l2_ok() {
            return Err(Error::InvalidParameter(
                "kernel is not locally square-integrable (needs alpha > 1/2); \
                 the stochastic convolution is undefined"
                    .into(),
            ));
        }
        Ok(VolterraHestonParams {
            v0,
            kappa,
            phi_mean,
            sigma,
            kernel,
        })
    }
}

/// Marchaud-fractional volatility parameters. `alpha_m ∈ (-1, -1/2)`, i.e.
/// Hurst index `H = (alpha_m + 1)/2 ∈ (0, 1/4)`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MarchaudParams {
    pub nu0: f64,
    pub alpha_m: f64,
    pub z0: f64,
    pub kappa: f64,
    pub phi_mean: f64,
    pub sigma: f64,
    /// Positive clamp level of the variance map a(ν) = max(ν, floor_eps).
    pub floor_eps: f64,
}

impl MarchaudParams {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        nu0: f64,
        alpha_m: f64,
        z0: f64,
        kappa: f64,
        phi_mean: f64,
        sigma: f64,
        floor_eps: f64,
    ) -> Result<Self> {
        if !(nu0.is_finite() && nu0 > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "nu0 must be positive, got {nu0}"
            )));
        }
        if !(alpha_m.is_finite() && alpha_m > -1.0 && alpha_m < -0.5) {
            return Err(Error::InvalidParameter(format!(
                "alpha_m must lie strictly inside (-1, -1/2), got {alpha_m}"
            )));
        }
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
        if !(floor_eps.is_finite() && floor_eps > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "floor_eps must be positive, got {floor_eps}"
            )));
        }
        Ok(MarchaudParams {
            nu0,
            alpha_m,
            z0,
            kappa,
            phi_mean,
            sigma,
            floor_eps,
        })
    }

    pub fn hurst(&self) -> f64 {
        (self.alpha_m + 1.0) / 2.0
    }

    pub fn cir(&self) -> CirParams {
        CirParams {
            z0: self.z0,
            kappa: self.kappa,
            phi_mean: self.phi_mean,
            sigma: self.sigma,
        }
    }

    /// The variance map a(ν) = max(ν, floor_eps); convex and positive.
    pub fn variance_map(&self, nu: f64) -> f64 {
        nu.max(self.floor_eps)
    }
}

/// Dense row-major storage for `n_paths` rows of equal length.
#[derive(Debug, Clone, PartialEq)]
pub struct PathMatrix {
    n_paths: usize,
    n_cols: usize,
    data: Vec<f64>,
}

impl PathMatrix {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Self {
        let n_paths = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(n_paths * n_cols);
        for row in rows {
            assert_eq!(row.len(), n_cols, "ragged path rows");
            data.extend_from_slice(&row);
        }
        PathMatrix {
            n_paths,
            n_cols,
            data,
        }
    }

    pub fn n_paths(&self) -> usize {
        self.n_paths
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn path(&self, i: usize) -> &[f64] {
        &self.data[i * self.n_cols..(i + 1) * self.n_cols]
    }

    pub fn paths(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.n_cols)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Mean over paths at one column, compensated.
    pub fn column_mean(&self, col: usize) -> f64 {
        kahan_sum(self.paths().map(|p| p[col])) / self.n_paths as f64
    }

    pub fn min_value(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// A deterministic investment schedule t ↦ π(t); wealth never enters.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Schedule {
    Constant(f64),
    /// One value per grid node; steps use the left node.
    Nodes(Vec<f64>),
}

impl Schedule {
    /// Schedule values at every node of `grid`; errors if the schedule does
    /// not cover it.
    pub fn values_on(&self, grid: &TimeGrid) -> Result<Vec<f64>> {
        match self {
            Schedule::Constant(pi) => Ok(vec![*pi; grid.n_nodes()]),
            Schedule::Nodes(values) => {
                if values.len() < grid.n_nodes() {
                    return Err(Error::LengthMismatch(format!(
                        "strategy schedule has {} nodes, grid needs {}",
                        values.len(),
                        grid.n_nodes()
                    )));
                }
                Ok(values[..grid.n_nodes()].to_vec())
            }
        }
    }
}

/// Correlated simulated paths on a shared grid with seed provenance.
///
/// `w1`/`w2` hold Brownian increments (`n_steps` per path), `v`/`s` hold node
/// values (`n_steps + 1` per path, `s` starts at 1). Wealth appears after
/// [`simulate_wealth`]; `z`/`y_factors` after factor simulations.
#[derive(Debug, Clone)]
pub struct PathBundle {
    pub grid: TimeGrid,
    pub n_paths: usize,
    pub seed: u64,
    pub antithetic: bool,
    pub w1: PathMatrix,
    pub w2: PathMatrix,
    pub v: PathMatrix,
    pub s: PathMatrix,
    pub wealth: Option<PathMatrix>,
    pub z: Option<PathMatrix>,
    pub y_factors: Option<Vec<PathMatrix>>,
}
