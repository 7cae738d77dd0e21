//! Scalar Riccati-Volterra equations `f = K * (c0 + c1 f + c2 f²)`, solved by
//! product-integration predictor-corrector on the kernel-exact cell weights,
//! plus the global-existence test and the exponential-moment functional
//!
//! ```text
//! E[exp(a ∫_0^T V_u du)] = exp[ V0 ∫_0^T (a - κ g + σ²g²/2) du + κφ ∫_0^T g du ]
//! ```
//!
//! with `g = g(a,·)` solving `g = K*(a - κ g + σ² g²/2)`, `g(a,0) = 0`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::kernels::{convolve_grid, KernelSpec};
use crate::models::VolterraHestonParams;
use crate::special::trapezoid;

/// Divergence guard: the equation genuinely explodes in finite time outside
/// the existence window, so a hard cap with diagnostics beats NaN soup.
const BLOW_UP_CAP: f64 = 1e8;
/// Fixed-point corrector sweeps per step.
const N_CORRECTOR: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RiccatiCoefficients {
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
}

impl RiccatiCoefficients {
    pub fn new(c0: f64, c1: f64, c2: f64) -> Result<Self> {
        if !(c0.is_finite() && c1.is_finite() && c2.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "riccati coefficients must be finite, got ({c0}, {c1}, {c2})"
            )));
        }
        Ok(RiccatiCoefficients { c0, c1, c2 })
    }

    #[inline]
    fn rhs(&self, f: f64) -> f64 {
        self.c0 + self.c1 * f + self.c2 * f * f
    }
}

/// A solved Riccati-Volterra unknown on a grid; `values[0] = 0` always.
#[derive(Debug, Clone, Serialize)]
pub struct RiccatiSolution {
    pub grid: TimeGrid,
    pub values: Vec<f64>,
    pub coeffs: RiccatiCoefficients,
    pub kernel: KernelSpec,
    pub corrector_iters: usize,
}

impl RiccatiSolution {
    /// Max self-consistency residual |f - K*(rhs(f))| over the grid, under
    /// the crate quadrature.
    pub fn residual(&self) -> Result<f64> {
        let rhs: Vec<f64> = self.values.iter().map(|&f| self.coeffs.rhs(f)).collect();
        let conv = convolve_grid(&self.kernel, &rhs, &self.grid)?;
        Ok(self
            .values
            .iter()
            .zip(conv.iter())
            .map(|(f, c)| (f - c).abs())
            .fold(0.0, f64::max))
    }

    /// Value at the horizon.
    pub fn terminal(&self) -> f64 {
        *self.values.last().expect("grid has at least one node")
    }
}

/// Residual tolerance `10 · dt^min(α,1)` used by the self-consistency
/// invariant.
pub fn tol_riccati(kernel: &KernelSpec, dt: f64) -> f64 {
    10.0 * dt.powf(kernel.order_exponent().min(1.0))
}

/// Solve `f = K*(c0 + c1 f + c2 f²)`, `f(0) = 0` by the predictor-corrector
/// scheme: explicit product-integration predictor, then `N_CORRECTOR`
/// fixed-point refreshes of the last cell.
pub fn solve_riccati(
    kernel: &KernelSpec,
    coeffs: RiccatiCoefficients,
    grid: &TimeGrid,
) -> Result<RiccatiSolution> {
    let weights = kernel.cell_weights(grid)?;
    let n = grid.n_nodes();
    let mut values = vec![0.0; n];
    let mut rhs_cache = vec![0.0; n];
    rhs_cache[0] = coeffs.rhs(0.0);

    for j in 1..n {
        // History part Σ_{i<j-1} ω_{j-i} rhs(f_i), shared by predictor and
        // correctors.
        let mut hist = 0.0;
        for i in 0..j.saturating_sub(1) {
            hist += weights[j - i - 1] * rhs_cache[i];
        }
        let w_last = weights[0];
        let predictor = hist + w_last * rhs_cache[j - 1];
        let mut f_j = predictor;
        for _ in 0..N_CORRECTOR {
            f_j = hist + w_last * coeffs.rhs(f_j);
        }
        if !f_j.is_finite() || f_j.abs() > BLOW_UP_CAP {
            return Err(Error::BlowUp {
                node: j - 1,
                t_last: grid.node(j - 1),
                cap: BLOW_UP_CAP,
            });
        }
        values[j] = f_j;
        rhs_cache[j] = coeffs.rhs(f_j);
    }

    Ok(RiccatiSolution {
        grid: *grid,
        values,
        coeffs,
        kernel: *kernel,
        corrector_iters: N_CORRECTOR,
    })
}

/// Global-existence condition for `g = K*(a - κ g + σ²g²/2)`:
/// `κ² - 2aσ² > 0` (strict).
pub fn check_global_existence(kappa: f64, sigma: f64, a: f64) -> bool {
    kappa * kappa - 2.0 * a * sigma * sigma > 0.0
}

/// Exponential moment `E[exp(a ∫_0^T V du)]` of the Volterra Heston variance
/// over the grid's horizon, via the Riccati-Volterra solution and trapezoid
/// integration on the same grid.
pub fn exponential_moment(heston: &VolterraHestonParams, a: f64, grid: &TimeGrid) -> Result<f64> {
    let coeffs = RiccatiCoefficients::new(a, -heston.kappa, 0.5 * heston.sigma * heston.sigma)?;
    let g = solve_riccati(&heston.kernel, coeffs, grid)?;
    let integrand: Vec<f64> = g.values.iter().map(|&v| coeffs.rhs(v)).collect();
    let int_rhs = trapezoid(&integrand, grid.dt());
    let int_g = trapezoid(&g.values, grid.dt());
    Ok((heston.v0 * int_rhs + heston.kappa * heston.phi_mean * int_g).exp())
}
