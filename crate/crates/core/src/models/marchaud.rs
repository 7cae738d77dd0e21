//! Joint simulation of the CIR factor Z and the exponential factors
//! `Y^x_t = ∫_0^t (Z_t - Z_u) e^{-(t-u)x} du` behind the Marchaud volatility:
//!
//! ```text
//! dY^x = [ h(t,x) κ(φ - Z) - x Y^x ] dt + h(t,x) σ sqrt(Z) dB,   h(t,x) = (1 - e^{-tx})/x
//! ```
//!
//! All factors ride the same ΔB as Z, per path.

use crate::error::Result;
use crate::grid::TimeGrid;
use crate::markov_approx::Quantization;
use crate::models::cir::{cir_step, CirParams};
use crate::models::mc::{map_paths, PathDraws};
use crate::models::{MarchaudParams, PathMatrix};

/// Mutable per-path state of (Z, Y^{x_1}, ..., Y^{x_n}); `z` holds the
/// unclamped Euler state, `z_pos()` the value every coefficient reads.
pub struct MarchaudState {
    pub z: f64,
    pub y: Vec<f64>,
}

impl MarchaudState {
    pub fn new(p: &MarchaudParams, n_atoms: usize) -> Self {
        MarchaudState {
            z: p.z0,
            y: vec![0.0; n_atoms],
        }
    }

    #[inline]
    pub fn z_pos(&self) -> f64 {
        self.z.max(0.0)
    }

    /// Advance the joint system over [t, t+dt] with Brownian increment `db`.
    ///
    /// The mean-reversion `-x Y dt` is integrated exactly (variation of
    /// constants with coefficients frozen at the left node); a plain explicit
    /// step diverges as soon as `x dt > 2`, and geometric partitions carry
    /// atoms far beyond that. As dt → 0 this reduces to the Euler step.
    pub fn step(&mut self, cir: &CirParams, atoms: &[f64], t: f64, dt: f64, db: f64) {
        let zp = self.z_pos();
        let drift_common = cir.kappa * (cir.phi_mean - zp);
        let diff_common = cir.sigma * zp.sqrt() * db;
        for (y, &x) in self.y.iter_mut().zip(atoms.iter()) {
            let h = h_factor(t, x);
            let xdt = x * dt;
            let decay = (-xdt).exp();
            // ψ(y) = (1 - e^{-y})/y, the cell-average of the decay weight.
            let psi = if xdt > 1e-8 {
                (1.0 - decay) / xdt
            } else {
                1.0 - 0.5 * xdt
            };
            *y = decay * *y + psi * h * (drift_common * dt + diff_common);
        }
        self.z = cir_step(cir, self.z, dt, db);
    }
}

/// `h(t, x) = (1 - e^{-tx})/x`, the loading of factor x at time t.
/// Satisfies `0 < h < min(t, 1/x)` for t, x > 0.
#[inline]
pub fn h_factor(t: f64, x: f64) -> f64 {
    (-(-t * x).exp_m1()) / x
}

/// Z paths plus one factor path matrix per quantization atom, all driven by
/// the same per-path ΔB.
#[derive(Debug, Clone)]
pub struct MarchaudFactorPaths {
    pub grid: TimeGrid,
    pub seed: u64,
    pub z: PathMatrix,
    pub y: Vec<PathMatrix>,
}

pub fn simulate_marchaud_factors(
    p: &MarchaudParams,
    q: &Quantization,
    grid: &TimeGrid,
    n_paths: usize,
    seed: u64,
) -> Result<MarchaudFactorPaths> {
    let cir = p.cir();
    let atoms = q.atoms().to_vec();
    let n_atoms = atoms.len();
    let dt = grid.dt();
    let sqrt_dt = dt.sqrt();

    struct Row {
        z: Vec<f64>,
        y: Vec<Vec<f64>>,
    }

    let rows = map_paths(n_paths, |i| {
        let mut draws = PathDraws::new(seed, i, false);
        let mut state = MarchaudState::new(p, n_atoms);
        let mut z_row = vec![0.0; grid.n_nodes()];
        let mut y_rows = vec![vec![0.0; grid.n_nodes()]; n_atoms];
        z_row[0] = state.z_pos();
        for j in 0..grid.n_steps() {
            let db = sqrt_dt * draws.normal();
            state.step(&cir, &atoms, grid.node(j), dt, db);
            z_row[j + 1] = state.z_pos();
            for (k, y) in state.y.iter().enumerate() {
                y_rows[k][j + 1] = *y;
            }
        }
        Row {
            z: z_row,
            y: y_rows,
        }
    });

    let mut z = Vec::with_capacity(n_paths);
    let mut y: Vec<Vec<Vec<f64>>> = vec![Vec::with_capacity(n_paths); n_atoms];
    for row in rows {
        z.push(row.z);
        for (k, yr) in row.y.into_iter().enumerate() {
            y[k].push(yr);
        }
    }
    Ok(MarchaudFactorPaths {
        grid: *grid,
        seed,
        z: PathMatrix::from_rows(z),
        y: y.into_iter().map(PathMatrix::from_rows).collect(),
    })
}
