use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform time grid `t_j = j * dt`, `j = 0..=n_steps`.
///
/// All solvers and simulators in this crate share this grid type; the final
/// node is the horizon by construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    dt: f64,
    n_steps: usize,
}

impl TimeGrid {
    pub fn new(dt: f64, n_steps: usize) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "grid dt must be positive, got {dt}"
            )));
        }
        if n_steps == 0 {
            return Err(Error::InvalidParameter(
                "grid needs at least one step".into(),
            ));
        }
        Ok(TimeGrid { dt, n_steps })
    }

    /// Grid with `n_steps` steps covering `[0, horizon]`.
    pub fn with_horizon(horizon: f64, n_steps: usize) -> Result<Self> {
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "grid horizon must be positive, got {horizon}"
            )));
        }
        let grid = Self::new(horizon / n_steps as f64, n_steps)?;
        debug_assert!((grid.horizon() - horizon).abs() <= 1e-12 * horizon.max(1.0));
        Ok(grid)
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    /// Number of nodes, `n_steps + 1`.
    pub fn n_nodes(&self) -> usize {
        self.n_steps + 1
    }

    pub fn horizon(&self) -> f64 {
        self.node(self.n_steps)
    }

    pub fn node(&self, j: usize) -> f64 {
        j as f64 * self.dt
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_nodes()).map(move |j| self.node(j))
    }
}
