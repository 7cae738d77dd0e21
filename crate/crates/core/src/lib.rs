//! Optimal Merton portfolios under two rough Heston models.
//!
//! The crate is organised around the pipeline that produces them:
//!
//! * [`kernels`] — Table of completely monotone convolution kernels,
//!   second-kind resolvents, singularity-aware product-integration
//!   quadrature and the Mittag-Leffler function.
//! * [`riccati`] — scalar Riccati-Volterra solver (predictor-corrector on
//!   kernel-exact weights), global-existence check, exponential-moment
//!   functional.
//! * [`models`] — parameter bundles and path simulation: CIR factor,
//!   Volterra Heston variance/stock/wealth, exact fractional Brownian
//!   motion, Marchaud factor system. Parallel across paths with per-path
//!   RNG substreams, so results do not depend on the thread count.
//! * [`roughness`] — moment-scaling regression recovering the Hurst
//!   exponent from log-volatility increments.
//! * [`distortion`] — martingale-distortion solution of the Volterra
//!   Heston portfolio problem: distortion power, tilted forward variance,
//!   value level and the optimal strategy schedule, plus the parameter
//!   conditions under which the construction is valid.
//! * [`markov_approx`] — Marchaud-fractional volatility: quantization of
//!   the mixing measure, finite factor assembly, the ρ=0 Feynman-Kac value
//!   and convergence studies in the atom count.
//! * [`export`] — CSV/JSON/binary artifact writers.

pub mod distortion;
pub mod error;
pub mod export;
pub mod grid;
pub mod kernels;
pub mod markov_approx;
pub mod models;
pub mod riccati;
pub mod roughness;
pub mod special;

pub use error::{Error, Result};
pub use grid::TimeGrid;
