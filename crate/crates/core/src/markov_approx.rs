//! Finite-dimensional Markovian approximation of the Marchaud-fractional
//! volatility.
//!
//! The rough part of the volatility is an integral over exponential factors
//! against the mixing measure `μ̃(dx) = x^{α+1} dx / (Γ(-α)Γ(α+1))` (with
//! `α ∈ (-1,-1/2)`). Quantizing μ̃ on a partition — atoms at cell
//! barycenters, masses equal to cell μ̃-mass — turns the non-Markovian
//! process into a finite diffusion system:
//!
//! ```text
//! ν^n_t = ν0 + Z_t t^{-α-1}/Γ(-α) + Σ_i Y^{x_i}_t q_i,     V_t = a(ν^n_t)
//! ```
//!
//! and, for ρ = 0, the portfolio value is the Feynman-Kac expectation
//! `(w0^γ/γ) E[exp ∫_0^T (γ r + γθ² a(ν^n_t)/(2(1-γ))) dt]` with optimal
//! strategy π* = θ/(1-γ).

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::models::mc::{map_paths, mc_stats, PathDraws};
use crate::models::{
    MarchaudFactorPaths, MarchaudParams, MarchaudState, MarketParams, PathMatrix, Schedule,
};
use crate::special::{gamma, kahan_sum};

/// Atoms and masses approximating the Marchaud mixing measure μ̃.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Quantization {
    alpha_m: f64,
    knots: Vec<f64>,
    atoms: Vec<f64>,
    masses: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum KnotSpacing {
    Geometric,
    Linear,
}

/// Partition request: `n` cells between `xi_min` and `xi_max`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PartitionSpec {
    pub xi_min: f64,
    pub xi_max: f64,
    pub n: usize,
    pub spacing: KnotSpacing,
}

impl Quantization {
    /// The zero-atom approximation (pure singular term). Mostly a baseline
    /// for convergence comparisons.
    pub fn empty(alpha_m: f64) -> Result<Self> {
        check_alpha_m(alpha_m)?;
        Ok(Quantization {
            alpha_m,
            knots: Vec::new(),
            atoms: Vec::new(),
            masses: Vec::new(),
        })
    }

    pub fn alpha_m(&self) -> f64 {
        self.alpha_m
    }

    pub fn n_atoms(&self) -> usize {
        self.atoms.len()
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn atoms(&self) -> &[f64] {
        &self.atoms
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    /// True when every knot of `self` appears in `finer` (the partitions are
    /// nested in the refinement sense).
    pub fn is_refined_by(&self, finer: &Quantization) -> bool {
        self.knots.iter().all(|&k| {
            finer
                .knots
                .iter()
                .any(|&f| (f - k).abs() <= 1e-9 * k.abs().max(1e-300))
        })
    }
}

/// Density of μ̃ at x: `x^{α+1} / (Γ(-α) Γ(α+1))`.
pub fn mu_tilde_density(alpha_m: f64, x: f64) -> Result<f64> {
    check_alpha_m(alpha_m)?;
    if !(x.is_finite() && x > 0.0) {
        return Err(Error::Domain(format!(
            "mu_tilde density needs x > 0, got {x}"
        )));
    }
    Ok(x.powf(alpha_m + 1.0) / (gamma(-alpha_m) * gamma(alpha_m + 1.0)))
}

fn check_alpha_m(alpha_m: f64) -> Result<()> {
    if !(alpha_m.is_finite() && alpha_m > -1.0 && alpha_m < -0.5) {
        return Err(Error::Domain(format!(
            "alpha_m must lie in (-1, -1/2), got {alpha_m}"
        )));
    }
    Ok(())
}

/// Quantize μ̃ on the requested partition. Cell masses and barycenters use
/// the closed-form power-law moments:
///
/// ```text
/// q_i = (ξ_i^{α+2} - ξ_{i-1}^{α+2}) / ((α+2) Γ(-α) Γ(α+1))
/// x_i = [(ξ_i^{α+3} - ξ_{i-1}^{α+3})/(α+3)] / [(ξ_i^{α+2} - ξ_{i-1}^{α+2})/(α+2)]
/// ```
pub fn build_quantization(alpha_m: f64, spec: &PartitionSpec) -> Result<Quantization> {
    check_alpha_m(alpha_m)?;
    if !(spec.xi_min.is_finite() && spec.xi_min > 0.0 && spec.xi_max > spec.xi_min) {
        return Err(Error::InvalidParameter(format!(
            "partition needs 0 < xi_min < xi_max, got [{}, {}]",
            spec.xi_min, spec.xi_max
        )));
    }
    if spec.n == 0 {
        return Err(Error::InvalidParameter(
            "partition needs at least one cell".into(),
        ));
    }
    let n = spec.n;
    let knots: Vec<f64> = match spec.spacing {
        KnotSpacing::Geometric => {
            let ratio = (spec.xi_max / spec.xi_min).ln() / n as f64;
            (0..=n)
                .map(|i| spec.xi_min * (ratio * i as f64).exp())
                .collect()
        }
        KnotSpacing::Linear => {
            let step = (spec.xi_max - spec.xi_min) / n as f64;
            (0..=n).map(|i| spec.xi_min + step * i as f64).collect()
        }
    };
    let norm = gamma(-alpha_m) * gamma(alpha_m + 1.0);
    let p2 = alpha_m + 2.0;
    let p3 = alpha_m + 3.0;
    let mut atoms = Vec::with_capacity(n);
    let mut masses = Vec::with_capacity(n);
    for w in knots.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let m2 = (hi.powf(p2) - lo.powf(p2)) / p2;
        let m3 = (hi.powf(p3) - lo.powf(p3)) / p3;
        let mass = m2 / norm;
        let atom = m3 / m2;
        debug_assert!(lo < atom && atom < hi, "barycenter escaped its cell");
        masses.push(mass);
        atoms.push(atom);
    }
    Ok(Quantization {
        alpha_m,
        knots,
        atoms,
        masses,
    })
}

/// Discrete vs exact Laplace transform of μ̃ at t:
/// `Σ q_i e^{-t x_i}` vs `(α+1)/Γ(-α) · t^{-α-2}`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LaplaceCheck {
    pub discrete: f64,
    pub exact: f64,
    pub abs_err: f64,
}

pub fn laplace_check(q: &Quantization, t: f64) -> Result<LaplaceCheck> {
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::Domain(format!("laplace check needs t > 0, got {t}")));
    }
    let discrete = kahan_sum(
        q.atoms
            .iter()
            .zip(q.masses.iter())
            .map(|(&x, &m)| m * (-t * x).exp()),
    );
    let a = q.alpha_m;
    let exact = (a + 1.0) / gamma(-a) * t.powf(-a - 2.0);
    Ok(LaplaceCheck {
        discrete,
        exact,
        abs_err: (discrete - exact).abs(),
    })
}

/// Assemble the approximate volatility `ν^n` and variance `a(ν^n)` from
/// simulated factor paths. Node 0 carries ν0 (the `Z t^{-α-1}` weight is
/// singular there; integrals over [0, t_1] read the t_1 value instead).
pub fn assemble_approx_vol(
    p: &MarchaudParams,
    q: &Quantization,
    factors: &MarchaudFactorPaths,
    grid: &TimeGrid,
) -> Result<(PathMatrix, PathMatrix)> {
    if factors.grid != *grid {
        return Err(Error::LengthMismatch(
            "factor paths were simulated on a different grid".into(),
        ));
    }
    if factors.y.len() != q.n_atoms() {
        return Err(Error::LengthMismatch(format!(
            "{} factor matrices vs {} atoms",
            factors.y.len(),
            q.n_atoms()
        )));
    }
    let n_paths = factors.z.n_paths();
    let g_ma = gamma(-p.alpha_m);
    let mut nu_rows = Vec::with_capacity(n_paths);
    let mut var_rows = Vec::with_capacity(n_paths);
    for i in 0..n_paths {
        let z = factors.z.path(i);
        let mut nu = vec![0.0; grid.n_nodes()];
        nu[0] = p.nu0;
        for j in 1..grid.n_nodes() {
            let t = grid.node(j);
            let mut acc = p.nu0 + z[j] * t.powf(-p.alpha_m - 1.0) / g_ma;
            for (y, &mass) in factors.y.iter().zip(q.masses.iter()) {
                acc += y.path(i)[j] * mass;
            }
            nu[j] = acc;
        }
        let var: Vec<f64> = nu.iter().map(|&v| p.variance_map(v)).collect();
        nu_rows.push(nu);
        var_rows.push(var);
    }
    Ok((
        PathMatrix::from_rows(nu_rows),
        PathMatrix::from_rows(var_rows),
    ))
}

/// Monte Carlo estimate of a valuation functional.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ApproxValue {
    pub n_atoms: usize,
    pub estimate: f64,
    pub std_err: f64,
    pub n_paths: usize,
    pub seed: u64,
}

/// ρ=0 Feynman-Kac portfolio value under the quantized Marchaud model:
/// `(w0^γ/γ) E[exp ∫_0^T (γ r + γ θ² a(ν^n_t) / (2(1-γ))) dt]`.
pub fn feynman_kac_value(
    p: &MarchaudParams,
    m: &MarketParams,
    q: &Quantization,
    grid: &TimeGrid,
    n_paths: usize,
    seed: u64,
) -> Result<ApproxValue> {
    if m.rho != 0.0 {
        return Err(Error::Unsupported(format!(
            "the Feynman-Kac value requires rho = 0 (HJB reduction is only linear there), got rho = {}",
            m.rho
        )));
    }
    let values = fk_path_values(p, m, q, grid, n_paths, seed);
    let stats = mc_stats(&values);
    Ok(ApproxValue {
        n_atoms: q.n_atoms(),
        estimate: stats.mean,
        std_err: stats.std_err,
        n_paths,
        seed,
    })
}

/// Per-path discounted-utility exponentials, streaming (state only, no path
/// storage). Path order is fixed by the substream index.
fn fk_path_values(
    p: &MarchaudParams,
    m: &MarketParams,
    q: &Quantization,
    grid: &TimeGrid,
    n_paths: usize,
    seed: u64,
) -> Vec<f64> {
    let cir = p.cir();
    let atoms = q.atoms.clone();
    let masses = q.masses.clone();
    let dt = grid.dt();
    let sqrt_dt = dt.sqrt();
    let g_ma = gamma(-p.alpha_m);
    let gam = m.gamma_ra;
    let coeff = gam * m.theta * m.theta / (2.0 * (1.0 - gam));
    let util0 = m.w0.powf(gam) / gam;

    map_paths(n_paths, |i| {
        let mut draws = PathDraws::new(seed, i, false);
        let mut state = MarchaudState::new(p, atoms.len());
        // integrand g_j = γ r + coeff * a(ν_j) at nodes 1..n; first cell uses
        // g_1, trapezoid after.
        let mut integral = 0.0;
        let mut prev_g = 0.0;
        for j in 0..grid.n_steps() {
            let db = sqrt_dt * draws.normal();
            state.step(&cir, &atoms, grid.node(j), dt, db);
            let t = grid.node(j + 1);
            let mut nu = p.nu0 + state.z_pos() * t.powf(-p.alpha_m - 1.0) / g_ma;
            for (y, &mass) in state.y.iter().zip(masses.iter()) {
                nu += y * mass;
            }
            let g = gam * m.r + coeff * p.variance_map(nu);
            if j == 0 {
                integral += g * dt;
            } else {
                integral += 0.5 * dt * (prev_g + g);
            }
            prev_g = g;
        }
        util0 * integral.exp()
    })
}

/// One row of a convergence study.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ConvergenceRow {
    pub n_atoms: usize,
    pub estimate: f64,
    pub std_err: f64,
    /// Difference to the previous (coarser) estimate.
    pub diff: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceTable {
    pub rows: Vec<ConvergenceRow>,
    /// Whether estimates were nondecreasing within one combined standard
    /// error at every refinement (the monotone-convergence pattern).
    pub monotone_within_se: bool,
}

/// Run the ρ=0 valuation across nested quantizations with common random
/// numbers. Atom counts must refine (each a multiple of the previous) so the
/// partitions are nested; this is checked, not assumed.
pub fn convergence_study(
    p: &MarchaudParams,
    m: &MarketParams,
    base: &PartitionSpec,
    n_list: &[usize],
    grid: &TimeGrid,
    n_paths: usize,
    seed: u64,
) -> Result<ConvergenceTable> {
    if n_list.is_empty() {
        return Err(Error::InvalidParameter(
            "convergence study needs at least one atom count".into(),
        ));
    }
    let quants: Vec<Quantization> = n_list
        .iter()
        .map(|&n| build_quantization(p.alpha_m, &PartitionSpec { n, ..*base }))
        .collect::<Result<_>>()?;
    for w in quants.windows(2) {
        if !w[0].is_refined_by(&w[1]) {
            return Err(Error::InvalidParameter(format!(
                "partitions are not nested: {} cells do not refine {} cells \
                 (use multiples, e.g. n, 2n, 4n)",
                w[1].n_atoms(),
                w[0].n_atoms()
            )));
        }
    }

    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(n_list.len());
    let mut monotone = true;
    let mut prev: Option<ApproxValue> = None;
    for q in &quants {
        let v = feynman_kac_value(p, m, q, grid, n_paths, seed)?;
        let diff = prev.map(|pv| v.estimate - pv.estimate);
        if let (Some(d), Some(pv)) = (diff, prev) {
            let combined_se = (v.std_err * v.std_err + pv.std_err * pv.std_err).sqrt();
            if d < -combined_se {
                monotone = false;
            }
        }
        rows.push(ConvergenceRow {
            n_atoms: v.n_atoms,
            estimate: v.estimate,
            std_err: v.std_err,
            diff,
        });
        prev = Some(v);
    }
    Ok(ConvergenceTable {
        rows,
        monotone_within_se: monotone,
    })
}

/// Optimal strategy for ρ = 0: the constant `θ/(1-γ)`.
pub fn optimal_strategy_rho0(m: &MarketParams) -> Result<Schedule> {
    if m.rho != 0.0 {
        return Err(Error::Unsupported(format!(
            "the closed-form strategy holds for rho = 0 only, got rho = {}",
            m.rho
        )));
    }
    Ok(Schedule::Constant(m.theta / (1.0 - m.gamma_ra)))
}
