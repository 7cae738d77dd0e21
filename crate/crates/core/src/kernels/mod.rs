//! Convolution kernels, their resolvents of the second kind, and
//! singularity-aware convolution quadrature.
//!
//! The four admitted kernels:
//!
//! | kind        | K(t)                          | R(t)                              |
//! |-------------|-------------------------------|-----------------------------------|
//! | constant    | c                             | c e^{-ct}                         |
//! | fractional  | c t^{α-1} / Γ(α)              | c t^{α-1} E_{α,α}(-c t^α)         |
//! | exponential | c e^{-λt}                     | c e^{-λt} e^{-ct}                 |
//! | gamma       | c e^{-λt} t^{α-1} / Γ(α)      | solved numerically on the grid    |
//!
//! All grid convolutions use product integration: the kernel is integrated
//! exactly over each cell (so the `t^{α-1}` singularity is never sampled) and
//! the co-factor is taken piecewise constant.

mod mittag_leffler;

pub use mittag_leffler::mittag_leffler;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::special::{gamma, lower_gamma_regularized};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    Constant,
    Fractional,
    Exponential,
    Gamma,
}

/// A validated convolution kernel specification. Construction is the only
/// way to obtain one, so every `KernelSpec` in flight satisfies its
/// parameter constraints (`c > 0`; `0 < α ≤ 1` and `λ > 0` where they apply)
/// and is completely monotone.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawKernelSpec", into = "RawKernelSpec")]
pub struct KernelSpec {
    kind: KernelKind,
    c: f64,
    alpha: f64,
    lambda: f64,
}

/// Wire format `{ kind, c, alpha?, lambda? }` used by config files.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawKernelSpec {
    kind: KernelKind,
    c: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    lambda: Option<f64>,
}

impl TryFrom<RawKernelSpec> for KernelSpec {
    type Error = Error;

    fn try_from(raw: RawKernelSpec) -> Result<Self> {
        match raw.kind {
            KernelKind::Constant => {
                reject_field(raw.alpha, "alpha", "constant")?;
                reject_field(raw.lambda, "lambda", "constant")?;
                KernelSpec::constant(raw.c)
            }
            KernelKind::Fractional => {
                reject_field(raw.lambda, "lambda", "fractional")?;
                let alpha = raw.alpha.ok_or_else(|| {
                    Error::InvalidParameter("fractional kernel needs alpha".into())
                })?;
                KernelSpec::fractional(raw.c, alpha)
            }
            KernelKind::Exponential => {
                reject_field(raw.alpha, "alpha", "exponential")?;
                let lambda = raw.lambda.ok_or_else(|| {
                    Error::InvalidParameter("exponential kernel needs lambda".into())
                })?;
                KernelSpec::exponential(raw.c, lambda)
            }
            KernelKind::Gamma => {
                let alpha = raw
                    .alpha
                    .ok_or_else(|| Error::InvalidParameter("gamma kernel needs alpha".into()))?;
                let lambda = raw
                    .lambda
                    .ok_or_else(|| Error::InvalidParameter("gamma kernel needs lambda".into()))?;
                KernelSpec::gamma(raw.c, alpha, lambda)
            }
        }
    }
}

fn reject_field(v: Option<f64>, name: &str, kind: &str) -> Result<()> {
    match v {
        Some(_) => Err(Error::InvalidParameter(format!(
            "{kind} kernel does not take {name}"
        ))),
        None => Ok(()),
    }
}

impl From<KernelSpec> for RawKernelSpec {
    fn from(k: KernelSpec) -> Self {
        let alpha = matches!(k.kind, KernelKind::Fractional | KernelKind::Gamma).then_some(k.alpha);
        let lambda =
            matches!(k.kind, KernelKind::Exponential | KernelKind::Gamma).then_some(k.lambda);
        RawKernelSpec {
            kind: k.kind,
            c: k.c,
            alpha,
            lambda,
        }
    }
}

fn check_c(c: f64) -> Result<()> {
    if !(c.is_finite() && c > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "kernel scale c must be positive, got {c}"
        )));
    }
    Ok(())
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha.is_finite() && alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "kernel exponent alpha must lie in (0, 1], got {alpha}"
        )));
    }
    Ok(())
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "kernel decay lambda must be positive, got {lambda}"
        )));
    }
    Ok(())
}

impl KernelSpec {
    pub fn constant(c: f64) -> Result<Self> {
        check_c(c)?;
        Ok(KernelSpec {
            kind: KernelKind::Constant,
            c,
            alpha: 1.0,
            lambda: 0.0,
        })
    }

    pub fn fractional(c: f64, alpha: f64) -> Result<Self> {
        check_c(c)?;
        check_alpha(alpha)?;
        Ok(KernelSpec {
            kind: KernelKind::Fractional,
            c,
            alpha,
            lambda: 0.0,
        })
    }

    pub fn exponential(c: f64, lambda: f64) -> Result<Self> {
        check_c(c)?;
        check_lambda(lambda)?;
        Ok(KernelSpec {
            kind: KernelKind::Exponential,
            c,
            alpha: 1.0,
            lambda,
        })
    }

    pub fn gamma(c: f64, alpha: f64, lambda: f64) -> Result<Self> {
        check_c(c)?;
        check_alpha(alpha)?;
        check_lambda(lambda)?;
        Ok(KernelSpec {
            kind: KernelKind::Gamma,
            c,
            alpha,
            lambda,
        })
    }

    pub fn kind(&self) -> KernelKind {
        self.kind
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// The kernel scaled by `scale` (i.e. `scale * K`).
    pub fn scaled(&self, scale: f64) -> Result<Self> {
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "kernel scale factor must be positive, got {scale}"
            )));
        }
        Ok(KernelSpec {
            c: self.c * scale,
            ..*self
        })
    }

    /// True when K blows up at t = 0 (power-law kinds with α < 1).
    pub fn is_singular(&self) -> bool {
        matches!(self.kind, KernelKind::Fractional | KernelKind::Gamma) && self.alpha < 1.0
    }

    /// Local square-integrability, needed by the stochastic convolution: the
    /// power-law kinds require α > 1/2.
    pub fn l2_ok(&self) -> bool {
        match self.kind {
            KernelKind::Constant | KernelKind::Exponential => true,
            KernelKind::Fractional | KernelKind::Gamma => self.alpha > 0.5,
        }
    }

    /// Hölder-regularity exponent α of the kernel (1 for the smooth kinds);
    /// first-order product integration converges like dt^min(α,1).
    pub fn order_exponent(&self) -> f64 {
        match self.kind {
            KernelKind::Constant | KernelKind::Exponential => 1.0,
            KernelKind::Fractional | KernelKind::Gamma => self.alpha,
        }
    }

    /// K(t). Domain error at t ≤ 0 for the singular kinds, t < 0 otherwise.
    pub fn eval(&self, t: f64) -> Result<f64> {
        if !t.is_finite() || t < 0.0 || (t == 0.0 && self.is_singular()) {
            return Err(Error::Domain(format!(
                "kernel evaluation needs t > 0 for singular kernels (t >= 0 otherwise), got {t}"
            )));
        }
        Ok(match self.kind {
            KernelKind::Constant => self.c,
            KernelKind::Fractional => self.c * t.powf(self.alpha - 1.0) / gamma(self.alpha),
            KernelKind::Exponential => self.c * (-self.lambda * t).exp(),
            KernelKind::Gamma => {
                self.c * (-self.lambda * t).exp() * t.powf(self.alpha - 1.0) / gamma(self.alpha)
            }
        })
    }

    /// Exact antiderivative difference `∫_a^b K(u) du`, `0 ≤ a ≤ b`. This is
    /// what makes the quadrature singularity-proof: K is never sampled inside
    /// a cell touching zero.
    pub fn primitive(&self, a: f64, b: f64) -> Result<f64> {
        if !(a.is_finite() && b.is_finite()) || a < 0.0 || b < a {
            return Err(Error::Domain(format!(
                "kernel primitive needs 0 <= a <= b, got [{a}, {b}]"
            )));
        }
        Ok(match self.kind {
            KernelKind::Constant => self.c * (b - a),
            KernelKind::Fractional => {
                self.c * (b.powf(self.alpha) - a.powf(self.alpha)) / gamma(self.alpha + 1.0)
            }
            KernelKind::Exponential => {
                self.c / self.lambda * ((-self.lambda * a).exp() - (-self.lambda * b).exp())
            }
            KernelKind::Gamma => {
                // ∫ c e^{-λu} u^{α-1}/Γ(α) du = c λ^{-α} [P(α, λb) - P(α, λa)]
                self.c / self.lambda.powf(self.alpha)
                    * (lower_gamma_regularized(self.alpha, self.lambda * b)
                        - lower_gamma_regularized(self.alpha, self.lambda * a))
            }
        })
    }

    /// Product-integration cell weights `ω_m = ∫_{(m-1)dt}^{m dt} K`, m = 1..=n.
    /// On a uniform grid the convolution weight for cell i at node j is
    /// `ω_{j-i}`.
    pub fn cell_weights(&self, grid: &TimeGrid) -> Result<Vec<f64>> {
        let dt = grid.dt();
        (1..=grid.n_steps())
            .map(|m| self.primitive((m - 1) as f64 * dt, m as f64 * dt))
            .collect()
    }
}

/// `(K * f)(t_j) = Σ_{i<j} ω_{j-i} f(t_i)`: piecewise-constant f, exact
/// kernel integration. First-order accurate for Hölder-continuous f.
pub fn convolve_grid(spec: &KernelSpec, f: &[f64], grid: &TimeGrid) -> Result<Vec<f64>> {
    if f.len() != grid.n_nodes() {
        return Err(Error::LengthMismatch(format!(
            "convolve_grid: f has {} values, grid has {} nodes",
            f.len(),
            grid.n_nodes()
        )));
    }
    let weights = spec.cell_weights(grid)?;
    let mut out = vec![0.0; grid.n_nodes()];
    for j in 1..grid.n_nodes() {
        let mut acc = 0.0;
        for i in 0..j {
            acc += weights[j - i - 1] * f[i];
        }
        out[j] = acc;
    }
    Ok(out)
}

/// Where a resolvent curve came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CurveSource {
    ClosedForm,
    Numerical,
}

/// Second-kind resolvent `R` of a kernel sampled on a grid, `K*R = K - R`.
///
/// For kernels singular at zero, `values[0]` holds the first-cell mean
/// `(1/dt) ∫_0^dt R` instead of the (divergent) point value; with the
/// left-endpoint convolution rule this makes the first cell quadrature-exact.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolventCurve {
    pub grid: TimeGrid,
    pub values: Vec<f64>,
    pub source: CurveSource,
}

impl ResolventCurve {
    /// Max over interior nodes of |(K*R)(t_j) - K(t_j) + R(t_j)|, the defining
    /// identity residual under the crate's own quadrature.
    pub fn identity_residual(&self, spec: &KernelSpec) -> Result<f64> {
        let conv = convolve_grid(spec, &self.values, &self.grid)?;
        let mut worst: f64 = 0.0;
        for (j, conv_j) in conv.iter().enumerate().skip(1) {
            let r = (conv_j - spec.eval(self.grid.node(j))? + self.values[j]).abs();
            worst = worst.max(r);
        }
        Ok(worst)
    }

    /// Cumulative integral `∫_0^{t_j} R(u) du` per node: first cell uses the
    /// stored cell mean, later cells the trapezoid rule.
    pub fn cumulative_integral(&self) -> Vec<f64> {
        let dt = self.grid.dt();
        let mut out = vec![0.0; self.values.len()];
        if self.values.len() > 1 {
            out[1] = self.values[0] * dt;
            for j in 2..self.values.len() {
                out[j] = out[j - 1] + 0.5 * dt * (self.values[j - 1] + self.values[j]);
            }
        }
        out
    }
}

/// Second-kind resolvent of `spec` on `grid`. Closed-form rows where
/// available; the gamma kernel is solved from the discretized identity
/// `R = K - K*R` as a lower-triangular system (so its discrete residual is
/// zero by construction).
pub fn resolvent_second_kind(spec: &KernelSpec, grid: &TimeGrid) -> Result<ResolventCurve> {
    let dt = grid.dt();
    let n = grid.n_nodes();
    match spec.kind {
        KernelKind::Constant => {
            let values = grid.nodes().map(|t| spec.c * (-spec.c * t).exp()).collect();
            Ok(ResolventCurve {
                grid: *grid,
                values,
                source: CurveSource::ClosedForm,
            })
        }
        KernelKind::Exponential => {
            let rate = spec.lambda + spec.c;
            let values = grid.nodes().map(|t| spec.c * (-rate * t).exp()).collect();
            Ok(ResolventCurve {
                grid: *grid,
                values,
                source: CurveSource::ClosedForm,
            })
        }
        KernelKind::Fractional => {
            let (c, alpha) = (spec.c, spec.alpha);
            let mut values = Vec::with_capacity(n);
            if spec.is_singular() {
                // Exact first-cell mean: ∫_0^t R = 1 - E_{α,1}(-c t^α).
                values.push((1.0 - mittag_leffler(alpha, 1.0, -c * dt.powf(alpha))?) / dt);
            } else {
                // α = 1 degenerates to the constant row.
                values.push(c * mittag_leffler(alpha, alpha, -c * 0f64.powf(alpha))?);
            }
            for j in 1..n {
                let t = grid.node(j);
                let ml = mittag_leffler(alpha, alpha, -c * t.powf(alpha))?;
                values.push(c * t.powf(alpha - 1.0) * ml);
            }
            Ok(ResolventCurve {
                grid: *grid,
                values,
                source: CurveSource::ClosedForm,
            })
        }
        KernelKind::Gamma => {
            let weights = spec.cell_weights(grid)?;
            let mut values = vec![0.0; n];
            // Surrogate first-cell mean: R ~ K near 0 since (K*R)(0+) -> 0.
            values[0] = spec.primitive(0.0, dt)? / dt;
            for j in 1..n {
                let mut conv = 0.0;
                for i in 0..j {
                    conv += weights[j - i - 1] * values[i];
                }
                values[j] = spec.eval(grid.node(j))? - conv;
            }
            Ok(ResolventCurve {
                grid: *grid,
                values,
                source: CurveSource::Numerical,
            })
        }
    }
}

/// Second-kind resolvent of the scaled kernel `scale * K` (the `R_κ` used by
/// forward-variance curves).
pub fn resolvent_scaled(spec: &KernelSpec, scale: f64, grid: &TimeGrid) -> Result<ResolventCurve> {
    resolvent_second_kind(&spec.scaled(scale)?, grid)
}

/// Residual tolerance for the discrete resolvent identity, calibrated to
/// first-order product integration: `5 * dt^min(α,1)`.
pub fn tol_res(spec: &KernelSpec, dt: f64) -> f64 {
    5.0 * dt.powf(spec.order_exponent().min(1.0))
}
