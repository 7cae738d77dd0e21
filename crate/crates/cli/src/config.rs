//! Config file handling: TOML with one section per parameter block, strict
//! about unknown keys, plus `--set section.key=value` overrides applied to
//! the parsed tree before validation.

use std::path::Path;

use serde::{Deserialize, Serialize};

use rough_merton::error::{Error, Result};
use rough_merton::grid::TimeGrid;
use rough_merton::kernels::KernelSpec;
use rough_merton::markov_approx::{KnotSpacing, PartitionSpec};
use rough_merton::models::{MarchaudParams, MarketParams, VolterraHestonParams};

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub grid: Option<GridSection>,
    pub run: Option<RunSection>,
    pub market: Option<MarketSection>,
    pub kernel: Option<KernelSpec>,
    pub heston: Option<HestonSection>,
    pub marchaud: Option<MarchaudSection>,
    pub riccati: Option<RiccatiSection>,
    pub roughness: Option<RoughnessSection>,
    pub partition: Option<PartitionSection>,
    pub convergence: Option<ConvergenceSection>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub n_steps: usize,
    pub dt: Option<f64>,
    pub horizon: Option<f64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub seed: Option<u64>,
    pub n_paths: Option<usize>,
    pub antithetic: Option<bool>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarketSection {
    pub r: f64,
    pub theta: f64,
    pub rho: f64,
    pub gamma_ra: f64,
    pub horizon: f64,
    pub w0: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HestonSection {
    pub v0: f64,
    pub kappa: f64,
    pub phi_mean: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarchaudSection {
    pub nu0: f64,
    pub alpha_m: f64,
    pub z0: f64,
    pub kappa: f64,
    pub phi_mean: f64,
    pub sigma: f64,
    pub floor_eps: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RiccatiSection {
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoughnessSection {
    pub qs: Vec<f64>,
    pub lags: Vec<usize>,
    /// Either a one-column CSV of the series...
    pub input_csv: Option<String>,
    /// ...or a synthetic fBm source: Hurst index plus pooled path count
    /// (grid comes from [grid]).
    pub hurst: Option<f64>,
    pub n_paths: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartitionSection {
    pub xi_min: f64,
    pub xi_max: f64,
    pub n: usize,
    pub spacing: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergenceSection {
    pub n_list: Vec<usize>,
}

impl RunConfig {
    pub fn load(path: &Path, overrides: &[(String, String)]) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let table: toml::Table = toml::from_str(&text)
            .map_err(|e| Error::InvalidParameter(format!("config parse error: {e}")))?;
        let mut tree = toml::Value::Table(table);
        for (key, value) in overrides {
            apply_override(&mut tree, key, value)?;
        }
        let config: RunConfig = tree
            .try_into()
            .map_err(|e| Error::InvalidParameter(format!("config error: {e}")))?;
        Ok(config)
    }

    pub fn grid(&self) -> Result<TimeGrid> {
        let g = self
            .grid
            .as_ref()
            .ok_or_else(|| Error::InvalidParameter("missing [grid] section".into()))?;
        match (g.dt, g.horizon) {
            (Some(dt), None) => TimeGrid::new(dt, g.n_steps),
            (None, Some(h)) => TimeGrid::with_horizon(h, g.n_steps),
            (None, None) => {
                // fall back to the market horizon when present
                if let Some(m) = &self.market {
                    TimeGrid::with_horizon(m.horizon, g.n_steps)
                } else {
                    Err(Error::InvalidParameter("grid needs dt or horizon".into()))
                }
            }
            (Some(_), Some(_)) => Err(Error::InvalidParameter(
                "grid takes dt or horizon, not both".into(),
            )),
        }
    }

    pub fn seed(&self) -> u64 {
        self.run.as_ref().and_then(|r| r.seed).unwrap_or(0)
    }

    pub fn n_paths(&self) -> usize {
        self.run.as_ref().and_then(|r| r.n_paths).unwrap_or(10_000)
    }

    pub fn antithetic(&self) -> bool {
        self.run
            .as_ref()
            .and_then(|r| r.antithetic)
            .unwrap_or(false)
    }

    pub fn market(&self) -> Result<MarketParams> {
        let m = self
            .market
            .as_ref()
            .ok_or_else(|| Error::InvalidParameter("missing [market] section".into()))?;
        MarketParams::new(m.r, m.theta, m.rho, m.gamma_ra, m.horizon, m.w0)
    }

    pub fn kernel(&self) -> Result<KernelSpec> {
        self.kernel
            .ok_or_else(|| Error::InvalidParameter("missing [kernel] section".into()))
    }

    pub fn heston(&self) -> Result<VolterraHestonParams> {
        let h = self
            .heston
            .as_ref()
            .ok_or_else(|| Error::InvalidParameter("missing [heston] section".into()))?;
        VolterraHestonParams::new(h.v0, h.kappa, h.phi_mean, h.sigma, self.kernel()?)
    }

    pub fn marchaud(&self) -> Result<MarchaudParams> {
        let m = self
            .marchaud
            .as_ref()
            .ok_or_else(|| Error::InvalidParameter("missing [marchaud] section".into()))?;
        MarchaudParams::new(
            m.nu0,
            m.alpha_m,
            m.z0,
            m.kappa,
            m.phi_mean,
            m.sigma,
            m.floor_eps.unwrap_or(1e-6),
        )
    }

    pub fn partition(&self) -> Result<PartitionSpec> {
        let p = self
            .partition
            .as_ref()
            .ok_or_else(|| Error::InvalidParameter("missing [partition] section".into()))?;
        let spacing = match p.spacing.as_deref() {
            None | Some("geometric") => KnotSpacing::Geometric,
            Some("linear") => KnotSpacing::Linear,
            Some(other) => {
                return Err(Error::InvalidParameter(format!(
                    "partition spacing must be \"geometric\" or \"linear\", got {other:?}"
                )))
            }
        };
        Ok(PartitionSpec {
            xi_min: p.xi_min,
            xi_max: p.xi_max,
            n: p.n,
            spacing,
        })
    }
}

/// Apply one `section.key=value` override onto the TOML tree. The value is
/// parsed as TOML (so numbers, booleans and arrays work); bare words fall
/// back to strings.
fn apply_override(tree: &mut toml::Value, key: &str, raw_value: &str) -> Result<()> {
    let parsed: toml::Value = raw_value
        .parse::<toml::Value>()
        .unwrap_or_else(|_| toml::Value::String(raw_value.to_string()));
    let mut node = tree;
    let parts: Vec<&str> = key.split('.').collect();
    if parts.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "--set key must be section.key (got {key:?})"
        )));
    }
    for part in &parts[..parts.len() - 1] {
        let table = node.as_table_mut().ok_or_else(|| {
            Error::InvalidParameter(format!("--set {key}: {part} is not a table"))
        })?;
        node = table
            .entry(part.to_string())
            .or_insert(toml::Value::Table(toml::Table::new()));
    }
    let table = node
        .as_table_mut()
        .ok_or_else(|| Error::InvalidParameter(format!("--set {key}: not a table")))?;
    table.insert(parts[parts.len() - 1].to_string(), parsed);
    Ok(())
}
