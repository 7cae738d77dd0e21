//! Artifact writers. All CSV output uses shortest-roundtrip float formatting
//! so files are byte-reproducible for a fixed seed; JSON summaries are
//! serde-serialized structs with stable field order.
//!
//! Binary path dump (`VMPB`): magic `b"VMPB"`, version u32, n_paths u64,
//! n_steps u64, dt f64, seed u64, then row-major little-endian f64 arrays:
//! V (n_paths × (n_steps+1)), S (same), wealth (same, only when present —
//! readers infer it from the file length).

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::distortion::DistortionSolution;
use crate::error::Result;
use crate::kernels::ResolventCurve;
use crate::markov_approx::{ConvergenceTable, Quantization};
use crate::models::PathBundle;
use crate::riccati::RiccatiSolution;
use crate::roughness::ScalingReport;

fn writer(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

/// `t,R` per node.
pub fn write_resolvent_csv(path: &Path, curve: &ResolventCurve) -> Result<()> {
    let mut w = writer(path)?;
    writeln!(w, "t,R")?;
    for (j, t) in curve.grid.nodes().enumerate() {
        writeln!(w, "{},{}", t, curve.values[j])?;
    }
    Ok(())
}

/// `t,phi` with a header comment recording kernel, coefficients and dt.
pub fn write_riccati_csv(path: &Path, sol: &RiccatiSolution) -> Result<()> {
    let mut w = writer(path)?;
    writeln!(
        w,
        "# kernel={} c0={} c1={} c2={} dt={}",
        serde_json::to_string(&sol.kernel).unwrap_or_default(),
        sol.coeffs.c0,
        sol.coeffs.c1,
        sol.coeffs.c2,
        sol.grid.dt()
    )?;
    writeln!(w, "t,phi")?;
    for (j, t) in sol.grid.nodes().enumerate() {
        writeln!(w, "{},{}", t, sol.values[j])?;
    }
    Ok(())
}

/// Long-format paths: `path_id,t,V,S,wealth` (wealth blank when absent).
pub fn write_bundle_csv(path: &Path, bundle: &PathBundle) -> Result<()> {
    let mut w = writer(path)?;
    writeln!(w, "path_id,t,V,S,wealth")?;
    for i in 0..bundle.n_paths {
        let v = bundle.v.path(i);
        let s = bundle.s.path(i);
        for (j, t) in bundle.grid.nodes().enumerate() {
            match &bundle.wealth {
                Some(wm) => writeln!(w, "{},{},{},{},{}", i, t, v[j], s[j], wm.path(i)[j])?,
                None => writeln!(w, "{},{},{},{},", i, t, v[j], s[j])?,
            }
        }
    }
    Ok(())
}

/// Compact binary dump, see module docs for the layout.
pub fn write_bundle_binary(path: &Path, bundle: &PathBundle) -> Result<()> {
    let mut w = writer(path)?;
    w.write_all(b"VMPB")?;
    w.write_all(&1u32.to_le_bytes())?;
    w.write_all(&(bundle.n_paths as u64).to_le_bytes())?;
    w.write_all(&(bundle.grid.n_steps() as u64).to_le_bytes())?;
    w.write_all(&bundle.grid.dt().to_le_bytes())?;
    w.write_all(&bundle.seed.to_le_bytes())?;
    for value in bundle.v.data() {
        w.write_all(&value.to_le_bytes())?;
    }
    for value in bundle.s.data() {
        w.write_all(&value.to_le_bytes())?;
    }
    if let Some(wealth) = &bundle.wealth {
        for value in wealth.data() {
            w.write_all(&value.to_le_bytes())?;
        }
    }
    Ok(())
}

/// `q,lag,m,fitted` rows of the scaling regression.
pub fn write_scaling_csv(path: &Path, report: &ScalingReport) -> Result<()> {
    let mut w = writer(path)?;
    writeln!(w, "q,lag,m,fitted")?;
    for (qi, &q) in report.qs.iter().enumerate() {
        // fitted value from the per-q regression: log m = ζ log Δ + const;
        // reconstruct the intercept from the mean residual.
        let zeta = report.zeta_q[qi];
        let n = report.lags.len() as f64;
        let intercept = report
            .lags
            .iter()
            .enumerate()
            .map(|(li, &lag)| report.m_qd[qi][li].ln() - zeta * (lag as f64).ln())
            .sum::<f64>()
            / n;
        for (li, &lag) in report.lags.iter().enumerate() {
            let fitted = (intercept + zeta * (lag as f64).ln()).exp();
            writeln!(w, "{},{},{},{}", q, lag, report.m_qd[qi][li], fitted)?;
        }
    }
    Ok(())
}

/// `{"h_hat": ..., "r2": ...}` summary.
pub fn write_scaling_summary_json(path: &Path, report: &ScalingReport) -> Result<()> {
    #[derive(serde::Serialize)]
    struct Summary<'a> {
        h_hat: f64,
        r2: f64,
        zeta_q: &'a [f64],
        qs: &'a [f64],
    }
    let s = Summary {
        h_hat: report.h_hat,
        r2: report.h_r2,
        zeta_q: &report.zeta_q,
        qs: &report.qs,
    };
    let mut w = writer(path)?;
    writeln!(w, "{}", serde_json::to_string_pretty(&s)?)?;
    Ok(())
}

/// Strategy schedule `t,pi_star`.
pub fn write_strategy_csv(path: &Path, sol: &DistortionSolution) -> Result<()> {
    let grid = sol.phi_curve.grid;
    let pis = sol.strategy.values_on(&grid)?;
    let mut w = writer(path)?;
    writeln!(w, "t,pi_star")?;
    for (j, t) in grid.nodes().enumerate() {
        writeln!(w, "{},{}", t, pis[j])?;
    }
    Ok(())
}

/// Distortion curves `t,phi,xi0`.
pub fn write_distortion_curves_csv(path: &Path, sol: &DistortionSolution) -> Result<()> {
    let grid = sol.phi_curve.grid;
    let mut w = writer(path)?;
    writeln!(w, "t,phi,xi0")?;
    for (j, t) in grid.nodes().enumerate() {
        writeln!(w, "{},{},{}", t, sol.phi_curve.values[j], sol.xi0_curve[j])?;
    }
    Ok(())
}

/// Distortion summary JSON: `{delta, lambda, m0, j0, conditions}`.
pub fn write_distortion_summary_json(path: &Path, sol: &DistortionSolution) -> Result<()> {
    #[derive(serde::Serialize)]
    struct Summary<'a> {
        delta: f64,
        lambda: f64,
        m0: f64,
        j0: f64,
        conditions: &'a crate::distortion::ConditionReport,
    }
    let s = Summary {
        delta: sol.delta,
        lambda: sol.lambda_tilde,
        m0: sol.m0,
        j0: sol.j0,
        conditions: &sol.conditions,
    };
    let mut w = writer(path)?;
    writeln!(w, "{}", serde_json::to_string_pretty(&s)?)?;
    Ok(())
}

/// Quantization cells: `i,xi_lo,xi_hi,x_i,q_i`.
pub fn write_quantization_csv(path: &Path, q: &Quantization) -> Result<()> {
    let mut w = writer(path)?;
    writeln!(w, "i,xi_lo,xi_hi,x_i,q_i")?;
    for (i, win) in q.knots().windows(2).enumerate() {
        writeln!(
            w,
            "{},{},{},{},{}",
            i + 1,
            win[0],
            win[1],
            q.atoms()[i],
            q.masses()[i]
        )?;
    }
    Ok(())
}

/// Convergence table `n,estimate,std_err,diff`.
pub fn write_convergence_csv(path: &Path, table: &ConvergenceTable) -> Result<()> {
    let mut w = writer(path)?;
    writeln!(w, "n,estimate,std_err,diff")?;
    for row in &table.rows {
        match row.diff {
            Some(d) => writeln!(w, "{},{},{},{}", row.n_atoms, row.estimate, row.std_err, d)?,
            None => writeln!(w, "{},{},{},", row.n_atoms, row.estimate, row.std_err)?,
        }
    }
    Ok(())
}

impl From<serde_json::Error> for crate::error::Error {
    fn from(e: serde_json::Error) -> Self {
        crate::error::Error::Io(std::io::Error::other(e))
    }
}
