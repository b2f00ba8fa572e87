//! Table emission: CSV files with fixed 17-significant-digit formatting (so
//! every emitted value parses back to the bits used in memory) and aligned
//! plain-text rendering for the terminal.

use crate::diagnostics::Envelope;
use crate::error::{Error, Result};
use crate::numerics::normal_quantile;
use crate::regression::CoefficientSummary;
use std::fmt::Write as _;
use std::path::Path;

/// Formats a float with 17 significant digits (round-trip exact for f64).
pub fn fmt_g17(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_opt(x: &Option<f64>) -> String {
    x.map(fmt_g17).unwrap_or_default()
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })
}

/// coefficients.csv: one row per coefficient in (alpha, mu, phi) order.
pub fn coefficient_table_csv(rows: &[CoefficientSummary]) -> String {
    let mut out = String::from("block,name,estimate,std_error,z,p_value,ci_lower,ci_upper\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.block,
            r.name,
            fmt_g17(r.estimate),
            fmt_g17(r.std_error),
            fmt_g17(r.z),
            fmt_g17(r.p_value),
            fmt_g17(r.ci_lower),
            fmt_g17(r.ci_upper)
        );
    }
    out
}

/// Aligned text rendering of the coefficient table for stdout.
pub fn coefficient_table_text(rows: &[CoefficientSummary]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<6} {:<12} {:>12} {:>12} {:>8} {:>10} {:>12} {:>12}",
        "block", "name", "est.", "s.e.", "z", "p", "ci_lower", "ci_upper"
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{:<6} {:<12} {:>12.5} {:>12.5} {:>8.3} {:>10.2e} {:>12.5} {:>12.5}",
            r.block, r.name, r.estimate, r.std_error, r.z, r.p_value, r.ci_lower, r.ci_upper
        );
    }
    out
}

/// quantile_residuals.csv: index, response, and one column per realization.
pub fn quantile_residuals_csv(y: &[f64], realizations: &[Vec<f64>]) -> String {
    let mut out = String::from("index,y");
    for j in 1..=realizations.len() {
        let _ = write!(out, ",r_q_{j}");
    }
    out.push('\n');
    for t in 0..y.len() {
        let _ = write!(out, "{},{}", t + 1, fmt_g17(y[t]));
        for r in realizations {
            let _ = write!(out, ",{}", fmt_g17(r[t]));
        }
        out.push('\n');
    }
    out
}

/// envelope.csv: per rank, the half-normal plotting position, the observed
/// sorted residual, and the band.
pub fn envelope_csv(envelope: &Envelope) -> String {
    let n = envelope.observed.len();
    let mut out = String::from("rank,normal_quantile,observed,lower,median,upper\n");
    for r in 0..n {
        let q = normal_quantile((r as f64 + 0.5) / n as f64).unwrap_or(f64::NAN);
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r + 1,
            fmt_g17(q),
            fmt_g17(envelope.observed[r]),
            fmt_g17(envelope.lower[r]),
            fmt_g17(envelope.median[r]),
            fmt_g17(envelope.upper[r])
        );
    }
    out
}

/// discrete_residuals.csv: index, fitted alpha, leverage, Pearson residual.
pub fn discrete_residuals_csv(alpha: &[f64], h_tt: &[f64], r_pd: &[Option<f64>]) -> String {
    let mut out = String::from("index,alpha_hat,h_tt,r_pd\n");
    for t in 0..alpha.len() {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            t + 1,
            fmt_g17(alpha[t]),
            fmt_g17(h_tt[t]),
            fmt_opt(&r_pd[t])
        );
    }
    out
}

/// continuous_residuals.csv: original index, fitted mu, generalized
/// leverage, Pearson residual (interior observations only).
pub fn continuous_residuals_csv(
    interior: &[usize],
    mu: &[f64],
    p_tt: &[f64],
    r_pc: &[Option<f64>],
) -> String {
    let mut out = String::from("index,mu_hat,p_tt,r_pc\n");
    for (i, &t) in interior.iter().enumerate() {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            t + 1,
            fmt_g17(mu[t]),
            fmt_g17(p_tt[i]),
            fmt_opt(&r_pc[i])
        );
    }
    out
}

/// influence_discrete.csv / influence_continuous.csv.
pub fn influence_csv(indices: Option<&[usize]>, values: &[Option<f64>], column: &str) -> String {
    let mut out = format!("index,{column}\n");
    for (i, v) in values.iter().enumerate() {
        let idx = indices.map_or(i + 1, |ix| ix[i] + 1);
        let _ = writeln!(out, "{idx},{}", fmt_opt(v));
    }
    out
}

/// simulation.csv: long-format bias/RMSE table over sample sizes.
pub fn simulation_csv(results: &[crate::harness::simulate::SizeResult]) -> String {
    let mut out =
        String::from("sample_size,block,name,true_value,bias,rmse,replications,converged,failed\n");
    for r in results {
        for s in &r.stats {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                r.n,
                s.block,
                s.name,
                fmt_g17(s.true_value),
                fmt_g17(s.bias),
                fmt_g17(s.rmse),
                r.replications,
                r.converged,
                r.failed
            );
        }
    }
    out
}

/// Aligned text rendering of the simulation table, one block per sample size.
pub fn simulation_text(results: &[crate::harness::simulate::SizeResult]) -> String {
    let mut out = String::new();
    for r in results {
        let _ = writeln!(
            out,
            "n = {} ({} replications, {} converged, {} failed)",
            r.n, r.replications, r.converged, r.failed
        );
        let _ = writeln!(
            out,
            "  {:<6} {:<10} {:>10} {:>12} {:>12}",
            "block", "name", "true", "bias", "rmse"
        );
        for s in &r.stats {
            let _ = writeln!(
                out,
                "  {:<6} {:<10} {:>10.4} {:>12.5} {:>12.5}",
                s.block, s.name, s.true_value, s.bias, s.rmse
            );
        }
        out.push('\n');
    }
    out
}
