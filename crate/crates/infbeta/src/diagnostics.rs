//! Residuals, leverage, influence, goodness-of-fit, and simulated envelopes
//! for a fitted model.
//!
//! Discrete and continuous diagnostics are kept separate so an influential
//! case can be attributed to the component it actually disturbs; the
//! randomized quantile residual serves as the global residual.

use crate::error::{Component, Error, Result};
use crate::inflated_beta::{inflated_cdf, InflatedBetaParams, InflationPoint};
use crate::numerics::linalg::weighted_hat_diagonal;
use crate::numerics::normal_quantile;
use crate::numerics::rng::RngStream;
use crate::regression::{
    fit, fit_continuous, fit_discrete, fit_with_init, likelihood, BlockNames, Dataset,
    FittedModel, ModelSpec,
};
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

/// Leverage this close to one makes a standardized residual undefined; such
/// entries are reported as missing rather than crashing or emitting infinities.
const LEVERAGE_CEILING: f64 = 1.0 - 1e-10;

/// Caveat surfaced with every diagnostics report: the residual distribution
/// from inflated models is asymmetric in finite samples, so the usual
/// (−2, 2) or (−3, 3) thresholds should be read with care.
pub const RESIDUAL_THRESHOLD_NOTE: &str =
    "Randomized quantile residuals from inflated models are asymmetric in finite samples; \
     the usual (-2, 2) or (-3, 3) thresholds should be read with care.";

/// Diagonal of the discrete-component projection matrix
/// W₁^{1/2}𝒱(𝒱ᵀW₁𝒱)⁻¹𝒱ᵀW₁^{1/2} at the fitted parameters.
pub fn discrete_leverage(fitted: &FittedModel) -> Result<DVector<f64>> {
    weighted_hat_diagonal(fitted.spec().v(), &fitted.state().w1, "alpha")
}

/// Diagonal of the continuous-component generalized leverage
/// Ŵ₂^{1/2}𝒳(𝒳ᵀŴ₂𝒳)⁻¹𝒳ᵀŴ₂^{1/2}, over interior observations (aligned
/// with `fitted.data().interior()`).
pub fn continuous_leverage(fitted: &FittedModel) -> Result<DVector<f64>> {
    let interior = fitted.data().interior();
    let x = fitted.spec().x();
    let x0 = DMatrix::from_fn(interior.len(), x.ncols(), |i, j| x[(interior[i], j)]);
    let w0 = DVector::from_fn(interior.len(), |i, _| fitted.state().w2[interior[i]]);
    weighted_hat_diagonal(&x0, &w0, "mu")
}

/// Standardized Pearson residuals for the discrete component:
/// (1l_c(y_t) − α̂_t) / sqrt(α̂_t(1−α̂_t)(1−h_tt)).
///
/// Entries with leverage at one are reported as `None`.
pub fn pearson_discrete_residuals(fitted: &FittedModel) -> Result<Vec<Option<f64>>> {
    let h = discrete_leverage(fitted)?;
    let data = fitted.data();
    let alpha = fitted.alpha_hat();
    let mut out = Vec::with_capacity(data.n());
    for t in 0..data.n() {
        if h[t] >= LEVERAGE_CEILING {
            out.push(None);
        } else {
            let a = alpha[t];
            out.push(Some(
                (data.y_c()[t] - a) / (a * (1.0 - a) * (1.0 - h[t])).sqrt(),
            ));
        }
    }
    Ok(out)
}

/// Standardized Pearson residuals for the continuous component:
/// (y*_t − μ̂*_t) / sqrt(v̂*_t(1−α̂_t)(1−P̂_tt)), over interior observations.
pub fn pearson_continuous_residuals(fitted: &FittedModel) -> Result<Vec<Option<f64>>> {
    let p_tt = continuous_leverage(fitted)?;
    let data = fitted.data();
    let state = fitted.state();
    let mut out = Vec::with_capacity(data.interior().len());
    for (i, &t) in data.interior().iter().enumerate() {
        if p_tt[i] >= LEVERAGE_CEILING {
            out.push(None);
        } else {
            let denom = state.v_star[t] * (1.0 - state.alpha[t]) * (1.0 - p_tt[i]);
            out.push(Some((data.y_star()[t] - state.mu_star[t]) / denom.sqrt()));
        }
    }
    Ok(out)
}

/// Randomized quantile residuals r_q = Φ⁻¹(u_t), with u_t drawn uniformly on
/// the CDF jump (a_t, b_t] at the inflation point and equal to the CDF value
/// on the continuum.
pub fn randomized_quantile_residuals(
    fitted: &FittedModel,
    rng: &mut RngStream,
) -> Result<DVector<f64>> {
    let data = fitted.data();
    let state = fitted.state();
    let c = fitted.spec().c();
    let mut out = DVector::zeros(data.n());
    for t in 0..data.n() {
        let a = state.alpha[t];
        let u = if data.y_c()[t] == 1.0 {
            match c {
                // CDF jumps from 0 to α at zero: u on (0, α].
                InflationPoint::Zero => a * (1.0 - rng.uniform()),
                // CDF jumps from 1−α to 1 at one: u on (1−α, 1].
                InflationPoint::One => 1.0 - a * rng.uniform(),
            }
        } else {
            let params = InflatedBetaParams::new(c, a, state.mu[t], state.phi[t])?;
            inflated_cdf(data.y()[t], &params)?
        };
        out[t] = normal_quantile(u.clamp(1e-10, 1.0 - 1e-10))?;
    }
    Ok(out)
}

/// Cook-style influence approximations
/// c_tt = leverage · residual² / (rank · (1 − leverage)) for both components.
pub fn cook_statistics(fitted: &FittedModel) -> Result<(Vec<Option<f64>>, Vec<Option<f64>>)> {
    let (p, k, m) = fitted.spec().dims();
    let h = discrete_leverage(fitted)?;
    let r_pd = pearson_discrete_residuals(fitted)?;
    let c_d = h
        .iter()
        .zip(&r_pd)
        .map(|(&ht, r)| {
            r.filter(|_| ht < LEVERAGE_CEILING)
                .map(|r| ht * r * r / (p as f64 * (1.0 - ht)))
        })
        .collect();
    let p_tt = continuous_leverage(fitted)?;
    let r_pc = pearson_continuous_residuals(fitted)?;
    let c_c = p_tt
        .iter()
        .zip(&r_pc)
        .map(|(&pt, r)| {
            r.filter(|_| pt < LEVERAGE_CEILING)
                .map(|r| pt * r * r / ((k + m) as f64 * (1.0 - pt)))
        })
        .collect();
    Ok((c_d, c_c))
}

/// The three pseudo-R² measures. McFadden and Cox–Snell need the
/// intercept-only null fit; when that fit fails only the correlation
/// measure is reported, with a warning.
#[derive(Debug, Clone, Serialize)]
pub struct PseudoR2 {
    /// Squared sample correlation between y and the fitted mean response.
    pub corr: f64,
    /// 1 − ℓ̂/ℓ̂₀ (McFadden).
    pub mcfadden: Option<f64>,
    /// 1 − (L̂₀/L̂)^{2/n} (Cox–Snell / likelihood-ratio based).
    pub cox_snell: Option<f64>,
    pub warning: Option<String>,
}

pub fn pseudo_r2(fitted: &FittedModel) -> PseudoR2 {
    let y = fitted.data().y();
    let mr = fitted.mean_response();
    let n = y.len() as f64;
    let ybar = y.iter().sum::<f64>() / n;
    let mbar = mr.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for t in 0..y.len() {
        let dy = y[t] - ybar;
        let dm = mr[t] - mbar;
        sxy += dy * dm;
        sxx += dy * dy;
        syy += dm * dm;
    }
    let corr = if sxx > 0.0 && syy > 0.0 {
        (sxy * sxy) / (sxx * syy)
    } else {
        0.0
    };

    match null_fit(fitted) {
        Ok(null) => {
            let l0 = null.loglik();
            let l1 = fitted.loglik();
            PseudoR2 {
                corr,
                mcfadden: Some(1.0 - l1 / l0),
                cox_snell: Some(1.0 - (2.0 * (l0 - l1) / n).exp()),
                warning: None,
            }
        }
        Err(e) => PseudoR2 {
            corr,
            mcfadden: None,
            cox_snell: None,
            warning: Some(format!(
                "null (intercept-only) fit failed: {e}; likelihood-based pseudo-R2 omitted"
            )),
        },
    }
}

/// Fits the three-parameter (α, μ, φ constant) null model on the same data.
fn null_fit(fitted: &FittedModel) -> Result<FittedModel> {
    let n = fitted.data().n();
    let ones = DMatrix::from_element(n, 1, 1.0);
    let spec = ModelSpec::new(
        fitted.spec().c(),
        fitted.spec().link_alpha(),
        fitted.spec().link_mu(),
        fitted.spec().link_phi(),
        ones.clone(),
        ones.clone(),
        ones,
        BlockNames {
            alpha: vec!["intercept".into()],
            mu: vec!["intercept".into()],
            phi: vec!["intercept".into()],
        },
    )?;
    fit(&spec, fitted.data())
}

/// GAIC family: deviance −2ℓ̂ plus a per-parameter penalty.
#[derive(Debug, Clone, Serialize)]
pub struct InformationCriteria {
    pub aic: f64,
    pub sbc: f64,
    pub caic: f64,
    /// GAIC at the requested penalty (defaults to the AIC penalty 2).
    pub gaic: f64,
    pub penalty: f64,
}

pub fn information_criteria(fitted: &FittedModel, penalty: Option<f64>) -> InformationCriteria {
    let d = fitted.spec().n_parameters() as f64;
    let n = fitted.data().n() as f64;
    let deviance = -2.0 * fitted.loglik();
    let penalty = penalty.unwrap_or(2.0);
    InformationCriteria {
        aic: deviance + 2.0 * d,
        sbc: deviance + n.ln() * d,
        caic: deviance + (n.ln() + 1.0) * d,
        gaic: deviance + penalty * d,
        penalty,
    }
}

/// Pointwise envelope for the sorted randomized quantile residuals, built
/// from refits of datasets simulated at the fitted parameters.
#[derive(Debug, Clone, Serialize)]
pub struct Envelope {
    /// Observed sorted residuals the envelope was built around.
    pub observed: Vec<f64>,
    pub lower: Vec<f64>,
    pub median: Vec<f64>,
    pub upper: Vec<f64>,
    pub band: f64,
    pub n_sim: usize,
    /// Simulated datasets whose refit failed (skipped, not fatal).
    pub failures: usize,
}

impl Envelope {
    /// Fraction of ranks at which the observed residual lies inside the band.
    pub fn coverage(&self) -> f64 {
        let inside = self
            .observed
            .iter()
            .zip(self.lower.iter().zip(&self.upper))
            .filter(|(o, (lo, hi))| **o >= **lo && **o <= **hi)
            .count();
        inside as f64 / self.observed.len().max(1) as f64
    }
}

/// Simulates `n_sim` datasets from the fitted model, refits each (warm
/// started at the fitted parameters), and returns pointwise band quantiles
/// of the sorted quantile residuals.
///
/// `observed_sorted` is the realization the envelope is drawn around.
/// Simulation i uses the stream `sim_base.stream() + 1 + i`, so the envelope
/// is reproducible and independent of how the refits are scheduled.
pub fn simulated_envelope(
    fitted: &FittedModel,
    observed_sorted: &[f64],
    sim_base: &RngStream,
    n_sim: usize,
    band: f64,
) -> Result<Envelope> {
    if observed_sorted.len() != fitted.data().n() {
        return Err(Error::Usage(format!(
            "observed residual vector has length {}, expected {}",
            observed_sorted.len(),
            fitted.data().n()
        )));
    }
    if !(band > 0.0 && band < 1.0) {
        return Err(Error::Usage(format!("band must be in (0, 1), got {band}")));
    }
    if n_sim == 0 {
        return Err(Error::Usage("n_sim must be positive".into()));
    }
    let n = fitted.data().n();
    let sims: Vec<Option<Vec<f64>>> = (0..n_sim)
        .into_par_iter()
        .map(|i| {
            let mut rng = sim_base.substream(sim_base.stream() + 1 + i as u64);
            simulate_and_refit(fitted, &mut rng).ok()
        })
        .collect();
    let failures = sims.iter().filter(|s| s.is_none()).count();
    if failures * 5 > n_sim {
        return Err(Error::Envelope(format!(
            "{failures} of {n_sim} envelope refits failed"
        )));
    }
    let kept: Vec<&Vec<f64>> = sims.iter().flatten().collect();
    let mut lower = Vec::with_capacity(n);
    let mut median = Vec::with_capacity(n);
    let mut upper = Vec::with_capacity(n);
    let q_lo = (1.0 - band) / 2.0;
    let q_hi = (1.0 + band) / 2.0;
    let mut column = vec![0.0; kept.len()];
    for rank in 0..n {
        for (j, sim) in kept.iter().enumerate() {
            column[j] = sim[rank];
        }
        column.sort_by(|a, b| a.partial_cmp(b).unwrap());
        lower.push(quantile_sorted(&column, q_lo));
        median.push(quantile_sorted(&column, 0.5));
        upper.push(quantile_sorted(&column, q_hi));
    }
    Ok(Envelope {
        observed: observed_sorted.to_vec(),
        lower,
        median,
        upper,
        band,
        n_sim,
        failures,
    })
}

fn simulate_and_refit(fitted: &FittedModel, rng: &mut RngStream) -> Result<Vec<f64>> {
    let state = fitted.state();
    let c = fitted.spec().c();
    let n = fitted.data().n();
    let mut y = DVector::zeros(n);
    for t in 0..n {
        let params = InflatedBetaParams::new(c, state.alpha[t], state.mu[t], state.phi[t])?;
        y[t] = crate::inflated_beta::sample(rng, &params);
    }
    let data = Dataset::new(y, c)?;
    let refit = fit_with_init(fitted.spec(), &data, fitted.theta())?;
    if !refit.converged() {
        return Err(Error::NonConvergence {
            component: Component::Continuous,
            message: "envelope refit did not converge".into(),
        });
    }
    let mut r = randomized_quantile_residuals(&refit, rng)?
        .iter()
        .cloned()
        .collect::<Vec<f64>>();
    r.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(r)
}

/// Linear-interpolation quantile of an ascending slice.
fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let pos = q * (n - 1) as f64;
    let lo = pos.floor() as usize;
    let frac = pos - lo as f64;
    if lo + 1 >= n {
        sorted[n - 1]
    } else {
        sorted[lo] * (1.0 - frac) + sorted[lo + 1] * frac
    }
}

/// Exact case-deletion likelihood displacements, by brute-force refits:
/// LD_t^D = (2/p)[ℓ₁(ρ̂) − ℓ₁(ρ̂_(t))] over all observations and
/// LD_t^C = (2/(k+m))[ℓ₂(β̂,γ̂) − ℓ₂(β̂_(t),γ̂_(t))] over interior ones,
/// both evaluated on the full data. Entries whose deletion refit fails are
/// missing.
pub fn exact_likelihood_displacement(
    fitted: &FittedModel,
) -> Result<(Vec<Option<f64>>, Vec<Option<f64>>)> {
    let spec = fitted.spec();
    let data = fitted.data();
    let (p, k, m) = spec.dims();
    let theta = fitted.theta();

    let drop_row = |mat: &DMatrix<f64>, t: usize| {
        DMatrix::from_fn(mat.nrows() - 1, mat.ncols(), |i, j| {
            let r = if i < t { i } else { i + 1 };
            mat[(r, j)]
        })
    };

    let ld_d: Vec<Option<f64>> = (0..data.n())
        .into_par_iter()
        .map(|t| {
            let reduced_spec = ModelSpec::new(
                spec.c(),
                spec.link_alpha(),
                spec.link_mu(),
                spec.link_phi(),
                drop_row(spec.v(), t),
                drop_row(spec.x(), t),
                drop_row(spec.z(), t),
                spec.names().clone(),
            )
            .ok()?;
            let reduced = data.without_observation(t).ok()?;
            let (rho_t, _) = fit_discrete(&reduced_spec, &reduced, Some(&theta.rho)).ok()?;
            let full_theta = crate::regression::ParameterVector::new(
                rho_t,
                theta.beta.clone(),
                theta.gamma.clone(),
            );
            let (l1_t, _) = likelihood::log_likelihood_parts(spec, data, &full_theta).ok()?;
            Some((2.0 / p as f64) * (fitted.loglik_discrete() - l1_t))
        })
        .collect();

    let ld_c: Vec<Option<f64>> = data
        .interior()
        .par_iter()
        .map(|&t| {
            let reduced_spec = ModelSpec::new(
                spec.c(),
                spec.link_alpha(),
                spec.link_mu(),
                spec.link_phi(),
                drop_row(spec.v(), t),
                drop_row(spec.x(), t),
                drop_row(spec.z(), t),
                spec.names().clone(),
            )
            .ok()?;
            let reduced = data.without_observation(t).ok()?;
            let (beta_t, gamma_t, _) =
                fit_continuous(&reduced_spec, &reduced, Some((&theta.beta, &theta.gamma))).ok()?;
            let full_theta =
                crate::regression::ParameterVector::new(theta.rho.clone(), beta_t, gamma_t);
            let (_, l2_t) = likelihood::log_likelihood_parts(spec, data, &full_theta).ok()?;
            Some((2.0 / (k + m) as f64) * (fitted.loglik_continuous() - l2_t))
        })
        .collect();

    Ok((ld_d, ld_c))
}

/// Everything the diagnose command emits, in one bundle.
#[derive(Debug, Clone, Serialize)]
pub struct DiagnosticsReport {
    /// Randomized quantile residuals, one inner vector per realization.
    pub r_q: Vec<Vec<f64>>,
    pub r_pd: Vec<Option<f64>>,
    pub h_tt: Vec<f64>,
    pub c_d: Vec<Option<f64>>,
    /// Continuous-component vectors are aligned with `interior_indices`.
    pub interior_indices: Vec<usize>,
    pub r_pc: Vec<Option<f64>>,
    pub p_tt: Vec<f64>,
    pub c_c: Vec<Option<f64>>,
    pub pseudo_r2: PseudoR2,
    pub criteria: InformationCriteria,
    pub note: String,
}

/// Assembles the full report; realization j of the quantile residuals uses
/// the stream `rng.stream() + j` (so reports are reproducible given the seed).
pub fn diagnostics_report(
    fitted: &FittedModel,
    rng: &RngStream,
    realizations: usize,
) -> Result<DiagnosticsReport> {
    let mut r_q = Vec::with_capacity(realizations);
    for j in 0..realizations {
        let mut stream = rng.substream(rng.stream() + j as u64);
        r_q.push(
            randomized_quantile_residuals(fitted, &mut stream)?
                .iter()
                .cloned()
                .collect(),
        );
    }
    let (c_d, c_c) = cook_statistics(fitted)?;
    Ok(DiagnosticsReport {
        r_q,
        r_pd: pearson_discrete_residuals(fitted)?,
        h_tt: discrete_leverage(fitted)?.iter().cloned().collect(),
        c_d,
        interior_indices: fitted.data().interior().to_vec(),
        r_pc: pearson_continuous_residuals(fitted)?,
        p_tt: continuous_leverage(fitted)?.iter().cloned().collect(),
        c_c,
        pseudo_r2: pseudo_r2(fitted),
        criteria: information_criteria(fitted, None),
        note: RESIDUAL_THRESHOLD_NOTE.to_string(),
    })
}
