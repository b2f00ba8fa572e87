//! Large-sample inference: Wald summaries, the mean-response interval, and
//! the likelihood ratio test.

use super::FittedModel;
use crate::error::{Error, Result};
use crate::numerics::{chi_square_sf, normal_cdf, normal_quantile};
use nalgebra::DVector;
use serde::Serialize;

/// One row of the coefficient table.
#[derive(Debug, Clone, Serialize)]
pub struct CoefficientSummary {
    pub block: String,
    pub name: String,
    pub estimate: f64,
    pub std_error: f64,
    pub z: f64,
    pub p_value: f64,
    pub ci_lower: f64,
    pub ci_upper: f64,
}

fn require_converged(fitted: &FittedModel) -> Result<()> {
    if fitted.converged() {
        return Ok(());
    }
    Err(Error::Usage(format!(
        "inference refused: fit did not converge (discrete: {} iterations, score {:.3e}; continuous: {} iterations, score {:.3e})",
        fitted.discrete_record().iterations,
        fitted.discrete_record().final_score_norm,
        fitted.continuous_record().iterations,
        fitted.continuous_record().final_score_norm,
    )))
}

fn check_varsigma(varsigma: f64) -> Result<f64> {
    if !(varsigma.is_finite() && varsigma > 0.0 && varsigma < 0.5) {
        return Err(Error::Usage(format!(
            "significance level must be in (0, 1/2), got {varsigma}"
        )));
    }
    normal_quantile(1.0 - varsigma / 2.0)
}

/// Per-coefficient estimates, standard errors from the expected information,
/// two-sided normal p-values, and 100(1−ς)% asymptotic confidence intervals.
pub fn inference_summary(fitted: &FittedModel, varsigma: f64) -> Result<Vec<CoefficientSummary>> {
    require_converged(fitted)?;
    let zq = check_varsigma(varsigma)?;
    let se = fitted.standard_errors();
    let est = fitted.theta().concatenated();
    let names = fitted.spec().names();
    let blocks: Vec<(&str, &Vec<String>)> = vec![
        ("alpha", &names.alpha),
        ("mu", &names.mu),
        ("phi", &names.phi),
    ];
    let mut rows = Vec::with_capacity(est.len());
    let mut i = 0;
    for (block, block_names) in blocks {
        for name in block_names {
            let z = est[i] / se[i];
            let p = 2.0 * normal_cdf(-z.abs());
            rows.push(CoefficientSummary {
                block: block.to_string(),
                name: name.clone(),
                estimate: est[i],
                std_error: se[i],
                z,
                p_value: p,
                ci_lower: est[i] - zq * se[i],
                ci_upper: est[i] + zq * se[i],
            });
            i += 1;
        }
    }
    Ok(rows)
}

/// Point estimate and delta-method interval for the mean response
/// μ• = cα + (1−α)μ at covariate vectors v (alpha block) and x (mu block).
#[derive(Debug, Clone, Serialize)]
pub struct MeanResponseCi {
    pub point: f64,
    pub std_error: f64,
    pub lower: f64,
    pub upper: f64,
}

pub fn mean_response_ci(
    fitted: &FittedModel,
    v: &DVector<f64>,
    x: &DVector<f64>,
    varsigma: f64,
) -> Result<MeanResponseCi> {
    require_converged(fitted)?;
    let zq = check_varsigma(varsigma)?;
    let spec = fitted.spec();
    let (p, k, _) = spec.dims();
    if v.len() != p || x.len() != k {
        return Err(Error::Usage(format!(
            "covariate vectors of lengths ({}, {}) do not match model dims ({p}, {k})",
            v.len(),
            x.len()
        )));
    }
    let eta1 = v.dot(&fitted.theta().rho);
    let eta2 = x.dot(&fitted.theta().beta);
    let alpha = spec.link_alpha().inverse(eta1)?;
    let mu = spec.link_mu().inverse(eta2)?;
    let c = spec.c().value();
    let point = c * alpha + (1.0 - alpha) * mu;

    let (h1p, _) = spec.link_alpha().derivatives(alpha)?;
    let (h2p, _) = spec.link_mu().derivatives(mu)?;
    let inv = fitted.inv_information();
    let k_rho = inv.view((0, 0), (p, p));
    let k_beta = inv.view((p, p), (k, k));
    let term_rho = ((c - mu) / h1p).powi(2) * (v.transpose() * k_rho * v)[(0, 0)];
    let term_beta = ((1.0 - alpha) / h2p).powi(2) * (x.transpose() * k_beta * x)[(0, 0)];
    let se = (term_rho + term_beta).sqrt();
    Ok(MeanResponseCi {
        point,
        std_error: se,
        lower: point - zq * se,
        upper: point + zq * se,
    })
}

/// Likelihood ratio statistic Λ = 2(ℓ_full − ℓ_restricted), its degrees of
/// freedom, and the asymptotic chi-squared p-value.
#[derive(Debug, Clone, Serialize)]
pub struct LrTest {
    pub statistic: f64,
    pub df: usize,
    pub p_value: f64,
}

pub fn likelihood_ratio_test(full: &FittedModel, restricted: &FittedModel) -> Result<LrTest> {
    require_converged(full)?;
    require_converged(restricted)?;
    if full.spec().c() != restricted.spec().c() {
        return Err(Error::Usage(
            "models disagree on the inflation point; not nested".into(),
        ));
    }
    if full.spec().link_alpha() != restricted.spec().link_alpha()
        || full.spec().link_mu() != restricted.spec().link_mu()
        || full.spec().link_phi() != restricted.spec().link_phi()
    {
        return Err(Error::Usage("models use different links; not nested".into()));
    }
    if full.data().n() != restricted.data().n()
        || (full.data().y() - restricted.data().y()).amax() != 0.0
    {
        return Err(Error::Usage(
            "models were fitted on different datasets".into(),
        ));
    }
    let fnames = full.spec().names();
    let rnames = restricted.spec().names();
    for (block, f, r) in [
        ("alpha", &fnames.alpha, &rnames.alpha),
        ("mu", &fnames.mu, &rnames.mu),
        ("phi", &fnames.phi, &rnames.phi),
    ] {
        if !r.iter().all(|name| f.contains(name)) {
            return Err(Error::Usage(format!(
                "restricted {block} columns are not a subset of the full model's; not nested"
            )));
        }
    }
    let d_full = full.spec().n_parameters();
    let d_restricted = restricted.spec().n_parameters();
    if d_restricted > d_full {
        return Err(Error::Usage(
            "restricted model has more parameters than the full model".into(),
        ));
    }
    let df = d_full - d_restricted;
    let lambda = 2.0 * (full.loglik() - restricted.loglik());
    if lambda < -1e-8 {
        return Err(Error::Usage(format!(
            "full model has lower likelihood than the restriction (Λ = {lambda:.3e}); check convergence"
        )));
    }
    let statistic = lambda.max(0.0);
    let p_value = if df == 0 {
        1.0
    } else {
        chi_square_sf(statistic, df as f64)?
    };
    Ok(LrTest {
        statistic,
        df,
        p_value,
    })
}
