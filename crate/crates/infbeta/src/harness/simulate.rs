//! Monte Carlo experiment runner: generates designs and responses from the
//! configured truth, fits every replication, and aggregates bias and
//! root-mean-squared error per coefficient.
//!
//! Replication r at sample-size index s uses the stream
//! `s · replications + r`, so the aggregate table is identical no matter how
//! the replications are scheduled across workers.

use super::config::{ExperimentBlock, ExperimentConfig};
use crate::error::Result;
use crate::inflated_beta::{sample, InflatedBetaParams};
use crate::numerics::rng::RngStream;
use crate::regression::{fit, BlockNames, Dataset, ModelSpec};
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

/// What one replication produced: estimates and standard errors on success,
/// an error message otherwise.
#[derive(Debug, Clone, Serialize)]
pub struct ReplicationOutcome {
    pub converged: bool,
    pub estimates: Option<Vec<f64>>,
    pub std_errors: Option<Vec<f64>>,
    pub error: Option<String>,
}

/// Bias and RMSE for one coefficient at one sample size.
#[derive(Debug, Clone, Serialize)]
pub struct CoefficientStat {
    pub block: String,
    pub name: String,
    pub true_value: f64,
    pub bias: f64,
    pub rmse: f64,
}

/// All replications and aggregates for one sample size.
#[derive(Debug, Clone, Serialize)]
pub struct SizeResult {
    pub n: usize,
    pub replications: usize,
    pub converged: usize,
    pub failed: usize,
    pub stats: Vec<CoefficientStat>,
    #[serde(skip)]
    pub outcomes: Vec<ReplicationOutcome>,
}

/// Labels for the stacked parameter vector: intercept first, then one name
/// per generated covariate (v/x/z prefix by block).
pub fn coefficient_labels(config: &ExperimentConfig) -> Vec<(String, String)> {
    let mut labels = Vec::new();
    for (block, spec, prefix) in [
        ("alpha", &config.alpha, "v"),
        ("mu", &config.mu, "x"),
        ("phi", &config.phi, "z"),
    ] {
        let mut j = 0;
        if spec.intercept {
            labels.push((block.to_string(), "intercept".to_string()));
        }
        for _ in &spec.covariates {
            j += 1;
            labels.push((block.to_string(), format!("{prefix}{j}")));
        }
    }
    labels
}

/// Stacked true parameter vector (ρ, β, γ).
pub fn true_parameters(config: &ExperimentConfig) -> Vec<f64> {
    let mut out = Vec::new();
    out.extend_from_slice(&config.alpha.true_coefficients);
    out.extend_from_slice(&config.mu.true_coefficients);
    out.extend_from_slice(&config.phi.true_coefficients);
    out
}

/// Runs the full experiment: every sample size, `replications` Monte Carlo
/// replications each, in parallel.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<SizeResult>> {
    super::config::validate_experiment_config(config)?;
    let mut results = Vec::with_capacity(config.sample_sizes.len());
    for (size_index, &n) in config.sample_sizes.iter().enumerate() {
        results.push(run_size(config, n, size_index));
    }
    Ok(results)
}

/// Runs the replications for one sample size.
pub fn run_size(config: &ExperimentConfig, n: usize, size_index: usize) -> SizeResult {
    let reps = config.replications;
    let outcomes: Vec<ReplicationOutcome> = (0..reps)
        .into_par_iter()
        .map(|rep| {
            let stream = (size_index * reps + rep) as u64;
            let mut rng = RngStream::new(config.seed, stream);
            replicate(config, n, &mut rng)
        })
        .collect();
    let truth = true_parameters(config);
    let labels = coefficient_labels(config);
    let d = truth.len();
    let mut count = 0usize;
    let mut sum = vec![0.0; d];
    let mut sum_sq = vec![0.0; d];
    for outcome in &outcomes {
        if let Some(est) = &outcome.estimates {
            count += 1;
            for j in 0..d {
                sum[j] += est[j];
                sum_sq[j] += (est[j] - truth[j]) * (est[j] - truth[j]);
            }
        }
    }
    let stats = labels
        .into_iter()
        .enumerate()
        .map(|(j, (block, name))| CoefficientStat {
            block,
            name,
            true_value: truth[j],
            bias: if count > 0 {
                sum[j] / count as f64 - truth[j]
            } else {
                f64::NAN
            },
            rmse: if count > 0 {
                (sum_sq[j] / count as f64).sqrt()
            } else {
                f64::NAN
            },
        })
        .collect();
    SizeResult {
        n,
        replications: reps,
        converged: count,
        failed: reps - count,
        stats,
        outcomes,
    }
}

/// Generates one dataset from the configured truth and fits it. Failures
/// (hard errors or non-convergence) are recorded, never fatal.
fn replicate(config: &ExperimentConfig, n: usize, rng: &mut RngStream) -> ReplicationOutcome {
    let (spec, data) = match generate_replication(config, n, rng) {
        Ok(pair) => pair,
        Err(e) => {
            return ReplicationOutcome {
                converged: false,
                estimates: None,
                std_errors: None,
                error: Some(format!("generation failed: {e}")),
            }
        }
    };
    match fit(&spec, &data) {
        Ok(fitted) if fitted.converged() => ReplicationOutcome {
            converged: true,
            estimates: Some(fitted.theta().concatenated().iter().cloned().collect()),
            std_errors: Some(fitted.standard_errors().iter().cloned().collect()),
            error: None,
        },
        Ok(fitted) => ReplicationOutcome {
            converged: false,
            estimates: None,
            std_errors: None,
            error: Some(format!(
                "did not converge (discrete score {:.2e}, continuous score {:.2e})",
                fitted.discrete_record().final_score_norm,
                fitted.continuous_record().final_score_norm
            )),
        },
        Err(e) => ReplicationOutcome {
            converged: false,
            estimates: None,
            std_errors: None,
            error: Some(e.to_string()),
        },
    }
}

/// Draws the covariates and responses for one replication.
pub fn generate_replication(
    config: &ExperimentConfig,
    n: usize,
    rng: &mut RngStream,
) -> Result<(ModelSpec, Dataset)> {
    let build = |spec: &ExperimentBlock, rng: &mut RngStream, prefix: &str| {
        let width = spec.width();
        let mut mat = DMatrix::zeros(n, width);
        let mut names = Vec::with_capacity(width);
        let mut j = 0;
        if spec.intercept {
            for t in 0..n {
                mat[(t, j)] = 1.0;
            }
            names.push("intercept".to_string());
            j += 1;
        }
        for (g_idx, generator) in spec.covariates.iter().enumerate() {
            for t in 0..n {
                mat[(t, j)] = generator.draw(rng);
            }
            names.push(format!("{prefix}{}", g_idx + 1));
            j += 1;
        }
        (mat, names)
    };
    let (v, alpha_names) = build(&config.alpha, rng, "v");
    let (x, mu_names) = build(&config.mu, rng, "x");
    let (z, phi_names) = build(&config.phi, rng, "z");

    let rho = DVector::from_vec(config.alpha.true_coefficients.clone());
    let beta = DVector::from_vec(config.mu.true_coefficients.clone());
    let gamma = DVector::from_vec(config.phi.true_coefficients.clone());
    let mut y = DVector::zeros(n);
    for t in 0..n {
        let alpha = config.alpha.link.inverse(v.row(t).transpose().dot(&rho))?;
        let mu = config.mu.link.inverse(x.row(t).transpose().dot(&beta))?;
        let phi = config.phi.link.inverse(z.row(t).transpose().dot(&gamma))?;
        let params = InflatedBetaParams::new(config.c, alpha, mu, phi)?;
        y[t] = sample(rng, &params);
    }
    let spec = ModelSpec::new(
        config.c,
        config.alpha.link,
        config.mu.link,
        config.phi.link,
        v,
        x,
        z,
        BlockNames {
            alpha: alpha_names,
            mu: mu_names,
            phi: phi_names,
        },
    )?;
    let data = Dataset::new(y, config.c)?;
    Ok((spec, data))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::parse_experiment_config;

    fn small_config(reps: usize) -> ExperimentConfig {
        parse_experiment_config(&format!(
            r#"{{
            "c": 0,
            "alpha": {{"link": "logit", "true": [-1.0]}},
            "mu": {{"link": "logit", "true": [-0.5, 0.8], "covariates": ["normal"]}},
            "phi": {{"link": "log", "true": [1.5]}},
            "sample_sizes": [60],
            "replications": {reps},
            "seed": 99
        }}"#
        ))
        .unwrap()
    }

    #[test]
    fn outcomes_are_deterministic_and_worker_independent() {
        let cfg = small_config(24);
        // Different thread pools must give the identical aggregate table.
        let pool1 = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let pool4 = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let r1 = pool1.install(|| run_size(&cfg, 60, 0));
        let r4 = pool4.install(|| run_size(&cfg, 60, 0));
        assert_eq!(r1.converged, r4.converged);
        for (a, b) in r1.stats.iter().zip(&r4.stats) {
            assert_eq!(a.bias.to_bits(), b.bias.to_bits(), "{}.{}", a.block, a.name);
            assert_eq!(a.rmse.to_bits(), b.rmse.to_bits());
        }
    }

    #[test]
    fn estimates_concentrate_near_truth() {
        let cfg = small_config(40);
        let result = run_size(&cfg, 60, 0);
        assert!(result.failed <= 4, "too many failures: {}", result.failed);
        // Loose sanity bounds at this desk scale.
        for stat in &result.stats {
            assert!(
                stat.bias.abs() < 0.5,
                "{}.{} bias {}",
                stat.block,
                stat.name,
                stat.bias
            );
            assert!(stat.rmse < 1.5);
        }
    }

    #[test]
    fn labels_align_with_truth() {
        let cfg = small_config(1);
        let labels = coefficient_labels(&cfg);
        let truth = true_parameters(&cfg);
        assert_eq!(labels.len(), truth.len());
        assert_eq!(labels[0], ("alpha".to_string(), "intercept".to_string()));
        assert_eq!(labels[2], ("mu".to_string(), "x1".to_string()));
        assert_eq!(truth[2], 0.8);
    }
}
