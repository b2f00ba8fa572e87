//! JSON configuration for model fitting and Monte Carlo experiments.

use crate::error::{Error, Result};
use crate::inflated_beta::InflationPoint;
use crate::links::LinkKind;
use serde::{Deserialize, Serialize};

/// One parameter block of a model configuration: link, covariate columns,
/// and whether an intercept column is prepended.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
    pub link: LinkKind,
    pub terms: Vec<String>,
    pub intercept: bool,
}

/// Fully resolved model configuration (all defaults materialized, so the
/// serialized form round-trips byte-identically).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub c: InflationPoint,
    pub response: String,
    pub alpha: TermSpec,
    pub mu: TermSpec,
    pub phi: TermSpec,
    pub confidence: f64,
    pub seed: u64,
}

impl ModelConfig {
    /// Significance level ς implied by the confidence level.
    pub fn varsigma(&self) -> f64 {
        1.0 - self.confidence
    }
}

/// On-disk form with optional fields; defaults: response "y", links
/// logit/logit/log, intercepts on, confidence 0.95, seed 0.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelConfigFile {
    c: InflationPoint,
    response: Option<String>,
    alpha: Option<TermSpecFile>,
    mu: Option<TermSpecFile>,
    phi: Option<TermSpecFile>,
    confidence: Option<f64>,
    seed: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct TermSpecFile {
    link: Option<LinkKind>,
    #[serde(default)]
    terms: Vec<String>,
    intercept: Option<bool>,
}

impl TermSpecFile {
    fn resolve(self, default_link: LinkKind) -> TermSpec {
        TermSpec {
            link: self.link.unwrap_or(default_link),
            terms: self.terms,
            intercept: self.intercept.unwrap_or(true),
        }
    }
}

/// Parses and validates a model configuration from JSON text.
pub fn parse_model_config(text: &str) -> Result<ModelConfig> {
    let raw: ModelConfigFile =
        serde_json::from_str(text).map_err(|e| Error::Config(format!("bad model config: {e}")))?;
    let config = ModelConfig {
        c: raw.c,
        response: raw.response.unwrap_or_else(|| "y".to_string()),
        alpha: raw.alpha.unwrap_or_default().resolve(LinkKind::Logit),
        mu: raw.mu.unwrap_or_default().resolve(LinkKind::Logit),
        phi: raw.phi.unwrap_or_default().resolve(LinkKind::Log),
        confidence: raw.confidence.unwrap_or(0.95),
        seed: raw.seed.unwrap_or(0),
    };
    validate_model_config(&config)?;
    Ok(config)
}

pub fn validate_model_config(config: &ModelConfig) -> Result<()> {
    if !(config.confidence > 0.0 && config.confidence < 1.0) {
        return Err(Error::Config(format!(
            "confidence must be in (0, 1), got {}",
            config.confidence
        )));
    }
    for (block, spec, unit) in [
        ("alpha", &config.alpha, true),
        ("mu", &config.mu, true),
        ("phi", &config.phi, false),
    ] {
        if spec.link.is_unit_interval() != unit {
            return Err(Error::Config(format!(
                "{block} block cannot use the {} link",
                spec.link
            )));
        }
        if !spec.intercept && spec.terms.is_empty() {
            return Err(Error::Config(format!(
                "{block} block has no intercept and no terms"
            )));
        }
        let mut seen = std::collections::BTreeSet::new();
        for t in &spec.terms {
            if !seen.insert(t) {
                return Err(Error::Config(format!(
                    "{block} block lists column '{t}' twice"
                )));
            }
            if t == &config.response {
                return Err(Error::Config(format!(
                    "{block} block uses the response column '{t}' as a covariate"
                )));
            }
        }
    }
    Ok(())
}

/// Covariate generators available to the experiment runner: standard normal,
/// unit-mean Poisson, and Binomial with 5 trials at success probability 0.2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CovariateGenerator {
    Normal,
    Poisson,
    Binomial,
}

impl CovariateGenerator {
    pub fn draw(self, rng: &mut crate::numerics::rng::RngStream) -> f64 {
        match self {
            CovariateGenerator::Normal => rng.standard_normal(),
            CovariateGenerator::Poisson => rng.poisson(1.0) as f64,
            CovariateGenerator::Binomial => rng.binomial(5, 0.2) as f64,
        }
    }
}

/// One parameter block of an experiment: link, true coefficients, and the
/// generators for its covariate columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentBlock {
    pub link: LinkKind,
    #[serde(rename = "true")]
    pub true_coefficients: Vec<f64>,
    #[serde(default)]
    pub covariates: Vec<CovariateGenerator>,
    #[serde(default = "default_true")]
    pub intercept: bool,
}

fn default_true() -> bool {
    true
}

impl ExperimentBlock {
    pub fn width(&self) -> usize {
        self.covariates.len() + usize::from(self.intercept)
    }
}

/// Design generators, true parameter values, sample sizes, and replication
/// count for a Monte Carlo estimator study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub c: InflationPoint,
    pub alpha: ExperimentBlock,
    pub mu: ExperimentBlock,
    pub phi: ExperimentBlock,
    pub sample_sizes: Vec<usize>,
    pub replications: usize,
    pub seed: u64,
}

/// Parses and validates an experiment configuration from JSON text.
pub fn parse_experiment_config(text: &str) -> Result<ExperimentConfig> {
    let config: ExperimentConfig = serde_json::from_str(text)
        .map_err(|e| Error::Config(format!("bad experiment config: {e}")))?;
    validate_experiment_config(&config)?;
    Ok(config)
}

pub fn validate_experiment_config(config: &ExperimentConfig) -> Result<()> {
    if config.replications == 0 {
        return Err(Error::Config("replication count must be at least 1".into()));
    }
    if config.sample_sizes.is_empty() {
        return Err(Error::Config("at least one sample size is required".into()));
    }
    let total_width = config.alpha.width() + config.mu.width() + config.phi.width();
    for &n in &config.sample_sizes {
        if n <= total_width {
            return Err(Error::Config(format!(
                "sample size {n} is too small for {total_width} parameters"
            )));
        }
    }
    for (block, spec, unit) in [
        ("alpha", &config.alpha, true),
        ("mu", &config.mu, true),
        ("phi", &config.phi, false),
    ] {
        if spec.link.is_unit_interval() != unit {
            return Err(Error::Config(format!(
                "{block} block cannot use the {} link",
                spec.link
            )));
        }
        if spec.true_coefficients.len() != spec.width() {
            return Err(Error::Config(format!(
                "{block} block has {} true coefficients for {} columns",
                spec.true_coefficients.len(),
                spec.width()
            )));
        }
        if !spec.true_coefficients.iter().all(|v| v.is_finite()) {
            return Err(Error::Config(format!(
                "{block} block has non-finite true coefficients"
            )));
        }
    }
    Ok(())
}
