//! Versioned JSON persistence for fitted models.
//!
//! The file echoes the configuration, carries the estimates, inverse
//! information, per-observation fitted values, and convergence records, and
//! binds itself to the dataset through a content hash. Serialization uses a
//! fixed field order and shortest-round-trip float formatting, so
//! save → load → save is byte-identical.

use super::config::ModelConfig;
use super::data::LoadedData;
use crate::error::{Error, Result};
use crate::regression::{
    likelihood, BlockNames, ComponentRecord, FittedModel, ParameterVector, WorkingState,
};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use std::path::Path;

pub const MODEL_SCHEMA: &str = "infbeta-model/1";

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ThetaFile {
    pub rho: Vec<f64>,
    pub beta: Vec<f64>,
    pub gamma: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct FittedValuesFile {
    pub alpha: Vec<f64>,
    pub mu: Vec<f64>,
    pub phi: Vec<f64>,
    pub eta1: Vec<f64>,
    pub eta2: Vec<f64>,
    pub eta3: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ConvergenceFile {
    pub discrete: ComponentRecord,
    pub continuous: ComponentRecord,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub schema: String,
    pub config: ModelConfig,
    pub n: usize,
    pub data_hash: String,
    pub names: BlockNames,
    pub theta: ThetaFile,
    pub loglik: f64,
    pub loglik_discrete: f64,
    pub loglik_continuous: f64,
    /// Row-major (p+k+m)² inverse information in the block form with exact
    /// zero off-blocks between ρ and (β, γ).
    pub inv_information: Vec<Vec<f64>>,
    pub fitted: FittedValuesFile,
    pub convergence: ConvergenceFile,
}

pub fn model_file_from_fit(
    fitted: &FittedModel,
    config: &ModelConfig,
    data_hash: &str,
) -> ModelFile {
    let to_vec = |v: &DVector<f64>| v.iter().cloned().collect::<Vec<f64>>();
    let inv = fitted.inv_information();
    let inv_rows = (0..inv.nrows())
        .map(|r| (0..inv.ncols()).map(|c| inv[(r, c)]).collect())
        .collect();
    ModelFile {
        schema: MODEL_SCHEMA.to_string(),
        config: config.clone(),
        n: fitted.data().n(),
        data_hash: data_hash.to_string(),
        names: fitted.spec().names().clone(),
        theta: ThetaFile {
            rho: to_vec(&fitted.theta().rho),
            beta: to_vec(&fitted.theta().beta),
            gamma: to_vec(&fitted.theta().gamma),
        },
        loglik: fitted.loglik(),
        loglik_discrete: fitted.loglik_discrete(),
        loglik_continuous: fitted.loglik_continuous(),
        inv_information: inv_rows,
        fitted: FittedValuesFile {
            alpha: to_vec(fitted.alpha_hat()),
            mu: to_vec(fitted.mu_hat()),
            phi: to_vec(fitted.phi_hat()),
            eta1: to_vec(&fitted.state().eta1),
            eta2: to_vec(&fitted.state().eta2),
            eta3: to_vec(&fitted.state().eta3),
        },
        convergence: ConvergenceFile {
            discrete: fitted.discrete_record().clone(),
            continuous: fitted.continuous_record().clone(),
        },
    }
}

pub fn save_model(file: &ModelFile, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(file)
        .map_err(|e| Error::Usage(format!("cannot serialize model: {e}")))?;
    std::fs::write(path, text + "\n").map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })
}

pub fn parse_model_json(text: &str) -> Result<ModelFile> {
    let file: ModelFile = serde_json::from_str(text)
        .map_err(|e| Error::ModelDataMismatch(format!("bad model file: {e}")))?;
    if file.schema != MODEL_SCHEMA {
        return Err(Error::ModelDataMismatch(format!(
            "unsupported model schema '{}' (expected '{MODEL_SCHEMA}')",
            file.schema
        )));
    }
    super::config::validate_model_config(&file.config)?;
    let (p, k, m) = (
        file.theta.rho.len(),
        file.theta.beta.len(),
        file.theta.gamma.len(),
    );
    let d = p + k + m;
    if file.inv_information.len() != d
        || file.inv_information.iter().any(|row| row.len() != d)
    {
        return Err(Error::ModelDataMismatch(format!(
            "inverse information is not {d}x{d}"
        )));
    }
    for v in [
        &file.fitted.alpha,
        &file.fitted.mu,
        &file.fitted.phi,
        &file.fitted.eta1,
        &file.fitted.eta2,
        &file.fitted.eta3,
    ] {
        if v.len() != file.n {
            return Err(Error::ModelDataMismatch(format!(
                "fitted vectors do not have length n = {}",
                file.n
            )));
        }
    }
    if file.names.alpha.len() != p || file.names.mu.len() != k || file.names.phi.len() != m {
        return Err(Error::ModelDataMismatch(
            "column names do not match parameter dimensions".into(),
        ));
    }
    Ok(file)
}

pub fn load_model(path: &Path) -> Result<ModelFile> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    parse_model_json(&text)
}

/// Rebuilds a [`FittedModel`] from a saved file and freshly loaded data,
/// verifying the dataset hash and that the stored quantities reproduce from
/// the stored parameters.
pub fn rehydrate(file: &ModelFile, loaded: LoadedData) -> Result<FittedModel> {
    if loaded.data_hash != file.data_hash {
        return Err(Error::ModelDataMismatch(format!(
            "dataset hash {} does not match the model's {}",
            loaded.data_hash, file.data_hash
        )));
    }
    if loaded.dataset.n() != file.n {
        return Err(Error::ModelDataMismatch(format!(
            "dataset has {} rows, model expects {}",
            loaded.dataset.n(),
            file.n
        )));
    }
    if loaded.spec.names() != &file.names {
        return Err(Error::ModelDataMismatch(
            "design column names differ from the saved model".into(),
        ));
    }
    let (p, k, m) = loaded.spec.dims();
    if (p, k, m)
        != (
            file.theta.rho.len(),
            file.theta.beta.len(),
            file.theta.gamma.len(),
        )
    {
        return Err(Error::ModelDataMismatch(
            "parameter dimensions differ from the saved model".into(),
        ));
    }
    let theta = ParameterVector::new(
        DVector::from_vec(file.theta.rho.clone()),
        DVector::from_vec(file.theta.beta.clone()),
        DVector::from_vec(file.theta.gamma.clone()),
    );
    let state = WorkingState::at(&loaded.spec, &theta)?;
    let (l1, l2) = likelihood::log_likelihood_parts(&loaded.spec, &loaded.dataset, &theta)?;
    if (l1 - file.loglik_discrete).abs() > 1e-8 * (1.0 + file.loglik_discrete.abs())
        || (l2 - file.loglik_continuous).abs() > 1e-8 * (1.0 + file.loglik_continuous.abs())
    {
        return Err(Error::ModelDataMismatch(format!(
            "stored log-likelihood ({}, {}) does not reproduce from the stored parameters ({l1}, {l2})",
            file.loglik_discrete, file.loglik_continuous
        )));
    }
    let d = p + k + m;
    let inv = DMatrix::from_fn(d, d, |r, c| file.inv_information[r][c]);
    Ok(FittedModel::from_parts(
        loaded.spec,
        loaded.dataset,
        theta,
        state,
        l1,
        l2,
        inv,
        file.convergence.discrete.clone(),
        file.convergence.continuous.clone(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::parse_model_config;
    use crate::harness::data::parse_csv_dataset;
    use crate::numerics::rng::RngStream;
    use crate::regression::fit;

    fn fixture_csv(n: usize, seed: u64) -> String {
        let mut rng = RngStream::new(seed, 0);
        let mut out = String::from("y,x1\n");
        for _ in 0..n {
            let x: f64 = rng.standard_normal();
            let y = if rng.uniform() < 0.25 {
                0.0
            } else {
                rng.beta(2.0, 3.0).unwrap()
            };
            out.push_str(&format!("{y},{x}\n"));
        }
        out
    }

    fn config() -> ModelConfig {
        parse_model_config(
            r#"{"c": 0, "alpha": {"terms": ["x1"]}, "mu": {"terms": ["x1"]}, "phi": {}, "seed": 3}"#,
        )
        .unwrap()
    }

    #[test]
    fn save_load_save_is_byte_identical() {
        let cfg = config();
        let csv = fixture_csv(80, 1);
        let loaded = parse_csv_dataset(csv.as_bytes(), &cfg).unwrap();
        let fitted = fit(&loaded.spec, &loaded.dataset).unwrap();
        let file = model_file_from_fit(&fitted, &cfg, &loaded.data_hash);

        let dir = tempfile::tempdir().unwrap();
        let p1 = dir.path().join("m1.json");
        let p2 = dir.path().join("m2.json");
        save_model(&file, &p1).unwrap();
        let re = load_model(&p1).unwrap();
        save_model(&re, &p2).unwrap();
        let b1 = std::fs::read(&p1).unwrap();
        let b2 = std::fs::read(&p2).unwrap();
        assert_eq!(b1, b2, "save→load→save changed bytes");
    }

    #[test]
    fn rehydrate_reproduces_fields() {
        let cfg = config();
        let csv = fixture_csv(90, 2);
        let loaded = parse_csv_dataset(csv.as_bytes(), &cfg).unwrap();
        let fitted = fit(&loaded.spec, &loaded.dataset).unwrap();
        let file = model_file_from_fit(&fitted, &cfg, &loaded.data_hash);

        let loaded2 = parse_csv_dataset(csv.as_bytes(), &cfg).unwrap();
        let back = rehydrate(&file, loaded2).unwrap();
        assert!((back.loglik() - fitted.loglik()).abs() < 1e-10);
        assert!((back.theta().concatenated() - fitted.theta().concatenated()).amax() == 0.0);
        assert!((back.inv_information() - fitted.inv_information()).amax() == 0.0);
        assert_eq!(back.discrete_record(), fitted.discrete_record());
    }

    #[test]
    fn tampered_files_are_rejected() {
        let cfg = config();
        let csv = fixture_csv(70, 3);
        let loaded = parse_csv_dataset(csv.as_bytes(), &cfg).unwrap();
        let fitted = fit(&loaded.spec, &loaded.dataset).unwrap();
        let file = model_file_from_fit(&fitted, &cfg, &loaded.data_hash);
        let text = serde_json::to_string_pretty(&file).unwrap();

        // Schema version mismatch.
        let bad = text.replace("infbeta-model/1", "infbeta-model/9");
        let err = parse_model_json(&bad).unwrap_err();
        assert!(err.to_string().contains("schema"), "{err}");

        // Tampered dimension: drop one rho coefficient.
        let mut parsed: serde_json::Value = serde_json::from_str(&text).unwrap();
        parsed["theta"]["rho"].as_array_mut().unwrap().pop();
        assert!(parse_model_json(&parsed.to_string()).is_err());

        // Tampered parameter value: rehydrate catches the loglik mismatch.
        let mut file2 = file.clone();
        file2.theta.beta[0] += 0.5;
        let loaded2 = parse_csv_dataset(csv.as_bytes(), &cfg).unwrap();
        let err = rehydrate(&file2, loaded2).unwrap_err();
        assert!(err.to_string().contains("log-likelihood"), "{err}");

        // Different data: hash mismatch.
        let other_csv = fixture_csv(70, 4);
        let other = parse_csv_dataset(other_csv.as_bytes(), &cfg).unwrap();
        let err = rehydrate(&file, other).unwrap_err();
        assert!(err.to_string().contains("hash"), "{err}");
    }
}
