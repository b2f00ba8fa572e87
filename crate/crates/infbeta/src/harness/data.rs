//! CSV dataset ingestion: column lookup, numeric parsing with row/column
//! context, response validation, and design-matrix assembly.

use super::config::{ModelConfig, TermSpec};
use crate::error::{Error, Result};
use crate::regression::{BlockNames, Dataset, ModelSpec};
use nalgebra::{DMatrix, DVector};
use sha2::{Digest, Sha256};
use std::path::Path;

/// A parsed dataset together with the model specification implied by the
/// configuration and a content hash binding saved models to their data.
#[derive(Debug, Clone)]
pub struct LoadedData {
    pub dataset: Dataset,
    pub spec: ModelSpec,
    pub data_hash: String,
}

pub fn load_csv_dataset(path: &Path, config: &ModelConfig) -> Result<LoadedData> {
    let bytes = std::fs::read(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    parse_csv_dataset(&bytes, config)
}

/// Parses RFC-4180 CSV bytes (header required, UTF-8, '.' decimal) into a
/// dataset and model specification.
pub fn parse_csv_dataset(bytes: &[u8], config: &ModelConfig) -> Result<LoadedData> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(bytes);
    let headers = reader
        .headers()
        .map_err(|e| Error::Data(format!("cannot read CSV header: {e}")))?
        .clone();
    let column_index = |name: &str| headers.iter().position(|h| h == name);

    let mut needed: Vec<&str> = vec![config.response.as_str()];
    for spec in [&config.alpha, &config.mu, &config.phi] {
        for t in &spec.terms {
            if !needed.contains(&t.as_str()) {
                needed.push(t.as_str());
            }
        }
    }
    let missing: Vec<&str> = needed
        .iter()
        .copied()
        .filter(|n| column_index(n).is_none())
        .collect();
    if !missing.is_empty() {
        return Err(Error::Data(format!(
            "missing columns {missing:?}; header has {:?}",
            headers.iter().collect::<Vec<_>>()
        )));
    }

    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); needed.len()];
    for (row_idx, record) in reader.records().enumerate() {
        // Line numbering counts the header as line 1.
        let line = row_idx + 2;
        let record = record.map_err(|e| Error::Data(format!("CSV parse error at line {line}: {e}")))?;
        for (slot, name) in needed.iter().enumerate() {
            let idx = column_index(name).expect("checked above");
            let cell = record.get(idx).ok_or_else(|| {
                Error::Data(format!("line {line} has no value for column '{name}'"))
            })?;
            let value: f64 = cell.parse().map_err(|_| {
                Error::Data(format!(
                    "non-numeric value '{cell}' at line {line}, column '{name}'"
                ))
            })?;
            columns[slot].push(value);
        }
    }
    let n = columns[0].len();
    if n == 0 {
        return Err(Error::Data("CSV contains no data rows".into()));
    }

    let y_raw = &columns[0];
    let wrong_extreme = config.c.opposite_value();
    let bad_lines: Vec<usize> = y_raw
        .iter()
        .enumerate()
        .filter(|(_, &v)| v == wrong_extreme)
        .map(|(i, _)| i + 2)
        .collect();
    if !bad_lines.is_empty() {
        return Err(Error::Data(format!(
            "response equals the non-inflated extreme {wrong_extreme} (c = {}) at lines {bad_lines:?}",
            config.c
        )));
    }
    let out_of_range: Vec<usize> = y_raw
        .iter()
        .enumerate()
        .filter(|(_, &v)| !(v.is_finite() && (0.0..=1.0).contains(&v)))
        .map(|(i, _)| i + 2)
        .collect();
    if !out_of_range.is_empty() {
        return Err(Error::Data(format!(
            "response outside [0, 1] at lines {out_of_range:?}"
        )));
    }

    let col = |name: &str| -> &Vec<f64> {
        let slot = needed.iter().position(|n| n == &name).expect("collected");
        &columns[slot]
    };
    let build = |spec: &TermSpec| -> (DMatrix<f64>, Vec<String>) {
        let width = spec.terms.len() + usize::from(spec.intercept);
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
        for term in &spec.terms {
            let c = col(term);
            for t in 0..n {
                mat[(t, j)] = c[t];
            }
            names.push(term.clone());
            j += 1;
        }
        (mat, names)
    };
    let (v, alpha_names) = build(&config.alpha);
    let (x, mu_names) = build(&config.mu);
    let (z, phi_names) = build(&config.phi);

    let data_hash = hash_columns(&needed, &columns);
    let dataset = Dataset::new(DVector::from_vec(y_raw.clone()), config.c)?;
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
    Ok(LoadedData {
        dataset,
        spec,
        data_hash,
    })
}

/// SHA-256 over the used columns (name, then little-endian f64 bits), as a
/// lowercase hex string.
fn hash_columns(names: &[&str], columns: &[Vec<f64>]) -> String {
    let mut hasher = Sha256::new();
    for (name, column) in names.iter().zip(columns) {
        hasher.update(name.as_bytes());
        hasher.update([0u8]);
        for v in column {
            hasher.update(v.to_le_bytes());
        }
        hasher.update([0xFFu8]);
    }
    let digest = hasher.finalize();
    let mut out = String::with_capacity(64);
    for b in digest {
        out.push_str(&format!("{b:02x}"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::parse_model_config;

    fn basic_config() -> ModelConfig {
        parse_model_config(
            r#"{"c": 0, "alpha": {"terms": ["x1"]}, "mu": {"terms": ["x1"]}, "phi": {}}"#,
        )
        .unwrap()
    }

    #[test]
    fn parses_intercepts_and_terms() {
        let csv = "y,x1\n0.0,1.5\n0.5,-0.5\n0.25,0.0\n0.75,2.0\n0.5,1.0\n0.1,0.3\n";
        let loaded = parse_csv_dataset(csv.as_bytes(), &basic_config()).unwrap();
        assert_eq!(loaded.dataset.n(), 6);
        assert_eq!(loaded.spec.dims(), (2, 2, 1));
        assert_eq!(loaded.spec.v()[(0, 0)], 1.0);
        assert_eq!(loaded.spec.v()[(0, 1)], 1.5);
        assert_eq!(loaded.spec.names().alpha, vec!["intercept", "x1"]);
        assert_eq!(loaded.data_hash.len(), 64);
    }

    #[test]
    fn intercept_only_config_gives_columns_of_ones() {
        let cfg = parse_model_config(r#"{"c": 0}"#).unwrap();
        let csv = "y\n0.0\n0.5\n0.25\n0.75\n";
        let loaded = parse_csv_dataset(csv.as_bytes(), &cfg).unwrap();
        assert_eq!(loaded.spec.dims(), (1, 1, 1));
        for t in 0..4 {
            assert_eq!(loaded.spec.v()[(t, 0)], 1.0);
            assert_eq!(loaded.spec.x()[(t, 0)], 1.0);
            assert_eq!(loaded.spec.z()[(t, 0)], 1.0);
        }
    }

    #[test]
    fn reports_wrong_extreme_lines() {
        let csv = "y,x1\n0.2,1.0\n1.0,2.0\n0.4,3.0\n1.0,4.0\n";
        let err = parse_csv_dataset(csv.as_bytes(), &basic_config()).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("[3, 5]"), "expected line numbers, got: {msg}");
    }

    #[test]
    fn reports_bad_cells_with_context() {
        let csv = "y,x1\n0.2,1.0\n0.3,oops\n";
        let err = parse_csv_dataset(csv.as_bytes(), &basic_config()).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line 3") && msg.contains("x1"), "{msg}");

        let csv = "y,x2\n0.2,1.0\n";
        let err = parse_csv_dataset(csv.as_bytes(), &basic_config()).unwrap_err();
        assert!(err.to_string().contains("x1"), "{err}");

        let csv = "y,x1\n0.2,1.0\n1.5,2.0\n";
        let err = parse_csv_dataset(csv.as_bytes(), &basic_config()).unwrap_err();
        assert!(err.to_string().contains("outside"), "{err}");
    }

    #[test]
    fn hash_changes_with_content_and_is_stable() {
        let csv1 = "y,x1\n0.0,1.0\n0.5,2.0\n0.3,0.5\n0.1,1.5\n";
        let csv2 = "y,x1\n0.0,1.0\n0.5,2.0\n0.3,0.5\n0.1,1.50001\n";
        let a = parse_csv_dataset(csv1.as_bytes(), &basic_config()).unwrap();
        let b = parse_csv_dataset(csv1.as_bytes(), &basic_config()).unwrap();
        let c = parse_csv_dataset(csv2.as_bytes(), &basic_config()).unwrap();
        assert_eq!(a.data_hash, b.data_hash);
        assert_ne!(a.data_hash, c.data_hash);
    }
}
