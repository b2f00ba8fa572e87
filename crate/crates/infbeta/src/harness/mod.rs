//! Data ingestion, model persistence, report emission, and the Monte Carlo
//! experiment runner behind the `infbeta` command-line interface.

pub mod config;
pub mod data;
pub mod model_io;
pub mod report;
pub mod simulate;
pub mod svg;

pub use config::{
    parse_experiment_config, parse_model_config, CovariateGenerator, ExperimentBlock,
    ExperimentConfig, ModelConfig, TermSpec,
};
pub use data::{load_csv_dataset, parse_csv_dataset, LoadedData};
pub use model_io::{
    load_model, model_file_from_fit, parse_model_json, rehydrate, save_model, ModelFile,
    MODEL_SCHEMA,
};
pub use simulate::{run_experiment, run_size, CoefficientStat, SizeResult};
