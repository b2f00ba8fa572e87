//! Error type shared across the crate.

use thiserror::Error;

/// Which part of the separable model an error originated from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Component {
    /// The Bernoulli-type part governing whether an observation equals the
    /// inflation point (parameterized by `rho`).
    Discrete,
    /// The beta part over interior observations (parameterized by
    /// `beta` and `gamma`).
    Continuous,
}

impl std::fmt::Display for Component {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Component::Discrete => write!(f, "discrete"),
            Component::Continuous => write!(f, "continuous"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    /// An argument fell outside a function's mathematical domain.
    #[error("domain error in {function}: {message}")]
    Domain {
        function: &'static str,
        message: String,
    },

    /// A parameter vector produced non-finite or inadmissible intermediate
    /// quantities (e.g. a non-finite log-likelihood).
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Configuration file problems (unknown link names, bad field values,
    /// malformed JSON).
    #[error("config error: {0}")]
    Config(String),

    /// Dataset problems (missing columns, non-numeric cells, responses
    /// outside the admissible support).
    #[error("data error: {0}")]
    Data(String),

    /// A dataset cannot identify a model component (e.g. every observation
    /// at the inflation point, or too few interior observations).
    #[error("degenerate data for {component} component: {message}")]
    DegenerateData {
        component: Component,
        message: String,
    },

    /// A normal-equation solve met a reciprocal condition number below the
    /// admissible threshold; usually a collinearity signal.
    #[error("ill-conditioned {block} block (rcond {rcond:.3e} < {threshold:.1e}); check for collinear columns")]
    IllConditioned {
        block: String,
        rcond: f64,
        threshold: f64,
    },

    /// An iterative fit stopped without meeting the convergence criteria.
    #[error("{component} component did not converge: {message}")]
    NonConvergence {
        component: Component,
        message: String,
    },

    /// Too many simulated-envelope refits failed to form a band.
    #[error("envelope simulation failed: {0}")]
    Envelope(String),

    /// A saved model does not match the dataset or has an unsupported schema.
    #[error("model/data mismatch: {0}")]
    ModelDataMismatch(String),

    /// API misuse (e.g. non-nested models in a likelihood ratio test,
    /// inference requested on a non-converged fit).
    #[error("usage error: {0}")]
    Usage(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn domain(function: &'static str, message: impl Into<String>) -> Self {
        Error::Domain {
            function,
            message: message.into(),
        }
    }

    /// Process exit code for the CLI: 2 usage/config, 3 data, 4 estimation.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Usage(_) => 2,
            Error::Data(_) | Error::DegenerateData { .. } | Error::ModelDataMismatch(_) => 3,
            Error::Domain { .. }
            | Error::InvalidParameter(_)
            | Error::IllConditioned { .. }
            | Error::NonConvergence { .. }
            | Error::Envelope(_) => 4,
            Error::Io { .. } => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
