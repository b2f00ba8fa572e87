//! Zero-or-one inflated beta regression.
//!
//! Maximum-likelihood fitting of a mixed discrete-continuous distribution for
//! proportions data containing exact zeros or exact ones: a point mass at a
//! known inflation point c ∈ {0, 1} mixed with a beta density on (0, 1) in
//! its mean–precision parameterization. All three distribution parameters
//! (the mass α, the beta mean μ, and the precision φ) are tied to linear
//! predictors through configurable link functions.
//!
//! The crate provides:
//!
//! - [`numerics`]: special functions, reproducible random streams, and the
//!   dense weighted least-squares kernel;
//! - [`links`]: the six supported link functions with derivatives and
//!   inverses;
//! - [`inflated_beta`]: the inflated beta distribution itself (densities,
//!   CDF, moments, conditional log-moments, sampling);
//! - [`regression`]: model specification, exact score/information, the two
//!   separable Fisher-scoring fits, and large-sample inference;
//! - [`diagnostics`]: residuals, leverage, influence approximations,
//!   pseudo-R² measures, information criteria, and simulated envelopes;
//! - [`harness`]: CSV ingestion, JSON model persistence, report emission,
//!   and the Monte Carlo experiment runner backing the `infbeta` CLI.

pub mod diagnostics;
pub mod error;
pub mod harness;
pub mod inflated_beta;
pub mod links;
pub mod numerics;
pub mod regression;

pub use error::{Component, Error, Result};
