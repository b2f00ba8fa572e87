//! Model specification and the exact likelihood machinery for the
//! zero-or-one inflated beta regression model.
//!
//! The likelihood factorizes into a discrete component (a binary regression
//! for the indicator of the inflation point, parameterized by `rho`) and a
//! continuous component (a beta regression over interior observations,
//! parameterized by `beta` for the mean and `gamma` for the precision). The
//! two are fitted separately by Fisher scoring and assembled into a
//! [`FittedModel`] with the block-structured inverse information.

pub mod fit;
pub mod inference;
pub mod likelihood;

pub use fit::{
    fit, fit_continuous, fit_discrete, fit_partial, fit_with_init, ComponentRecord,
    PartialFitReport,
};
pub use inference::{
    inference_summary, likelihood_ratio_test, mean_response_ci, CoefficientSummary, LrTest,
    MeanResponseCi,
};
pub use likelihood::{
    fisher_information, fisher_information_from_state, log_likelihood, log_likelihood_parts,
    observed_information, score,
};

use crate::error::{Component, Error, Result};
use crate::inflated_beta::{conditional_moments, InflationPoint};
use crate::links::LinkKind;
use crate::numerics::linalg::rcond_estimate;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

/// Column names for the three design matrices, used in reports.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockNames {
    pub alpha: Vec<String>,
    pub mu: Vec<String>,
    pub phi: Vec<String>,
}

/// Inflation point, link choices, and the three design matrices.
#[derive(Debug, Clone)]
pub struct ModelSpec {
    c: InflationPoint,
    link_alpha: LinkKind,
    link_mu: LinkKind,
    link_phi: LinkKind,
    v: DMatrix<f64>,
    x: DMatrix<f64>,
    z: DMatrix<f64>,
    names: BlockNames,
}

impl ModelSpec {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        c: InflationPoint,
        link_alpha: LinkKind,
        link_mu: LinkKind,
        link_phi: LinkKind,
        v: DMatrix<f64>,
        x: DMatrix<f64>,
        z: DMatrix<f64>,
        names: BlockNames,
    ) -> Result<Self> {
        if !link_alpha.is_unit_interval() || !link_mu.is_unit_interval() {
            return Err(Error::Config(format!(
                "alpha and mu need unit-interval links, got {link_alpha} and {link_mu}"
            )));
        }
        if link_phi.is_unit_interval() {
            return Err(Error::Config(format!(
                "phi needs a positive-domain link (log or sqrt), got {link_phi}"
            )));
        }
        let n = v.nrows();
        if n == 0 || x.nrows() != n || z.nrows() != n {
            return Err(Error::Data(format!(
                "design matrices disagree on row counts: {} / {} / {}",
                v.nrows(),
                x.nrows(),
                z.nrows()
            )));
        }
        let (p, k, m) = (v.ncols(), x.ncols(), z.ncols());
        if p == 0 || k == 0 || m == 0 {
            return Err(Error::Config(
                "every design matrix needs at least one column".into(),
            ));
        }
        if p + k + m >= n {
            return Err(Error::Data(format!(
                "too few observations: n = {n} with p + k + m = {}",
                p + k + m
            )));
        }
        if names.alpha.len() != p || names.mu.len() != k || names.phi.len() != m {
            return Err(Error::Config(
                "column name lists do not match design widths".into(),
            ));
        }
        for (mat, block) in [(&v, "alpha"), (&x, "mu"), (&z, "phi")] {
            let rcond = rcond_estimate(mat);
            if rcond < crate::numerics::linalg::RCOND_THRESHOLD {
                return Err(Error::IllConditioned {
                    block: block.to_string(),
                    rcond,
                    threshold: crate::numerics::linalg::RCOND_THRESHOLD,
                });
            }
        }
        Ok(ModelSpec {
            c,
            link_alpha,
            link_mu,
            link_phi,
            v,
            x,
            z,
            names,
        })
    }

    pub fn c(&self) -> InflationPoint {
        self.c
    }

    pub fn link_alpha(&self) -> LinkKind {
        self.link_alpha
    }

    pub fn link_mu(&self) -> LinkKind {
        self.link_mu
    }

    pub fn link_phi(&self) -> LinkKind {
        self.link_phi
    }

    pub fn v(&self) -> &DMatrix<f64> {
        &self.v
    }

    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn z(&self) -> &DMatrix<f64> {
        &self.z
    }

    pub fn names(&self) -> &BlockNames {
        &self.names
    }

    pub fn n(&self) -> usize {
        self.v.nrows()
    }

    /// (p, k, m): widths of the alpha, mu, and phi designs.
    pub fn dims(&self) -> (usize, usize, usize) {
        (self.v.ncols(), self.x.ncols(), self.z.ncols())
    }

    pub fn n_parameters(&self) -> usize {
        let (p, k, m) = self.dims();
        p + k + m
    }
}

/// Responses with the derived indicator and log-transformed observables.
///
/// `y_star` = log(y/(1−y)) and `y_dagger` = log(1−y) are stored as exact
/// zeros at inflated observations; continuous-component sums mask through
/// the indicator rather than trusting those zeros.
#[derive(Debug, Clone)]
pub struct Dataset {
    c: InflationPoint,
    y: DVector<f64>,
    y_c: DVector<f64>,
    y_star: DVector<f64>,
    y_dagger: DVector<f64>,
    interior: Vec<usize>,
}

impl Dataset {
    pub fn new(y: DVector<f64>, c: InflationPoint) -> Result<Self> {
        let n = y.len();
        if n == 0 {
            return Err(Error::Data("empty response vector".into()));
        }
        let mut bad_extreme = Vec::new();
        let mut bad_range = Vec::new();
        for (t, &yt) in y.iter().enumerate() {
            if yt == c.opposite_value() {
                bad_extreme.push(t);
            } else if !(yt.is_finite() && (0.0..=1.0).contains(&yt)) {
                bad_range.push(t);
            }
        }
        if !bad_range.is_empty() {
            return Err(Error::Data(format!(
                "responses outside [0, 1] at observations {bad_range:?}"
            )));
        }
        if !bad_extreme.is_empty() {
            return Err(Error::Data(format!(
                "responses equal to the non-inflated extreme {} (c = {c}) at observations {bad_extreme:?}; \
                 consider the model inflated at the other extreme",
                c.opposite_value()
            )));
        }
        let mut y_c = DVector::zeros(n);
        let mut y_star = DVector::zeros(n);
        let mut y_dagger = DVector::zeros(n);
        let mut interior = Vec::new();
        for (t, &yt) in y.iter().enumerate() {
            if yt == c.value() {
                y_c[t] = 1.0;
            } else {
                y_star[t] = (yt / (1.0 - yt)).ln();
                y_dagger[t] = (1.0 - yt).ln();
                interior.push(t);
            }
        }
        Ok(Dataset {
            c,
            y,
            y_c,
            y_star,
            y_dagger,
            interior,
        })
    }

    pub fn c(&self) -> InflationPoint {
        self.c
    }

    pub fn y(&self) -> &DVector<f64> {
        &self.y
    }

    /// Indicator vector: 1 where y equals the inflation point.
    pub fn y_c(&self) -> &DVector<f64> {
        &self.y_c
    }

    pub fn y_star(&self) -> &DVector<f64> {
        &self.y_star
    }

    pub fn y_dagger(&self) -> &DVector<f64> {
        &self.y_dagger
    }

    /// Indices of observations strictly inside (0, 1), in order.
    pub fn interior(&self) -> &[usize] {
        &self.interior
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn n_inflated(&self) -> usize {
        self.y.len() - self.interior.len()
    }

    /// Copy with one observation removed (for case-deletion influence).
    pub fn without_observation(&self, t: usize) -> Result<Dataset> {
        let kept: Vec<f64> = self
            .y
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != t)
            .map(|(_, &v)| v)
            .collect();
        Dataset::new(DVector::from_vec(kept), self.c)
    }
}

/// θ = (ρ, β, γ) partitioned into the discrete and continuous blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterVector {
    pub rho: DVector<f64>,
    pub beta: DVector<f64>,
    pub gamma: DVector<f64>,
}

impl ParameterVector {
    pub fn new(rho: DVector<f64>, beta: DVector<f64>, gamma: DVector<f64>) -> Self {
        ParameterVector { rho, beta, gamma }
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.rho.len(), self.beta.len(), self.gamma.len())
    }

    pub fn len(&self) -> usize {
        self.rho.len() + self.beta.len() + self.gamma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Stacks (ρ, β, γ) into a single vector.
    pub fn concatenated(&self) -> DVector<f64> {
        let mut out = DVector::zeros(self.len());
        let mut i = 0;
        for part in [&self.rho, &self.beta, &self.gamma] {
            for &v in part.iter() {
                out[i] = v;
                i += 1;
            }
        }
        out
    }

    pub fn from_concatenated(p: usize, k: usize, m: usize, v: &DVector<f64>) -> Result<Self> {
        if v.len() != p + k + m {
            return Err(Error::Usage(format!(
                "parameter vector of length {} cannot split into ({p}, {k}, {m})",
                v.len()
            )));
        }
        Ok(ParameterVector {
            rho: v.rows(0, p).into_owned(),
            beta: v.rows(p, k).into_owned(),
            gamma: v.rows(p + k, m).into_owned(),
        })
    }

    pub(crate) fn check_dims(&self, spec: &ModelSpec) -> Result<()> {
        if self.dims() != spec.dims() {
            return Err(Error::Usage(format!(
                "parameter dims {:?} do not match model dims {:?}",
                self.dims(),
                spec.dims()
            )));
        }
        Ok(())
    }
}

/// Per-observation quantities evaluated at a parameter value: fitted
/// parameters, link derivatives, conditional moments, and the four expected
/// information weights.
#[derive(Debug, Clone)]
pub struct WorkingState {
    pub eta1: DVector<f64>,
    pub eta2: DVector<f64>,
    pub eta3: DVector<f64>,
    pub alpha: DVector<f64>,
    pub mu: DVector<f64>,
    pub phi: DVector<f64>,
    /// 1/h₁′(α), 1/h₂′(μ), 1/h₃′(φ)
    pub d_alpha: DVector<f64>,
    pub t_mu: DVector<f64>,
    pub h_phi: DVector<f64>,
    /// Second link derivatives h₁″(α), h₂″(μ), h₃″(φ)
    pub dd_alpha: DVector<f64>,
    pub tt_mu: DVector<f64>,
    pub hh_phi: DVector<f64>,
    pub mu_star: DVector<f64>,
    pub mu_dagger: DVector<f64>,
    pub v_star: DVector<f64>,
    pub v_dagger: DVector<f64>,
    pub c_star_dagger: DVector<f64>,
    /// Expected information weights W₁…W₄ (the continuous ones carry the
    /// (1−α) mixture factor).
    pub w1: DVector<f64>,
    pub w2: DVector<f64>,
    pub w3: DVector<f64>,
    pub w4: DVector<f64>,
}

impl WorkingState {
    pub fn at(spec: &ModelSpec, theta: &ParameterVector) -> Result<Self> {
        theta.check_dims(spec)?;
        let n = spec.n();
        let discrete = DiscreteState::at(spec, &theta.rho)?;
        let cont = ContinuousState::at(spec, &theta.beta, &theta.gamma)?;

        let mut w2 = DVector::zeros(n);
        let mut w3 = DVector::zeros(n);
        let mut w4 = DVector::zeros(n);
        for t in 0..n {
            let one_minus_alpha = 1.0 - discrete.alpha[t];
            let b = cont.bare_weights(t);
            w2[t] = one_minus_alpha * b[0];
            w3[t] = one_minus_alpha * b[2];
            w4[t] = one_minus_alpha * b[1];
            if !(w2[t].is_finite() && w3[t].is_finite() && w4[t].is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "non-finite information weight at observation {t}"
                )));
            }
        }
        Ok(WorkingState {
            eta1: discrete.eta1,
            eta2: cont.eta2,
            eta3: cont.eta3,
            alpha: discrete.alpha,
            mu: cont.mu,
            phi: cont.phi,
            d_alpha: discrete.d_alpha,
            t_mu: cont.t_mu,
            h_phi: cont.h_phi,
            dd_alpha: discrete.dd_alpha,
            tt_mu: cont.tt_mu,
            hh_phi: cont.hh_phi,
            mu_star: cont.mu_star,
            mu_dagger: cont.mu_dagger,
            v_star: cont.v_star,
            v_dagger: cont.v_dagger,
            c_star_dagger: cont.c_star_dagger,
            w1: discrete.w1,
            w2,
            w3,
            w4,
        })
    }
}

/// Discrete-component working quantities (everything that depends on ρ only).
#[derive(Debug, Clone)]
pub(crate) struct DiscreteState {
    pub eta1: DVector<f64>,
    pub alpha: DVector<f64>,
    pub d_alpha: DVector<f64>,
    pub dd_alpha: DVector<f64>,
    pub w1: DVector<f64>,
}

impl DiscreteState {
    pub fn at(spec: &ModelSpec, rho: &DVector<f64>) -> Result<Self> {
        if rho.len() != spec.v.ncols() {
            return Err(Error::Usage(format!(
                "rho has length {}, expected {}",
                rho.len(),
                spec.v.ncols()
            )));
        }
        let eta1 = &spec.v * rho;
        let n = spec.n();
        let mut alpha = DVector::zeros(n);
        let mut d_alpha = DVector::zeros(n);
        let mut dd_alpha = DVector::zeros(n);
        let mut w1 = DVector::zeros(n);
        for t in 0..n {
            let a = spec.link_alpha.inverse(eta1[t])?;
            let (h1, h2) = spec.link_alpha.derivatives(a)?;
            let d = 1.0 / h1;
            let w = (1.0 / a + 1.0 / (1.0 - a)) * d * d;
            if !(a.is_finite() && d.is_finite() && w.is_finite() && w > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "non-finite discrete weights at observation {t} (alpha = {a})"
                )));
            }
            alpha[t] = a;
            d_alpha[t] = d;
            dd_alpha[t] = h2;
            w1[t] = w;
        }
        Ok(DiscreteState {
            eta1,
            alpha,
            d_alpha,
            dd_alpha,
            w1,
        })
    }
}

/// Continuous-component working quantities (everything depending on (β, γ)).
#[derive(Debug, Clone)]
pub(crate) struct ContinuousState {
    pub eta2: DVector<f64>,
    pub eta3: DVector<f64>,
    pub mu: DVector<f64>,
    pub phi: DVector<f64>,
    pub t_mu: DVector<f64>,
    pub h_phi: DVector<f64>,
    pub tt_mu: DVector<f64>,
    pub hh_phi: DVector<f64>,
    pub mu_star: DVector<f64>,
    pub mu_dagger: DVector<f64>,
    pub v_star: DVector<f64>,
    pub v_dagger: DVector<f64>,
    pub c_star_dagger: DVector<f64>,
}

impl ContinuousState {
    pub fn at(spec: &ModelSpec, beta: &DVector<f64>, gamma: &DVector<f64>) -> Result<Self> {
        if beta.len() != spec.x.ncols() || gamma.len() != spec.z.ncols() {
            return Err(Error::Usage(format!(
                "(beta, gamma) have lengths ({}, {}), expected ({}, {})",
                beta.len(),
                gamma.len(),
                spec.x.ncols(),
                spec.z.ncols()
            )));
        }
        let eta2 = &spec.x * beta;
        let eta3 = &spec.z * gamma;
        let n = spec.n();
        let mut mu = DVector::zeros(n);
        let mut phi = DVector::zeros(n);
        let mut t_mu = DVector::zeros(n);
        let mut h_phi = DVector::zeros(n);
        let mut tt_mu = DVector::zeros(n);
        let mut hh_phi = DVector::zeros(n);
        let mut mu_star = DVector::zeros(n);
        let mut mu_dagger = DVector::zeros(n);
        let mut v_star = DVector::zeros(n);
        let mut v_dagger = DVector::zeros(n);
        let mut c_star_dagger = DVector::zeros(n);
        for t in 0..n {
            let m = spec.link_mu.inverse(eta2[t])?;
            let f = spec.link_phi.inverse(eta3[t])?;
            let (h2p, h2pp) = spec.link_mu.derivatives(m)?;
            let (h3p, h3pp) = spec.link_phi.derivatives(f)?;
            let cm = conditional_moments(m, f)?;
            let tv = 1.0 / h2p;
            let hv = 1.0 / h3p;
            if !(tv.is_finite() && hv.is_finite() && cm.v_star.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "non-finite continuous weights at observation {t} (mu = {m}, phi = {f})"
                )));
            }
            mu[t] = m;
            phi[t] = f;
            t_mu[t] = tv;
            h_phi[t] = hv;
            tt_mu[t] = h2pp;
            hh_phi[t] = h3pp;
            mu_star[t] = cm.mu_star;
            mu_dagger[t] = cm.mu_dagger;
            v_star[t] = cm.v_star;
            v_dagger[t] = cm.v_dagger;
            c_star_dagger[t] = cm.c_star_dagger;
        }
        Ok(ContinuousState {
            eta2,
            eta3,
            mu,
            phi,
            t_mu,
            h_phi,
            tt_mu,
            hh_phi,
            mu_star,
            mu_dagger,
            v_star,
            v_dagger,
            c_star_dagger,
        })
    }

    /// Per-observation information weights without the (1−α) mixture factor:
    /// [φ²v*·t², (μ²v* + 2μc*† + v†)·h², φ(μv* + c*†)·t·h].
    pub fn bare_weights(&self, t: usize) -> [f64; 3] {
        let (m, f) = (self.mu[t], self.phi[t]);
        let (tv, hv) = (self.t_mu[t], self.h_phi[t]);
        let (vs, vd, cs) = (self.v_star[t], self.v_dagger[t], self.c_star_dagger[t]);
        [
            f * f * vs * tv * tv,
            (m * m * vs + 2.0 * m * cs + vd) * hv * hv,
            f * (m * vs + cs) * tv * hv,
        ]
    }
}

/// MLE, inverse information, per-observation fitted values, and convergence
/// records for both components.
#[derive(Debug, Clone)]
pub struct FittedModel {
    spec: ModelSpec,
    data: Dataset,
    theta: ParameterVector,
    state: WorkingState,
    loglik: f64,
    loglik_discrete: f64,
    loglik_continuous: f64,
    inv_information: DMatrix<f64>,
    discrete_record: ComponentRecord,
    continuous_record: ComponentRecord,
}

impl FittedModel {
    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn data(&self) -> &Dataset {
        &self.data
    }

    pub fn theta(&self) -> &ParameterVector {
        &self.theta
    }

    pub fn state(&self) -> &WorkingState {
        &self.state
    }

    pub fn loglik(&self) -> f64 {
        self.loglik
    }

    pub fn loglik_discrete(&self) -> f64 {
        self.loglik_discrete
    }

    pub fn loglik_continuous(&self) -> f64 {
        self.loglik_continuous
    }

    /// Inverse Fisher information in block form: the ρ block is exactly
    /// orthogonal to the (β, γ) blocks.
    pub fn inv_information(&self) -> &DMatrix<f64> {
        &self.inv_information
    }

    pub fn discrete_record(&self) -> &ComponentRecord {
        &self.discrete_record
    }

    pub fn continuous_record(&self) -> &ComponentRecord {
        &self.continuous_record
    }

    pub fn converged(&self) -> bool {
        self.discrete_record.converged && self.continuous_record.converged
    }

    pub fn alpha_hat(&self) -> &DVector<f64> {
        &self.state.alpha
    }

    pub fn mu_hat(&self) -> &DVector<f64> {
        &self.state.mu
    }

    pub fn phi_hat(&self) -> &DVector<f64> {
        &self.state.phi
    }

    /// Fitted mean response μ̂•_t = c·α̂_t + (1−α̂_t)·μ̂_t.
    pub fn mean_response(&self) -> DVector<f64> {
        let c = self.spec.c().value();
        DVector::from_fn(self.spec.n(), |t, _| {
            let a = self.state.alpha[t];
            c * a + (1.0 - a) * self.state.mu[t]
        })
    }

    /// Standard errors: square roots of the inverse-information diagonal,
    /// ordered (ρ, β, γ).
    pub fn standard_errors(&self) -> DVector<f64> {
        DVector::from_fn(self.spec.n_parameters(), |i, _| {
            self.inv_information[(i, i)].max(0.0).sqrt()
        })
    }

    #[allow(clippy::too_many_arguments)]
    pub(crate) fn from_parts(
        spec: ModelSpec,
        data: Dataset,
        theta: ParameterVector,
        state: WorkingState,
        loglik_discrete: f64,
        loglik_continuous: f64,
        inv_information: DMatrix<f64>,
        discrete_record: ComponentRecord,
        continuous_record: ComponentRecord,
    ) -> Self {
        FittedModel {
            spec,
            data,
            theta,
            state,
            loglik: loglik_discrete + loglik_continuous,
            loglik_discrete,
            loglik_continuous,
            inv_information,
            discrete_record,
            continuous_record,
        }
    }
}

pub(crate) fn degenerate(component: Component, message: impl Into<String>) -> Error {
    Error::DegenerateData {
        component,
        message: message.into(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ones(n: usize) -> DMatrix<f64> {
        DMatrix::from_element(n, 1, 1.0)
    }

    fn intercept_spec(n: usize) -> ModelSpec {
        ModelSpec::new(
            InflationPoint::Zero,
            LinkKind::Logit,
            LinkKind::Logit,
            LinkKind::Log,
            ones(n),
            ones(n),
            ones(n),
            BlockNames {
                alpha: vec!["intercept".into()],
                mu: vec!["intercept".into()],
                phi: vec!["intercept".into()],
            },
        )
        .unwrap()
    }

    #[test]
    fn dataset_classifies_and_transforms() {
        let y = DVector::from_vec(vec![0.0, 0.5, 0.25, 0.0, 0.75]);
        let d = Dataset::new(y, InflationPoint::Zero).unwrap();
        assert_eq!(d.n_inflated(), 2);
        assert_eq!(d.interior(), &[1, 2, 4]);
        assert_eq!(d.y_c()[0], 1.0);
        assert_eq!(d.y_c()[1], 0.0);
        assert_eq!(d.y_star()[0], 0.0);
        assert_eq!(d.y_dagger()[3], 0.0);
        assert!((d.y_star()[1]).abs() < 1e-15);
        assert!((d.y_dagger()[2] - 0.75f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn dataset_rejects_wrong_extreme_listing_rows() {
        let y = DVector::from_vec(vec![0.2, 1.0, 0.4, 1.0]);
        let err = Dataset::new(y, InflationPoint::Zero).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains('1') && msg.contains('3'), "rows missing: {msg}");
        let y = DVector::from_vec(vec![0.2, f64::NAN]);
        assert!(Dataset::new(y, InflationPoint::Zero).is_err());
        let y = DVector::from_vec(vec![0.2, 1.3]);
        assert!(Dataset::new(y, InflationPoint::Zero).is_err());
    }

    #[test]
    fn spec_validation() {
        // phi must not take a unit-interval link
        let err = ModelSpec::new(
            InflationPoint::Zero,
            LinkKind::Logit,
            LinkKind::Logit,
            LinkKind::Logit,
            ones(10),
            ones(10),
            ones(10),
            BlockNames {
                alpha: vec!["intercept".into()],
                mu: vec!["intercept".into()],
                phi: vec!["intercept".into()],
            },
        );
        assert!(err.is_err());

        // rank-deficient design
        let v = DMatrix::from_fn(10, 2, |_, _| 1.0);
        let err = ModelSpec::new(
            InflationPoint::Zero,
            LinkKind::Logit,
            LinkKind::Logit,
            LinkKind::Log,
            v,
            ones(10),
            ones(10),
            BlockNames {
                alpha: vec!["a".into(), "b".into()],
                mu: vec!["intercept".into()],
                phi: vec!["intercept".into()],
            },
        );
        assert!(matches!(err, Err(Error::IllConditioned { .. })));
    }

    #[test]
    fn parameter_vector_concat_round_trip() {
        let theta = ParameterVector::new(
            DVector::from_vec(vec![1.0, 2.0]),
            DVector::from_vec(vec![3.0]),
            DVector::from_vec(vec![4.0, 5.0, 6.0]),
        );
        let flat = theta.concatenated();
        let back = ParameterVector::from_concatenated(2, 1, 3, &flat).unwrap();
        assert_eq!(theta, back);
    }

    #[test]
    fn working_state_weights_are_positive() {
        let spec = intercept_spec(12);
        let theta = ParameterVector::new(
            DVector::from_vec(vec![-0.5]),
            DVector::from_vec(vec![0.3]),
            DVector::from_vec(vec![1.2]),
        );
        let state = WorkingState::at(&spec, &theta).unwrap();
        for t in 0..12 {
            assert!(state.w1[t] > 0.0);
            assert!(state.w2[t] > 0.0);
            // 2x2 continuous block is positive definite
            let det = state.w2[t] * state.w4[t] - state.w3[t] * state.w3[t];
            assert!(det > 0.0, "det {det}");
        }
        // logit link collapses W1 to alpha(1-alpha)
        let a = state.alpha[0];
        assert!((state.w1[0] - a * (1.0 - a)).abs() < 1e-14);
    }
}
