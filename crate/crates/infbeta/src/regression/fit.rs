//! Separable maximum-likelihood fitting by Fisher scoring.
//!
//! Both components are re-weighted least-squares iterations: the discrete
//! fit regresses a local working response on 𝒱 with weights W₁; the
//! continuous fit solves the 2n-stacked system pairing the μ- and φ-rows of
//! each interior observation with their joint 2×2 weight block. Plain
//! scoring steps are safeguarded by step-halving whenever a step would
//! decrease the log-likelihood or leave the parameter space.

use super::likelihood::{
    check_rows, continuous_information_from_state, continuous_loglik, continuous_score,
    discrete_loglik, discrete_score,
};
use super::{
    degenerate, ContinuousState, Dataset, DiscreteState, FittedModel, ModelSpec, ParameterVector,
    WorkingState,
};
use crate::error::{Component, Error, Result};
use crate::links::CLAMP_MARGIN;
use crate::numerics::linalg::{
    lstsq_qr, solve_weighted_least_squares, sqrt_spd_2x2, sym_pd_inverse, Weights,
};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

/// Iteration cap for both scoring loops.
pub const MAX_ITERATIONS: usize = 100;
/// Stop when the largest parameter update falls below this.
pub const STEP_TOLERANCE: f64 = 1e-8;
/// ... or when the relative log-likelihood change falls below this.
pub const RELATIVE_LL_TOLERANCE: f64 = 1e-10;
/// A stopped fit only counts as converged if the score sup-norm is below this.
pub const SCORE_TOLERANCE: f64 = 1e-5;
/// Maximum number of step halvings per scoring step.
pub const MAX_HALVINGS: usize = 20;

/// Convergence record for one model component.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ComponentRecord {
    pub iterations: usize,
    pub converged: bool,
    pub final_step_norm: f64,
    pub final_score_norm: f64,
    pub halvings: usize,
}

/// Fits the discrete component: IRLS on the working response
/// y₁ = η₁ + W₁⁻¹·𝒜D𝒜*(y^c − α).
pub fn fit_discrete(
    spec: &ModelSpec,
    data: &Dataset,
    init: Option<&DVector<f64>>,
) -> Result<(DVector<f64>, ComponentRecord)> {
    check_rows(spec, data)?;
    let n_inflated = data.n_inflated();
    if n_inflated == 0 {
        return Err(degenerate(
            Component::Discrete,
            "no observation equals the inflation point",
        ));
    }
    if n_inflated == data.n() {
        return Err(degenerate(
            Component::Discrete,
            "every observation equals the inflation point",
        ));
    }

    let mut rho = match init {
        Some(r) => r.clone(),
        None => init_rho(spec, data)?,
    };
    let mut state = DiscreteState::at(spec, &rho)?;
    let mut ell = discrete_loglik(&state, data)?;
    let mut record = ComponentRecord {
        iterations: 0,
        converged: false,
        final_step_norm: f64::INFINITY,
        final_score_norm: f64::INFINITY,
        halvings: 0,
    };

    while record.iterations < MAX_ITERATIONS {
        record.iterations += 1;
        // Working response: eta1 + u/w1 where u is the per-observation score.
        let mut y1 = DVector::zeros(data.n());
        for t in 0..data.n() {
            let a = state.alpha[t];
            let u = (data.y_c()[t] - a) / (a * (1.0 - a)) * state.d_alpha[t];
            y1[t] = state.eta1[t] + u / state.w1[t];
        }
        let proposal =
            solve_weighted_least_squares(spec.v(), Weights::Diagonal(&state.w1), &y1, "alpha")?;
        let delta = &proposal - &rho;

        let mut accepted = false;
        let mut scale = 1.0;
        let mut rel_change = f64::INFINITY;
        for halving in 0..=MAX_HALVINGS {
            let cand = &rho + scale * &delta;
            if let Ok(cand_state) = DiscreteState::at(spec, &cand) {
                if let Ok(cand_ell) = discrete_loglik(&cand_state, data) {
                    if cand_ell >= ell - 1e-12 * (1.0 + ell.abs()) {
                        record.final_step_norm = (scale * &delta).amax();
                        rel_change = (cand_ell - ell).abs() / ell.abs().max(1.0);
                        rho = cand;
                        state = cand_state;
                        ell = cand_ell;
                        record.halvings += halving;
                        accepted = true;
                        break;
                    }
                }
            }
            scale *= 0.5;
        }
        record.final_score_norm = discrete_score(spec, data, &state).amax();
        if !accepted {
            // No admissible step improves the likelihood; stall here.
            break;
        }
        let small_move = record.final_step_norm < STEP_TOLERANCE
            || rel_change < RELATIVE_LL_TOLERANCE;
        if small_move && record.final_score_norm < SCORE_TOLERANCE {
            record.converged = true;
            break;
        }
    }

    // Pinned probabilities mean the optimum sits at the clamp boundary and
    // the clamped score vanishes spuriously: the separation symptom.
    let pinned = state
        .alpha
        .iter()
        .any(|&a| a <= 2.0 * CLAMP_MARGIN || a >= 1.0 - 2.0 * CLAMP_MARGIN);
    if pinned {
        return Err(Error::NonConvergence {
            component: Component::Discrete,
            message: format!(
                "separation suspected: fitted probabilities pinned at the clamp bounds after {} iterations (score sup-norm {:.3e})",
                record.iterations, record.final_score_norm
            ),
        });
    }
    Ok((rho, record))
}

/// Fits the continuous component: joint Fisher scoring on ϑ = (β, γ) via the
/// stacked two-rows-per-observation weighted least-squares system, using
/// only observations in (0, 1).
pub fn fit_continuous(
    spec: &ModelSpec,
    data: &Dataset,
    init: Option<(&DVector<f64>, &DVector<f64>)>,
) -> Result<(DVector<f64>, DVector<f64>, ComponentRecord)> {
    check_rows(spec, data)?;
    let (_, k, m) = spec.dims();
    let n0 = data.interior().len();
    if n0 < k + m {
        return Err(degenerate(
            Component::Continuous,
            format!("only {n0} interior observations for {} continuous parameters", k + m),
        ));
    }

    let (mut beta, mut gamma) = match init {
        Some((b, g)) => (b.clone(), g.clone()),
        None => init_beta_gamma(spec, data)?,
    };
    let mut state = ContinuousState::at(spec, &beta, &gamma)?;
    let mut ell = continuous_loglik(&state, data)?;
    let mut record = ComponentRecord {
        iterations: 0,
        converged: false,
        final_step_norm: f64::INFINITY,
        final_score_norm: f64::INFINITY,
        halvings: 0,
    };

    while record.iterations < MAX_ITERATIONS {
        record.iterations += 1;
        let (a, b) = stacked_system(spec, data, &state)?;
        let proposal = lstsq_qr(&a, &b, "beta/gamma")?;
        let mut delta = proposal;
        for j in 0..k {
            delta[j] -= beta[j];
        }
        for j in 0..m {
            delta[k + j] -= gamma[j];
        }

        let mut accepted = false;
        let mut scale = 1.0;
        let mut rel_change = f64::INFINITY;
        for halving in 0..=MAX_HALVINGS {
            let cand_beta = DVector::from_fn(k, |j, _| beta[j] + scale * delta[j]);
            let cand_gamma = DVector::from_fn(m, |j, _| gamma[j] + scale * delta[k + j]);
            if let Ok(cand_state) = ContinuousState::at(spec, &cand_beta, &cand_gamma) {
                if let Ok(cand_ell) = continuous_loglik(&cand_state, data) {
                    if cand_ell >= ell - 1e-12 * (1.0 + ell.abs()) {
                        record.final_step_norm = delta.amax() * scale;
                        rel_change = (cand_ell - ell).abs() / ell.abs().max(1.0);
                        beta = cand_beta;
                        gamma = cand_gamma;
                        state = cand_state;
                        ell = cand_ell;
                        record.halvings += halving;
                        accepted = true;
                        break;
                    }
                }
            }
            scale *= 0.5;
        }
        let (u_beta, u_gamma) = continuous_score(spec, data, &state);
        record.final_score_norm = u_beta.amax().max(u_gamma.amax());
        if !accepted {
            break;
        }
        let small_move = record.final_step_norm < STEP_TOLERANCE
            || rel_change < RELATIVE_LL_TOLERANCE;
        if small_move && record.final_score_norm < SCORE_TOLERANCE {
            record.converged = true;
            break;
        }
    }
    Ok((beta, gamma, record))
}

/// Builds the weighted stacked system: for each interior observation the
/// 2×(k+m) block [[x_t, 0], [0, z_t]] premultiplied by the symmetric square
/// root of its 2×2 information block, with matching right-hand side
/// S·η_t + S⁻¹·u_t.
fn stacked_system(
    spec: &ModelSpec,
    data: &Dataset,
    state: &ContinuousState,
) -> Result<(DMatrix<f64>, DVector<f64>)> {
    let (_, k, m) = spec.dims();
    let n0 = data.interior().len();
    let mut a = DMatrix::zeros(2 * n0, k + m);
    let mut b = DVector::zeros(2 * n0);
    for (i, &t) in data.interior().iter().enumerate() {
        let bare = state.bare_weights(t);
        let (w2, w4, w3) = (bare[0], bare[1], bare[2]);
        let s = sqrt_spd_2x2(w2, w4, w3).ok_or_else(|| {
            Error::InvalidParameter(format!(
                "continuous information block not positive definite at observation {t}"
            ))
        })?;
        let (s11, s22, s12) = (s[0], s[1], s[2]);
        let ds = data.y_star()[t] - state.mu_star[t];
        let dd = data.y_dagger()[t] - state.mu_dagger[t];
        let u1 = state.phi[t] * ds * state.t_mu[t];
        let u2 = (state.mu[t] * ds + dd) * state.h_phi[t];
        // S⁻¹ u
        let det = s11 * s22 - s12 * s12;
        let si1 = (s22 * u1 - s12 * u2) / det;
        let si2 = (-s12 * u1 + s11 * u2) / det;
        let (e2, e3) = (state.eta2[t], state.eta3[t]);
        for j in 0..k {
            let xj = spec.x()[(t, j)];
            a[(2 * i, j)] = s11 * xj;
            a[(2 * i + 1, j)] = s12 * xj;
        }
        for j in 0..m {
            let zj = spec.z()[(t, j)];
            a[(2 * i, k + j)] = s12 * zj;
            a[(2 * i + 1, k + j)] = s22 * zj;
        }
        b[2 * i] = s11 * e2 + s12 * e3 + si1;
        b[2 * i + 1] = s12 * e2 + s22 * e3 + si2;
    }
    Ok((a, b))
}

/// ρ start: one-step least squares of the link-transformed indicator,
/// shrunk toward 1/2 to keep the transform finite.
fn init_rho(spec: &ModelSpec, data: &Dataset) -> Result<DVector<f64>> {
    const SHRINK: f64 = 0.05;
    let target = DVector::from_fn(data.n(), |t, _| {
        let smoothed = 0.5 + (data.y_c()[t] - 0.5) * (1.0 - 2.0 * SHRINK);
        spec.link_alpha().apply(smoothed).expect("interior by construction")
    });
    solve_weighted_least_squares(spec.v(), Weights::Identity, &target, "alpha")
}

/// (β, γ) start: least squares of h₂(y) on X over interior observations for
/// β; γ from projecting h₃(φ₀)·1 onto Z, with φ₀ the method-of-moments
/// precision of the interior responses (floored at 0.1).
fn init_beta_gamma(spec: &ModelSpec, data: &Dataset) -> Result<(DVector<f64>, DVector<f64>)> {
    let interior = data.interior();
    let n0 = interior.len();
    let x0 = DMatrix::from_fn(n0, spec.x().ncols(), |i, j| spec.x()[(interior[i], j)]);
    let hy = DVector::from_fn(n0, |i, _| {
        spec.link_mu()
            .apply(data.y()[interior[i]])
            .expect("interior observations are strictly inside (0,1)")
    });
    let beta = solve_weighted_least_squares(&x0, Weights::Identity, &hy, "mu")?;

    let mean = interior.iter().map(|&t| data.y()[t]).sum::<f64>() / n0 as f64;
    let var = interior
        .iter()
        .map(|&t| (data.y()[t] - mean).powi(2))
        .sum::<f64>()
        / (n0 as f64 - 1.0).max(1.0);
    let phi0 = if var > 1e-12 {
        (mean * (1.0 - mean) / var - 1.0).max(0.1)
    } else {
        100.0
    };
    let target = DVector::from_element(data.n(), spec.link_phi().apply(phi0)?);
    let gamma = solve_weighted_least_squares(spec.z(), Weights::Identity, &target, "phi")?;
    Ok((beta, gamma))
}

/// Estimates and records that survive when one component fails; consumed by
/// the CLI for partial-fit reporting.
#[derive(Debug, Clone, Default, Serialize)]
pub struct PartialFitReport {
    pub discrete_error: Option<String>,
    pub continuous_error: Option<String>,
    pub rho: Option<Vec<f64>>,
    pub beta: Option<Vec<f64>>,
    pub gamma: Option<Vec<f64>>,
    pub discrete_record: Option<ComponentRecord>,
    pub continuous_record: Option<ComponentRecord>,
}

/// Runs both component fits independently and assembles the full model.
pub fn fit(spec: &ModelSpec, data: &Dataset) -> Result<FittedModel> {
    fit_partial(spec, data).map_err(|(e, _)| e)
}

/// Like [`fit`], with explicit starting values for warm starts.
pub fn fit_with_init(
    spec: &ModelSpec,
    data: &Dataset,
    init: &ParameterVector,
) -> Result<FittedModel> {
    let discrete = fit_discrete(spec, data, Some(&init.rho));
    let continuous = fit_continuous(spec, data, Some((&init.beta, &init.gamma)));
    assemble_or_partial(spec, data, discrete, continuous).map_err(|(e, _)| e)
}

/// Runs both fits; a failure in one component does not poison the other.
/// On failure, returns the error of the failing component (the first, if
/// both fail) together with whatever partial results exist.
pub fn fit_partial(
    spec: &ModelSpec,
    data: &Dataset,
) -> std::result::Result<FittedModel, (Error, PartialFitReport)> {
    let discrete = fit_discrete(spec, data, None);
    let continuous = fit_continuous(spec, data, None);
    assemble_or_partial(spec, data, discrete, continuous)
}

fn assemble_or_partial(
    spec: &ModelSpec,
    data: &Dataset,
    discrete: Result<(DVector<f64>, ComponentRecord)>,
    continuous: Result<(DVector<f64>, DVector<f64>, ComponentRecord)>,
) -> std::result::Result<FittedModel, (Error, PartialFitReport)> {
    match (discrete, continuous) {
        (Ok((rho, drec)), Ok((beta, gamma, crec))) => {
            let theta = ParameterVector::new(rho, beta, gamma);
            assemble(spec, data, theta, drec.clone(), crec.clone()).map_err(|e| {
                let report = PartialFitReport {
                    discrete_error: None,
                    continuous_error: None,
                    rho: None,
                    beta: None,
                    gamma: None,
                    discrete_record: Some(drec),
                    continuous_record: Some(crec),
                };
                (e, report)
            })
        }
        (Err(e), Ok((beta, gamma, crec))) => {
            let report = PartialFitReport {
                discrete_error: Some(e.to_string()),
                beta: Some(beta.iter().cloned().collect()),
                gamma: Some(gamma.iter().cloned().collect()),
                continuous_record: Some(crec),
                ..Default::default()
            };
            Err((e, report))
        }
        (Ok((rho, drec)), Err(e)) => {
            let report = PartialFitReport {
                continuous_error: Some(e.to_string()),
                rho: Some(rho.iter().cloned().collect()),
                discrete_record: Some(drec),
                ..Default::default()
            };
            Err((e, report))
        }
        (Err(ed), Err(ec)) => {
            let report = PartialFitReport {
                discrete_error: Some(ed.to_string()),
                continuous_error: Some(ec.to_string()),
                ..Default::default()
            };
            Err((ed, report))
        }
    }
}

fn assemble(
    spec: &ModelSpec,
    data: &Dataset,
    theta: ParameterVector,
    discrete_record: ComponentRecord,
    continuous_record: ComponentRecord,
) -> Result<FittedModel> {
    let state = WorkingState::at(spec, &theta)?;
    let dstate = DiscreteState::at(spec, &theta.rho)?;
    let cstate = ContinuousState::at(spec, &theta.beta, &theta.gamma)?;
    let l1 = discrete_loglik(&dstate, data)?;
    let l2 = continuous_loglik(&cstate, data)?;

    let (p, k, m) = spec.dims();
    let k_rho = super::likelihood::weighted_cross(spec.v(), &state.w1, spec.v());
    let inv_rho = sym_pd_inverse(&k_rho, "alpha")?;
    let k_cont = continuous_information_from_state(spec, &state);
    let inv_cont = sym_pd_inverse(&k_cont, "beta/gamma")?;

    let d = p + k + m;
    let mut inv = DMatrix::zeros(d, d);
    inv.view_mut((0, 0), (p, p)).copy_from(&inv_rho);
    inv.view_mut((p, p), (k + m, k + m)).copy_from(&inv_cont);

    Ok(FittedModel::from_parts(
        spec.clone(),
        data.clone(),
        theta,
        state,
        l1,
        l2,
        inv,
        discrete_record,
        continuous_record,
    ))
}
