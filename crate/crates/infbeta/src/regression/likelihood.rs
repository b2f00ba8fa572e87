//! Exact log-likelihood, score vector, and both information matrices.

use super::{ContinuousState, Dataset, DiscreteState, ModelSpec, ParameterVector, WorkingState};
use crate::error::{Error, Result};
use crate::numerics::log_gamma;
use nalgebra::{DMatrix, DVector};

/// ℓ(θ) = ℓ₁(ρ) + ℓ₂(β, γ).
pub fn log_likelihood(spec: &ModelSpec, data: &Dataset, theta: &ParameterVector) -> Result<f64> {
    let (l1, l2) = log_likelihood_parts(spec, data, theta)?;
    Ok(l1 + l2)
}

/// (ℓ₁(ρ), ℓ₂(β, γ)): the discrete and continuous log-likelihood components.
pub fn log_likelihood_parts(
    spec: &ModelSpec,
    data: &Dataset,
    theta: &ParameterVector,
) -> Result<(f64, f64)> {
    theta.check_dims(spec)?;
    check_rows(spec, data)?;
    let discrete = DiscreteState::at(spec, &theta.rho)?;
    let cont = ContinuousState::at(spec, &theta.beta, &theta.gamma)?;
    let l1 = discrete_loglik(&discrete, data)?;
    let l2 = continuous_loglik(&cont, data)?;
    Ok((l1, l2))
}

pub(crate) fn check_rows(spec: &ModelSpec, data: &Dataset) -> Result<()> {
    if spec.n() != data.n() {
        return Err(Error::Usage(format!(
            "model has {} rows but data has {}",
            spec.n(),
            data.n()
        )));
    }
    if spec.c() != data.c() {
        return Err(Error::Usage(
            "model and data disagree on the inflation point".into(),
        ));
    }
    Ok(())
}

pub(crate) fn discrete_loglik(state: &DiscreteState, data: &Dataset) -> Result<f64> {
    let mut l1 = 0.0;
    for t in 0..data.n() {
        let a = state.alpha[t];
        l1 += data.y_c()[t] * a.ln() + (1.0 - data.y_c()[t]) * (1.0 - a).ln();
    }
    if !l1.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "non-finite discrete log-likelihood ({l1})"
        )));
    }
    Ok(l1)
}

pub(crate) fn continuous_loglik(state: &ContinuousState, data: &Dataset) -> Result<f64> {
    let mut l2 = 0.0;
    for &t in data.interior() {
        let (m, f) = (state.mu[t], state.phi[t]);
        l2 += log_gamma(f)? - log_gamma(m * f)? - log_gamma((1.0 - m) * f)?
            + (m * f - 1.0) * data.y_star()[t]
            + (f - 2.0) * data.y_dagger()[t];
    }
    if !l2.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "non-finite continuous log-likelihood ({l2})"
        )));
    }
    Ok(l2)
}

/// Score vector (U_ρ, U_β, U_γ), stacked in parameter order.
pub fn score(spec: &ModelSpec, data: &Dataset, theta: &ParameterVector) -> Result<DVector<f64>> {
    theta.check_dims(spec)?;
    check_rows(spec, data)?;
    let discrete = DiscreteState::at(spec, &theta.rho)?;
    let cont = ContinuousState::at(spec, &theta.beta, &theta.gamma)?;
    let u_rho = discrete_score(spec, data, &discrete);
    let (u_beta, u_gamma) = continuous_score(spec, data, &cont);
    let (p, k, m) = spec.dims();
    let mut u = DVector::zeros(p + k + m);
    u.rows_mut(0, p).copy_from(&u_rho);
    u.rows_mut(p, k).copy_from(&u_beta);
    u.rows_mut(p + k, m).copy_from(&u_gamma);
    Ok(u)
}

/// U_ρ = 𝒱ᵀ𝒜D𝒜*(y^c − α): per observation (y^c−α)/(α(1−α)) · 1/h₁′(α).
pub(crate) fn discrete_score(
    spec: &ModelSpec,
    data: &Dataset,
    state: &DiscreteState,
) -> DVector<f64> {
    let n = data.n();
    let mut resid = DVector::zeros(n);
    for t in 0..n {
        let a = state.alpha[t];
        resid[t] = (data.y_c()[t] - a) / (a * (1.0 - a)) * state.d_alpha[t];
    }
    spec.v().transpose() * resid
}

/// (U_β, U_γ): interior-masked score contributions
/// φ(y*−μ*)/h₂′(μ) and [μ(y*−μ*) + (y†−μ†)]/h₃′(φ).
pub(crate) fn continuous_score(
    spec: &ModelSpec,
    data: &Dataset,
    state: &ContinuousState,
) -> (DVector<f64>, DVector<f64>) {
    let n = data.n();
    let mut r_beta = DVector::zeros(n);
    let mut r_gamma = DVector::zeros(n);
    for &t in data.interior() {
        let ds = data.y_star()[t] - state.mu_star[t];
        let dd = data.y_dagger()[t] - state.mu_dagger[t];
        r_beta[t] = state.phi[t] * ds * state.t_mu[t];
        r_gamma[t] = (state.mu[t] * ds + dd) * state.h_phi[t];
    }
    (
        spec.x().transpose() * r_beta,
        spec.z().transpose() * r_gamma,
    )
}

/// Expected (Fisher) information K(θ): block-diagonal between ρ and (β, γ).
pub fn fisher_information(
    spec: &ModelSpec,
    theta: &ParameterVector,
) -> Result<DMatrix<f64>> {
    let state = WorkingState::at(spec, theta)?;
    Ok(fisher_information_from_state(spec, &state))
}

/// Expected information assembled from a precomputed [`WorkingState`].
pub fn fisher_information_from_state(spec: &ModelSpec, state: &WorkingState) -> DMatrix<f64> {
    let (p, k, m) = spec.dims();
    let d = p + k + m;
    let mut info = DMatrix::zeros(d, d);
    let k_rho = weighted_cross(spec.v(), &state.w1, spec.v());
    let k_bb = weighted_cross(spec.x(), &state.w2, spec.x());
    let k_bg = weighted_cross(spec.x(), &state.w3, spec.z());
    let k_gg = weighted_cross(spec.z(), &state.w4, spec.z());
    info.view_mut((0, 0), (p, p)).copy_from(&k_rho);
    info.view_mut((p, p), (k, k)).copy_from(&k_bb);
    info.view_mut((p, p + k), (k, m)).copy_from(&k_bg);
    info.view_mut((p + k, p), (m, k)).copy_from(&k_bg.transpose());
    info.view_mut((p + k, p + k), (m, m)).copy_from(&k_gg);
    info
}

/// Continuous-block expected information K(ϑ) for ϑ = (β, γ).
pub(crate) fn continuous_information_from_state(
    spec: &ModelSpec,
    state: &WorkingState,
) -> DMatrix<f64> {
    let (_, k, m) = spec.dims();
    let mut info = DMatrix::zeros(k + m, k + m);
    let k_bb = weighted_cross(spec.x(), &state.w2, spec.x());
    let k_bg = weighted_cross(spec.x(), &state.w3, spec.z());
    let k_gg = weighted_cross(spec.z(), &state.w4, spec.z());
    info.view_mut((0, 0), (k, k)).copy_from(&k_bb);
    info.view_mut((0, k), (k, m)).copy_from(&k_bg);
    info.view_mut((k, 0), (m, k)).copy_from(&k_bg.transpose());
    info.view_mut((k, k), (m, m)).copy_from(&k_gg);
    info
}

/// AᵀWB for a diagonal weight vector.
pub(crate) fn weighted_cross(
    a: &DMatrix<f64>,
    w: &DVector<f64>,
    b: &DMatrix<f64>,
) -> DMatrix<f64> {
    let mut wb = b.clone();
    for t in 0..b.nrows() {
        for j in 0..b.ncols() {
            wb[(t, j)] *= w[t];
        }
    }
    a.transpose() * wb
}

/// Observed information J(θ) = −Hessian of ℓ, for linear predictors (where
/// all second-derivative predictor arrays vanish). Block-diagonal between ρ
/// and (β, γ), like the expected information, but data-dependent.
pub fn observed_information(
    spec: &ModelSpec,
    data: &Dataset,
    theta: &ParameterVector,
) -> Result<DMatrix<f64>> {
    theta.check_dims(spec)?;
    check_rows(spec, data)?;
    let discrete = DiscreteState::at(spec, &theta.rho)?;
    let cont = ContinuousState::at(spec, &theta.beta, &theta.gamma)?;
    let n = data.n();

    // -d²ℓ₁/dη₁²: [1l_c/α² + (1−1l_c)/(1−α)²]·d² + (1l_c−α)/(α(1−α))·h₁″·d³
    let mut w_rho = DVector::zeros(n);
    for t in 0..n {
        let a = discrete.alpha[t];
        let d = discrete.d_alpha[t];
        let yc = data.y_c()[t];
        w_rho[t] = (yc / (a * a) + (1.0 - yc) / ((1.0 - a) * (1.0 - a))) * d * d
            + (yc - a) / (a * (1.0 - a)) * discrete.dd_alpha[t] * d * d * d;
    }

    // Interior-only continuous blocks.
    let mut w_bb = DVector::zeros(n);
    let mut w_bg = DVector::zeros(n);
    let mut w_gg = DVector::zeros(n);
    for &t in data.interior() {
        let (m, f) = (cont.mu[t], cont.phi[t]);
        let (tv, hv) = (cont.t_mu[t], cont.h_phi[t]);
        let ds = data.y_star()[t] - cont.mu_star[t];
        let dd = data.y_dagger()[t] - cont.mu_dagger[t];
        let vs = cont.v_star[t];
        let cs = cont.c_star_dagger[t];
        let vd = cont.v_dagger[t];
        w_bb[t] = f * f * vs * tv * tv + f * ds * cont.tt_mu[t] * tv * tv * tv;
        w_bg[t] = (f * (m * vs + cs) - ds) * tv * hv;
        w_gg[t] = (m * m * vs + 2.0 * m * cs + vd) * hv * hv
            + (m * ds + dd) * cont.hh_phi[t] * hv * hv * hv;
    }

    let (p, k, m) = spec.dims();
    let d = p + k + m;
    let mut info = DMatrix::zeros(d, d);
    info.view_mut((0, 0), (p, p))
        .copy_from(&weighted_cross(spec.v(), &w_rho, spec.v()));
    info.view_mut((p, p), (k, k))
        .copy_from(&weighted_cross(spec.x(), &w_bb, spec.x()));
    let j_bg = weighted_cross(spec.x(), &w_bg, spec.z());
    info.view_mut((p, p + k), (k, m)).copy_from(&j_bg);
    info.view_mut((p + k, p), (m, k)).copy_from(&j_bg.transpose());
    info.view_mut((p + k, p + k), (m, m))
        .copy_from(&weighted_cross(spec.z(), &w_gg, spec.z()));
    Ok(info)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::inflated_beta::{
        beta_log_density, inflated_log_density, InflatedBetaParams, InflationPoint,
    };
    use crate::links::LinkKind;
    use crate::numerics::rng::RngStream;
    use crate::regression::BlockNames;

    /// Small synthetic model with covariates in every block and a mix of
    /// links; used by the derivative checks.
    pub(crate) fn test_fixture(
        n: usize,
        seed: u64,
        links: (LinkKind, LinkKind, LinkKind),
        c: InflationPoint,
    ) -> (ModelSpec, Dataset, ParameterVector) {
        let mut rng = RngStream::new(seed, 0);
        let v = DMatrix::from_fn(n, 2, |_, j| if j == 0 { 1.0 } else { rng.standard_normal() });
        let x = DMatrix::from_fn(n, 2, |_, j| if j == 0 { 1.0 } else { rng.standard_normal() });
        let z = DMatrix::from_fn(n, 2, |_, j| if j == 0 { 1.0 } else { rng.standard_normal() });
        let truth = ParameterVector::new(
            DVector::from_vec(vec![-0.8, 0.5]),
            DVector::from_vec(vec![0.2, -0.6]),
            DVector::from_vec(vec![1.4, 0.3]),
        );
        let names = BlockNames {
            alpha: vec!["intercept".into(), "v1".into()],
            mu: vec!["intercept".into(), "x1".into()],
            phi: vec!["intercept".into(), "z1".into()],
        };
        let spec = ModelSpec::new(c, links.0, links.1, links.2, v, x, z, names).unwrap();
        let mut y = DVector::zeros(n);
        for t in 0..n {
            let a = spec.link_alpha().inverse(spec.v().row(t).transpose().dot(&truth.rho)).unwrap();
            let mu = spec.link_mu().inverse(spec.x().row(t).transpose().dot(&truth.beta)).unwrap();
            let phi = spec.link_phi().inverse(spec.z().row(t).transpose().dot(&truth.gamma)).unwrap();
            let params = InflatedBetaParams::new(c, a, mu, phi).unwrap();
            y[t] = crate::inflated_beta::sample(&mut rng, &params);
        }
        let data = Dataset::new(y, c).unwrap();
        (spec, data, truth)
    }

    #[test]
    fn single_observation_values() {
        // One zero with alpha = 0.25 contributes log 0.25; interior points
        // under a uniform beta contribute log(1 - 0.25) each to l1 and 0 to l2.
        let n = 5;
        let ones = DMatrix::from_element(n, 1, 1.0);
        let names = BlockNames {
            alpha: vec!["intercept".into()],
            mu: vec!["intercept".into()],
            phi: vec!["intercept".into()],
        };
        let spec = ModelSpec::new(
            InflationPoint::Zero,
            LinkKind::Logit,
            LinkKind::Logit,
            LinkKind::Log,
            ones.clone(),
            ones.clone(),
            ones,
            names,
        )
        .unwrap();
        let mut y = DVector::from_element(n, 0.5);
        y[0] = 0.0;
        let data = Dataset::new(y, InflationPoint::Zero).unwrap();
        let theta = ParameterVector::new(
            DVector::from_vec(vec![(0.25f64 / 0.75).ln()]),
            DVector::from_vec(vec![0.0]),
            DVector::from_vec(vec![2f64.ln()]),
        );
        let (l1, l2) = log_likelihood_parts(&spec, &data, &theta).unwrap();
        let want_l1 = 0.25f64.ln() + 4.0 * 0.75f64.ln();
        assert!((l1 - want_l1).abs() < 1e-12, "l1 {l1} want {want_l1}");
        assert!(l2.abs() < 1e-12, "l2 {l2}");
        assert!(((0.25f64).ln() - (-1.386_294_361_119_890_6)).abs() < 1e-12);
    }

    #[test]
    fn matches_direct_density_sum() {
        // The factorized log-likelihood must equal the naive sum of
        // per-observation inflated log-densities.
        let (spec, data, truth) = test_fixture(
            50,
            7,
            (LinkKind::Probit, LinkKind::Logit, LinkKind::Log),
            InflationPoint::Zero,
        );
        let theta = truth;
        let ll = log_likelihood(&spec, &data, &theta).unwrap();
        let mut direct = 0.0;
        for t in 0..data.n() {
            let a = spec.link_alpha().inverse(spec.v().row(t).transpose().dot(&theta.rho)).unwrap();
            let mu = spec.link_mu().inverse(spec.x().row(t).transpose().dot(&theta.beta)).unwrap();
            let phi = spec.link_phi().inverse(spec.z().row(t).transpose().dot(&theta.gamma)).unwrap();
            let params = InflatedBetaParams::new(InflationPoint::Zero, a, mu, phi).unwrap();
            direct += inflated_log_density(data.y()[t], &params).unwrap();
        }
        assert!((ll - direct).abs() < 1e-10, "ll {ll} direct {direct}");
    }

    #[test]
    fn continuous_part_is_beta_log_density_sum() {
        let (spec, data, truth) = test_fixture(
            40,
            3,
            (LinkKind::Logit, LinkKind::Cloglog, LinkKind::Sqrt),
            InflationPoint::One,
        );
        let (_, l2) = log_likelihood_parts(&spec, &data, &truth).unwrap();
        let mut direct = 0.0;
        for &t in data.interior() {
            let mu = spec.link_mu().inverse(spec.x().row(t).transpose().dot(&truth.beta)).unwrap();
            let phi = spec.link_phi().inverse(spec.z().row(t).transpose().dot(&truth.gamma)).unwrap();
            direct += beta_log_density(data.y()[t], mu, phi).unwrap();
        }
        assert!((l2 - direct).abs() < 1e-10);
    }

    fn fd_gradient(
        spec: &ModelSpec,
        data: &Dataset,
        theta: &ParameterVector,
        h: f64,
    ) -> DVector<f64> {
        let (p, k, m) = spec.dims();
        let flat = theta.concatenated();
        let mut g = DVector::zeros(flat.len());
        for i in 0..flat.len() {
            let mut up = flat.clone();
            up[i] += h;
            let mut dn = flat.clone();
            dn[i] -= h;
            let tu = ParameterVector::from_concatenated(p, k, m, &up).unwrap();
            let td = ParameterVector::from_concatenated(p, k, m, &dn).unwrap();
            g[i] = (log_likelihood(spec, data, &tu).unwrap()
                - log_likelihood(spec, data, &td).unwrap())
                / (2.0 * h);
        }
        g
    }

    #[test]
    fn score_matches_finite_differences() {
        let link_sets = [
            (LinkKind::Logit, LinkKind::Logit, LinkKind::Log),
            (LinkKind::Probit, LinkKind::Cloglog, LinkKind::Sqrt),
            (LinkKind::Cloglog, LinkKind::Loglog, LinkKind::Log),
        ];
        for (i, &links) in link_sets.iter().enumerate() {
            let (spec, data, truth) = test_fixture(60, 11 + i as u64, links, InflationPoint::Zero);
            // Check at truth and at a few perturbed points; perturbations
            // that leave the admissible region (finite-difference steps
            // included) are redrawn.
            let mut rng = RngStream::new(100 + i as u64, 1);
            let mut rep = 0;
            while rep < 4 {
                let mut flat = truth.concatenated();
                if rep > 0 {
                    for v in flat.iter_mut() {
                        *v += 0.2 * rng.standard_normal();
                    }
                }
                let theta = ParameterVector::from_concatenated(2, 2, 2, &flat).unwrap();
                if rep > 0 {
                    let mut admissible = true;
                    for j in 0..flat.len() {
                        for s in [-2e-6, 2e-6] {
                            let mut probe = flat.clone();
                            probe[j] += s;
                            let tp = ParameterVector::from_concatenated(2, 2, 2, &probe).unwrap();
                            if log_likelihood(&spec, &data, &tp).is_err() {
                                admissible = false;
                            }
                        }
                    }
                    if !admissible {
                        continue;
                    }
                }
                rep += 1;
                let analytic = score(&spec, &data, &theta).unwrap();
                let fd = fd_gradient(&spec, &data, &theta, 1e-6);
                for j in 0..analytic.len() {
                    let denom = analytic[j].abs().max(1.0);
                    assert!(
                        ((analytic[j] - fd[j]) / denom).abs() < 1e-6,
                        "links {i} rep {rep} component {j}: analytic {} fd {}",
                        analytic[j],
                        fd[j]
                    );
                }
            }
        }
    }

    #[test]
    fn intercept_only_discrete_score_vanishes_at_sample_proportion() {
        let n = 10;
        let mut y = DVector::from_element(n, 0.4);
        for t in 0..3 {
            y[t] = 0.0;
        }
        let data = Dataset::new(y, InflationPoint::Zero).unwrap();
        let ones = DMatrix::from_element(n, 1, 1.0);
        let spec = ModelSpec::new(
            InflationPoint::Zero,
            LinkKind::Logit,
            LinkKind::Logit,
            LinkKind::Log,
            ones.clone(),
            ones.clone(),
            ones,
            BlockNames {
                alpha: vec!["intercept".into()],
                mu: vec!["intercept".into()],
                phi: vec!["intercept".into()],
            },
        )
        .unwrap();
        let theta = ParameterVector::new(
            DVector::from_vec(vec![(0.3f64 / 0.7).ln()]),
            DVector::from_vec(vec![0.0]),
            DVector::from_vec(vec![1.0]),
        );
        let u = score(&spec, &data, &theta).unwrap();
        assert!(u[0].abs() < 1e-10, "U_rho = {}", u[0]);
    }

    #[test]
    fn observed_information_matches_fd_hessian() {
        let (spec, data, truth) = test_fixture(
            60,
            21,
            (LinkKind::Logit, LinkKind::Probit, LinkKind::Log),
            InflationPoint::Zero,
        );
        let j = observed_information(&spec, &data, &truth).unwrap();
        // FD Hessian via central differences of the analytic score.
        let flat = truth.concatenated();
        let d = flat.len();
        let h = 1e-5;
        let mut fd: DMatrix<f64> = DMatrix::zeros(d, d);
        for i in 0..d {
            let mut up = flat.clone();
            up[i] += h;
            let mut dn = flat.clone();
            dn[i] -= h;
            let su = score(&spec, &data, &ParameterVector::from_concatenated(2, 2, 2, &up).unwrap()).unwrap();
            let sd = score(&spec, &data, &ParameterVector::from_concatenated(2, 2, 2, &dn).unwrap()).unwrap();
            for r in 0..d {
                fd[(r, i)] -= (su[r] - sd[r]) / (2.0 * h);
            }
        }
        for r in 0..d {
            for c in 0..d {
                let denom = fd[(r, c)].abs().max(1.0);
                assert!(
                    ((j[(r, c)] - fd[(r, c)]) / denom).abs() < 1e-5,
                    "J[{r},{c}] = {} vs FD {}",
                    j[(r, c)],
                    fd[(r, c)]
                );
            }
        }
        // Exact zero off-blocks between rho and (beta, gamma).
        for r in 0..2 {
            for c in 2..6 {
                assert_eq!(j[(r, c)], 0.0);
                assert_eq!(j[(c, r)], 0.0);
            }
        }
    }

    #[test]
    fn fisher_information_structure() {
        let (spec, _, truth) = test_fixture(
            80,
            31,
            (LinkKind::Logit, LinkKind::Logit, LinkKind::Log),
            InflationPoint::Zero,
        );
        let k = fisher_information(&spec, &truth).unwrap();
        // Symmetric, block-diagonal, positive definite.
        assert!((&k - k.transpose()).amax() < 1e-10);
        for r in 0..2 {
            for c in 2..6 {
                assert_eq!(k[(r, c)], 0.0);
            }
        }
        assert!(nalgebra::Cholesky::new(k).is_some(), "K not positive definite");
    }

    #[test]
    fn fisher_matches_average_observed_information() {
        // E[J(θ)] = K(θ): average the observed information over simulated
        // datasets and compare within Monte Carlo error.
        let (spec, _, truth) = test_fixture(
            40,
            41,
            (LinkKind::Logit, LinkKind::Logit, LinkKind::Log),
            InflationPoint::Zero,
        );
        let k = fisher_information(&spec, &truth).unwrap();
        let reps = 300;
        let d = spec.n_parameters();
        let mut mean = DMatrix::zeros(d, d);
        let mut m2 = DMatrix::zeros(d, d);
        let mut rng = RngStream::new(4141, 0);
        for rep in 0..reps {
            let mut y = DVector::zeros(spec.n());
            for t in 0..spec.n() {
                let a = spec.link_alpha().inverse(spec.v().row(t).transpose().dot(&truth.rho)).unwrap();
                let mu = spec.link_mu().inverse(spec.x().row(t).transpose().dot(&truth.beta)).unwrap();
                let phi = spec.link_phi().inverse(spec.z().row(t).transpose().dot(&truth.gamma)).unwrap();
                let params = InflatedBetaParams::new(InflationPoint::Zero, a, mu, phi).unwrap();
                y[t] = crate::inflated_beta::sample(&mut rng, &params);
            }
            let data = Dataset::new(y, InflationPoint::Zero).unwrap();
            let j = observed_information(&spec, &data, &truth).unwrap();
            let delta = &j - &mean;
            mean += &delta / (rep + 1) as f64;
            m2 += delta.component_mul(&(&j - &mean));
        }
        for r in 0..d {
            for c in 0..d {
                let se = (m2[(r, c)] / (reps as f64 * (reps - 1) as f64)).sqrt();
                let diff = (mean[(r, c)] - k[(r, c)]).abs();
                assert!(
                    diff <= 4.0 * se + 1e-9,
                    "E[J][{r},{c}] = {} vs K = {} (se {se})",
                    mean[(r, c)],
                    k[(r, c)]
                );
            }
        }
    }
}
