//! The zero-or-one inflated beta distribution.
//!
//! A mixture of a point mass at a known inflation point c ∈ {0, 1} (weight
//! α) and a beta density on (0, 1) (weight 1 − α), with the beta written in
//! its mean–precision parameterization: shapes (μφ, (1 − μ)φ). Densities are
//! evaluated in the log domain and exponentiated.

use crate::error::{Error, Result};
use crate::numerics::rng::RngStream;
use crate::numerics::{digamma, log_gamma, regularized_incomplete_beta, trigamma};
use serde::{Deserialize, Serialize};

/// The extreme of the unit interval carrying the point mass.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum InflationPoint {
    Zero,
    One,
}

impl InflationPoint {
    /// The inflation point as a number (0.0 or 1.0).
    pub fn value(self) -> f64 {
        match self {
            InflationPoint::Zero => 0.0,
            InflationPoint::One => 1.0,
        }
    }

    /// The extreme that is *not* inflated; observations there are invalid.
    pub fn opposite_value(self) -> f64 {
        1.0 - self.value()
    }
}

impl TryFrom<u8> for InflationPoint {
    type Error = String;

    fn try_from(v: u8) -> std::result::Result<Self, String> {
        match v {
            0 => Ok(InflationPoint::Zero),
            1 => Ok(InflationPoint::One),
            other => Err(format!("inflation point must be 0 or 1, got {other}")),
        }
    }
}

impl From<InflationPoint> for u8 {
    fn from(c: InflationPoint) -> u8 {
        match c {
            InflationPoint::Zero => 0,
            InflationPoint::One => 1,
        }
    }
}

impl std::fmt::Display for InflationPoint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", u8::from(*self))
    }
}

/// One observation's distribution parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InflatedBetaParams {
    c: InflationPoint,
    alpha: f64,
    mu: f64,
    phi: f64,
}

impl InflatedBetaParams {
    pub fn new(c: InflationPoint, alpha: f64, mu: f64, phi: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "mixture mass alpha must be in (0, 1), got {alpha}"
            )));
        }
        check_mean_precision(mu, phi)?;
        Ok(InflatedBetaParams { c, alpha, mu, phi })
    }

    pub fn c(&self) -> InflationPoint {
        self.c
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    /// Implied beta shapes (μφ, (1 − μ)φ).
    pub fn shapes(&self) -> (f64, f64) {
        (self.mu * self.phi, (1.0 - self.mu) * self.phi)
    }
}

fn check_mean_precision(mu: f64, phi: f64) -> Result<()> {
    if !(mu.is_finite() && mu > 0.0 && mu < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "beta mean mu must be in (0, 1), got {mu}"
        )));
    }
    if !(phi.is_finite() && phi > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "precision phi must be positive, got {phi}"
        )));
    }
    Ok(())
}

/// Log of the beta density in mean–precision form at y ∈ (0, 1).
pub fn beta_log_density(y: f64, mu: f64, phi: f64) -> Result<f64> {
    check_mean_precision(mu, phi)?;
    if !(y.is_finite() && y > 0.0 && y < 1.0) {
        return Err(Error::domain(
            "beta_density",
            format!("requires y strictly inside (0, 1), got {y}"),
        ));
    }
    let a = mu * phi;
    let b = (1.0 - mu) * phi;
    Ok(log_gamma(phi)? - log_gamma(a)? - log_gamma(b)?
        + (a - 1.0) * y.ln()
        + (b - 1.0) * (1.0 - y).ln())
}

/// Beta density in mean–precision form at y ∈ (0, 1).
pub fn beta_density(y: f64, mu: f64, phi: f64) -> Result<f64> {
    Ok(beta_log_density(y, mu, phi)?.exp())
}

/// Beta CDF in mean–precision form.
pub fn beta_cdf(y: f64, mu: f64, phi: f64) -> Result<f64> {
    check_mean_precision(mu, phi)?;
    regularized_incomplete_beta(y, mu * phi, (1.0 - mu) * phi)
}

/// Density of the inflated distribution with respect to the mixed measure:
/// α at y = c, (1 − α)·beta on (0, 1).
///
/// An observation equal to the non-inflated extreme signals a data/model
/// mismatch and is a hard error.
pub fn inflated_density(y: f64, params: &InflatedBetaParams) -> Result<f64> {
    Ok(inflated_log_density(y, params)?.exp())
}

/// Log of [`inflated_density`]; the form the likelihood works with.
pub fn inflated_log_density(y: f64, params: &InflatedBetaParams) -> Result<f64> {
    if y == params.c.value() {
        return Ok(params.alpha.ln());
    }
    if y == params.c.opposite_value() {
        return Err(Error::domain(
            "inflated_density",
            format!(
                "observation {y} equals the non-inflated extreme (c = {}); the model cannot support it",
                params.c
            ),
        ));
    }
    if !(y.is_finite() && y > 0.0 && y < 1.0) {
        return Err(Error::domain(
            "inflated_density",
            format!("requires y in (0, 1) or y = c, got {y}"),
        ));
    }
    Ok((1.0 - params.alpha).ln() + beta_log_density(y, params.mu, params.phi)?)
}

/// CDF of the inflated distribution: right-continuous, with a jump of size α
/// at the inflation point.
pub fn inflated_cdf(y: f64, params: &InflatedBetaParams) -> Result<f64> {
    if y.is_nan() {
        return Err(Error::domain("inflated_cdf", "NaN argument".to_string()));
    }
    if y < 0.0 {
        return Ok(0.0);
    }
    if y >= 1.0 {
        return Ok(1.0);
    }
    let f = beta_cdf(y, params.mu, params.phi)?;
    Ok(match params.c {
        InflationPoint::Zero => params.alpha + (1.0 - params.alpha) * f,
        InflationPoint::One => (1.0 - params.alpha) * f,
    })
}

/// Mean and variance of the mixture:
/// E(y) = αc + (1 − α)μ and
/// Var(y) = (1 − α)μ(1 − μ)/(φ + 1) + α(1 − α)(c − μ)².
pub fn moments(params: &InflatedBetaParams) -> (f64, f64) {
    let c = params.c.value();
    let (alpha, mu, phi) = (params.alpha, params.mu, params.phi);
    let mean = alpha * c + (1.0 - alpha) * mu;
    let var = (1.0 - alpha) * mu * (1.0 - mu) / (phi + 1.0)
        + alpha * (1.0 - alpha) * (c - mu) * (c - mu);
    (mean, var)
}

/// Conditional moments of y* = log(y/(1−y)) and y† = log(1−y) given
/// y ∈ (0, 1), under the beta component with shapes (μφ, (1−μ)φ).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionalMoments {
    /// E(y* | y ∈ (0,1)) = ψ(μφ) − ψ((1−μ)φ)
    pub mu_star: f64,
    /// E(y† | y ∈ (0,1)) = ψ((1−μ)φ) − ψ(φ)
    pub mu_dagger: f64,
    /// Var(y* | y ∈ (0,1)) = ψ′(μφ) + ψ′((1−μ)φ)
    pub v_star: f64,
    /// Var(y† | y ∈ (0,1)) = ψ′((1−μ)φ) − ψ′(φ)
    pub v_dagger: f64,
    /// Cov(y*, y† | y ∈ (0,1)) = −ψ′((1−μ)φ)
    pub c_star_dagger: f64,
}

/// Computes [`ConditionalMoments`] at the given mean and precision.
///
/// Var(y*) carries a plus sign: Var(log y) + Var(log(1−y)) − 2 Cov gives
/// ψ′(μφ) + ψ′((1−μ)φ), which is verified against a quadrature oracle in
/// the tests (a minus sign would make the variance vanish at μ = 1/2).
pub fn conditional_moments(mu: f64, phi: f64) -> Result<ConditionalMoments> {
    check_mean_precision(mu, phi)?;
    let a = mu * phi;
    let b = (1.0 - mu) * phi;
    let psi_a = digamma(a)?;
    let psi_b = digamma(b)?;
    let psi_phi = digamma(phi)?;
    let tri_a = trigamma(a)?;
    let tri_b = trigamma(b)?;
    let tri_phi = trigamma(phi)?;
    Ok(ConditionalMoments {
        mu_star: psi_a - psi_b,
        mu_dagger: psi_b - psi_phi,
        v_star: tri_a + tri_b,
        v_dagger: tri_b - tri_phi,
        c_star_dagger: -tri_b,
    })
}

/// Draw from the inflated distribution: exactly c with probability α,
/// otherwise a beta draw with shapes (μφ, (1−μ)φ).
pub fn sample(rng: &mut RngStream, params: &InflatedBetaParams) -> f64 {
    if rng.uniform() < params.alpha {
        params.c.value()
    } else {
        let (a, b) = params.shapes();
        // Parameters are constructor-validated, so the draw cannot fail.
        rng.beta(a, b).expect("validated shapes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(c: InflationPoint, alpha: f64, mu: f64, phi: f64) -> InflatedBetaParams {
        InflatedBetaParams::new(c, alpha, mu, phi).unwrap()
    }

    /// Composite Simpson integration on [lo, hi].
    fn simpson(lo: f64, hi: f64, n: usize, f: impl Fn(f64) -> f64) -> f64 {
        let n = if n % 2 == 0 { n } else { n + 1 };
        let h = (hi - lo) / n as f64;
        let mut s = f(lo) + f(hi);
        for i in 1..n {
            let x = lo + i as f64 * h;
            s += f(x) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * h / 3.0
    }

    #[test]
    fn params_validation() {
        assert!(InflatedBetaParams::new(InflationPoint::Zero, 0.0, 0.5, 1.0).is_err());
        assert!(InflatedBetaParams::new(InflationPoint::Zero, 1.0, 0.5, 1.0).is_err());
        assert!(InflatedBetaParams::new(InflationPoint::Zero, 0.5, 1.0, 1.0).is_err());
        assert!(InflatedBetaParams::new(InflationPoint::Zero, 0.5, 0.5, 0.0).is_err());
        assert!(InflatedBetaParams::new(InflationPoint::One, 0.5, 0.5, 2.0).is_ok());
        let p = params(InflationPoint::One, 0.3, 0.25, 4.0);
        assert_eq!(p.shapes(), (1.0, 3.0));
    }

    #[test]
    fn beta_density_known_values() {
        // Beta(1,1) is uniform; Beta(2,2) has density 6y(1-y).
        assert!((beta_density(0.5, 0.5, 2.0).unwrap() - 1.0).abs() < 1e-14);
        assert!((beta_density(0.5, 0.5, 4.0).unwrap() - 1.5).abs() < 1e-13);
        assert!(beta_density(0.0, 0.5, 2.0).is_err());
        assert!(beta_density(1.0, 0.5, 2.0).is_err());
    }

    #[test]
    fn beta_density_integrates_to_one() {
        // mu = 0.3, phi = 7: shapes (2.1, 4.9), density vanishing at both ends.
        let integral = simpson(0.0, 1.0, 20_000, |y| {
            if y <= 0.0 || y >= 1.0 {
                0.0
            } else {
                beta_density(y, 0.3, 7.0).unwrap()
            }
        });
        assert!((integral - 1.0).abs() < 1e-8, "integral {integral}");
    }

    #[test]
    fn inflated_density_point_mass_and_scaling() {
        let p = params(InflationPoint::Zero, 0.2, 0.5, 2.0);
        assert!((inflated_density(0.0, &p).unwrap() - 0.2).abs() < 1e-15);
        assert!((inflated_density(0.5, &p).unwrap() - 0.8).abs() < 1e-14);
        // The non-inflated extreme is a contract violation.
        assert!(inflated_density(1.0, &p).is_err());
        let p1 = params(InflationPoint::One, 0.2, 0.5, 2.0);
        assert!(inflated_density(0.0, &p1).is_err());
        assert!((inflated_density(1.0, &p1).unwrap() - 0.2).abs() < 1e-15);
    }

    #[test]
    fn inflated_mass_totals_one() {
        // Shapes kept above one so the density vanishes at both endpoints and
        // the truncated Simpson grid sees the full mass.
        for &(c, alpha, mu, phi) in &[
            (InflationPoint::Zero, 0.2, 0.3, 7.0),
            (InflationPoint::Zero, 0.7, 0.6, 6.0),
            (InflationPoint::One, 0.35, 0.45, 11.0),
        ] {
            let p = params(c, alpha, mu, phi);
            let continuous = simpson(0.0, 1.0, 40_000, |y| {
                if y <= 0.0 || y >= 1.0 {
                    0.0
                } else {
                    inflated_density(y, &p).unwrap()
                }
            });
            let total = continuous + alpha;
            assert!((total - 1.0).abs() < 1e-7, "total mass {total}");
        }
    }

    #[test]
    fn cdf_known_values_and_shape() {
        let p = params(InflationPoint::Zero, 0.2, 0.3, 7.0);
        assert!((inflated_cdf(0.0, &p).unwrap() - 0.2).abs() < 1e-15);
        assert_eq!(inflated_cdf(1.0, &p).unwrap(), 1.0);
        // c = 1, uniform beta component: (1 - 0.3) * 0.5 at y = 0.5.
        let p1 = params(InflationPoint::One, 0.3, 0.5, 2.0);
        assert!((inflated_cdf(0.5, &p1).unwrap() - 0.35).abs() < 1e-14);
        assert_eq!(inflated_cdf(0.0, &p1).unwrap(), 0.0);
        // Non-decreasing.
        let mut prev = 0.0;
        for i in 0..=100 {
            let v = inflated_cdf(i as f64 / 100.0, &p).unwrap();
            assert!(v >= prev - 1e-14);
            prev = v;
        }
    }

    #[test]
    fn cdf_matches_integrated_density() {
        let p = params(InflationPoint::Zero, 0.25, 0.4, 6.0);
        for &(lo, hi) in &[(0.1, 0.35), (0.35, 0.62), (0.62, 0.97)] {
            let inc = inflated_cdf(hi, &p).unwrap() - inflated_cdf(lo, &p).unwrap();
            let quad = simpson(lo, hi, 20_000, |y| inflated_density(y, &p).unwrap());
            assert!((inc - quad).abs() < 1e-7, "[{lo},{hi}] cdf {inc} quad {quad}");
        }
    }

    #[test]
    fn moments_known_values() {
        let p = params(InflationPoint::Zero, 0.5, 0.4, 3.0);
        let (mean, _) = moments(&p);
        assert!((mean - 0.2).abs() < 1e-15);

        // Tiny alpha: variance approaches the plain beta variance.
        let p = params(InflationPoint::Zero, 1e-12, 0.25, 3.0);
        let (_, var) = moments(&p);
        assert!((var - 0.046875).abs() < 1e-9, "var {var}");

        // c = 1, alpha = 0.3, mu = 0.5, phi = 9:
        // (1-α)·μ(1-μ)/(φ+1) + α(1-α)(c-μ)² = 0.7·0.025 + 0.21·0.25 = 0.07.
        let p = params(InflationPoint::One, 0.3, 0.5, 9.0);
        let (mean, var) = moments(&p);
        assert!((mean - 0.65).abs() < 1e-15);
        assert!((var - 0.07).abs() < 1e-15);
    }

    #[test]
    fn moments_match_monte_carlo() {
        let p = params(InflationPoint::One, 0.3, 0.5, 9.0);
        let (mean, var) = moments(&p);
        let mut rng = RngStream::new(7, 0);
        let n = 1_000_000usize;
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        for _ in 0..n {
            let y = sample(&mut rng, &p);
            sum += y;
            sumsq += y * y;
        }
        let m = sum / n as f64;
        let v = sumsq / n as f64 - m * m;
        let se_mean = (var / n as f64).sqrt();
        assert!((m - mean).abs() < 3.0 * se_mean, "mean {m} vs {mean}");
        assert!((v - var).abs() < 0.002, "var {v} vs {var}");
    }

    #[test]
    fn conditional_moments_symmetry_and_known_values() {
        let cm = conditional_moments(0.5, 2.0).unwrap();
        assert!(cm.mu_star.abs() < 1e-14);
        // 2ψ′(1) = π²/3
        assert!((cm.v_star - 3.289_868_133_696_453).abs() < 1e-12);

        // mu = 0.3, phi = 5 (shapes 1.5, 3.5); reference values from mpmath.
        let cm = conditional_moments(0.3, 5.0).unwrap();
        assert!((cm.mu_star - (-1.066_666_666_666_666_7)).abs() < 1e-12);
        assert!((cm.mu_dagger - (-0.402_961_027_786_557_3)).abs() < 1e-12);
        assert!((cm.v_star - 1.265_159_956_644_914_2).abs() < 1e-12);
        assert!((cm.v_dagger - 0.109_034_800_363_119_54).abs() < 1e-12);
        assert!((cm.c_star_dagger - (-0.330_357_756_100_234_86)).abs() < 1e-12);
    }

    #[test]
    fn conditional_moments_invariants() {
        for &mu in &[0.1, 0.3, 0.5, 0.7, 0.9] {
            for &phi in &[0.5, 2.0, 7.0, 20.0, 50.0] {
                let cm = conditional_moments(mu, phi).unwrap();
                assert!(cm.v_star > 0.0);
                assert!(cm.v_dagger > 0.0);
                assert!(cm.c_star_dagger < 0.0);
                assert!(
                    cm.c_star_dagger.abs() <= (cm.v_star * cm.v_dagger).sqrt() + 1e-12,
                    "Cauchy-Schwarz violated at mu={mu}, phi={phi}"
                );
            }
        }
    }

    #[test]
    fn conditional_moments_match_quadrature() {
        // Independent oracle: integrate the log-moments directly under the
        // beta density, via the substitution u = log(y/(1-y)) (so y* = u and
        // y† = -ln(1+e^u)), where the integrand decays exponentially.
        for &(mu, phi) in &[(0.3, 5.0), (0.5, 2.0), (0.7, 11.0), (0.15, 1.2)] {
            let a = mu * phi;
            let b = (1.0 - mu) * phi;
            let ln_norm = log_gamma(phi).unwrap() - log_gamma(a).unwrap() - log_gamma(b).unwrap();
            let weight = |u: f64| {
                // y^a (1-y)^b / B(a,b) with y = logistic(u)
                let ln_y = -(-u).exp_ln_1p();
                let ln_om = -(u).exp_ln_1p();
                (ln_norm + a * ln_y + b * ln_om).exp()
            };
            let half_width = 60.0 / a.min(b).min(1.0);
            let h = 0.01;
            let steps = (2.0 * half_width / h) as usize;
            let integral = |g: &dyn Fn(f64) -> f64| {
                let mut s = 0.0;
                for i in 0..=steps {
                    let u = -half_width + i as f64 * h;
                    s += g(u) * weight(u);
                }
                s * h
            };
            let mass = integral(&|_| 1.0);
            assert!((mass - 1.0).abs() < 1e-9, "quadrature mass {mass}");
            let e_star = integral(&|u| u);
            let e_dag = integral(&|u| -(u).exp_ln_1p());
            let v_star = integral(&|u| (u - e_star).powi(2));
            let v_dag = integral(&|u| ((-(u).exp_ln_1p()) - e_dag).powi(2));
            let cov = integral(&|u| (u - e_star) * ((-(u).exp_ln_1p()) - e_dag));

            let cm = conditional_moments(mu, phi).unwrap();
            let tol = 1e-6;
            assert!((cm.mu_star - e_star).abs() < tol, "mu* at ({mu},{phi})");
            assert!((cm.mu_dagger - e_dag).abs() < tol, "mu† at ({mu},{phi})");
            assert!((cm.v_star - v_star).abs() < tol, "v* at ({mu},{phi})");
            assert!((cm.v_dagger - v_dag).abs() < tol, "v† at ({mu},{phi})");
            assert!((cm.c_star_dagger - cov).abs() < tol, "c*† at ({mu},{phi})");
        }
    }

    trait SoftPlus {
        /// ln(1 + e^self), stable for large |self|.
        fn exp_ln_1p(self) -> f64;
    }

    impl SoftPlus for f64 {
        fn exp_ln_1p(self) -> f64 {
            if self > 30.0 {
                self + (-self).exp().ln_1p()
            } else {
                self.exp().ln_1p()
            }
        }
    }

    #[test]
    fn sample_mixture_fractions_and_moments() {
        let p = params(InflationPoint::Zero, 0.3, 0.6, 5.0);
        let mut rng = RngStream::new(11, 2);
        let n = 100_000usize;
        let mut zeros = 0usize;
        let mut sum = 0.0;
        for _ in 0..n {
            let y = sample(&mut rng, &p);
            if y == 0.0 {
                zeros += 1;
            } else {
                assert!(y > 0.0 && y < 1.0);
            }
            sum += y;
        }
        let frac = zeros as f64 / n as f64;
        assert!((frac - 0.3).abs() < 0.005, "zero fraction {frac}");
        let (mean, var) = moments(&p);
        let se = (var / n as f64).sqrt();
        let m = sum / n as f64;
        assert!((m - mean).abs() < 3.0 * se, "mean {m} vs {mean}");
    }

    #[test]
    fn sample_alpha_limit() {
        let p = params(InflationPoint::One, 1.0 - 1e-15, 0.5, 2.0);
        let mut rng = RngStream::new(1, 1);
        for _ in 0..100 {
            assert_eq!(sample(&mut rng, &p), 1.0);
        }
    }
}
