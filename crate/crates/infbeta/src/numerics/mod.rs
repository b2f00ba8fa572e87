//! Special functions and numerical kernels.
//!
//! Everything here is scalar f64 work: gamma-family functions, regularized
//! incomplete beta/gamma integrals, the standard normal distribution, and the
//! Kolmogorov distribution. Algorithms follow the standard numerically stable
//! schemes (upward recurrence + asymptotic series for polygamma, Lentz-style
//! continued fractions for the incomplete integrals).

pub mod linalg;
pub mod rng;

use crate::error::{Error, Result};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_74;
const SQRT_2: f64 = std::f64::consts::SQRT_2;

/// ln Γ(x) for x > 0.
///
/// Shifts the argument above 10 with ln Γ(x) = ln Γ(x+1) − ln x, then applies
/// the Stirling series with Bernoulli terms through B₁₆.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !x.is_finite() || x <= 0.0 {
        return Err(Error::domain("log_gamma", format!("requires x > 0, got {x}")));
    }
    let mut shift = 0.0;
    let mut z = x;
    while z < 10.0 {
        shift -= z.ln();
        z += 1.0;
    }
    Ok(stirling_log_gamma(z) + shift)
}

/// Stirling series for ln Γ(z), accurate to ~1e-17 relative for z >= 10.
fn stirling_log_gamma(z: f64) -> f64 {
    // B_{2n} / (2n (2n-1)) for n = 1..8
    const COEF: [f64; 8] = [
        1.0 / 12.0,
        -1.0 / 360.0,
        1.0 / 1260.0,
        -1.0 / 1680.0,
        1.0 / 1188.0,
        -691.0 / 360_360.0,
        1.0 / 156.0,
        -3617.0 / 122_400.0,
    ];
    let inv = 1.0 / z;
    let inv2 = inv * inv;
    let mut series = 0.0;
    let mut pow = inv;
    for c in COEF {
        series += c * pow;
        pow *= inv2;
    }
    (z - 0.5) * z.ln() - z + LN_SQRT_2PI + series
}

/// Digamma function ψ(x) = d ln Γ(x)/dx for x > 0.
pub fn digamma(x: f64) -> Result<f64> {
    if !x.is_finite() || x <= 0.0 {
        return Err(Error::domain("digamma", format!("requires x > 0, got {x}")));
    }
    // psi(x) = psi(x+1) - 1/x shifts the argument above 6
    let mut acc = 0.0;
    let mut z = x;
    while z < 6.0 {
        acc -= 1.0 / z;
        z += 1.0;
    }
    // Asymptotic series: ln z - 1/(2z) - sum B_{2n}/(2n z^{2n})
    const COEF: [f64; 8] = [
        1.0 / 12.0,
        -1.0 / 120.0,
        1.0 / 252.0,
        -1.0 / 240.0,
        1.0 / 132.0,
        -691.0 / 32_760.0,
        1.0 / 12.0,
        -3617.0 / 8160.0,
    ];
    let inv2 = 1.0 / (z * z);
    let mut series = 0.0;
    let mut pow = inv2;
    for c in COEF {
        series += c * pow;
        pow *= inv2;
    }
    Ok(acc + z.ln() - 0.5 / z - series)
}

/// Trigamma function ψ′(x) for x > 0.
pub fn trigamma(x: f64) -> Result<f64> {
    if !x.is_finite() || x <= 0.0 {
        return Err(Error::domain("trigamma", format!("requires x > 0, got {x}")));
    }
    // psi'(x) = psi'(x+1) + 1/x^2
    let mut acc = 0.0;
    let mut z = x;
    while z < 6.0 {
        acc += 1.0 / (z * z);
        z += 1.0;
    }
    // Asymptotic series: 1/z + 1/(2z^2) + sum B_{2n}/z^{2n+1}
    const COEF: [f64; 8] = [
        1.0 / 6.0,
        -1.0 / 30.0,
        1.0 / 42.0,
        -1.0 / 30.0,
        5.0 / 66.0,
        -691.0 / 2730.0,
        7.0 / 6.0,
        -3617.0 / 510.0,
    ];
    let inv = 1.0 / z;
    let inv2 = inv * inv;
    let mut series = 0.0;
    let mut pow = inv2 * inv;
    for c in COEF {
        series += c * pow;
        pow *= inv2;
    }
    Ok(acc + inv + 0.5 * inv2 + series)
}

/// Regularized incomplete beta function I_y(a, b) for y in [0, 1], a, b > 0.
///
/// Continued-fraction evaluation (modified Lentz), with the symmetry swap
/// I_y(a, b) = 1 − I_{1−y}(b, a) applied for y > a/(a+b).
pub fn regularized_incomplete_beta(y: f64, a: f64, b: f64) -> Result<f64> {
    if !(a.is_finite() && a > 0.0 && b.is_finite() && b > 0.0) {
        return Err(Error::domain(
            "regularized_incomplete_beta",
            format!("requires a > 0 and b > 0, got a={a}, b={b}"),
        ));
    }
    if !(0.0..=1.0).contains(&y) {
        return Err(Error::domain(
            "regularized_incomplete_beta",
            format!("requires y in [0, 1], got {y}"),
        ));
    }
    if y == 0.0 {
        return Ok(0.0);
    }
    if y == 1.0 {
        return Ok(1.0);
    }
    let v = if y > a / (a + b) {
        1.0 - incomplete_beta_cf(1.0 - y, b, a)?
    } else {
        incomplete_beta_cf(y, a, b)?
    };
    Ok(v.clamp(0.0, 1.0))
}

fn incomplete_beta_cf(x: f64, a: f64, b: f64) -> Result<f64> {
    let ln_front =
        log_gamma(a + b)? - log_gamma(a)? - log_gamma(b)? + a * x.ln() + b * (1.0 - x).ln();
    let front = ln_front.exp();
    if front == 0.0 {
        // Underflow: the integral is indistinguishable from 0 at this scale.
        return Ok(0.0);
    }

    const MAX_ITER: usize = 500;
    const EPS: f64 = 3e-16;
    const TINY: f64 = 1e-300;

    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        // even step
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        // odd step
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            return Ok(front * h / a);
        }
    }
    Err(Error::domain(
        "regularized_incomplete_beta",
        format!("continued fraction failed to converge for y={x}, a={a}, b={b}"),
    ))
}

/// Lower regularized incomplete gamma P(a, x).
pub fn regularized_gamma_p(a: f64, x: f64) -> Result<f64> {
    if !(a.is_finite() && a > 0.0) || !(x.is_finite() && x >= 0.0) {
        return Err(Error::domain(
            "regularized_gamma_p",
            format!("requires a > 0 and x >= 0, got a={a}, x={x}"),
        ));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x < a + 1.0 {
        Ok(gamma_series(a, x))
    } else {
        Ok(1.0 - gamma_cf(a, x))
    }
}

/// Upper regularized incomplete gamma Q(a, x) = 1 − P(a, x).
pub fn regularized_gamma_q(a: f64, x: f64) -> Result<f64> {
    if !(a.is_finite() && a > 0.0) || !(x.is_finite() && x >= 0.0) {
        return Err(Error::domain(
            "regularized_gamma_q",
            format!("requires a > 0 and x >= 0, got a={a}, x={x}"),
        ));
    }
    if x == 0.0 {
        return Ok(1.0);
    }
    if x < a + 1.0 {
        Ok(1.0 - gamma_series(a, x))
    } else {
        Ok(gamma_cf(a, x))
    }
}

fn gamma_series(a: f64, x: f64) -> f64 {
    let ln_front = -x + a * x.ln() - stirling_shifted_log_gamma(a);
    let mut ap = a;
    let mut sum = 1.0 / a;
    let mut del = sum;
    for _ in 0..500 {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if del.abs() < sum.abs() * 1e-16 {
            break;
        }
    }
    (sum * ln_front.exp()).clamp(0.0, 1.0)
}

fn gamma_cf(a: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let ln_front = -x + a * x.ln() - stirling_shifted_log_gamma(a);
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..500 {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
    }
    (ln_front.exp() * h).clamp(0.0, 1.0)
}

fn stirling_shifted_log_gamma(x: f64) -> f64 {
    // log_gamma without the Result wrapper; callers guarantee x > 0.
    let mut shift = 0.0;
    let mut z = x;
    while z < 10.0 {
        shift -= z.ln();
        z += 1.0;
    }
    stirling_log_gamma(z) + shift
}

/// Complementary error function, via the regularized incomplete gamma.
pub fn erfc(z: f64) -> f64 {
    if z < 0.0 {
        return 2.0 - erfc(-z);
    }
    if z == 0.0 {
        return 1.0;
    }
    regularized_gamma_q(0.5, z * z).unwrap_or(0.0)
}

/// Standard normal cumulative distribution function.
pub fn normal_cdf(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 - 0.5 * erfc(x / SQRT_2)
    } else {
        0.5 * erfc(-x / SQRT_2)
    }
}

/// Standard normal quantile Φ⁻¹(p) for p in (0, 1).
///
/// Acklam's rational approximation refined by one Halley step against
/// [`normal_cdf`]; absolute error well below 1e-9 across the domain.
pub fn normal_quantile(p: f64) -> Result<f64> {
    if !(p.is_finite() && p > 0.0 && p < 1.0) {
        return Err(Error::domain(
            "normal_quantile",
            format!("requires p in (0, 1), got {p}"),
        ));
    }
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383577518672690e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    const P_LOW: f64 = 0.02425;

    let x = if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };

    // One Halley refinement step
    let e = normal_cdf(x) - p;
    let u = e * (2.0 * std::f64::consts::PI).sqrt() * (x * x / 2.0).exp();
    Ok(x - u / (1.0 + x * u / 2.0))
}

/// Standard normal density.
pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Survival function of the chi-squared distribution with `df` degrees of
/// freedom: P(X > x).
pub fn chi_square_sf(x: f64, df: f64) -> Result<f64> {
    if !(df.is_finite() && df > 0.0) {
        return Err(Error::domain(
            "chi_square_sf",
            format!("requires df > 0, got {df}"),
        ));
    }
    if !(x.is_finite() && x >= 0.0) {
        return Err(Error::domain(
            "chi_square_sf",
            format!("requires x >= 0, got {x}"),
        ));
    }
    regularized_gamma_q(df / 2.0, x / 2.0)
}

/// Survival function of the Kolmogorov distribution:
/// Q(λ) = 2 Σ_{k≥1} (−1)^{k−1} exp(−2 k² λ²).
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda <= 0.01 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=200 {
        let term = (-2.0 * (k as f64) * (k as f64) * lambda * lambda).exp();
        sum += sign * term;
        if term < 1e-17 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Kolmogorov–Smirnov distance between a sorted sample and a continuous CDF.
pub fn ks_statistic(sorted: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    d
}

/// Approximate p-value for a one-sample KS test with statistic `d` on `n`
/// observations (Stephens' effective-sample-size correction).
pub fn ks_p_value(n: usize, d: f64) -> f64 {
    let sn = (n as f64).sqrt();
    kolmogorov_sf(d * (sn + 0.12 + 0.11 / sn))
}
