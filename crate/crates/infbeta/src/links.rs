//! Link functions for the three linear predictors.
//!
//! Unit-interval links (logit, probit, cloglog, loglog) map (0, 1) onto the
//! real line; positive links (log, sqrt) map (0, ∞). All links are strictly
//! increasing and twice differentiable on their domain, and every inverse is
//! clamped away from the boundary so downstream IRLS weights stay finite.

use crate::error::{Error, Result};
use crate::numerics::{normal_cdf, normal_pdf, normal_quantile};
use serde::{Deserialize, Serialize};

/// Margin used when clamping inverse-link outputs to the open domain.
pub const CLAMP_MARGIN: f64 = 1e-12;

/// Largest value an unbounded (precision) inverse link may return.
const POSITIVE_CAP: f64 = 1e300;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LinkKind {
    Logit,
    Probit,
    Cloglog,
    Loglog,
    Log,
    Sqrt,
}

impl LinkKind {
    /// Links whose domain is the open unit interval (suitable for α and μ).
    pub fn is_unit_interval(self) -> bool {
        matches!(
            self,
            LinkKind::Logit | LinkKind::Probit | LinkKind::Cloglog | LinkKind::Loglog
        )
    }

    /// η = h(x) for x strictly inside the link's domain.
    pub fn apply(self, x: f64) -> Result<f64> {
        self.check_domain(x)?;
        Ok(match self {
            LinkKind::Logit => (x / (1.0 - x)).ln(),
            LinkKind::Probit => normal_quantile(x)?,
            LinkKind::Cloglog => (-(1.0 - x).ln()).ln(),
            LinkKind::Loglog => -(-x.ln()).ln(),
            LinkKind::Log => x.ln(),
            LinkKind::Sqrt => x.sqrt(),
        })
    }

    /// x = h⁻¹(η), clamped to the open domain at a [`CLAMP_MARGIN`] margin.
    pub fn inverse(self, eta: f64) -> Result<f64> {
        if !eta.is_finite() {
            return Err(Error::domain("link_inverse", format!("non-finite predictor {eta}")));
        }
        let x = match self {
            LinkKind::Logit => {
                if eta >= 0.0 {
                    1.0 / (1.0 + (-eta).exp())
                } else {
                    let e = eta.exp();
                    e / (1.0 + e)
                }
            }
            LinkKind::Probit => normal_cdf(eta),
            LinkKind::Cloglog => 1.0 - (-eta.exp()).exp(),
            LinkKind::Loglog => (-(-eta).exp()).exp(),
            LinkKind::Log => eta.exp(),
            LinkKind::Sqrt => {
                if eta < 0.0 {
                    return Err(Error::domain(
                        "link_inverse",
                        format!("sqrt link requires a non-negative predictor, got {eta}"),
                    ));
                }
                eta * eta
            }
        };
        Ok(if self.is_unit_interval() {
            x.clamp(CLAMP_MARGIN, 1.0 - CLAMP_MARGIN)
        } else {
            x.clamp(CLAMP_MARGIN, POSITIVE_CAP)
        })
    }

    /// Analytic first and second derivatives (h′(x), h″(x)).
    pub fn derivatives(self, x: f64) -> Result<(f64, f64)> {
        self.check_domain(x)?;
        Ok(match self {
            LinkKind::Logit => {
                let v = x * (1.0 - x);
                (1.0 / v, (2.0 * x - 1.0) / (v * v))
            }
            LinkKind::Probit => {
                let q = normal_quantile(x)?;
                let pdf = normal_pdf(q);
                (1.0 / pdf, q / (pdf * pdf))
            }
            LinkKind::Cloglog => {
                // u = -ln(1-x): h' = 1/(u(1-x)), h'' = (u-1)/(u²(1-x)²)
                let om = 1.0 - x;
                let u = -om.ln();
                (1.0 / (u * om), (u - 1.0) / (u * u * om * om))
            }
            LinkKind::Loglog => {
                // w = -ln x: h' = 1/(xw), h'' = (1+ln x)/(x² w²)
                let w = -x.ln();
                (1.0 / (x * w), (1.0 - w) / (x * x * w * w))
            }
            LinkKind::Log => (1.0 / x, -1.0 / (x * x)),
            LinkKind::Sqrt => {
                let s = x.sqrt();
                (0.5 / s, -0.25 / (s * s * s))
            }
        })
    }

    fn check_domain(self, x: f64) -> Result<()> {
        let ok = if self.is_unit_interval() {
            x.is_finite() && x > 0.0 && x < 1.0
        } else {
            x.is_finite() && x > 0.0
        };
        if ok {
            Ok(())
        } else {
            Err(Error::domain(
                "link",
                format!("{x} is outside the {self} link's open domain"),
            ))
        }
    }
}

impl std::fmt::Display for LinkKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            LinkKind::Logit => "logit",
            LinkKind::Probit => "probit",
            LinkKind::Cloglog => "cloglog",
            LinkKind::Loglog => "loglog",
            LinkKind::Log => "log",
            LinkKind::Sqrt => "sqrt",
        };
        write!(f, "{s}")
    }
}

impl std::str::FromStr for LinkKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "logit" => Ok(LinkKind::Logit),
            "probit" => Ok(LinkKind::Probit),
            "cloglog" => Ok(LinkKind::Cloglog),
            "loglog" => Ok(LinkKind::Loglog),
            "log" => Ok(LinkKind::Log),
            "sqrt" => Ok(LinkKind::Sqrt),
            other => Err(Error::Config(format!(
                "unknown link '{other}' (expected logit, probit, cloglog, loglog, log, or sqrt)"
            ))),
        }
    }
}

pub const ALL_LINKS: [LinkKind; 6] = [
    LinkKind::Logit,
    LinkKind::Probit,
    LinkKind::Cloglog,
    LinkKind::Loglog,
    LinkKind::Log,
    LinkKind::Sqrt,
];
