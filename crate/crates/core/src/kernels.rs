//! Convex generators `f` with `f(1) = 0` that select the redundancy geometry.
//!
//! Every kernel is evaluated in natural-log units. The value at `t = 0` is the
//! right limit `lim_{s→0+} f(s)`, derived analytically per kind:
//!
//! | kind | f(t) | f(0+) | f'(1) | f''(1) |
//! |---|---|---|---|---|
//! | `kl` | t ln t | 0 | 1 | 1 |
//! | `chi2` | ½(t−1)² | ½ | 0 | 1 |
//! | `power:α` | (t^α − 1 − α(t−1)) / (α(α−1)) | 1/α for α > 0, +∞ for α < 0 | 0 | 1 |
//! | `hellinger2` | (√t − 1)² | 1 | 0 | ½ |
//! | `js` | ½[t ln(2t/(1+t)) + ln(2/(1+t))] | ½ ln 2 | 0 | ¼ |
//!
//! The power family is the standard α-divergence generator. It tends to the KL
//! generator (up to an affine term) as α → 1 and equals `chi2` at α = 2.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// A convex kernel `f` used in `D_f(P ‖ Q) = E_Q[f(dP/dQ)]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Kernel {
    Kl,
    ChiSquared,
    /// α-divergence generator; α must avoid {0, 1}.
    PowerAlpha(f64),
    SquaredHellinger,
    JensenShannon,
}

impl Kernel {
    /// All kernel kinds with a representative power exponent, handy for sweeps.
    pub const ALL: [Kernel; 5] = [
        Kernel::Kl,
        Kernel::ChiSquared,
        Kernel::PowerAlpha(0.5),
        Kernel::SquaredHellinger,
        Kernel::JensenShannon,
    ];

    /// Builds a power kernel, rejecting the degenerate exponents 0 and 1.
    pub fn power(alpha: f64) -> Result<Self> {
        let kernel = Kernel::PowerAlpha(alpha);
        kernel.validate()?;
        Ok(kernel)
    }

    pub fn validate(&self) -> Result<()> {
        if let Kernel::PowerAlpha(alpha) = *self {
            if !alpha.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "power kernel exponent must be finite, got {alpha}"
                )));
            }
            if alpha == 0.0 || alpha == 1.0 {
                return Err(Error::InvalidParameter(format!(
                    "power kernel exponent {alpha} is degenerate; use the kl kernel instead"
                )));
            }
        }
        Ok(())
    }

    /// Evaluates `f(t)` for `t ≥ 0`, using the analytic right limit at `t = 0`.
    pub fn eval(&self, t: f64) -> Result<f64> {
        self.validate()?;
        if t.is_nan() || t < 0.0 {
            return Err(Error::Domain(format!("kernel argument must be >= 0, got {t}")));
        }
        Ok(self.eval_unchecked(t))
    }

    /// Evaluation without argument checks; callers guarantee `t ≥ 0` and a valid kernel.
    pub(crate) fn eval_unchecked(&self, t: f64) -> f64 {
        match *self {
            Kernel::Kl => {
                if t == 0.0 {
                    0.0
                } else {
                    t * t.ln()
                }
            }
            Kernel::ChiSquared => 0.5 * (t - 1.0) * (t - 1.0),
            Kernel::PowerAlpha(alpha) => {
                if t == 0.0 {
                    if alpha > 0.0 {
                        1.0 / alpha
                    } else {
                        f64::INFINITY
                    }
                } else {
                    (t.powf(alpha) - 1.0 - alpha * (t - 1.0)) / (alpha * (alpha - 1.0))
                }
            }
            Kernel::SquaredHellinger => {
                let r = t.sqrt() - 1.0;
                r * r
            }
            Kernel::JensenShannon => {
                if t == 0.0 {
                    0.5 * std::f64::consts::LN_2
                } else {
                    // both logs written with ln_1p for accuracy near t = 1
                    let d = (t - 1.0) / (1.0 + t);
                    0.5 * (t * d.ln_1p() + (-d).ln_1p())
                }
            }
        }
    }

    /// `f'(1)`.
    pub fn derivative_at_one(&self) -> f64 {
        match self {
            Kernel::Kl => 1.0,
            _ => 0.0,
        }
    }

    /// `f''(1)`: the local curvature that fixes the quadratic behaviour near independence.
    pub fn curvature_at_one(&self) -> f64 {
        match self {
            Kernel::Kl | Kernel::ChiSquared | Kernel::PowerAlpha(_) => 1.0,
            Kernel::SquaredHellinger => 0.5,
            Kernel::JensenShannon => 0.25,
        }
    }

    /// `max_{t ∈ [lo, hi]} f(t)`, attained at an endpoint by convexity.
    pub fn max_on_interval(&self, lo: f64, hi: f64) -> Result<f64> {
        if lo > hi {
            return Err(Error::Domain(format!("empty interval [{lo}, {hi}]")));
        }
        Ok(self.eval(lo)?.max(self.eval(hi)?))
    }
}

/// Free-function form of [`Kernel::eval`].
pub fn eval_kernel(kernel: Kernel, t: f64) -> Result<f64> {
    kernel.eval(t)
}

/// Free-function form of [`Kernel::curvature_at_one`].
pub fn curvature_at_one(kernel: Kernel) -> f64 {
    kernel.curvature_at_one()
}

impl fmt::Display for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Kernel::Kl => f.write_str("kl"),
            Kernel::ChiSquared => f.write_str("chi2"),
            Kernel::PowerAlpha(alpha) => write!(f, "power:{alpha}"),
            Kernel::SquaredHellinger => f.write_str("hellinger2"),
            Kernel::JensenShannon => f.write_str("js"),
        }
    }
}

impl FromStr for Kernel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "kl" => Ok(Kernel::Kl),
            "chi2" => Ok(Kernel::ChiSquared),
            "hellinger2" => Ok(Kernel::SquaredHellinger),
            "js" => Ok(Kernel::JensenShannon),
            other => match other.strip_prefix("power:") {
                Some(alpha) => {
                    let alpha: f64 = alpha
                        .trim()
                        .parse()
                        .map_err(|_| Error::InvalidParameter(format!("bad power kernel exponent {alpha:?}")))?;
                    Kernel::power(alpha)
                }
                None => Err(Error::InvalidParameter(format!(
                    "unknown kernel {other:?} (expected kl, chi2, power:<alpha>, hellinger2, js)"
                ))),
            },
        }
    }
}
