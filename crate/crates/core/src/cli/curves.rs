//! Named curve families and the equilibrium problem config file.
//!
//! Curve grammar:
//!
//! - `quadratic:<center>[,<curvature>[,<offset>]]`: `curvature·(R − center)² + offset`
//! - `piecewise:<a>,<b>` (alias `valley`): `max(a − R, 0) + max(R − b, 0)`
//! - `linear:<slope>,<intercept>`
//! - `const:<value>`
//! - `table:<csv>`: piecewise-linear through `R,value` rows

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::Deserialize;

use crate::equilibrium::{RiskCurve, ScalarFn};

use super::io::InputFile;
use super::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum CurveSpec {
    Quadratic { center: f64, curvature: f64, offset: f64 },
    Valley { a: f64, b: f64 },
    Linear { slope: f64, intercept: f64 },
    Const(f64),
    Table(PathBuf),
}

impl CurveSpec {
    pub fn parse(spec: &str) -> Result<Self, CliError> {
        let (family, args) = spec.split_once(':').unwrap_or((spec, ""));
        let nums = || -> Result<Vec<f64>, CliError> {
            args.split(',')
                .filter(|s| !s.trim().is_empty())
                .map(|s| {
                    s.trim()
                        .parse::<f64>()
                        .ok()
                        .filter(|v| v.is_finite())
                        .ok_or_else(|| CliError::Usage(format!("bad number {s:?} in curve {spec:?}")))
                })
                .collect()
        };
        let arity = |v: &[f64], lo: usize, hi: usize| -> Result<(), CliError> {
            if v.len() < lo || v.len() > hi {
                return Err(CliError::Usage(format!("curve {spec:?} takes {lo}..={hi} parameters")));
            }
            Ok(())
        };
        match family {
            "quadratic" => {
                let v = nums()?;
                arity(&v, 1, 3)?;
                Ok(CurveSpec::Quadratic {
                    center: v[0],
                    curvature: v.get(1).copied().unwrap_or(1.0),
                    offset: v.get(2).copied().unwrap_or(0.0),
                })
            }
            "piecewise" | "valley" => {
                let v = nums()?;
                arity(&v, 2, 2)?;
                Ok(CurveSpec::Valley { a: v[0], b: v[1] })
            }
            "linear" => {
                let v = nums()?;
                arity(&v, 2, 2)?;
                Ok(CurveSpec::Linear {
                    slope: v[0],
                    intercept: v[1],
                })
            }
            "const" => {
                let v = nums()?;
                arity(&v, 1, 1)?;
                Ok(CurveSpec::Const(v[0]))
            }
            "table" if !args.is_empty() => Ok(CurveSpec::Table(PathBuf::from(args))),
            _ => Err(CliError::Usage(format!(
                "unknown curve {spec:?} (expected quadratic:, piecewise:, linear:, const:, table:)"
            ))),
        }
    }

    /// The curve on `[lo, hi]`; tables use their own knot range. Table files
    /// are returned so their digests can be reported.
    pub fn to_curve(&self, lo: f64, hi: f64) -> Result<(RiskCurve, Option<InputFile>), CliError> {
        let curve = match *self {
            CurveSpec::Quadratic {
                center,
                curvature,
                offset,
            } => RiskCurve::quadratic(center, curvature, offset, lo, hi)?,
            CurveSpec::Valley { a, b } => RiskCurve::valley(a, b, lo, hi)?,
            CurveSpec::Linear { slope, intercept } => RiskCurve::linear(slope, intercept, lo, hi)?,
            CurveSpec::Const(v) => RiskCurve::new(lo, hi, move |_| v)?.with_derivative(|_| 0.0),
            CurveSpec::Table(ref path) => {
                let file = InputFile::read(path)?;
                let curve = RiskCurve::tabulated(file.points()?)?;
                return Ok((curve, Some(file)));
            }
        };
        Ok((curve, None))
    }

    /// Unrestricted scalar function, used for bounding curves.
    pub fn to_fn(&self) -> Result<(ScalarFn, Option<InputFile>), CliError> {
        let f: ScalarFn = match *self {
            CurveSpec::Quadratic {
                center,
                curvature,
                offset,
            } => Arc::new(move |r| curvature * (r - center) * (r - center) + offset),
            CurveSpec::Valley { a, b } => Arc::new(move |r| (a - r).max(0.0) + (r - b).max(0.0)),
            CurveSpec::Linear { slope, intercept } => Arc::new(move |r| slope * r + intercept),
            CurveSpec::Const(v) => Arc::new(move |_| v),
            CurveSpec::Table(_) => {
                let (curve, file) = self.to_curve(0.0, 1.0)?;
                let (lo, hi) = curve.domain();
                let f: ScalarFn = Arc::new(move |r| curve.eval(r.clamp(lo, hi)).expect("clamped into domain"));
                return Ok((f, file));
            }
        };
        Ok((f, None))
    }
}

/// Equilibrium problem file (TOML). Command-line flags override every field.
///
/// ```toml
/// curve = "quadratic:0.5"
/// lambda = 0.2
/// domain = [0.0, 1.0]
/// tol = 1e-9
/// grid = 256
/// initial = 0.9
/// steps = 500
/// sigma = 0.0
/// seed = 1
/// eta = 0.1
/// decay = 0.0
/// window = 0.2
/// ```
#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub curve: Option<String>,
    pub lambda: Option<f64>,
    pub domain: Option<[f64; 2]>,
    pub tol: Option<f64>,
    pub grid: Option<usize>,
    pub initial: Option<f64>,
    pub steps: Option<usize>,
    pub sigma: Option<f64>,
    pub seed: Option<u64>,
    pub eta: Option<f64>,
    pub decay: Option<f64>,
    pub window: Option<f64>,
}

impl ProblemConfig {
    pub fn load(path: &Path) -> Result<(Self, InputFile), CliError> {
        let file = InputFile::read(path)?;
        let text = std::str::from_utf8(&file.bytes)
            .map_err(|_| CliError::Usage(format!("{}: config is not UTF-8", path.display())))?;
        let config = toml::from_str(text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        Ok((config, file))
    }
}
