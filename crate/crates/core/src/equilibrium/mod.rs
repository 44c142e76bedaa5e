//! Redundancy balance: `Φ(R) = D(R) + λR`, its minimizer, noisy dynamics
//! around it, the sandwich-bounded error curve and a U-shape fit over
//! measured `(R, score)` points.

mod dynamics;
mod fit;
mod search;

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

pub use dynamics::{simulate_band, SimulationConfig, StepSchedule, Trajectory, DEFAULT_WINDOW_FRACTION};
pub use fit::{ushape_fit, UShapeFit};
pub use search::{
    find_equilibrium, find_equilibrium_with, sandwich_optimum, sandwich_optimum_with, Equilibrium, SandwichModel,
    SandwichOptimum, SearchOptions, DEFAULT_GRID,
};

/// Shared scalar function.
pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Risk curve `D(R)` on a closed interval, with an optional analytic derivative.
#[derive(Clone)]
pub struct RiskCurve {
    lo: f64,
    hi: f64,
    value: ScalarFn,
    derivative: Option<ScalarFn>,
}

impl fmt::Debug for RiskCurve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RiskCurve")
            .field("domain", &(self.lo, self.hi))
            .field("analytic_derivative", &self.derivative.is_some())
            .finish()
    }
}

impl RiskCurve {
    pub fn new(lo: f64, hi: f64, value: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::Domain(format!(
                "curve domain [{lo}, {hi}] is empty or unbounded"
            )));
        }
        Ok(Self {
            lo,
            hi,
            value: Arc::new(value),
            derivative: None,
        })
    }

    pub fn with_derivative(mut self, derivative: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.derivative = Some(Arc::new(derivative));
        self
    }

    /// `curvature·(R − center)² + offset`.
    pub fn quadratic(center: f64, curvature: f64, offset: f64, lo: f64, hi: f64) -> Result<Self> {
        Ok(
            Self::new(lo, hi, move |r| curvature * (r - center) * (r - center) + offset)?
                .with_derivative(move |r| 2.0 * curvature * (r - center)),
        )
    }

    /// `max(a − R, 0) + max(R − b, 0)`: flat on `[a, b]`.
    pub fn valley(a: f64, b: f64, lo: f64, hi: f64) -> Result<Self> {
        if a > b {
            return Err(Error::InvalidParameter(format!("valley floor [{a}, {b}] is reversed")));
        }
        Self::new(lo, hi, move |r| (a - r).max(0.0) + (r - b).max(0.0))
    }

    pub fn linear(slope: f64, intercept: f64, lo: f64, hi: f64) -> Result<Self> {
        Ok(Self::new(lo, hi, move |r| slope * r + intercept)?.with_derivative(move |_| slope))
    }

    /// Piecewise-linear interpolation through `(R, D)` knots; the domain is the knot range.
    pub fn tabulated(mut knots: Vec<(f64, f64)>) -> Result<Self> {
        if knots.len() < 2 {
            return Err(Error::Domain("a tabulated curve needs at least 2 knots".into()));
        }
        if knots.iter().any(|(r, d)| !r.is_finite() || !d.is_finite()) {
            return Err(Error::Domain("tabulated curve has non-finite knots".into()));
        }
        knots.sort_by(|a, b| a.0.total_cmp(&b.0));
        if knots.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::Domain("tabulated curve has repeated abscissae".into()));
        }
        let (lo, hi) = (knots[0].0, knots[knots.len() - 1].0);
        Self::new(lo, hi, move |r| {
            let i = knots.partition_point(|k| k.0 <= r).clamp(1, knots.len() - 1);
            let ((r0, d0), (r1, d1)) = (knots[i - 1], knots[i]);
            d0 + (d1 - d0) * (r - r0) / (r1 - r0)
        })
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn contains(&self, r: f64) -> bool {
        let slack = 1e-12 * (self.hi - self.lo).max(1.0);
        r >= self.lo - slack && r <= self.hi + slack
    }

    pub fn eval(&self, r: f64) -> Result<f64> {
        if !self.contains(r) {
            return Err(Error::Domain(format!(
                "R = {r} outside curve domain [{}, {}]",
                self.lo, self.hi
            )));
        }
        Ok((self.value)(r))
    }

    pub(crate) fn eval_unchecked(&self, r: f64) -> f64 {
        (self.value)(r)
    }

    /// `D'(R)`: analytic when supplied, otherwise a central difference that
    /// turns one-sided at the domain ends.
    pub fn slope(&self, r: f64) -> f64 {
        if let Some(d) = &self.derivative {
            return d(r);
        }
        let h = 1e-6 * (self.hi - self.lo);
        let a = (r - h).max(self.lo);
        let b = (r + h).min(self.hi);
        ((self.value)(b) - (self.value)(a)) / (b - a)
    }
}

/// `Φ(R) = D(R) + λR` with `λ > 0`.
#[derive(Debug, Clone)]
pub struct EquilibriumProblem {
    curve: RiskCurve,
    lambda: f64,
}

impl EquilibriumProblem {
    pub fn new(curve: RiskCurve, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "lambda must be positive and finite, got {lambda}"
            )));
        }
        Ok(Self { curve, lambda })
    }

    pub fn curve(&self) -> &RiskCurve {
        &self.curve
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn phi(&self, r: f64) -> Result<f64> {
        Ok(self.curve.eval(r)? + self.lambda * r)
    }

    pub(crate) fn phi_unchecked(&self, r: f64) -> f64 {
        self.curve.eval_unchecked(r) + self.lambda * r
    }

    /// `Φ'(R) = D'(R) + λ`.
    pub fn phi_slope(&self, r: f64) -> f64 {
        self.curve.slope(r) + self.lambda
    }
}

/// Free-function form of [`EquilibriumProblem::phi`].
pub fn phi(problem: &EquilibriumProblem, r: f64) -> Result<f64> {
    problem.phi(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn problem(lambda: f64) -> EquilibriumProblem {
        EquilibriumProblem::new(RiskCurve::quadratic(0.5, 1.0, 0.0, 0.0, 1.0).unwrap(), lambda).unwrap()
    }

    #[test]
    fn phi_examples() {
        assert_abs_diff_eq!(phi(&problem(0.2), 0.5).unwrap(), 0.1, epsilon = 1e-15);
        assert_abs_diff_eq!(phi(&problem(0.2), 0.4).unwrap(), 0.09, epsilon = 1e-15);
        let tiny = problem(1e-300);
        for r in [0.0, 0.3, 0.77, 1.0] {
            assert_eq!(phi(&tiny, r).unwrap(), (r - 0.5) * (r - 0.5));
        }
    }

    #[test]
    fn phi_errors() {
        assert!(matches!(phi(&problem(0.2), 1.5), Err(Error::Domain(_))));
        let curve = RiskCurve::quadratic(0.5, 1.0, 0.0, 0.0, 1.0).unwrap();
        assert!(EquilibriumProblem::new(curve.clone(), 0.0).is_err());
        assert!(EquilibriumProblem::new(curve, f64::NAN).is_err());
        assert!(RiskCurve::new(1.0, 1.0, |r| r).is_err());
    }

    #[test]
    fn numeric_slope_matches_analytic() {
        let analytic = RiskCurve::quadratic(0.3, 2.0, 1.0, 0.0, 1.0).unwrap();
        let numeric = RiskCurve::new(0.0, 1.0, |r| 2.0 * (r - 0.3) * (r - 0.3) + 1.0).unwrap();
        for r in [0.0, 0.1, 0.5, 1.0] {
            assert_abs_diff_eq!(analytic.slope(r), numeric.slope(r), epsilon = 1e-5);
        }
    }

    #[test]
    fn tabulated_interpolates() {
        let t = RiskCurve::tabulated(vec![(1.0, 0.0), (0.0, 1.0), (0.5, 0.0)]).unwrap();
        assert_eq!(t.domain(), (0.0, 1.0));
        assert_abs_diff_eq!(t.eval(0.25).unwrap(), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(t.eval(1.0).unwrap(), 0.0, epsilon = 1e-15);
        assert!(RiskCurve::tabulated(vec![(0.0, 1.0), (0.0, 2.0)]).is_err());
    }
}
