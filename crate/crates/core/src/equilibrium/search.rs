use crate::error::{Error, Result};

use super::{EquilibriumProblem, RiskCurve, ScalarFn};

/// Grid points scanned before golden-section refinement.
pub const DEFAULT_GRID: usize = 256;

const INV_PHI: f64 = 0.618_033_988_749_894_8;
const MAX_GOLDEN_ITERS: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchOptions {
    pub grid: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self { grid: DEFAULT_GRID }
    }
}

/// Located minimizer of `Φ`. `interior` is false when the best point is a domain endpoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Equilibrium {
    pub r_star: f64,
    pub phi: f64,
    pub interior: bool,
}

#[derive(Debug, Clone, Copy)]
struct Minimum {
    x: f64,
    value: f64,
    interior: bool,
}

fn golden_section(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..MAX_GOLDEN_ITERS {
        if b - a <= tol {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let mid = 0.5 * (a + b);
    let fm = f(mid);
    [(c, fc), (d, fd)]
        .into_iter()
        .fold((mid, fm), |best, cand| if cand.1 < best.1 { cand } else { best })
}

/// Grid scan, then golden-section refinement of every local grid minimum.
/// Endpoints are always candidates; ties keep the earlier (smaller) point.
fn grid_minimize(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64, tol: f64, grid: usize) -> Result<Minimum> {
    let n = grid.max(3);
    let xs: Vec<f64> = (0..n)
        .map(|k| {
            if k == n - 1 {
                hi
            } else {
                lo + (hi - lo) * k as f64 / (n - 1) as f64
            }
        })
        .collect();
    let mut vs = Vec::with_capacity(n);
    for (k, &x) in xs.iter().enumerate() {
        let v = f(x);
        if !v.is_finite() {
            return Err(Error::Numerical {
                step: k,
                detail: format!("objective is {v} at R = {x}"),
            });
        }
        vs.push(v);
    }

    let mut best = Minimum {
        x: lo,
        value: vs[0],
        interior: false,
    };
    if vs[n - 1] < best.value {
        best = Minimum {
            x: hi,
            value: vs[n - 1],
            interior: false,
        };
    }
    for k in 0..n {
        let left_ok = k == 0 || vs[k] < vs[k - 1];
        let right_ok = k == n - 1 || vs[k] <= vs[k + 1];
        if !(left_ok && right_ok) {
            continue;
        }
        let a = xs[k.saturating_sub(1)];
        let b = xs[(k + 1).min(n - 1)];
        let (x, value) = golden_section(f, a, b, tol);
        let interior = x - lo > tol && hi - x > tol;
        if interior && value < best.value {
            best = Minimum { x, value, interior };
        }
    }
    Ok(best)
}

fn check_tol(tol: f64, options: &SearchOptions) -> Result<()> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    if options.grid < 3 {
        return Err(Error::InvalidParameter(format!(
            "grid needs at least 3 points, got {}",
            options.grid
        )));
    }
    Ok(())
}

/// Minimizer of `Φ(R) = D(R) + λR` over the curve domain, using the default grid.
pub fn find_equilibrium(problem: &EquilibriumProblem, tol: f64) -> Result<Equilibrium> {
    find_equilibrium_with(problem, tol, &SearchOptions::default())
}

pub fn find_equilibrium_with(problem: &EquilibriumProblem, tol: f64, options: &SearchOptions) -> Result<Equilibrium> {
    check_tol(tol, options)?;
    let (lo, hi) = problem.curve().domain();
    let m = grid_minimize(&|r| problem.phi_unchecked(r), lo, hi, tol, options.grid)?;
    Ok(Equilibrium {
        r_star: m.x,
        phi: m.value,
        interior: m.interior,
    })
}

/// Error curve `E(R)` on `[0, C0]` bracketed by `g_robust(R) ≤ E(R) ≤ g_info(C0 − R)`.
#[derive(Clone)]
pub struct SandwichModel {
    error_curve: RiskCurve,
    c0: f64,
    r1: f64,
    r2: f64,
    g_robust: ScalarFn,
    g_info: ScalarFn,
}

impl std::fmt::Debug for SandwichModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SandwichModel")
            .field("error_curve", &self.error_curve)
            .field("c0", &self.c0)
            .field("r1", &self.r1)
            .field("r2", &self.r2)
            .finish_non_exhaustive()
    }
}

impl SandwichModel {
    pub fn new(
        error_curve: RiskCurve,
        c0: f64,
        r1: f64,
        r2: f64,
        g_robust: ScalarFn,
        g_info: ScalarFn,
    ) -> Result<Self> {
        if !(c0 > 0.0 && c0.is_finite()) {
            return Err(Error::InvalidParameter(format!("C0 must be positive, got {c0}")));
        }
        if !(0.0 < r1 && r1 <= r2 && r2 < c0) {
            return Err(Error::InvalidParameter(format!(
                "need 0 < R1 <= R2 < C0, got R1 = {r1}, R2 = {r2}, C0 = {c0}"
            )));
        }
        if !(error_curve.contains(0.0) && error_curve.contains(c0)) {
            let (lo, hi) = error_curve.domain();
            return Err(Error::Domain(format!(
                "error curve domain [{lo}, {hi}] does not cover [0, {c0}]"
            )));
        }
        Ok(Self {
            error_curve,
            c0,
            r1,
            r2,
            g_robust,
            g_info,
        })
    }

    pub fn c0(&self) -> f64 {
        self.c0
    }

    pub fn stability_interval(&self) -> (f64, f64) {
        (self.r1, self.r2)
    }

    pub fn error_curve(&self) -> &RiskCurve {
        &self.error_curve
    }
}

/// Interior minimizer of the error curve. `plateau_interval` is the run of
/// grid points whose error is within tolerance of the minimum, reported when
/// it spans at least two grid cells.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SandwichOptimum {
    pub r_star: f64,
    pub error: f64,
    pub plateau: bool,
    pub plateau_interval: Option<(f64, f64)>,
}

pub fn sandwich_optimum(model: &SandwichModel, tol: f64) -> Result<SandwichOptimum> {
    sandwich_optimum_with(model, tol, &SearchOptions::default())
}

pub fn sandwich_optimum_with(model: &SandwichModel, tol: f64, options: &SearchOptions) -> Result<SandwichOptimum> {
    check_tol(tol, options)?;
    let e = |r: f64| model.error_curve.eval_unchecked(r);
    let (c0, n) = (model.c0, options.grid);

    for k in 0..n {
        let r = c0 * k as f64 / (n - 1) as f64;
        let (lower, value, upper) = ((model.g_robust)(r), e(r), (model.g_info)(c0 - r));
        let slack = 1e-12 * (1.0 + value.abs());
        if !(lower <= value + slack) || !(value <= upper + slack) {
            return Err(Error::Precondition(format!(
                "sandwich bound violated at grid point {k} (R = {r}): g_robust = {lower}, E = {value}, g_info(C0 - R) = {upper}"
            )));
        }
    }

    let h = c0 / (n - 1) as f64;
    let start_slope = (e(h) - e(0.0)) / h;
    let end_slope = (e(c0) - e(c0 - h)) / h;
    if !(start_slope < 0.0) {
        return Err(Error::Assumption(format!(
            "error curve is not decreasing near R = 0 (slope {start_slope})"
        )));
    }
    if !(end_slope > 0.0) {
        return Err(Error::Assumption(format!(
            "error curve is not increasing near R = C0 (slope {end_slope})"
        )));
    }

    let (r1, r2) = (model.r1, model.r2);
    let m = grid_minimize(&e, r1, r2, tol, n)?;
    if !m.interior {
        return Err(Error::Assumption(format!(
            "error is minimized on the boundary of [{r1}, {r2}] at R = {}",
            m.x
        )));
    }

    let xs: Vec<f64> = (0..n).map(|k| r1 + (r2 - r1) * k as f64 / (n - 1) as f64).collect();
    let vs: Vec<f64> = xs.iter().map(|&x| e(x)).collect();
    let (kmin, vmin) = vs
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (k, &v)| if v < acc.1 { (k, v) } else { acc });
    let near = |v: f64| v <= vmin + tol.max(1e-12 * (1.0 + vmin.abs()));
    let mut first = kmin;
    while first > 0 && near(vs[first - 1]) {
        first -= 1;
    }
    let mut last = kmin;
    while last + 1 < n && near(vs[last + 1]) {
        last += 1;
    }
    let plateau = last - first >= 2;
    Ok(SandwichOptimum {
        r_star: m.x,
        error: m.value,
        plateau,
        plateau_interval: plateau.then(|| (xs[first], xs[last])),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::sync::Arc;

    fn quadratic_problem(lambda: f64) -> EquilibriumProblem {
        EquilibriumProblem::new(RiskCurve::quadratic(0.5, 1.0, 0.0, 0.0, 1.0).unwrap(), lambda).unwrap()
    }

    fn central_slope(p: &EquilibriumProblem, r: f64, h: f64) -> f64 {
        (p.phi_unchecked(r + h) - p.phi_unchecked(r - h)) / (2.0 * h)
    }

    #[test]
    fn golden_section_on_parabola() {
        let (x, _) = golden_section(&|x| (x - 0.3) * (x - 0.3), 0.0, 1.0, 1e-9);
        assert_abs_diff_eq!(x, 0.3, epsilon = 1e-8);
    }

    #[test]
    fn equilibrium_examples() {
        let eq = find_equilibrium(&quadratic_problem(0.2), 1e-9).unwrap();
        assert_abs_diff_eq!(eq.r_star, 0.4, epsilon = 1e-8);
        assert!(eq.interior);

        let eq = find_equilibrium(&quadratic_problem(1e-12), 1e-9).unwrap();
        assert_abs_diff_eq!(eq.r_star, 0.5, epsilon = 1e-8);

        let rising = RiskCurve::new(0.0, 1.0, |r| r * r + r).unwrap();
        let eq = find_equilibrium(&EquilibriumProblem::new(rising, 1.0).unwrap(), 1e-9).unwrap();
        assert_eq!(eq.r_star, 0.0);
        assert!(!eq.interior);
    }

    #[test]
    fn rejects_bad_tolerance() {
        assert!(matches!(
            find_equilibrium(&quadratic_problem(0.2), 0.0),
            Err(Error::InvalidParameter(_))
        ));
        assert!(find_equilibrium_with(&quadratic_problem(0.2), 1e-6, &SearchOptions { grid: 2 }).is_err());
    }

    #[test]
    fn multimodal_returns_global_minimum() {
        // two wells; the deeper one sits near 0.8
        let curve = RiskCurve::new(0.0, 1.0, |r| {
            let a = (r - 0.2) * (r - 0.2);
            let b = (r - 0.8) * (r - 0.8) - 0.05;
            a.min(b)
        })
        .unwrap();
        let eq = find_equilibrium(&EquilibriumProblem::new(curve, 1e-3).unwrap(), 1e-9).unwrap();
        assert_abs_diff_eq!(eq.r_star, 0.8 - 0.0005, epsilon = 1e-7);
    }

    #[test]
    fn first_order_condition_and_stability() {
        let tol = 1e-7;
        for lambda in [0.05, 0.2, 0.5, 0.9] {
            let p = quadratic_problem(lambda);
            let eq = find_equilibrium(&p, tol).unwrap();
            let curvature = 2.0;
            assert!(central_slope(&p, eq.r_star, 1e-4).abs() <= 10.0 * tol * curvature);
            let delta = 10.0 * tol;
            assert!(p.phi_unchecked(eq.r_star + delta) > eq.phi);
            assert!(p.phi_unchecked(eq.r_star - delta) > eq.phi);
        }
    }

    #[test]
    fn r_star_nonincreasing_in_lambda() {
        let curve = RiskCurve::new(0.0, 1.0, |r| (-3.0 * r).exp() + r * r).unwrap();
        let mut prev = f64::INFINITY;
        for i in 1..=40 {
            let p = EquilibriumProblem::new(curve.clone(), i as f64 * 0.05).unwrap();
            let r = find_equilibrium(&p, 1e-9).unwrap().r_star;
            assert!(r <= prev + 1e-8);
            prev = r;
        }
    }

    fn bounds(lower: f64, upper: f64) -> (ScalarFn, ScalarFn) {
        (Arc::new(move |_| lower), Arc::new(move |_| upper))
    }

    #[test]
    fn sandwich_vertex() {
        let (g_robust, g_info) = bounds(0.1, 10.0);
        let curve = RiskCurve::quadratic(0.45, 1.0, 0.1, 0.0, 1.0).unwrap();
        let model = SandwichModel::new(curve, 1.0, 0.2, 0.8, g_robust, g_info).unwrap();
        let opt = sandwich_optimum(&model, 1e-9).unwrap();
        assert_abs_diff_eq!(opt.r_star, 0.45, epsilon = 1e-8);
        assert!(!opt.plateau);
    }

    #[test]
    fn sandwich_plateau() {
        let (g_robust, g_info) = bounds(0.0, 10.0);
        let curve = RiskCurve::valley(0.5, 0.6, 0.0, 1.0).unwrap();
        let model = SandwichModel::new(curve, 1.0, 0.2, 0.8, g_robust, g_info).unwrap();
        let opt = sandwich_optimum(&model, 1e-9).unwrap();
        assert!((0.5..=0.6).contains(&opt.r_star));
        assert!(opt.plateau);
        let (a, b) = opt.plateau_interval.unwrap();
        assert!(a >= 0.5 - 1e-12 && b <= 0.6 + 1e-12 && b - a > 0.09);
        // the grid oracle: every grid minimum lies in the valley floor
        for k in 0..DEFAULT_GRID {
            let r = 0.2 + 0.6 * k as f64 / (DEFAULT_GRID - 1) as f64;
            if model.error_curve().eval(r).unwrap() == 0.0 {
                assert!((0.5..=0.6).contains(&r));
            }
        }
    }

    #[test]
    fn sandwich_failures() {
        let (g_robust, g_info) = bounds(-1.0, 10.0);
        let falling = RiskCurve::linear(-1.0, 1.0, 0.0, 1.0).unwrap();
        let model = SandwichModel::new(falling, 1.0, 0.2, 0.8, g_robust.clone(), g_info.clone()).unwrap();
        assert!(matches!(sandwich_optimum(&model, 1e-9), Err(Error::Assumption(_))));

        // U-shaped on [0, 1] but minimized outside [R1, R2]
        let curve = RiskCurve::quadratic(0.9, 1.0, 0.0, 0.0, 1.0).unwrap();
        let shifted = SandwichModel::new(curve.clone(), 1.0, 0.2, 0.6, g_robust, g_info).unwrap();
        assert!(matches!(sandwich_optimum(&shifted, 1e-9), Err(Error::Assumption(_))));

        let (low, high) = bounds(0.05, 10.0);
        let violating = SandwichModel::new(curve, 1.0, 0.2, 0.95, low, high).unwrap();
        match sandwich_optimum(&violating, 1e-9) {
            Err(Error::Precondition(msg)) => assert!(msg.contains("grid point")),
            other => panic!("expected a bound violation, got {other:?}"),
        }
    }

    #[test]
    fn sandwich_model_validation() {
        let (g_robust, g_info) = bounds(0.0, 1.0);
        let curve = RiskCurve::quadratic(0.5, 1.0, 0.0, 0.0, 1.0).unwrap();
        assert!(SandwichModel::new(curve.clone(), 1.0, 0.0, 0.5, g_robust.clone(), g_info.clone()).is_err());
        assert!(SandwichModel::new(curve.clone(), 1.0, 0.6, 0.5, g_robust.clone(), g_info.clone()).is_err());
        assert!(SandwichModel::new(curve, 2.0, 0.5, 0.6, g_robust, g_info).is_err());
    }
}
