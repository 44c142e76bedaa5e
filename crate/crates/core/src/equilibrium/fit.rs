use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Least-squares quadratic `score ≈ a R² + b R + c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UShapeFit {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    /// `−b / 2a`; `None` when the fit is numerically linear.
    pub vertex: Option<f64>,
    /// Vertex strictly inside the sampled range with the requested curvature sign.
    pub interior: bool,
}

impl UShapeFit {
    pub fn predict(&self, r: f64) -> f64 {
        (self.a * r + self.b) * r + self.c
    }

    pub fn vertex_score(&self) -> Option<f64> {
        self.vertex.map(|v| self.predict(v))
    }
}

/// Fits a quadratic to `(R, score)` points. With `minimize` the optimum is a
/// minimum (convex fit); otherwise a maximum (concave fit).
pub fn ushape_fit(points: &[(f64, f64)], minimize: bool) -> Result<UShapeFit> {
    if points.iter().any(|(r, s)| !r.is_finite() || !s.is_finite()) {
        return Err(Error::Domain("fit points must be finite".into()));
    }
    let mut abscissae: Vec<f64> = points.iter().map(|p| p.0).collect();
    abscissae.sort_by(f64::total_cmp);
    abscissae.dedup();
    if abscissae.len() < 3 {
        return Err(Error::Rank(format!(
            "a quadratic fit needs at least 3 distinct R values, got {}",
            abscissae.len()
        )));
    }
    let (r_min, r_max) = (abscissae[0], abscissae[abscissae.len() - 1]);

    let n = points.len();
    let design = DMatrix::from_fn(n, 3, |i, j| points[i].0.powi(2 - j as i32));
    let target = DVector::from_iterator(n, points.iter().map(|p| p.1));
    let coef = design
        .svd(true, true)
        .solve(&target, 1e-14)
        .map_err(|e| Error::Rank(e.to_string()))?;
    let (a, b, c) = (coef[0], coef[1], coef[2]);

    let span = r_max - r_min;
    let scale = 1.0 + points.iter().fold(0.0f64, |m, p| m.max(p.1.abs()));
    let vertex = (a.abs() * span * span > 1e-9 * scale).then(|| -b / (2.0 * a));
    let curvature_ok = if minimize { a > 0.0 } else { a < 0.0 };
    let interior = vertex.is_some_and(|v| curvature_ok && r_min < v && v < r_max);
    Ok(UShapeFit {
        a,
        b,
        c,
        vertex,
        interior,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    /// Normal equations solved by Cramer's rule.
    fn normal_equation_oracle(points: &[(f64, f64)]) -> (f64, f64, f64) {
        let mut s = [0.0f64; 5];
        let mut t = [0.0f64; 3];
        for &(r, y) in points {
            for (k, sk) in s.iter_mut().enumerate() {
                *sk += r.powi(k as i32);
            }
            for (k, tk) in t.iter_mut().enumerate() {
                *tk += y * r.powi(k as i32);
            }
        }
        // unknowns (c, b, a); matrix entry (i, j) = s[i + j]
        let m = |i: usize, j: usize| s[i + j];
        let det3 = |c0: [f64; 3], c1: [f64; 3], c2: [f64; 3]| {
            c0[0] * (c1[1] * c2[2] - c1[2] * c2[1]) - c1[0] * (c0[1] * c2[2] - c0[2] * c2[1])
                + c2[0] * (c0[1] * c1[2] - c0[2] * c1[1])
        };
        let col = |j: usize| [m(0, j), m(1, j), m(2, j)];
        let d = det3(col(0), col(1), col(2));
        let c = det3(t, col(1), col(2)) / d;
        let b = det3(col(0), t, col(2)) / d;
        let a = det3(col(0), col(1), t) / d;
        (a, b, c)
    }

    #[test]
    fn recovers_exact_parabola() {
        let pts: Vec<(f64, f64)> = [0.2, 0.5, 0.8]
            .iter()
            .map(|&r| (r, 1.0 - (r - 0.5) * (r - 0.5)))
            .collect();
        let fit = ushape_fit(&pts, false).unwrap();
        assert_abs_diff_eq!(fit.a, -1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(fit.vertex.unwrap(), 0.5, epsilon = 1e-10);
        assert!(fit.interior);
        assert!(!ushape_fit(&pts, true).unwrap().interior);
    }

    #[test]
    fn collinear_points_have_no_vertex() {
        let pts = [(0.0, 1.0), (0.5, 2.0), (1.0, 3.0), (1.5, 4.0)];
        let fit = ushape_fit(&pts, false).unwrap();
        assert_eq!(fit.vertex, None);
        assert!(!fit.interior);
    }

    #[test]
    fn rank_errors() {
        assert!(matches!(
            ushape_fit(&[(0.1, 1.0), (0.1, 2.0), (0.4, 3.0)], true),
            Err(Error::Rank(_))
        ));
        assert!(matches!(
            ushape_fit(&[(0.1, 1.0), (0.2, 2.0)], true),
            Err(Error::Rank(_))
        ));
    }

    #[test]
    fn measured_points_match_normal_equations() {
        let pts = [(0.96, 35.6), (0.96, 36.3), (0.51, 41.4), (0.19, 39.6)];
        let fit = ushape_fit(&pts, false).unwrap();
        let (a, b, c) = normal_equation_oracle(&pts);
        assert_abs_diff_eq!(fit.a, a, epsilon = 1e-8);
        assert_abs_diff_eq!(fit.b, b, epsilon = 1e-8);
        assert_abs_diff_eq!(fit.c, c, epsilon = 1e-8);
        // frozen from an independent normal-equation solve
        assert_abs_diff_eq!(fit.a, -23.033910533912422, epsilon = 1e-8);
        assert_abs_diff_eq!(fit.vertex.unwrap(), 0.4721025841816876, epsilon = 1e-10);
        assert!(fit.interior);
    }
}
