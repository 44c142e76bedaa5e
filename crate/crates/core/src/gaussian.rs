//! Gaussian closed forms: total correlation `−½ ln det C`, the quadratic
//! covariance proxy `¼‖C − I‖_F²`, and the KL–Frobenius lower bound.

use nalgebra::{Cholesky, DMatrix};

use crate::discrete::JointTable;
use crate::error::{Error, Result};

const SYMMETRY_TOL: f64 = 1e-10;
const UNIT_DIAGONAL_TOL: f64 = 1e-10;

/// Symmetric unit-diagonal matrix `C` with deviation `A = C − I`.
///
/// Construction checks symmetry and the unit diagonal. Positive definiteness is
/// checked by the operations that need it, so a singular sample correlation
/// (for example two identical columns) can still be represented and inspected.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationModel {
    c: DMatrix<f64>,
}

impl CorrelationModel {
    pub fn new(c: DMatrix<f64>) -> Result<Self> {
        if !c.is_square() || c.nrows() == 0 {
            return Err(Error::Shape(format!(
                "correlation matrix must be square and non-empty, got {}x{}",
                c.nrows(),
                c.ncols()
            )));
        }
        if c.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("correlation matrix has non-finite entries".into()));
        }
        let n = c.nrows();
        for i in 0..n {
            if (c[(i, i)] - 1.0).abs() > UNIT_DIAGONAL_TOL {
                return Err(Error::Domain(format!(
                    "diagonal entry {i} is {}, expected 1",
                    c[(i, i)]
                )));
            }
            for j in i + 1..n {
                if (c[(i, j)] - c[(j, i)]).abs() > SYMMETRY_TOL {
                    return Err(Error::Domain(format!("matrix is not symmetric at ({i}, {j})")));
                }
            }
        }
        Ok(Self { c })
    }

    /// 2×2 correlation with off-diagonal `rho`.
    pub fn bivariate(rho: f64) -> Result<Self> {
        Self::new(DMatrix::from_row_slice(2, 2, &[1.0, rho, rho, 1.0]))
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.c
    }

    pub fn dim(&self) -> usize {
        self.c.nrows()
    }

    /// `A = C − I` with an exactly zero diagonal.
    pub fn deviation(&self) -> DMatrix<f64> {
        let mut a = self.c.clone();
        a.fill_diagonal(0.0);
        a
    }

    pub fn deviation_frobenius(&self) -> f64 {
        self.deviation().norm()
    }

    /// Spectral radius `ρ(A)` of the deviation.
    pub fn deviation_spectral_radius(&self) -> f64 {
        self.deviation()
            .symmetric_eigenvalues()
            .iter()
            .fold(0.0f64, |acc, &x| acc.max(x.abs()))
    }

    pub fn is_positive_definite(&self) -> bool {
        Cholesky::new(self.c.clone()).is_some()
    }

    /// `ln det C` as twice the sum of log Cholesky pivots.
    pub fn log_det(&self) -> Result<f64> {
        let chol = Cholesky::new(self.c.clone())
            .ok_or_else(|| Error::Domain("correlation matrix is not positive definite".into()))?;
        let l = chol.l_dirty();
        let mut sum = 0.0;
        for i in 0..self.dim() {
            let d = l[(i, i)];
            if !(d > 0.0) || !d.is_finite() {
                return Err(Error::Domain("correlation matrix is not positive definite".into()));
            }
            sum += d.ln();
        }
        Ok(2.0 * sum)
    }
}

/// `C = D^{−1/2} Σ D^{−1/2}` with `D = diag(Σ)`; the diagonal is set to exactly one.
pub fn correlation_from_covariance(sigma: &DMatrix<f64>) -> Result<CorrelationModel> {
    if !sigma.is_square() || sigma.nrows() == 0 {
        return Err(Error::Shape(format!(
            "covariance must be square and non-empty, got {}x{}",
            sigma.nrows(),
            sigma.ncols()
        )));
    }
    let n = sigma.nrows();
    let scale: Vec<f64> = (0..n).map(|i| sigma[(i, i)]).collect();
    if let Some(i) = scale.iter().position(|&d| !(d > 0.0) || !d.is_finite()) {
        return Err(Error::Domain(format!(
            "covariance diagonal entry {i} is {}, must be positive",
            scale[i]
        )));
    }
    let mut c = DMatrix::identity(n, n);
    for i in 0..n {
        for j in i + 1..n {
            let v = sigma[(i, j)] / (scale[i] * scale[j]).sqrt();
            c[(i, j)] = v;
            c[(j, i)] = v;
        }
    }
    CorrelationModel::new(c)
}

/// Gaussian total correlation `−½ ln det C`.
pub fn gaussian_total_correlation(model: &CorrelationModel) -> Result<f64> {
    Ok(-0.5 * model.log_det()?)
}

/// `¼ Σ_{i≠j} C_ij²`.
pub fn chi2_quadratic_proxy(model: &CorrelationModel) -> f64 {
    0.25 * model.deviation().norm_squared()
}

/// `½‖A‖_F² − ⅓‖A‖_F³`, a lower bound on `−ln det C` when `ρ(A) < 1`.
pub fn kl_frobenius_lower_bound(model: &CorrelationModel) -> Result<f64> {
    let rho = model.deviation_spectral_radius();
    if rho >= 1.0 {
        return Err(Error::Precondition(format!(
            "spectral radius of C − I is {rho}, must be < 1"
        )));
    }
    let f = model.deviation_frobenius();
    Ok(0.5 * f * f - f * f * f / 3.0)
}

/// Standard bivariate normal with correlation `rho`, discretized on a
/// `bins × bins` grid over `[−half_width, half_width]²` by the midpoint rule
/// and renormalized.
pub fn discretized_bivariate_normal(rho: f64, bins: usize, half_width: f64) -> Result<JointTable> {
    if !(rho.abs() < 1.0) {
        return Err(Error::Domain(format!("|rho| must be < 1, got {rho}")));
    }
    if bins < 2 || !(half_width > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need bins >= 2 and a positive half width, got {bins}, {half_width}"
        )));
    }
    let width = 2.0 * half_width / bins as f64;
    let mid = |i: usize| -half_width + (i as f64 + 0.5) * width;
    let denom = 1.0 - rho * rho;
    let mut weights = Vec::with_capacity(bins * bins);
    for i in 0..bins {
        let x = mid(i);
        for j in 0..bins {
            let y = mid(j);
            weights.push((-(x * x - 2.0 * rho * x * y + y * y) / (2.0 * denom)).exp());
        }
    }
    JointTable::from_weights(vec![bins, bins], weights)
}
