//! Spectral redundancy `R_spec = 1 − r_eff / D` with `r_eff = exp(H_λ)`, the
//! attention-head redundancy proxy, and the spectral-norm energy cap.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Entries below this are treated as upstream round-off rather than real negatives.
const NEGATIVE_TOL: f64 = 1e-12;
/// Eigenvalues below `CLIP_RATIO × max` are set to zero before normalizing.
const CLIP_RATIO: f64 = 1e-12;
const MIN_HEAD_NORM: f64 = 1e-12;
/// Relative distance from 1 or D below which the effective rank is taken as exact.
const EXTREME_SNAP: f64 = 1e-12;

/// Normalized covariance spectrum with its entropy summaries.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    eigenvalues: Vec<f64>,
    normalized: Vec<f64>,
    spectral_entropy: f64,
    effective_rank: f64,
    spectral_redundancy: f64,
}

impl Spectrum {
    /// Eigenvalues after clipping, in input order.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn normalized(&self) -> &[f64] {
        &self.normalized
    }

    /// `H_λ` in nats.
    pub fn spectral_entropy(&self) -> f64 {
        self.spectral_entropy
    }

    /// `exp(H_λ)`, in `[1, D]`.
    pub fn effective_rank(&self) -> f64 {
        self.effective_rank
    }

    /// `1 − r_eff / D`, in `[0, 1 − 1/D]`.
    pub fn spectral_redundancy(&self) -> f64 {
        self.spectral_redundancy
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }
}

pub fn spectrum_from_eigenvalues(eigs: &[f64]) -> Result<Spectrum> {
    if eigs.is_empty() {
        return Err(Error::Domain("spectrum needs at least one eigenvalue".into()));
    }
    if let Some(&bad) = eigs.iter().find(|&&x| !x.is_finite() || x < -NEGATIVE_TOL) {
        return Err(Error::Domain(format!("invalid eigenvalue {bad}")));
    }
    let max = eigs.iter().cloned().fold(0.0f64, f64::max);
    if max <= 0.0 {
        return Err(Error::Domain("spectrum is identically zero".into()));
    }
    let eigenvalues: Vec<f64> = eigs
        .iter()
        .map(|&x| if x < CLIP_RATIO * max { 0.0 } else { x })
        .collect();
    let total: f64 = eigenvalues.iter().sum();
    let normalized: Vec<f64> = eigenvalues.iter().map(|&x| x / total).collect();
    let spectral_entropy = crate::discrete::entropy(&normalized).max(0.0);

    let d = eigenvalues.len() as f64;
    // exp(ln D) lands within a few ulps of D either side; snap the extremes
    let mut effective_rank = spectral_entropy.exp().clamp(1.0, d);
    if d - effective_rank <= EXTREME_SNAP * d {
        effective_rank = d;
    } else if effective_rank - 1.0 <= EXTREME_SNAP {
        effective_rank = 1.0;
    }
    let spectral_redundancy = (1.0 - effective_rank / d).clamp(0.0, 1.0 - 1.0 / d);
    Ok(Spectrum {
        eigenvalues,
        normalized,
        spectral_entropy,
        effective_rank,
        spectral_redundancy,
    })
}

/// Column covariance of a batch (rows = samples), centered, divisor `rows − 1`.
pub fn batch_covariance(z: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let rows = z.nrows();
    if rows < 2 {
        return Err(Error::Domain(format!("covariance needs at least 2 rows, got {rows}")));
    }
    if z.ncols() == 0 {
        return Err(Error::Shape("batch has no columns".into()));
    }
    if z.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("batch has non-finite entries".into()));
    }
    let mut centered = z.clone();
    for mut col in centered.column_iter_mut() {
        let mean = col.sum() / rows as f64;
        col.add_scalar_mut(-mean);
    }
    let mut cov = centered.tr_mul(&centered) / (rows as f64 - 1.0);
    // exact symmetry for the eigensolver
    let d = cov.nrows();
    for i in 0..d {
        for j in i + 1..d {
            let v = 0.5 * (cov[(i, j)] + cov[(j, i)]);
            cov[(i, j)] = v;
            cov[(j, i)] = v;
        }
    }
    Ok(cov)
}

/// Spectrum of the column covariance of `z`.
pub fn spectral_redundancy_of_batch(z: &DMatrix<f64>) -> Result<Spectrum> {
    let cov = batch_covariance(z)?;
    if cov.diagonal().iter().all(|&v| v == 0.0) {
        return Err(Error::Domain("batch has zero variance".into()));
    }
    let eigs: Vec<f64> = cov.symmetric_eigenvalues().iter().map(|&x| x.max(0.0)).collect();
    spectrum_from_eigenvalues(&eigs)
}

/// `H ≥ 2` attention maps of a common `N × N` shape.
#[derive(Debug, Clone, PartialEq)]
pub struct AttentionStack {
    heads: Vec<DMatrix<f64>>,
}

impl AttentionStack {
    pub fn new(heads: Vec<DMatrix<f64>>) -> Result<Self> {
        if heads.len() < 2 {
            return Err(Error::Shape(format!("need at least 2 heads, got {}", heads.len())));
        }
        let shape = heads[0].shape();
        if !heads[0].is_square() {
            return Err(Error::Shape(format!("attention maps must be square, got {shape:?}")));
        }
        for (h, head) in heads.iter().enumerate() {
            if head.shape() != shape {
                return Err(Error::Shape(format!(
                    "head {h} has shape {:?}, expected {shape:?}",
                    head.shape()
                )));
            }
            if head.iter().any(|v| !v.is_finite()) {
                return Err(Error::Domain(format!("head {h} has non-finite entries")));
            }
            if head.norm() <= MIN_HEAD_NORM {
                return Err(Error::Domain(format!("head {h} has zero Frobenius norm")));
            }
        }
        Ok(Self { heads })
    }

    pub fn heads(&self) -> &[DMatrix<f64>] {
        &self.heads
    }
}

/// Mean squared Frobenius cosine over ordered pairs of distinct heads.
pub fn head_redundancy(stack: &AttentionStack) -> f64 {
    let heads = &stack.heads;
    let h = heads.len();
    let norms: Vec<f64> = heads.iter().map(|a| a.norm_squared()).collect();
    let mut total = 0.0;
    for i in 0..h {
        for j in i + 1..h {
            let dot = heads[i].dot(&heads[j]);
            total += 2.0 * dot * dot / (norms[i] * norms[j]);
        }
    }
    (total / (h * (h - 1)) as f64).clamp(0.0, 1.0)
}

/// Largest singular value.
pub fn spectral_norm(w: &DMatrix<f64>) -> f64 {
    w.singular_values().iter().cloned().fold(0.0, f64::max)
}

/// Energy cap `M² σ²` on `tr(W Σ_X Wᵀ)` for inputs with `tr(Σ_X) ≤ σ²`.
pub fn spectral_norm_energy_bound(w: &DMatrix<f64>, sigma2: f64, m: f64) -> Result<f64> {
    if !(sigma2 >= 0.0) || !(m >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need sigma2 >= 0 and M >= 0, got {sigma2}, {m}"
        )));
    }
    let norm = spectral_norm(w);
    if norm > m * (1.0 + 1e-12) {
        return Err(Error::Precondition(format!("spectral norm {norm} exceeds M = {m}")));
    }
    Ok(m * m * sigma2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_distr::{Distribution, StandardNormal};
    use rand_xoshiro::SplitMix64;

    use crate::random::{random_psd, random_spectrum};

    #[test]
    fn spectrum_examples() {
        let s = spectrum_from_eigenvalues(&[1.0; 4]).unwrap();
        assert_eq!(s.spectral_redundancy(), 0.0);
        assert_eq!(s.effective_rank(), 4.0);
        for d in 2..=64 {
            assert_eq!(
                spectrum_from_eigenvalues(&vec![0.3; d]).unwrap().spectral_redundancy(),
                0.0,
                "D = {d}"
            );
        }

        let s = spectrum_from_eigenvalues(&[1.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(s.spectral_redundancy(), 0.75);
        assert_eq!(s.effective_rank(), 1.0);

        let s = spectrum_from_eigenvalues(&[2.0, 1.0, 1.0]).unwrap();
        assert_abs_diff_eq!(s.spectral_entropy(), 1.039721, epsilon = 1e-6);
        assert_abs_diff_eq!(s.effective_rank(), 2.0 * 2f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(s.spectral_redundancy(), 0.057191, epsilon = 1e-6);
    }

    #[test]
    fn spectrum_errors_and_clipping() {
        assert!(spectrum_from_eigenvalues(&[]).is_err());
        assert!(spectrum_from_eigenvalues(&[0.0, 0.0]).is_err());
        assert!(spectrum_from_eigenvalues(&[1.0, -1e-6]).is_err());
        let s = spectrum_from_eigenvalues(&[1.0, -1e-13, 1e-14]).unwrap();
        assert_eq!(s.eigenvalues(), &[1.0, 0.0, 0.0]);
        assert_eq!(s.spectral_redundancy(), 1.0 - 1.0 / 3.0);
    }

    #[test]
    fn batch_examples() {
        let dir = 1.0 / 2f64.sqrt();
        let z = DMatrix::from_fn(5, 2, |r, _| (r as f64 - 1.5) * dir);
        let s = spectral_redundancy_of_batch(&z).unwrap();
        assert_eq!(s.spectral_redundancy(), 0.5);

        let cross = DMatrix::from_row_slice(4, 2, &[1.0, 0.0, -1.0, 0.0, 0.0, 1.0, 0.0, -1.0]);
        let s = spectral_redundancy_of_batch(&cross).unwrap();
        assert_eq!(s.spectral_redundancy(), 0.0);

        let mut rng = SplitMix64::seed_from_u64(2024);
        let z = DMatrix::from_fn(1000, 8, |_, _| StandardNormal.sample(&mut rng));
        assert!(spectral_redundancy_of_batch(&z).unwrap().spectral_redundancy() < 0.05);
    }

    #[test]
    fn batch_errors() {
        assert!(matches!(
            spectral_redundancy_of_batch(&DMatrix::from_element(1, 3, 1.0)),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            spectral_redundancy_of_batch(&DMatrix::from_element(4, 3, 2.5)),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn head_examples() {
        let eye = DMatrix::<f64>::identity(2, 2);
        let swap = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let ones = DMatrix::from_element(2, 2, 1.0);
        let same = AttentionStack::new(vec![eye.clone(), eye.clone()]).unwrap();
        assert_abs_diff_eq!(head_redundancy(&same), 1.0, epsilon = 1e-15);
        let orth = AttentionStack::new(vec![eye.clone(), swap.clone()]).unwrap();
        assert_eq!(head_redundancy(&orth), 0.0);
        let three = AttentionStack::new(vec![eye, swap, ones]).unwrap();
        assert_abs_diff_eq!(head_redundancy(&three), 1.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn head_errors() {
        let eye = DMatrix::<f64>::identity(2, 2);
        assert!(AttentionStack::new(vec![eye.clone()]).is_err());
        assert!(AttentionStack::new(vec![eye.clone(), DMatrix::zeros(2, 2)]).is_err());
        assert!(AttentionStack::new(vec![eye, DMatrix::identity(3, 3)]).is_err());
    }

    #[test]
    fn energy_bound_examples() {
        assert_eq!(
            spectral_norm_energy_bound(&DMatrix::identity(3, 3), 3.0, 1.0).unwrap(),
            3.0
        );

        let w = DMatrix::<f64>::identity(2, 2) * 2.0;
        assert_eq!(spectral_norm_energy_bound(&w, 1.0, 2.0).unwrap(), 4.0);
        let sx = DMatrix::from_diagonal(&nalgebra::dvector![1.0, 0.0]);
        assert_abs_diff_eq!((&w * sx * w.transpose()).trace(), 4.0, epsilon = 1e-15);

        assert!(matches!(
            spectral_norm_energy_bound(&w, 1.0, 1.5),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn energy_bound_monte_carlo() {
        let mut rng = SplitMix64::seed_from_u64(5);
        let raw = DMatrix::from_fn(4, 4, |_, _| StandardNormal.sample(&mut rng));
        let w = &raw * (0.5 / spectral_norm(&raw));
        let cap = spectral_norm_energy_bound(&w, 2.0, 0.5).unwrap();
        assert_abs_diff_eq!(cap, 0.5, epsilon = 1e-15);
        for _ in 0..2000 {
            let trace = 2.0 * rand::Rng::random::<f64>(&mut rng);
            let sx = random_psd(&mut rng, 4, trace);
            assert!((&w * sx * w.transpose()).trace() <= cap + 1e-12);
        }
    }

    proptest! {
        #[test]
        fn bounds_hold(seed in any::<u64>(), d in 1usize..20, sparsity in 0.0f64..0.9) {
            let eigs = random_spectrum(&mut SplitMix64::seed_from_u64(seed), d, sparsity);
            let s = spectrum_from_eigenvalues(&eigs).unwrap();
            let r = s.spectral_redundancy();
            prop_assert!((0.0..=1.0 - 1.0 / d as f64).contains(&r));
            prop_assert!((s.normalized().iter().sum::<f64>() - 1.0).abs() <= 1e-12);
            prop_assert!((1.0..=d as f64).contains(&s.effective_rank()));
        }

        #[test]
        fn scale_invariant(seed in any::<u64>(), d in 1usize..12, c in 1e-6f64..1e6) {
            let eigs = random_spectrum(&mut SplitMix64::seed_from_u64(seed), d, 0.3);
            let scaled: Vec<f64> = eigs.iter().map(|x| c * x).collect();
            let (a, b) = (spectrum_from_eigenvalues(&eigs).unwrap(), spectrum_from_eigenvalues(&scaled).unwrap());
            for (x, y) in a.normalized().iter().zip(b.normalized()) {
                prop_assert!((x - y).abs() <= 1e-12);
            }
            prop_assert!((a.spectral_redundancy() - b.spectral_redundancy()).abs() <= 1e-12);
        }

        #[test]
        fn head_redundancy_in_unit_interval_and_scale_free(
            seed in any::<u64>(), h in 2usize..5, n in 1usize..5, c in prop::collection::vec(0.1f64..10.0, 5),
        ) {
            let mut rng = SplitMix64::seed_from_u64(seed);
            let heads: Vec<DMatrix<f64>> = (0..h).map(|_| DMatrix::from_fn(n, n, |_, _| StandardNormal.sample(&mut rng))).collect();
            let scaled: Vec<DMatrix<f64>> = heads.iter().zip(&c).enumerate()
                .map(|(i, (a, &ci))| a * if i % 2 == 0 { ci } else { -ci })
                .collect();
            let r = head_redundancy(&AttentionStack::new(heads.clone()).unwrap());
            prop_assert!((0.0..=1.0).contains(&r));
            prop_assert!((r - head_redundancy(&AttentionStack::new(scaled).unwrap())).abs() <= 1e-12);
            let pair = AttentionStack::new(vec![heads[0].clone(), heads[1].clone()]).unwrap();
            let twin = AttentionStack::new(vec![heads[0].clone(), heads[0].clone()]).unwrap();
            prop_assert!(head_redundancy(&twin) >= head_redundancy(&pair) - 1e-12);
        }
    }
}
