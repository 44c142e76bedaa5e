//! Plug-in estimators from raw samples: empirical joint tables, Pearson
//! correlation and the quadratic redundancy estimate. No bias corrections.

use nalgebra::DMatrix;

use crate::discrete::JointTable;
use crate::error::{Error, Result};
use crate::gaussian::{chi2_quadratic_proxy, CorrelationModel};

const MIN_VARIANCE: f64 = 1e-12;

/// Real-valued observations: rows are samples, columns are variables.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    data: DMatrix<f64>,
}

impl SampleBatch {
    pub fn new(data: DMatrix<f64>) -> Result<Self> {
        if data.nrows() < 2 {
            return Err(Error::Domain(format!(
                "need at least 2 observations, got {}",
                data.nrows()
            )));
        }
        if data.ncols() == 0 {
            return Err(Error::Shape("sample batch has no columns".into()));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("sample batch has non-finite entries".into()));
        }
        Ok(Self { data })
    }

    pub fn data(&self) -> &DMatrix<f64> {
        &self.data
    }
}

/// Cell frequencies of integer-coded samples.
pub fn empirical_joint<S: AsRef<[usize]>>(samples: &[S], alphabet_sizes: &[usize]) -> Result<JointTable> {
    if samples.is_empty() {
        return Err(Error::Domain("need at least one sample".into()));
    }
    let probe = JointTable::point_mass(alphabet_sizes.to_vec(), &vec![0; alphabet_sizes.len()])?;
    let mut counts = vec![0u64; probe.num_cells()];
    for (row, sample) in samples.iter().enumerate() {
        let idx = probe.flat_index(sample.as_ref()).map_err(|e| match e {
            Error::Domain(msg) => Error::Domain(format!("row {row}: {msg}")),
            other => other,
        })?;
        counts[idx] += 1;
    }
    let n = samples.len() as f64;
    JointTable::from_weights(
        alphabet_sizes.to_vec(),
        counts.into_iter().map(|c| c as f64 / n).collect(),
    )
}

/// Pearson correlation matrix with an exact unit diagonal.
///
/// Perfectly dependent columns give a singular matrix; it is returned as is and
/// operations that need positive definiteness reject it.
pub fn sample_correlation(batch: &SampleBatch) -> Result<CorrelationModel> {
    let cov = crate::spectral::batch_covariance(&batch.data)?;
    let n = cov.nrows();
    if let Some(i) = (0..n).find(|&i| !(cov[(i, i)] > MIN_VARIANCE)) {
        return Err(Error::Domain(format!("column {i} is constant; correlation undefined")));
    }
    let mut c = DMatrix::identity(n, n);
    for i in 0..n {
        for j in i + 1..n {
            let v = (cov[(i, j)] / (cov[(i, i)] * cov[(j, j)]).sqrt()).clamp(-1.0, 1.0);
            c[(i, j)] = v;
            c[(j, i)] = v;
        }
    }
    CorrelationModel::new(c)
}

/// `¼‖Ĉ − I‖_F²` on the sample correlation.
pub fn chi2_redundancy_estimate(batch: &SampleBatch) -> Result<f64> {
    Ok(chi2_quadratic_proxy(&sample_correlation(batch)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_distr::{Distribution, StandardNormal};
    use rand_xoshiro::SplitMix64;

    fn bivariate(rng: &mut SplitMix64, rows: usize, rho: f64) -> SampleBatch {
        let mut data = DMatrix::zeros(rows, 2);
        for r in 0..rows {
            let (u, v): (f64, f64) = (StandardNormal.sample(rng), StandardNormal.sample(rng));
            data[(r, 0)] = u;
            data[(r, 1)] = rho * u + (1.0 - rho * rho).sqrt() * v;
        }
        SampleBatch::new(data).unwrap()
    }

    #[test]
    fn empirical_joint_examples() {
        let t = empirical_joint(&[[0, 0], [1, 1], [0, 0], [1, 1]], &[2, 2]).unwrap();
        assert_eq!(t.probs(), &[0.5, 0.0, 0.0, 0.5]);
        let t = empirical_joint(&[[0, 1]], &[2, 2]).unwrap();
        assert_eq!(t.probs(), &[0.0, 1.0, 0.0, 0.0]);

        let mut rng = SplitMix64::seed_from_u64(17);
        let rows: Vec<[usize; 2]> = (0..10_000)
            .map(|_| [rng.random_range(0..2), rng.random_range(0..2)])
            .collect();
        let t = empirical_joint(&rows, &[2, 2]).unwrap();
        assert!(t.probs().iter().all(|p| (p - 0.25).abs() < 0.02));
    }

    #[test]
    fn empirical_joint_rejects_bad_symbols() {
        assert!(matches!(empirical_joint(&[[0, 2]], &[2, 2]), Err(Error::Domain(_))));
        assert!(empirical_joint::<[usize; 2]>(&[], &[2, 2]).is_err());
    }

    #[test]
    fn pooled_duplicates_give_same_table() {
        let rows = vec![vec![0, 1, 2], vec![1, 1, 0], vec![0, 0, 0]];
        let doubled: Vec<Vec<usize>> = rows.iter().chain(rows.iter()).cloned().collect();
        assert_eq!(
            empirical_joint(&rows, &[2, 2, 3]).unwrap(),
            empirical_joint(&doubled, &[2, 2, 3]).unwrap()
        );
    }

    #[test]
    fn correlation_examples() {
        let x = [1.0, 2.0, 4.0, 7.0];
        let same = SampleBatch::new(DMatrix::from_fn(4, 2, |r, _| x[r])).unwrap();
        let c = sample_correlation(&same).unwrap();
        assert_eq!(c.matrix(), &DMatrix::from_element(2, 2, 1.0));
        assert!(crate::gaussian::gaussian_total_correlation(&c).is_err());

        let anti = SampleBatch::new(DMatrix::from_fn(4, 2, |r, c| if c == 0 { x[r] } else { -x[r] })).unwrap();
        assert_eq!(sample_correlation(&anti).unwrap().matrix()[(0, 1)], -1.0);

        let batch = bivariate(&mut SplitMix64::seed_from_u64(99), 100_000, 0.5);
        let c = sample_correlation(&batch).unwrap();
        assert!((c.matrix()[(0, 1)] - 0.5).abs() < 0.01);
        assert!((chi2_redundancy_estimate(&batch).unwrap() - 0.125).abs() < 0.01);
    }

    #[test]
    fn constant_column_rejected() {
        let b = SampleBatch::new(DMatrix::from_row_slice(3, 2, &[1.0, 5.0, 2.0, 5.0, 3.0, 5.0])).unwrap();
        assert!(matches!(sample_correlation(&b), Err(Error::Domain(_))));
        assert!(SampleBatch::new(DMatrix::from_element(1, 2, 1.0)).is_err());
    }

    #[test]
    fn chi2_estimate_null_and_orthogonal() {
        let mut rng = SplitMix64::seed_from_u64(4);
        let data = DMatrix::from_fn(100_000, 4, |_, _| StandardNormal.sample(&mut rng));
        assert!(chi2_redundancy_estimate(&SampleBatch::new(data).unwrap()).unwrap() <= 0.001);

        // orthogonal, centered ±1 columns: a 2-level full factorial design
        let design = DMatrix::from_row_slice(4, 2, &[1.0, 1.0, 1.0, -1.0, -1.0, 1.0, -1.0, -1.0]);
        assert_abs_diff_eq!(
            chi2_redundancy_estimate(&SampleBatch::new(design).unwrap()).unwrap(),
            0.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn plug_in_error_shrinks_with_sample_size() {
        use crate::discrete::redundancy_f;
        use crate::kernels::Kernel;
        let truth = JointTable::new(vec![2, 2], vec![0.4, 0.1, 0.15, 0.35]).unwrap();
        let exact = redundancy_f(&truth, Kernel::Kl).unwrap();
        let cdf = [0.4, 0.5, 0.65, 1.0];
        let mut rng = SplitMix64::seed_from_u64(31);
        let mut errors = Vec::new();
        for n in [1_000, 10_000, 100_000] {
            let rows: Vec<[usize; 2]> = (0..n)
                .map(|_| {
                    let u: f64 = rng.random();
                    let cell = cdf.iter().position(|&c| u < c).unwrap_or(3);
                    [cell / 2, cell % 2]
                })
                .collect();
            let est = redundancy_f(&empirical_joint(&rows, &[2, 2]).unwrap(), Kernel::Kl).unwrap();
            errors.push((est - exact).abs());
        }
        assert!(errors[1] <= errors[0] && errors[2] <= errors[1], "{errors:?}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn affine_invariance(seed in any::<u64>(), a in prop::collection::vec(0.1f64..10.0, 3), b in prop::collection::vec(-5.0f64..5.0, 3), flip in any::<bool>()) {
            let mut rng = SplitMix64::seed_from_u64(seed);
            let data = DMatrix::from_fn(50, 3, |_, _| StandardNormal.sample(&mut rng));
            let mapped = DMatrix::from_fn(50, 3, |r, c| {
                let s = if flip && c == 1 { -a[c] } else { a[c] };
                s * data[(r, c)] + b[c]
            });
            let x = chi2_redundancy_estimate(&SampleBatch::new(data).unwrap()).unwrap();
            let y = chi2_redundancy_estimate(&SampleBatch::new(mapped).unwrap()).unwrap();
            prop_assert!((x - y).abs() <= 1e-10);
        }
    }
}
