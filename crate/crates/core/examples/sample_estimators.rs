//! Plug-in redundancy from samples: the empirical joint of coded symbols and
//! the χ² proxy from a sample correlation matrix.
//!
//! ```text
//! cargo run --example sample_estimators
//! ```

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_distr::{Distribution, StandardNormal};
use rand_xoshiro::Xoshiro256PlusPlus;
use redkit::discrete::{redundancy_f, JointTable};
use redkit::estimators::{chi2_redundancy_estimate, empirical_joint, sample_correlation, SampleBatch};
use redkit::kernels::Kernel;

fn main() -> redkit::Result<()> {
    let truth = JointTable::new(vec![2, 2], vec![0.4, 0.1, 0.1, 0.4])?;
    let exact = redundancy_f(&truth, Kernel::Kl)?;
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(11);
    println!("true KL redundancy {exact:.6}");
    for n in [100, 1_000, 10_000, 100_000] {
        let rows: Vec<[usize; 2]> = (0..n)
            .map(|_| {
                let u: f64 = rng.random();
                match u {
                    u if u < 0.4 => [0, 0],
                    u if u < 0.5 => [0, 1],
                    u if u < 0.6 => [1, 0],
                    _ => [1, 1],
                }
            })
            .collect();
        let est = redundancy_f(&empirical_joint(&rows, &[2, 2])?, Kernel::Kl)?;
        println!("  n = {n:>6}: {est:.6}  (error {:+.2e})", est - exact);
    }

    let rho: f64 = 0.5;
    println!("\nbivariate normal, rho = {rho}: exact proxy {:.6}", 0.5 * rho * rho);
    for n in [100, 1_000, 10_000, 100_000] {
        let data = DMatrix::from_row_iterator(
            n,
            2,
            (0..n).flat_map(|_| {
                let x: f64 = StandardNormal.sample(&mut rng);
                let e: f64 = StandardNormal.sample(&mut rng);
                [x, rho * x + (1.0 - rho * rho).sqrt() * e]
            }),
        );
        let batch = SampleBatch::new(data)?;
        let corr = sample_correlation(&batch)?;
        println!(
            "  n = {n:>6}: r = {:.4}, chi2 estimate {:.6}",
            corr.matrix()[(0, 1)],
            chi2_redundancy_estimate(&batch)?
        );
    }
    Ok(())
}
