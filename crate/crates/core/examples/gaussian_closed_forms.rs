//! Gaussian total correlation against its quadratic proxy and the
//! KL–Frobenius lower bound, for a sweep of bivariate correlations and one
//! covariance that gets normalized first.
//!
//! ```text
//! cargo run --example gaussian_closed_forms
//! ```

use nalgebra::dmatrix;
use redkit::discrete::redundancy_f;
use redkit::gaussian::{
    chi2_quadratic_proxy, correlation_from_covariance, discretized_bivariate_normal, gaussian_total_correlation,
    kl_frobenius_lower_bound, CorrelationModel,
};
use redkit::kernels::Kernel;

fn main() -> redkit::Result<()> {
    println!(
        "{:>5} {:>12} {:>12} {:>12} {:>12}",
        "rho", "-ln det C", "½‖A‖²", "lower bound", "chi2 proxy"
    );
    for rho in [0.05, 0.1, 0.3, 0.5, 0.7, 0.9, 0.99] {
        let c = CorrelationModel::bivariate(rho)?;
        let a = c.deviation_frobenius();
        let bound = kl_frobenius_lower_bound(&c)?;
        println!(
            "{rho:>5.2} {:>12.6} {:>12.6} {:>12.6} {:>12.6}",
            2.0 * gaussian_total_correlation(&c)?,
            0.5 * a * a,
            bound,
            chi2_quadratic_proxy(&c),
        );
    }

    let sigma = dmatrix![4.0, 3.0, 0.0; 3.0, 9.0, 1.5; 0.0, 1.5, 1.0];
    let c = correlation_from_covariance(&sigma)?;
    println!("\ncorrelation of the 3x3 covariance:\n{}", c.matrix());
    println!("total correlation {:.6}", gaussian_total_correlation(&c)?);

    // a fine grid over the plane should approach the closed form
    for bins in [8, 16, 32, 64] {
        let table = discretized_bivariate_normal(0.5, bins, 4.0)?;
        println!("{bins:>3}x{bins:<3} grid: {:.6}", redundancy_f(&table, Kernel::Kl)?);
    }
    println!(
        "closed form: {:.6}",
        gaussian_total_correlation(&CorrelationModel::bivariate(0.5)?)?
    );
    Ok(())
}
