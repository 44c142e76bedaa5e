//! Interior optimum of an error curve held between a robustness bound and an
//! information bound, and a quadratic fit over measured (R, accuracy) points.
//!
//! ```text
//! cargo run --example sandwich_and_ufit
//! ```

use std::sync::Arc;

use redkit::equilibrium::{sandwich_optimum, ushape_fit, RiskCurve, SandwichModel};

fn main() -> redkit::Result<()> {
    let c0 = 1.0;
    // robustness term falls with R, information loss grows as R nears C0
    let g_robust = Arc::new(|r: f64| 0.2 * (1.0 - r));
    let g_info = Arc::new(|r: f64| 0.3 + 2.0 * r * r);
    let error = RiskCurve::new(0.0, c0, |r| 0.2 * (1.0 - r) + 0.5 * (r - 0.45) * (r - 0.45) + 0.05)?;
    let model = SandwichModel::new(error, c0, 0.1, 0.9, g_robust, g_info)?;
    let opt = sandwich_optimum(&model, 1e-10)?;
    println!("smooth error curve: R* = {:.6}, E(R*) = {:.6}", opt.r_star, opt.error);

    let valley = RiskCurve::valley(0.5, 0.6, 0.0, c0)?;
    let model = SandwichModel::new(valley, c0, 0.2, 0.8, Arc::new(|_| 0.0), Arc::new(|_| 10.0))?;
    let opt = sandwich_optimum(&model, 1e-10)?;
    println!(
        "flat valley: R* = {:.4}, plateau = {}, interval {:?}",
        opt.r_star, opt.plateau, opt.plateau_interval
    );

    // (R_spec, linear-probe top-1) from four regularization strengths
    let points = [(0.96, 35.6), (0.96, 36.3), (0.51, 41.4), (0.19, 39.6)];
    let fit = ushape_fit(&points, false)?;
    println!(
        "\nfit: {:.3} R² + {:.3} R + {:.3}; vertex R = {:.4}, predicted top-1 {:.2}, interior = {}",
        fit.a,
        fit.b,
        fit.c,
        fit.vertex.unwrap_or(f64::NAN),
        fit.vertex_score().unwrap_or(f64::NAN),
        fit.interior
    );
    for &(r, y) in &points {
        println!("  R = {r:.2}: measured {y:.1}, fitted {:.2}", fit.predict(r));
    }
    Ok(())
}
