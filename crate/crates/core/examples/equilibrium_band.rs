//! Equilibrium of D(R) + λR across λ, then noisy gradient dynamics around it:
//! the band narrows with σ and collapses under decaying steps.
//!
//! ```text
//! cargo run --example equilibrium_band
//! ```

use redkit::equilibrium::{
    find_equilibrium, simulate_band, EquilibriumProblem, RiskCurve, SimulationConfig, StepSchedule,
};

fn main() -> redkit::Result<()> {
    let curve = RiskCurve::quadratic(0.5, 1.0, 0.0, 0.0, 1.0)?;
    println!("D(R) = (R - 0.5)^2 on [0, 1]");
    for lambda in [1e-6, 0.1, 0.2, 0.5, 1.0, 2.0] {
        let eq = find_equilibrium(&EquilibriumProblem::new(curve.clone(), lambda)?, 1e-10)?;
        println!("  lambda {lambda:<6} R* = {:.6}  interior = {}", eq.r_star, eq.interior);
    }

    let problem = EquilibriumProblem::new(curve, 0.2)?;
    println!("\nconstant step 0.1, 5000 steps, seed 7");
    for sigma in [0.0, 0.025, 0.05, 0.1, 0.2] {
        let traj = simulate_band(&problem, &SimulationConfig::new(0.9, 5000).noise(sigma, 7))?;
        println!(
            "  sigma {sigma:<5} band [{:.4}, {:.4}] width {:.4}",
            traj.band.0,
            traj.band.1,
            traj.band_width()
        );
    }

    println!("\nRobbins-Monro steps 0.4/(t+1)^0.75, sigma 0.05");
    for steps in [1_000, 10_000, 100_000] {
        let cfg = SimulationConfig::new(0.9, steps)
            .schedule(StepSchedule::RobbinsMonro {
                initial: 0.4,
                exponent: 0.75,
            })
            .noise(0.05, 7);
        let traj = simulate_band(&problem, &cfg)?;
        println!(
            "  {steps:>6} steps: width {:.2e}, last {:.5}",
            traj.band_width(),
            traj.last()
        );
    }
    Ok(())
}
