//! Spectral redundancy of latent batches as they collapse onto one direction,
//! attention-head redundancy, and the spectral-norm energy cap.
//!
//! ```text
//! cargo run --example spectral_and_heads
//! ```

use nalgebra::{dmatrix, DMatrix};
use rand::SeedableRng;
use rand_distr::{Distribution, StandardNormal};
use rand_xoshiro::Xoshiro256PlusPlus;
use redkit::spectral::{
    head_redundancy, spectral_norm, spectral_norm_energy_bound, spectral_redundancy_of_batch,
    spectrum_from_eigenvalues, AttentionStack,
};

fn main() -> redkit::Result<()> {
    for eigs in [vec![1.0, 1.0, 1.0, 1.0], vec![2.0, 1.0, 1.0], vec![1.0, 0.0, 0.0, 0.0]] {
        let s = spectrum_from_eigenvalues(&eigs)?;
        println!(
            "{eigs:?}: H = {:.6}, r_eff = {:.6}, R_spec = {:.6}",
            s.spectral_entropy(),
            s.effective_rank(),
            s.spectral_redundancy()
        );
    }

    // mix an isotropic batch with a shared direction: z = (1 − w)·noise + w·(g, g, …, g)
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(3);
    let (n, d) = (2000, 8);
    let noise: DMatrix<f64> = DMatrix::from_fn(n, d, |_, _| StandardNormal.sample(&mut rng));
    let shared: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
    println!("\nshared weight -> R_spec (D = {d})");
    for w in [0.0, 0.25, 0.5, 0.75, 0.9, 1.0] {
        let z = DMatrix::from_fn(n, d, |i, j| (1.0 - w) * noise[(i, j)] + w * shared[i]);
        println!(
            "  {w:>4.2} -> {:.4}",
            spectral_redundancy_of_batch(&z)?.spectral_redundancy()
        );
    }

    let eye = DMatrix::<f64>::identity(2, 2);
    let swap = dmatrix![0.0, 1.0; 1.0, 0.0];
    let ones = DMatrix::from_element(2, 2, 1.0);
    for (name, heads) in [
        ("I, swap", vec![eye.clone(), swap.clone()]),
        ("I, swap, ones", vec![eye.clone(), swap, ones]),
        ("I, 3I", vec![eye.clone(), eye * 3.0]),
    ] {
        println!("R_head({name}) = {:.6}", head_redundancy(&AttentionStack::new(heads)?));
    }

    let w = dmatrix![2.0, 0.0; 0.0, 1.0];
    let m = spectral_norm(&w);
    println!(
        "\n‖W‖₂ = {m}, energy cap at σ² = 1: {}",
        spectral_norm_energy_bound(&w, 1.0, m)?
    );
    Ok(())
}
