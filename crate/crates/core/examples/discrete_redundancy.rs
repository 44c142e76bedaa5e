//! Redundancy of small joint tables under every kernel, and what happens when
//! each coordinate is pushed through a noisy channel.
//!
//! ```text
//! cargo run --example discrete_redundancy
//! ```

use redkit::discrete::{
    apply_coordinate_channels, redundancy_f, total_correlation_entropy, CoordinateChannel, JointTable,
};
use redkit::kernels::Kernel;

fn main() -> redkit::Result<()> {
    // two copies of one fair bit
    let bit = JointTable::new(vec![2, 2], vec![0.5, 0.0, 0.0, 0.5])?;
    let skewed = JointTable::new(vec![2, 2], vec![0.4, 0.2, 0.1, 0.3])?;
    let indep = JointTable::independent(&[vec![0.3, 0.7], vec![0.2, 0.5, 0.3]])?;

    println!(
        "{:<12} {:>12} {:>12} {:>12}",
        "kernel", "dup bit", "skewed", "independent"
    );
    for k in Kernel::ALL {
        println!(
            "{:<12} {:>12.6} {:>12.6} {:>12.2e}",
            k.to_string(),
            redundancy_f(&bit, k)?,
            redundancy_f(&skewed, k)?,
            redundancy_f(&indep, k)?,
        );
    }
    println!(
        "sum of marginal entropies minus joint (dup bit): {:.6}",
        total_correlation_entropy(&bit)
    );

    println!("\nflip probability -> KL redundancy after both coordinates pass through it");
    for flip in [0.0, 0.05, 0.1, 0.2, 0.3, 0.5] {
        let channels = [
            CoordinateChannel::bit_flip(0, flip)?,
            CoordinateChannel::bit_flip(1, flip)?,
        ];
        let noisy = apply_coordinate_channels(&bit, &channels)?;
        println!(
            "  {flip:>4.2} -> {:.6}   cells {:?}",
            redundancy_f(&noisy, Kernel::Kl)?,
            noisy.probs()
        );
    }
    Ok(())
}
