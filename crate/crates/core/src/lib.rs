//! # redkit
//!
//! Redundancy as an f-divergence from independence:
//!
//! ```text
//! R_f(X) = D_f(P_X ‖ ⊗_i P_{X_i}) = E_Π[ f( p(x) / ∏_i p_i(x_i) ) ]
//! ```
//!
//! The choice of kernel `f` selects the geometry. `f(t) = t ln t` gives total
//! correlation, `½(t−1)²` gives the χ² redundancy, whose Gaussian form is
//! approximately `¼‖C − I‖_F²`. The covariance spectrum gives a separate
//! proxy, spectral redundancy `1 − r_eff/D`.
//!
//! ## Modules
//!
//! - [`kernels`]: the convex generators and their limits at `t = 0`
//! - [`discrete`]: exact redundancy on finite product alphabets, coordinate channels
//! - [`gaussian`]: `−½ ln det C`, the quadratic proxy, the KL–Frobenius bound
//! - [`spectral`]: spectral entropy, effective rank, spectral redundancy, head redundancy
//! - [`estimators`]: plug-in estimates from samples
//! - [`equilibrium`]: `Φ(R) = D(R) + λR`, noisy dynamics, sandwich optimum, U-shape fit
//! - [`cli`]: the `redkit` command-line front end and its file formats
//!
//! All logarithms are natural.
//!
//! ```
//! use redkit::discrete::{redundancy_f, JointTable};
//! use redkit::kernels::Kernel;
//!
//! let bit = JointTable::new(vec![2, 2], vec![0.5, 0.0, 0.0, 0.5]).unwrap();
//! let r = redundancy_f(&bit, Kernel::Kl).unwrap();
//! assert!((r - std::f64::consts::LN_2).abs() < 1e-15);
//! ```

#![forbid(unsafe_code)]
// `!(x >= 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod discrete;
pub mod equilibrium;
pub mod error;
pub mod estimators;
pub mod gaussian;
pub mod kernels;
pub mod random;
pub mod spectral;

pub use error::{Error, Result};
