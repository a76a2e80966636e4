//! Simulation and inference for the one-dimensional stochastic wave equation
//!
//! ```text
//! ∂²u/∂t² = ∂²u/∂x² + θ F(u) Ẇ,   u(0, x) = ∂u/∂t(0, x) = 0,
//! ```
//!
//! driven by Gaussian noise that is white in time and behaves like fractional
//! Gaussian noise with Hurst index `H ∈ [1/2, 1)` in space.
//!
//! The equation is solved on a characteristic lattice in the rotated
//! coordinates `τ = (t - x)/√2`, `λ = (t + x)/√2`, where the mixed second
//! difference of the solution over a lattice cell is half the noise mass of the
//! corresponding diamond. Modules:
//!
//! - [`kernels`]: covariance functionals and limit constants.
//! - [`noise`]: exact and fine-grid samplers of the diamond masses.
//! - [`wave`]: the light-cone scheme for the nonlinear and linear equations.
//! - [`qvar`]: second differences, quadratic variation, the θ estimator,
//!   local-linearization remainders and log-log rate fits.
//! - [`experiments`]: configurable Monte Carlo studies and their reports.

pub mod coords;
pub mod error;
pub mod experiments;
pub mod kernels;
pub mod noise;
pub mod qvar;
pub mod rng;
pub mod wave;

pub use error::{Error, Result};
pub use kernels::{ConstantMode, HurstParam};
pub use rng::RngStream;

/// Version string embedded in every artifact.
pub const ARTIFACT_VERSION: &str = concat!("stochwave ", env!("CARGO_PKG_VERSION"));
