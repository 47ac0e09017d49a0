//! Special functions, root finding and exponential-moment kernels.

mod bessel;
mod lambert;
mod moments;
mod muller;
mod quadrature;

pub use bessel::{bessel_i_half, ln_gamma, reduced_bessel_j};
pub use lambert::lambert_w;
pub use moments::{exp_moments, moment_differences, moment_differences_with_exps, SMALL_U_SCALE};
pub use muller::muller_root;
pub use quadrature::{gauss_legendre, gauss_legendre_nodes};

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MathError {
    #[error("Lambert W branch {branch} did not converge at z = {z}")]
    LambertNoConvergence { branch: i32, z: Complex64 },
    #[error("I_(n+1/2) overflows for order {order} at z = {z}")]
    BesselOverflow { order: u32, z: Complex64 },
    #[error("Muller iteration did not converge after {iterations} steps (last iterate {x})")]
    MullerNoConvergence { iterations: usize, x: Complex64 },
    #[error("Muller parabola degenerate near {x}")]
    MullerDegenerate { x: Complex64 },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),
}
