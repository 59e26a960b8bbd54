//! Special functions and quadrature shared by the physics modules.
//!
//! Everything here is a pure function of its arguments.

mod bessel;
mod quad;
mod sinint;

pub use bessel::{
    bessel_i_scaled_range, bessel_j, bessel_j_range, spherical_bessel_j1, spherical_bessel_range,
};
pub use quad::{gauss_legendre, integrate, integrate_mapped, GaussLegendre, QuadratureSpec};
pub use sinint::{si_deficit, sinc, sine_integral};
