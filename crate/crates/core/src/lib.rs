//! Simulation of near-field Talbot interferometry with levitated dielectric
//! nanospheres in free fall, together with the environmental and
//! collapse-model decoherence that limits it.
//!
//! The crate is organized bottom-up:
//!
//! - [`mathkit`]: Bessel functions, the sine integral and quadrature.
//! - [`material`]: tabulated permittivities, gas species, polarizability and C₆.
//! - [`mie`]: Mie coefficients, scattering amplitudes, cross sections and the
//!   standing-wave axial force that sets the eikonal phase.
//! - [`grating`]: grating functions and generalized Talbot coefficients.
//! - [`decoherence`]: gas collisions and blackbody kernels during free fall.
//! - [`collapse`]: CSL and Diósi–Penrose diffusion and the CSL pattern kernel.
//! - [`pattern`]: the near-field density pattern.
//! - [`metrics`]: the distinguishability measure between two patterns.
//! - [`noninterf`]: free-fall variance tests, statistical limits and bounds.
//! - [`scan`]: deterministic parameter scans and exclusion curves.
//! - [`cli`]: configuration files, presets and the command-line front end.

pub mod cli;
pub mod collapse;
pub mod constants;
pub mod decoherence;
pub mod error;
pub mod grating;
pub mod material;
pub mod mathkit;
pub mod metrics;
pub mod mie;
pub mod noninterf;
pub mod pattern;
pub mod scan;

pub use error::{Error, Result};
