//! Physical constants (CODATA 2018, SI units).

pub const HBAR: f64 = 1.054_571_817e-34;
pub const PLANCK: f64 = 6.626_070_15e-34;
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
pub const EPSILON_0: f64 = 8.854_187_812_8e-12;
pub const BOLTZMANN: f64 = 1.380_649e-23;
pub const GRAVITATIONAL: f64 = 6.674_30e-11;
/// Atomic mass unit in kg.
pub const AMU: f64 = 1.660_539_066_60e-27;
/// Reference nucleon mass used by the CSL model.
pub const NUCLEON_MASS: f64 = AMU;
