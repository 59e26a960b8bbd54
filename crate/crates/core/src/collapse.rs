//! Collapse models: CSL kernel and diffusion constant, Diósi–Penrose diffusion constant.

use std::f64::consts::PI;

use crate::constants::{GRAVITATIONAL, HBAR, NUCLEON_MASS, PLANCK};
use crate::decoherence::ParticleSpec;
use crate::mathkit::{integrate, si_deficit, spherical_bessel_j1, QuadratureSpec};
use crate::{Error, Result};

/// Default lower bound on the DP resolution parameter R₀.
pub const DP_R0_FLOOR: f64 = 0.5e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CslParams {
    pub lambda: f64,
    pub r_c: f64,
}

impl CslParams {
    pub fn new(lambda: f64, r_c: f64) -> Result<Self> {
        if !(lambda >= 0.0 && r_c > 0.0 && lambda.is_finite() && r_c.is_finite()) {
            return Err(Error::Domain(format!("CSL λ={lambda}, r_c={r_c}")));
        }
        Ok(Self { lambda, r_c })
    }

    pub fn grw() -> Self {
        Self { lambda: 1e-16, r_c: 1e-7 }
    }

    pub fn adler() -> Self {
        Self { lambda: 1e-8, r_c: 1e-7 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DpParams {
    pub r0: f64,
}

impl DpParams {
    pub fn new(r0: f64) -> Result<Self> {
        if !(r0 >= DP_R0_FLOOR) {
            return Err(Error::Domain(format!(
                "R₀ = {r0} m is below the {DP_R0_FLOOR} m floor"
            )));
        }
        Ok(Self { r0 })
    }

    /// Skip the floor check.
    pub fn unchecked(r0: f64) -> Result<Self> {
        if !(r0 > 0.0) {
            return Err(Error::Domain(format!("R₀ = {r0}")));
        }
        Ok(Self { r0 })
    }
}

/// μ̃(q) = ρ·4πħR²/q·j₁(qR/ħ) = M·3j₁(κ)/κ with κ = qR/ħ.
pub fn sphere_form_factor(p: &ParticleSpec, q: f64) -> f64 {
    form_factor_ratio(q.abs() * p.radius / HBAR) * p.mass
}

fn form_factor_ratio(kappa: f64) -> f64 {
    if kappa < 1e-3 {
        1.0 - kappa * kappa / 10.0
    } else {
        3.0 * spherical_bessel_j1(kappa) / kappa
    }
}

/// CSL rate Γ_CSL together with what is needed to evaluate f_CSL.
///
/// In the dimensionless momentum u = q r_c/ħ,
/// Γ_CSL = (8/√π) λ (M/m₀)² ∫u²e^{−u²}(3j₁(ηu)/(ηu))² du, η = R/r_c,
/// which reproduces the small-separation diffusion constant of the closed form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CslRate {
    pub gamma: f64,
    pub params: CslParams,
    eta: f64,
    /// ∫u²e^{−u²}(form factor)² du.
    norm: f64,
}

const U_MAX: f64 = 10.0;

fn quad() -> QuadratureSpec {
    QuadratureSpec::new(1e-10, 1e-300, 4000).expect("valid tolerances")
}

impl CslRate {
    pub fn new(p: &ParticleSpec, c: CslParams) -> Result<Self> {
        let eta = p.radius / c.r_c;
        let norm = integrate(
            |u| u * u * (-u * u).exp() * form_factor_ratio(eta * u).powi(2),
            0.0,
            U_MAX,
            &quad(),
        )?;
        let n = p.mass / NUCLEON_MASS;
        Ok(Self {
            gamma: 8.0 / PI.sqrt() * c.lambda * n * n * norm,
            params: c,
            eta,
            norm,
        })
    }

    /// 1 − f_CSL(x), where f_CSL(x) is the form-factor weighted average of Si(qx/ħ)/(qx/ħ);
    /// f_CSL(0) = 1 and f_CSL(∞) = 0.
    pub fn deficit(&self, x: f64) -> Result<f64> {
        if x == 0.0 || self.norm == 0.0 {
            return Ok(0.0);
        }
        let eta = self.eta;
        let ratio = x.abs() / self.params.r_c;
        let v = integrate(
            |u| u * u * (-u * u).exp() * form_factor_ratio(eta * u).powi(2) * si_deficit(u * ratio),
            0.0,
            U_MAX,
            &quad(),
        )?;
        Ok(v / self.norm)
    }

    pub fn f(&self, x: f64) -> Result<f64> {
        Ok(1.0 - self.deficit(x)?)
    }

    /// Static decoherence rate Γ_CSL(1 − ⟨sinc(qx/ħ)⟩) for a fixed separation x.
    pub fn static_rate(&self, x: f64) -> Result<f64> {
        let eta = self.eta;
        let ratio = x.abs() / self.params.r_c;
        let v = integrate(
            |u| {
                let z = u * ratio;
                let d = if z < 1e-3 { z * z / 6.0 - z.powi(4) / 120.0 } else { 1.0 - z.sin() / z };
                u * u * (-u * u).exp() * form_factor_ratio(eta * u).powi(2) * d
            },
            0.0,
            U_MAX,
            &quad(),
        )?;
        Ok(self.gamma * v / self.norm)
    }
}

pub fn csl_gamma_and_f(p: &ParticleSpec, c: CslParams) -> Result<CslRate> {
    CslRate::new(p, c)
}

/// CSL kernel for the pattern harmonics of one protocol.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CslKernel {
    pub rate: CslRate,
    t1: f64,
    t2: f64,
    step: f64,
}

impl CslKernel {
    pub fn new(p: &ParticleSpec, c: CslParams, period: f64, t1: f64, t2: f64) -> Result<Self> {
        if !(t1 > 0.0 && t2 > 0.0 && period > 0.0) {
            return Err(Error::Domain(format!("kernel t1={t1}, t2={t2}, d={period}")));
        }
        Ok(Self {
            rate: CslRate::new(p, c)?,
            t1,
            t2,
            step: PLANCK * t1 * t2 / (p.mass * period * (t1 + t2)),
        })
    }

    pub fn separation(&self, n: u64) -> f64 {
        n as f64 * self.step
    }

    /// ln Rₙ = Γ_CSL(f_CSL(sₙ) − 1)(t₁ + t₂).
    pub fn ln_r(&self, n: u64) -> Result<f64> {
        if n == 0 || self.rate.gamma == 0.0 {
            return Ok(0.0);
        }
        Ok(-self.rate.gamma * self.rate.deficit(self.separation(n))? * (self.t1 + self.t2))
    }

    pub fn r(&self, n: u64) -> Result<f64> {
        self.ln_r(n).map(f64::exp)
    }
}

pub fn csl_kernel(n: u64, p: &ParticleSpec, c: CslParams, period: f64, t1: f64, t2: f64) -> Result<f64> {
    CslKernel::new(p, c, period, t1, t2)?.r(n)
}

/// Bracket (1+η²/2)e^{−η²} + η²/2 − 1 of the CSL diffusion constant.
fn csl_bracket(eta: f64) -> f64 {
    if eta < 0.1 {
        let e2 = eta * eta;
        let e6 = e2 * e2 * e2;
        e6 * (1.0 / 12.0 - e2 / 24.0 + e2 * e2 / 80.0 - e2 * e2 * e2 / 360.0)
    } else {
        let e2 = eta * eta;
        (1.0 + 0.5 * e2) * (-e2).exp() + 0.5 * e2 - 1.0
    }
}

/// Λ_CSL = 6λM²/(m₀²R²η⁴)[(1+η²/2)e^{−η²} + η²/2 − 1], η = R/r_c.
pub fn csl_diffusion(p: &ParticleSpec, c: CslParams) -> f64 {
    let eta = p.radius / c.r_c;
    let n = p.mass / NUCLEON_MASS;
    6.0 * c.lambda * n * n / (p.radius * p.radius * eta.powi(4)) * csl_bracket(eta)
}

/// √π erf η − 3/η + 2/η³ + e^{−η²}(1/η − 2/η³).
fn dp_bracket(eta: f64) -> f64 {
    if eta < 0.1 {
        let e2 = eta * eta;
        eta * e2 * (1.0 / 6.0 - e2 / 20.0 + 3.0 * e2 * e2 / 280.0 - e2 * e2 * e2 / 540.0)
    } else {
        let e3 = eta * eta * eta;
        PI.sqrt() * libm::erf(eta) - 3.0 / eta + 2.0 / e3 + (-eta * eta).exp() * (1.0 / eta - 2.0 / e3)
    }
}

/// Λ_DP = M²G/(2ħ√πR³)·bracket(R/R₀).
pub fn dp_diffusion(p: &ParticleSpec, dp: DpParams) -> Result<f64> {
    let eta = p.radius / dp.r0;
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::Domain(format!("η_DP = {eta}")));
    }
    Ok(p.mass * p.mass * GRAVITATIONAL / (2.0 * HBAR * PI.sqrt() * p.radius.powi(3)) * dp_bracket(eta))
}
