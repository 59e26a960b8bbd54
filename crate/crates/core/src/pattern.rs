//! Near-field interference and shadow patterns.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::sync::Arc;

use num_complex::Complex64;

use crate::collapse::{CslKernel, CslParams};
use crate::constants::{BOLTZMANN, HBAR, PLANCK};
use crate::decoherence::{
    EnvironmentKernel, EnvironmentSpec, InternalTemperatureModel, KernelOptions, ParticleSpec,
    ThermalGrid,
};
use crate::grating::{talbot_classical_from, talbot_closed_form, GratingProfile, GratingSpec};
use crate::{Error, Result};

/// Tail tolerance of the harmonic sum.
pub const TAIL_TOLERANCE: f64 = 1e-8;
/// Hard ceiling on the number of harmonics.
pub const MAX_HARMONICS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolSpec {
    pub t1: f64,
    pub t2: f64,
    /// ν_m in Hz; the trap's angular frequency is 2πν_m.
    pub trap_frequency: f64,
    /// Center-of-mass temperature after cooling.
    pub com_temperature: f64,
    pub mission_constrained: bool,
}

impl ProtocolSpec {
    pub fn new(t1: f64, t2: f64, trap_frequency: f64, com_temperature: f64) -> Result<Self> {
        let p = Self {
            t1,
            t2,
            trap_frequency,
            com_temperature,
            mission_constrained: false,
        };
        p.validate()?;
        Ok(p)
    }

    /// Same, but rejecting t₁ + t₂ > 100 s.
    pub fn mission(t1: f64, t2: f64, trap_frequency: f64, com_temperature: f64) -> Result<Self> {
        let mut p = Self::new(t1, t2, trap_frequency, com_temperature)?;
        p.mission_constrained = true;
        p.validate()?;
        Ok(p)
    }

    fn validate(&self) -> Result<()> {
        if !(self.t1 > 0.0 && self.t2 > 0.0 && self.t1.is_finite() && self.t2.is_finite()) {
            return Err(Error::Domain(format!("free-fall times t1={}, t2={}", self.t1, self.t2)));
        }
        if !(self.trap_frequency > 0.0 && self.com_temperature >= 0.0) {
            return Err(Error::Domain(format!(
                "trap frequency {} Hz, temperature {} K",
                self.trap_frequency, self.com_temperature
            )));
        }
        if self.mission_constrained && self.t1 + self.t2 > 100.0 {
            return Err(Error::OutOfRange {
                value: self.t1 + self.t2,
                min: 0.0,
                max: 100.0,
            });
        }
        Ok(())
    }

    pub fn sigma_z(&self, mass: f64) -> f64 {
        initial_spreads(self.trap_frequency, self.com_temperature, mass).0
    }

    pub fn sigma_p(&self, mass: f64) -> f64 {
        initial_spreads(self.trap_frequency, self.com_temperature, mass).1
    }
}

/// Thermal spreads of a harmonically trapped particle: (σ_z, σ_p).
pub fn initial_spreads(nu: f64, t0: f64, mass: f64) -> (f64, f64) {
    let gamma = PI * mass * nu;
    // coth(hν/2kT); T = 0 is the ground state.
    let coth = if t0 <= 0.0 {
        1.0
    } else {
        let x = PLANCK * nu / (2.0 * BOLTZMANN * t0);
        if x > 20.0 {
            1.0
        } else {
            1.0 / x.tanh()
        }
    };
    ((HBAR / (4.0 * gamma) * coth).sqrt(), (HBAR * gamma * coth).sqrt())
}

pub fn talbot_time(mass: f64, d: f64) -> f64 {
    mass * d * d / PLANCK
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PatternKind {
    Quantum,
    Classical,
    Csl,
}

impl PatternKind {
    pub fn name(self) -> &'static str {
        match self {
            PatternKind::Quantum => "quantum",
            PatternKind::Classical => "classical",
            PatternKind::Csl => "csl",
        }
    }
}

/// Complex weights c_n of P(z)/δ = 1 + 2 Σ Re{c_n e^{2πinz/D}}.
#[derive(Debug, Clone)]
pub struct Harmonics {
    pub coefficients: Vec<Complex64>,
    pub magnification: f64,
    pub talbot_time: f64,
    pub delta: f64,
    /// Absolute gas-collision survival, divided out of the kernel.
    pub survival: f64,
}

impl Harmonics {
    /// Magnified period D·d.
    pub fn period(&self) -> f64 {
        self.magnification
    }

    pub fn truncation(&self) -> usize {
        self.coefficients.len()
    }

    /// P(z)/δ.
    pub fn relative(&self, z: f64) -> f64 {
        let step = Complex64::from_polar(1.0, 2.0 * PI * z / self.magnification);
        let mut phase = step;
        let mut sum = 0.0;
        for (i, c) in self.coefficients.iter().enumerate() {
            sum += (c * phase).re;
            // Re-anchor periodically so rounding does not drift.
            phase = if i % 64 == 63 {
                Complex64::from_polar(1.0, 2.0 * PI * (i + 2) as f64 * z / self.magnification)
            } else {
                phase * step
            };
        }
        1.0 + 2.0 * sum
    }

    pub fn density(&self, z: f64) -> f64 {
        self.delta * self.relative(z)
    }

    /// Multiply harmonic n by an extra kernel value.
    pub fn with_kernel(&self, mut kernel: impl FnMut(u64) -> Result<f64>) -> Result<Self> {
        let mut out = self.clone();
        for (i, c) in out.coefficients.iter_mut().enumerate() {
            *c *= kernel(i as u64 + 1)?;
        }
        Ok(out)
    }
}

/// Per-particle state reused across protocols and fluences.
#[derive(Debug, Clone)]
pub struct PatternEngine {
    pub particle: ParticleSpec,
    pub env: EnvironmentSpec,
    pub profile: Arc<GratingProfile>,
    grid: Arc<ThermalGrid>,
    pub kernel_options: KernelOptions,
}

impl PatternEngine {
    pub fn new(particle: &ParticleSpec, env: &EnvironmentSpec, wavelength: f64) -> Result<Self> {
        let profile = Arc::new(GratingProfile::new(particle, wavelength)?);
        let t_int0 = particle.internal_temperature.initial();
        let t_hi = env.temperature.max(t_int0);
        let t_lo = match particle.internal_temperature {
            InternalTemperatureModel::Constant(t) => env.temperature.min(t),
            InternalTemperatureModel::Radiative(t) => env.temperature.min(0.25 * t),
        };
        let grid = Arc::new(ThermalGrid::new(particle, t_lo, t_hi)?);
        Ok(Self {
            particle: particle.clone(),
            env: env.clone(),
            profile,
            grid,
            kernel_options: KernelOptions::default(),
        })
    }

    pub fn period(&self) -> f64 {
        self.profile.period()
    }

    pub fn talbot_time(&self) -> f64 {
        talbot_time(self.particle.mass, self.period())
    }

    /// Harmonic weights for one protocol, fluence and kind.
    /// `decoherence = false` sets every environmental kernel to 1.
    pub fn harmonics(
        &self,
        kind: PatternKind,
        protocol: &ProtocolSpec,
        fluence: f64,
        collapse: Option<CslParams>,
        decoherence: bool,
    ) -> Result<Harmonics> {
        protocol.validate()?;
        if !(fluence >= 0.0 && fluence.is_finite()) {
            return Err(Error::Domain(format!("fluence {fluence}")));
        }
        let (t1, t2) = (protocol.t1, protocol.t2);
        let m = self.particle.mass;
        let d = self.period();
        let t_t = talbot_time(m, d);
        let dd = d * (t1 + t2) / t1;
        let (sigma_z, sigma_p) = initial_spreads(protocol.trap_frequency, protocol.com_temperature, m);
        let delta = m / ((2.0 * PI).sqrt() * sigma_p * (t1 + t2));
        let eps = PI * sigma_z * t2 / (dd * t1);
        let xi = t1 * t2 / (t_t * (t1 + t2));

        let env = if decoherence {
            Some(EnvironmentKernel::with_grid(
                &self.particle,
                &self.env,
                (*self.grid).clone(),
                d,
                t1,
                t2,
                self.kernel_options,
            )?)
        } else {
            None
        };
        let csl = match (kind, collapse) {
            (PatternKind::Csl, Some(c)) => Some(CslKernel::new(&self.particle, c, d, t1, t2)?),
            (PatternKind::Csl, None) => {
                return Err(Error::Domain("csl pattern needs collapse parameters".into()))
            }
            _ => None,
        };
        let survival = env.as_ref().map_or(1.0, |k| k.survival());

        let mut coefficients = Vec::new();
        for n in 1..=MAX_HARMONICS as u64 {
            let s = n as f64 * xi * d;
            let b = match kind {
                PatternKind::Classical => {
                    Complex64::new(talbot_classical_from(&self.profile, fluence, n as i64, s)?, 0.0)
                }
                PatternKind::Quantum | PatternKind::Csl => {
                    let g = self.profile.functions(fluence, s)?;
                    talbot_closed_form(n as i64, &g)?
                }
            };
            let mut ln_r = env.as_ref().map_or(0.0, |k| k.ln_r(n));
            if let Some(k) = &csl {
                ln_r += k.ln_r(n)?;
            }
            let r = ln_r.exp();
            let damp = (-2.0 * (n as f64 * eps).powi(2)).exp();
            coefficients.push(b * r * damp);
            // Later terms are bounded by |B| ≤ 1 and a non-increasing kernel.
            if 2.0 * r * damping_tail(n + 1, eps) < TAIL_TOLERANCE {
                return Ok(Harmonics {
                    coefficients,
                    magnification: dd,
                    talbot_time: t_t,
                    delta,
                    survival,
                });
            }
        }
        Err(Error::Convergence {
            estimate: coefficients.iter().map(|c| 1.0 + 2.0 * c.re).sum(),
            error: 2.0 * damping_tail(MAX_HARMONICS as u64 + 1, eps),
        })
    }

    #[allow(clippy::too_many_arguments)]
    pub fn pattern(
        &self,
        kind: PatternKind,
        protocol: &ProtocolSpec,
        fluence: f64,
        collapse: Option<CslParams>,
        z_window: Option<(f64, f64)>,
        samples: usize,
    ) -> Result<Pattern> {
        let h = self.harmonics(kind, protocol, fluence, collapse, true)?;
        Pattern::from_harmonics(kind, h, z_window, samples, spec_digest(self, protocol, fluence, collapse))
    }
}

/// Σ_{m ≥ n} exp(−2(mε)²), bounded by the first term plus the integral.
fn damping_tail(n: u64, eps: f64) -> f64 {
    let x = n as f64 * eps;
    let first = (-2.0 * x * x).exp();
    if eps <= 0.0 {
        return f64::INFINITY;
    }
    first + (PI / 8.0).sqrt() / eps * libm::erfc(2f64.sqrt() * x)
}

pub fn spec_digest(e: &PatternEngine, protocol: &ProtocolSpec, fluence: f64, collapse: Option<CslParams>) -> String {
    // FNV-1a over the debug rendering of every input.
    let text = format!(
        "{:?}|{:?}|{:?}|{:?}|{:?}|{:?}|{}",
        e.particle.radius,
        e.particle.internal_temperature,
        e.env,
        e.profile.wavelength,
        protocol,
        collapse,
        fluence
    );
    let mut h: u64 = 0xcbf29ce484222325;
    for b in text.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    format!("{h:016x}")
}

#[derive(Debug, Clone)]
pub struct Pattern {
    pub z_grid: Vec<f64>,
    pub values: Vec<f64>,
    pub kind: PatternKind,
    pub digest: String,
    pub truncation: usize,
    pub magnification: f64,
    pub talbot_time: f64,
    pub delta: f64,
    pub survival: f64,
}

impl Pattern {
    /// Sample on `samples` points spanning `z_window` inclusive; default is one period centered at 0.
    pub fn from_harmonics(
        kind: PatternKind,
        h: Harmonics,
        z_window: Option<(f64, f64)>,
        samples: usize,
        digest: String,
    ) -> Result<Self> {
        if samples < 64 {
            return Err(Error::Domain(format!("{samples} samples, need at least 64")));
        }
        let (lo, hi) = z_window.unwrap_or((-0.5 * h.magnification, 0.5 * h.magnification));
        if !(hi > lo) {
            return Err(Error::Domain(format!("empty window ({lo}, {hi})")));
        }
        let step = (hi - lo) / (samples - 1) as f64;
        let z_grid: Vec<f64> = (0..samples).map(|i| lo + i as f64 * step).collect();
        let values = z_grid.iter().map(|&z| h.density(z)).collect();
        Ok(Self {
            z_grid,
            values,
            kind,
            digest,
            truncation: h.truncation(),
            magnification: h.magnification,
            talbot_time: h.talbot_time,
            delta: h.delta,
            survival: h.survival,
        })
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# kind = {}", self.kind.name());
        let _ = writeln!(out, "# digest = {}", self.digest);
        let _ = writeln!(out, "# truncation = {}", self.truncation);
        let _ = writeln!(out, "# magnified_period_m = {:e}", self.magnification);
        let _ = writeln!(out, "# talbot_time_s = {:e}", self.talbot_time);
        let _ = writeln!(out, "# delta_per_m = {:e}", self.delta);
        let _ = writeln!(out, "# collision_survival = {:e}", self.survival);
        out.push_str("z_m, p_per_m\n");
        for (z, p) in self.z_grid.iter().zip(&self.values) {
            let _ = writeln!(out, "{z:e}, {p:e}");
        }
        out
    }
}

/// One-shot convenience wrapper building the engine on the fly.
#[allow(clippy::too_many_arguments)]
pub fn compute_pattern(
    kind: PatternKind,
    protocol: &ProtocolSpec,
    particle: &ParticleSpec,
    grating: &GratingSpec,
    env: &EnvironmentSpec,
    collapse: Option<CslParams>,
    z_window: Option<(f64, f64)>,
    samples: usize,
) -> Result<Pattern> {
    let engine = PatternEngine::new(particle, env, grating.wavelength)?;
    engine.pattern(kind, protocol, grating.fluence, collapse, z_window, samples)
}
