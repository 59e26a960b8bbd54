//! Environmental decoherence during free fall: residual-gas collisions, thermal photon
//! scattering, absorption and emission, and the resulting pattern kernel Rₙ.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::constants::{AMU, BOLTZMANN, HBAR, PLANCK, SPEED_OF_LIGHT};
use crate::material::{c6_coefficient, GasSpecies, Material};
use crate::mathkit::{gauss_legendre, si_deficit, sine_integral, sinc};
use crate::mie::solve_mie;
use crate::{Error, Result};

/// Γ(9/10).
const GAMMA_NINE_TENTHS: f64 = 1.068_628_702_119_319_3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InternalTemperatureModel {
    Constant(f64),
    /// Radiative cooling from the given release temperature.
    Radiative(f64),
}

impl InternalTemperatureModel {
    pub fn initial(&self) -> f64 {
        match *self {
            Self::Constant(t) | Self::Radiative(t) => t,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParticleSpec {
    pub radius: f64,
    pub mass: f64,
    pub material: Arc<Material>,
    pub internal_temperature: InternalTemperatureModel,
}

impl ParticleSpec {
    pub fn from_radius(
        material: Arc<Material>,
        radius: f64,
        internal_temperature: InternalTemperatureModel,
    ) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::Domain(format!("radius {radius}")));
        }
        if !(internal_temperature.initial() >= 0.0) {
            return Err(Error::Domain("internal temperature must be ≥ 0".into()));
        }
        Ok(Self {
            mass: material.mass(radius),
            radius,
            material,
            internal_temperature,
        })
    }

    pub fn from_mass(
        material: Arc<Material>,
        mass: f64,
        internal_temperature: InternalTemperatureModel,
    ) -> Result<Self> {
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(Error::Domain(format!("mass {mass}")));
        }
        let radius = material.radius_for_mass(mass);
        Self::from_radius(material, radius, internal_temperature)
    }

    pub fn mass_amu(&self) -> f64 {
        self.mass / AMU
    }

    pub fn heat_capacity(&self) -> f64 {
        self.mass * self.material.specific_heat
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnvironmentSpec {
    pub temperature: f64,
    pub pressure: f64,
    pub gas: GasSpecies,
}

impl EnvironmentSpec {
    pub fn new(temperature: f64, pressure: f64, gas: GasSpecies) -> Result<Self> {
        if !(temperature > 0.0 && pressure >= 0.0) {
            return Err(Error::Domain(format!(
                "environment T={temperature} K, p={pressure} Pa"
            )));
        }
        Ok(Self {
            temperature,
            pressure,
            gas,
        })
    }

    pub fn gas_mean_velocity(&self) -> f64 {
        self.gas.thermal_velocity(self.temperature)
    }
}

/// Total collision rate with the residual gas for a van der Waals (C₆) interaction,
/// [4πΓ(9/10)/(5 sin(π/5))](3πC₆/2ħ)^{2/5} v_g^{3/5} p_g/(k_B T).
pub fn collision_rate(p: &ParticleSpec, env: &EnvironmentSpec) -> Result<f64> {
    let c6 = c6_coefficient(&p.material, p.radius, &env.gas)?;
    Ok(collision_rate_from_c6(c6, env))
}

pub fn collision_rate_from_c6(c6: f64, env: &EnvironmentSpec) -> f64 {
    let pre = 4.0 * PI * GAMMA_NINE_TENTHS / (5.0 * (PI / 5.0).sin());
    let density = env.pressure / (BOLTZMANN * env.temperature);
    pre * (3.0 * PI * c6 / (2.0 * HBAR)).powf(0.4) * env.gas_mean_velocity().powf(0.6) * density
}

/// Mean occupation 1/(e^{ħω/kT} − 1); zero for an empty bath.
fn bose(omega: f64, t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let x = HBAR * omega / (BOLTZMANN * t);
    if x > 700.0 {
        0.0
    } else {
        1.0 / x.exp_m1()
    }
}

fn boltzmann_factor(omega: f64, t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        (-HBAR * omega / (BOLTZMANN * t)).exp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralRates {
    pub sca: f64,
    pub abs: f64,
    pub emi: f64,
}

#[derive(Debug, Clone, Copy)]
struct CrossSectionPair {
    sca: f64,
    abs: f64,
}

fn thermal_cross_sections(p: &ParticleSpec, omega: f64) -> Result<CrossSectionPair> {
    let k = omega / SPEED_OF_LIGHT;
    let m_rel = p.material.eps(omega).sqrt();
    let cs = solve_mie(p.radius, k, m_rel)?.cross_sections(k);
    Ok(CrossSectionPair {
        sca: cs.sca.max(0.0),
        abs: cs.abs.max(0.0),
    })
}

fn mode_density(omega: f64) -> f64 {
    (omega / (PI * SPEED_OF_LIGHT)).powi(2)
}

/// Spectral scattering and absorption rates in a bath at `t_env`, and the emission rate
/// at internal temperature `t_int`.
pub fn bb_rates(p: &ParticleSpec, omega: f64, t_env: f64, t_int: f64) -> Result<SpectralRates> {
    if !(omega > 0.0) {
        return Err(Error::Domain(format!("frequency {omega}")));
    }
    let cs = thermal_cross_sections(p, omega)?;
    let g = mode_density(omega);
    Ok(SpectralRates {
        sca: g * cs.sca * bose(omega, t_env),
        abs: g * cs.abs * bose(omega, t_env),
        emi: g * cs.abs * boltzmann_factor(omega, t_int),
    })
}

/// Frequency quadrature grid with cross sections cached at every node.
///
/// Panels follow the permittivity table (which is only piecewise smooth) and are further
/// split so no panel is wider than a fraction of k_B T_lo/ħ.
#[derive(Debug, Clone)]
pub struct ThermalGrid {
    pub omega: Vec<f64>,
    pub weight: Vec<f64>,
    sigma_sca: Vec<f64>,
    sigma_abs: Vec<f64>,
}

impl ThermalGrid {
    pub fn new(p: &ParticleSpec, t_lo: f64, t_hi: f64) -> Result<Self> {
        let mut grid = Self {
            omega: Vec::new(),
            weight: Vec::new(),
            sigma_sca: Vec::new(),
            sigma_abs: Vec::new(),
        };
        if !(t_hi > 0.0) {
            return Ok(grid);
        }
        let t_lo = if t_lo > 0.0 { t_lo.min(t_hi) } else { t_hi };
        let top = 45.0 * BOLTZMANN * t_hi / HBAR;
        let width = 2.0 * BOLTZMANN * t_lo / HBAR;
        let mut edges = vec![0.0];
        edges.extend(
            p.material
                .table()
                .iter()
                .map(|n| n.omega)
                .filter(|&w| w > 0.0 && w < top),
        );
        edges.push(top);
        let gl = gauss_legendre(12);
        for e in edges.windows(2) {
            let pieces = (((e[1] - e[0]) / width).ceil() as usize).clamp(1, 4000);
            let h = (e[1] - e[0]) / pieces as f64;
            for j in 0..pieces {
                let (a, b) = (e[0] + j as f64 * h, e[0] + (j + 1) as f64 * h);
                let (c, half) = (0.5 * (a + b), 0.5 * (b - a));
                for (x, w) in gl.nodes.iter().zip(&gl.weights) {
                    let omega = c + half * x;
                    let cs = thermal_cross_sections(p, omega)?;
                    grid.omega.push(omega);
                    grid.weight.push(w * half);
                    grid.sigma_sca.push(cs.sca);
                    grid.sigma_abs.push(cs.abs);
                }
            }
        }
        Ok(grid)
    }

    pub fn len(&self) -> usize {
        self.omega.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omega.is_empty()
    }

    pub fn rates(&self, i: usize, t_env: f64, t_int: f64) -> SpectralRates {
        let w = self.omega[i];
        let g = mode_density(w);
        SpectralRates {
            sca: g * self.sigma_sca[i] * bose(w, t_env),
            abs: g * self.sigma_abs[i] * bose(w, t_env),
            emi: g * self.sigma_abs[i] * boltzmann_factor(w, t_int),
        }
    }

    /// Radiated power ∫ħω γ_emi(ω, T) dω.
    pub fn emitted_power(&self, t_int: f64) -> f64 {
        (0..self.len())
            .map(|i| self.weight[i] * HBAR * self.omega[i] * self.rates(i, 0.0, t_int).emi)
            .sum()
    }
}

/// Internal temperature along free fall, tabulated on an adaptive RK4 mesh.
#[derive(Debug, Clone)]
pub struct TemperatureTrajectory {
    times: Vec<f64>,
    temps: Vec<f64>,
    slopes: Vec<f64>,
}

impl TemperatureTrajectory {
    pub fn constant(t: f64) -> Self {
        Self {
            times: vec![0.0],
            temps: vec![t],
            slopes: vec![0.0],
        }
    }

    /// Integrate dT/dt = −P(T)/(M c_m) up to `t_end` with step doubling.
    pub fn radiative(grid: &ThermalGrid, heat_capacity: f64, t0: f64, t_end: f64) -> Result<Self> {
        let rhs = |t: f64| -grid.emitted_power(t.max(0.0)) / heat_capacity;
        let rk4 = |y: f64, h: f64| {
            let k1 = rhs(y);
            let k2 = rhs(y + 0.5 * h * k1);
            let k3 = rhs(y + 0.5 * h * k2);
            let k4 = rhs(y + h * k3);
            y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        };
        let mut traj = Self {
            times: vec![0.0],
            temps: vec![t0],
            slopes: vec![rhs(t0)],
        };
        let mut t = 0.0;
        let mut y = t0;
        let mut h = (t_end / 64.0).max(1e-9);
        let mut steps = 0usize;
        while t < t_end {
            h = h.min(t_end - t);
            let full = rk4(y, h);
            let half = rk4(rk4(y, 0.5 * h), 0.5 * h);
            let err = (half - full).abs() / 15.0;
            let tol = 1e-10 * t0.max(1e-3);
            if err <= tol || h < 1e-9 {
                t += h;
                y = (half + (half - full) / 15.0).max(0.0);
                traj.times.push(t);
                traj.temps.push(y);
                traj.slopes.push(rhs(y));
                if err < tol / 32.0 {
                    h *= 2.0;
                }
            } else {
                h *= 0.5;
            }
            steps += 1;
            if steps > 1_000_000 {
                return Err(Error::Convergence {
                    estimate: y,
                    error: err,
                });
            }
        }
        Ok(traj)
    }

    /// Temperature at time `t` after release (cubic Hermite between mesh points).
    pub fn at(&self, t: f64) -> f64 {
        let n = self.times.len();
        if n == 1 || t <= 0.0 {
            return self.temps[0];
        }
        if t >= self.times[n - 1] {
            return self.temps[n - 1];
        }
        let j = self.times.partition_point(|&x| x <= t).max(1);
        let (t0, t1) = (self.times[j - 1], self.times[j]);
        let h = t1 - t0;
        let u = (t - t0) / h;
        let (y0, y1) = (self.temps[j - 1], self.temps[j]);
        let (m0, m1) = (self.slopes[j - 1] * h, self.slopes[j] * h);
        let u2 = u * u;
        let u3 = u2 * u;
        (2.0 * u3 - 3.0 * u2 + 1.0) * y0
            + (u3 - 2.0 * u2 + u) * m0
            + (-2.0 * u3 + 3.0 * u2) * y1
            + (u3 - u2) * m1
    }
}

/// T_int(t) for the particle's model; `t_env` only fixes the frequency grid.
pub fn internal_temperature(p: &ParticleSpec, t: f64) -> Result<f64> {
    match p.internal_temperature {
        InternalTemperatureModel::Constant(t0) => Ok(t0),
        InternalTemperatureModel::Radiative(t0) => {
            let grid = ThermalGrid::new(p, 0.25 * t0, t0)?;
            Ok(TemperatureTrajectory::radiative(&grid, p.heat_capacity(), t0, t)?.at(t))
        }
    }
}

/// Bracket [Si(a)/a − 1] of the absorption term; also the θ-average of sinc(aθ) − 1.
pub fn absorption_bracket(a: f64) -> f64 {
    -si_deficit(a)
}

/// Bracket [Si(2a)/a − sinc²(a) − 1] of the scattering term.
pub fn scattering_bracket(a: f64) -> f64 {
    if a.abs() < 1e-3 {
        let a2 = a * a;
        return -a2 / 9.0 + a2 * a2 * 2.0 / 225.0;
    }
    let s = sinc(a);
    sine_integral(2.0 * a).unwrap_or(0.0) / a - s * s - 1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct KernelOptions {
    /// Multiply the scattering term by (t₁ − t₂) as printed, instead of (t₁ + t₂).
    pub literal_scattering_time: bool,
}

/// Precomputed environmental kernel for one particle, environment and protocol.
#[derive(Debug, Clone)]
pub struct EnvironmentKernel {
    pub collision_rate: f64,
    grid: ThermalGrid,
    t1: f64,
    t2: f64,
    /// Momentum-to-separation factor: s_n = n·step.
    step: f64,
    gamma_sca: Vec<f64>,
    gamma_abs: Vec<f64>,
    /// Constant-temperature emission rate, or per-node θ-profiles for radiative cooling.
    emission: Emission,
    options: KernelOptions,
}

#[derive(Debug, Clone)]
enum Emission {
    Constant(Vec<f64>),
    /// (θ nodes, θ weights, γ_emi for leg 1 and leg 2 at every (ω, θ)).
    Trajectory {
        theta: Vec<f64>,
        weight: Vec<f64>,
        leg1: Vec<Vec<f64>>,
        leg2: Vec<Vec<f64>>,
    },
}

impl EnvironmentKernel {
    pub fn new(
        p: &ParticleSpec,
        env: &EnvironmentSpec,
        period: f64,
        t1: f64,
        t2: f64,
        options: KernelOptions,
    ) -> Result<Self> {
        let t_int0 = p.internal_temperature.initial();
        let t_hi = env.temperature.max(t_int0);
        let t_lo = match p.internal_temperature {
            InternalTemperatureModel::Constant(t) => env.temperature.min(t).max(0.0),
            InternalTemperatureModel::Radiative(t) => env.temperature.min(0.25 * t),
        };
        let grid = ThermalGrid::new(p, t_lo, t_hi)?;
        Self::with_grid(p, env, grid, period, t1, t2, options)
    }

    /// Reuse a frequency grid built for the same particle.
    pub fn with_grid(
        p: &ParticleSpec,
        env: &EnvironmentSpec,
        grid: ThermalGrid,
        period: f64,
        t1: f64,
        t2: f64,
        options: KernelOptions,
    ) -> Result<Self> {
        if !(t1 > 0.0 && t2 > 0.0 && period > 0.0) {
            return Err(Error::Domain(format!("kernel t1={t1}, t2={t2}, d={period}")));
        }
        let collision_rate = collision_rate(p, env)?;
        let step = PLANCK * t1 * t2 / (p.mass * period * (t1 + t2));
        let n = grid.len();
        let mut gamma_sca = vec![0.0; n];
        let mut gamma_abs = vec![0.0; n];
        let t_int0 = p.internal_temperature.initial();
        for i in 0..n {
            let r = grid.rates(i, env.temperature, t_int0);
            gamma_sca[i] = r.sca;
            gamma_abs[i] = r.abs;
        }
        let emission = match p.internal_temperature {
            InternalTemperatureModel::Constant(t) => {
                Emission::Constant((0..n).map(|i| grid.rates(i, 0.0, t).emi).collect())
            }
            InternalTemperatureModel::Radiative(t0) => {
                let traj = TemperatureTrajectory::radiative(&grid, p.heat_capacity(), t0, t1 + t2)?;
                let gl = gauss_legendre(32);
                let theta: Vec<f64> = gl.nodes.iter().map(|x| 0.5 * (x + 1.0)).collect();
                let weight: Vec<f64> = gl.weights.iter().map(|w| 0.5 * w).collect();
                let temps1: Vec<f64> = theta.iter().map(|th| traj.at(t1 - t1 * th)).collect();
                let temps2: Vec<f64> = theta.iter().map(|th| traj.at(t1 + t2 * th)).collect();
                let leg = |temps: &[f64]| -> Vec<Vec<f64>> {
                    (0..n)
                        .map(|i| temps.iter().map(|&t| grid.rates(i, 0.0, t).emi).collect())
                        .collect()
                };
                Emission::Trajectory {
                    leg1: leg(&temps1),
                    leg2: leg(&temps2),
                    theta,
                    weight,
                }
            }
        };
        Ok(Self {
            collision_rate,
            grid,
            t1,
            t2,
            step,
            gamma_sca,
            gamma_abs,
            emission,
            options,
        })
    }

    /// Separation s_n = n h t₁t₂/(m d (t₁+t₂)).
    pub fn separation(&self, n: u64) -> f64 {
        n as f64 * self.step
    }

    pub fn ln_r(&self, n: u64) -> f64 {
        if n == 0 {
            return 0.0;
        }
        let total = self.t1 + self.t2;
        let sca_time = if self.options.literal_scattering_time {
            self.t1 - self.t2
        } else {
            total
        };
        let s = self.separation(n);
        let mut ln = 0.0;
        for i in 0..self.grid.len() {
            let a = self.grid.omega[i] * s / SPEED_OF_LIGHT;
            let w = self.grid.weight[i];
            let abs_br = absorption_bracket(a);
            ln += w * self.gamma_abs[i] * abs_br * total;
            ln += w * self.gamma_sca[i] * scattering_bracket(a) * sca_time;
            match &self.emission {
                Emission::Constant(g) => ln += w * g[i] * abs_br * total,
                Emission::Trajectory {
                    theta,
                    weight,
                    leg1,
                    leg2,
                } => {
                    let mut acc = 0.0;
                    for (j, (&th, &wt)) in theta.iter().zip(weight).enumerate() {
                        let br = sinc(a * th) - 1.0;
                        acc += wt * (self.t1 * leg1[i][j] + self.t2 * leg2[i][j]) * br;
                    }
                    ln += w * acc;
                }
            }
        }
        ln
    }

    pub fn r(&self, n: u64) -> f64 {
        self.ln_r(n).exp()
    }

    /// Probability of no gas collision over both legs; divided out of `ln_r`.
    pub fn survival(&self) -> f64 {
        (-self.collision_rate * (self.t1 + self.t2)).exp()
    }
}

/// Quadratic (small-separation) localization coefficients in 1/(m²·s).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalizationRates {
    /// Γ_coll, the saturated gas rate.
    pub collision_rate: f64,
    pub gas: f64,
    pub scattering: f64,
    pub absorption: f64,
    pub emission: f64,
}

impl LocalizationRates {
    pub fn blackbody(&self) -> f64 {
        self.scattering + self.absorption + self.emission
    }
}

/// Λ coefficients: Λ_gas = Γ_coll m_g k_B T/ħ², Λ_abs,emi = ∫γω²/(6c²), Λ_sca = ∫γ_sca ω²/(3c²).
pub fn localization_rates(p: &ParticleSpec, env: &EnvironmentSpec) -> Result<LocalizationRates> {
    let t_int = p.internal_temperature.initial();
    let grid = ThermalGrid::new(p, env.temperature.min(t_int.max(1e-3)), env.temperature.max(t_int))?;
    let gamma = collision_rate(p, env)?;
    let c2 = SPEED_OF_LIGHT * SPEED_OF_LIGHT;
    let (mut sca, mut abs, mut emi) = (0.0, 0.0, 0.0);
    for i in 0..grid.len() {
        let r = grid.rates(i, env.temperature, t_int);
        let w = grid.weight[i] * grid.omega[i].powi(2) / c2;
        sca += w * r.sca / 3.0;
        abs += w * r.abs / 6.0;
        emi += w * r.emi / 6.0;
    }
    Ok(LocalizationRates {
        collision_rate: gamma,
        gas: gamma * env.gas.mass * BOLTZMANN * env.temperature / (HBAR * HBAR),
        scattering: sca,
        absorption: abs,
        emission: emi,
    })
}
