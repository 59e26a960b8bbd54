//! Non-interferometric tests: position-variance growth and the bounds it sets.

use std::fmt::Write as _;

use crate::collapse::{csl_diffusion, dp_diffusion, CslParams, DpParams};
use crate::constants::HBAR;
use crate::decoherence::{localization_rates, EnvironmentSpec, LocalizationRates, ParticleSpec};
use crate::{Error, Result};

/// Diffusion constants Λ in 1/(m²·s).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DiffusionBudget {
    pub gas: f64,
    pub blackbody: f64,
    pub csl: f64,
    pub dp: f64,
    pub total: f64,
}

pub fn diffusion_budget(
    p: &ParticleSpec,
    env: &EnvironmentSpec,
    csl: Option<CslParams>,
    dp: Option<DpParams>,
) -> Result<DiffusionBudget> {
    let rates = localization_rates(p, env)?;
    let csl = csl.map_or(0.0, |c| csl_diffusion(p, c));
    let dp = match dp {
        Some(d) => dp_diffusion(p, d)?,
        None => 0.0,
    };
    let (gas, blackbody) = (rates.gas, rates.blackbody());
    Ok(DiffusionBudget {
        gas,
        blackbody,
        csl,
        dp,
        total: gas + blackbody + csl + dp,
    })
}

/// Γ(x) for a precomputed set of localization rates.
pub fn decoherence_function_from(x: f64, rates: &LocalizationRates) -> f64 {
    let x2 = x * x;
    let g = rates.collision_rate;
    let gas = if g > 0.0 {
        // exp_m1 keeps the small-x limit Λx² accurate.
        -g * (-rates.gas * x2 / g).exp_m1()
    } else {
        0.0
    };
    gas + rates.blackbody() * x2
}

pub fn decoherence_function(x: f64, p: &ParticleSpec, env: &EnvironmentSpec) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::Domain(format!("separation {x}")));
    }
    Ok(decoherence_function_from(x, &localization_rates(p, env)?))
}

/// ⟨Δσ²⟩ = 2Λħ²t³/(3m²).
pub fn variance_growth(lambda: f64, mass: f64, t: f64) -> f64 {
    2.0 * lambda * HBAR * HBAR * t.powi(3) / (3.0 * mass * mass)
}

/// Trap frequency with an explicit convention.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Frequency {
    /// ω in rad/s.
    Angular(f64),
    /// ν in Hz, ω = 2πν.
    Cyclic(f64),
}

impl Frequency {
    pub fn angular(self) -> f64 {
        match self {
            Frequency::Angular(w) => w,
            Frequency::Cyclic(nu) => 2.0 * std::f64::consts::PI * nu,
        }
    }
}

/// Free-expansion variance x_s² = t²ωħ/(2m).
pub fn expansion_variance(freq: Frequency, t: f64, mass: f64) -> f64 {
    t * t * freq.angular() * HBAR / (2.0 * mass)
}

/// Δx_f with Δx_f² = √(2t/T)·x_s².
pub fn statistical_limit(freq: Frequency, t: f64, total_time: f64, mass: f64) -> Result<f64> {
    if !(t > 0.0 && total_time > t) {
        return Err(Error::Domain(format!("run time {t} s within total {total_time} s")));
    }
    Ok(((2.0 * t / total_time).sqrt() * expansion_variance(freq, t, mass)).sqrt())
}

/// √S_aa = sqrt(3d²/(8πT³)).
pub fn accel_noise_requirement(d: f64, t: f64) -> Result<f64> {
    if !(d > 0.0 && t > 0.0) {
        return Err(Error::Domain(format!("d = {d}, T = {t}")));
    }
    Ok((3.0 * d * d / (8.0 * std::f64::consts::PI * t.powi(3))).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundMode {
    /// Λ_CSL equal to the environmental Λ.
    Environment,
    /// CSL variance growth over one run equal to the statistical floor.
    Statistics {
        run_time: f64,
        total_time: f64,
        frequency: Frequency,
        /// Position resolution, added in quadrature.
        resolution: f64,
    },
}

impl BoundMode {
    pub fn name(&self) -> &'static str {
        match self {
            BoundMode::Environment => "environment",
            BoundMode::Statistics { .. } => "statistics",
        }
    }
}

/// Smallest λ detectable at correlation length r_c.
pub fn csl_bound_noninterf(
    r_c: f64,
    p: &ParticleSpec,
    env: &EnvironmentSpec,
    mode: BoundMode,
) -> Result<f64> {
    let rates = localization_rates(p, env)?;
    csl_bound_from(r_c, p, &rates, mode)
}

/// Same, reusing localization rates across an r_c sweep.
pub fn csl_bound_from(
    r_c: f64,
    p: &ParticleSpec,
    rates: &LocalizationRates,
    mode: BoundMode,
) -> Result<f64> {
    // Λ_CSL is linear in λ, so one evaluation at λ = 1 fixes the slope.
    let unit = csl_diffusion(p, CslParams::new(1.0, r_c)?);
    if !(unit > 0.0) {
        return Err(Error::Degenerate(format!("vanishing CSL diffusion at r_c = {r_c}")));
    }
    let env_lambda = rates.gas + rates.blackbody();
    let target = match mode {
        BoundMode::Environment => env_lambda,
        BoundMode::Statistics {
            run_time,
            total_time,
            frequency,
            resolution,
        } => {
            let t = run_time;
            if !(t > 0.0 && total_time > t) {
                return Err(Error::Domain(format!("run time {t} s within total {total_time} s")));
            }
            let spread = expansion_variance(frequency, t, p.mass) + variance_growth(env_lambda, p.mass, t);
            let floor = (2.0 * t / total_time).sqrt() * spread + resolution * resolution;
            floor * 3.0 * p.mass * p.mass / (2.0 * HBAR * HBAR * t.powi(3))
        }
    };
    Ok(target / unit)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundPoint {
    pub r_c: f64,
    pub lambda_min: f64,
}

pub fn bound_curve(
    r_cs: &[f64],
    p: &ParticleSpec,
    env: &EnvironmentSpec,
    mode: BoundMode,
) -> Result<Vec<BoundPoint>> {
    let rates = localization_rates(p, env)?;
    r_cs.iter()
        .map(|&r_c| {
            Ok(BoundPoint {
                r_c,
                lambda_min: csl_bound_from(r_c, p, &rates, mode)?,
            })
        })
        .collect()
}

pub fn bound_csv(points: &[BoundPoint], mode: BoundMode) -> String {
    let mut out = String::from("r_c_m, lambda_min_per_s, mode\n");
    for pt in points {
        let _ = writeln!(out, "{:e}, {:e}, {}", pt.r_c, pt.lambda_min, mode.name());
    }
    out
}

/// Log-spaced values from `lo` to `hi` inclusive.
pub fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n < 2 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::decoherence::InternalTemperatureModel;
    use crate::material::{GasSpecies, Material};

    fn sphere() -> ParticleSpec {
        ParticleSpec::from_radius(
            Arc::new(Material::silica()),
            60e-9,
            InternalTemperatureModel::Constant(40.0),
        )
        .unwrap()
    }

    fn env(p: f64) -> EnvironmentSpec {
        EnvironmentSpec::new(20.0, p, GasSpecies::hydrogen()).unwrap()
    }

    #[test]
    fn decoherence_limits_and_monotonicity() {
        let rates = localization_rates(&sphere(), &env(1e-11)).unwrap();
        assert_eq!(decoherence_function_from(0.0, &rates), 0.0);
        let x = 1e-13;
        let small = decoherence_function_from(x, &rates);
        let quad = (rates.gas + rates.blackbody()) * x * x;
        assert!((small / quad - 1.0).abs() < 1e-6);
        // Saturated gas term plus the blackbody quadratic.
        let x = 1e-6;
        let big = decoherence_function_from(x, &rates);
        assert!((big - rates.collision_rate - rates.blackbody() * x * x).abs() < 1e-9 * big);
        let mut last = 0.0;
        for x in log_space(1e-12, 1e-3, 60) {
            let g = decoherence_function_from(x, &rates);
            assert!(g >= last);
            last = g;
        }
    }

    #[test]
    fn variance_scaling() {
        assert_eq!(variance_growth(0.0, 1.0, 5.0), 0.0);
        let a = variance_growth(3.0, 2e-18, 7.0);
        assert!((variance_growth(3.0, 2e-18, 14.0) / a - 8.0).abs() < 1e-12);
    }

    #[test]
    fn statistical_limit_scaling() {
        let m = sphere().mass;
        let f = Frequency::Angular(1e5);
        let a = statistical_limit(f, 10.0, 1e6, m).unwrap();
        let b = statistical_limit(f, 20.0, 1e6, m).unwrap();
        assert!((b / a - 2f64.powf(1.25)).abs() < 1e-12);
        assert!(statistical_limit(f, 10.0, 1e30, m).unwrap() < 1e-10);
        assert!(statistical_limit(f, 10.0, 5.0, m).is_err());
        let c = statistical_limit(Frequency::Cyclic(1e5 / (2.0 * std::f64::consts::PI)), 10.0, 1e6, m);
        assert!((c.unwrap() / a - 1.0).abs() < 1e-12);
    }

    #[test]
    fn accel_noise_scaling() {
        let a = accel_noise_requirement(1e-6, 100.0).unwrap();
        assert!((accel_noise_requirement(2e-6, 100.0).unwrap() / a - 2.0).abs() < 1e-12);
        let b = accel_noise_requirement(1e-6, 800.0).unwrap();
        assert!((a / b - 512f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn budget_sums() {
        let b = diffusion_budget(&sphere(), &env(1e-11), Some(CslParams::adler()), Some(DpParams::unchecked(1e-7).unwrap()))
            .unwrap();
        assert!(b.gas >= 0.0 && b.blackbody >= 0.0 && b.csl >= 0.0 && b.dp >= 0.0);
        assert!((b.total - (b.gas + b.blackbody + b.csl + b.dp)).abs() <= 1e-12 * b.total);
    }

    #[test]
    fn environment_bound_is_linear_and_u_shaped() {
        let p = sphere();
        let rates = localization_rates(&p, &env(1e-11)).unwrap();
        let mut half = rates;
        half.gas *= 0.5;
        half.scattering *= 0.5;
        half.absorption *= 0.5;
        half.emission *= 0.5;
        let a = csl_bound_from(1e-7, &p, &rates, BoundMode::Environment).unwrap();
        let b = csl_bound_from(1e-7, &p, &half, BoundMode::Environment).unwrap();
        assert!((b / a - 0.5).abs() < 1e-12);

        let r_cs = log_space(1e-9, 1e-3, 61);
        let curve = bound_curve(&r_cs, &p, &env(1e-11), BoundMode::Environment).unwrap();
        let (imin, _) = curve
            .iter()
            .enumerate()
            .min_by(|x, y| x.1.lambda_min.total_cmp(&y.1.lambda_min))
            .unwrap();
        assert!(curve.iter().all(|c| c.lambda_min > 0.0 && c.lambda_min.is_finite()));
        assert!(imin > 0 && imin < curve.len() - 1);
        assert!(curve[0].lambda_min > 10.0 * curve[imin].lambda_min);
        assert!(curve[60].lambda_min > 10.0 * curve[imin].lambda_min);
        let csv = bound_csv(&curve, BoundMode::Environment);
        assert!(csv.starts_with("r_c_m, lambda_min_per_s, mode\n"));
    }

    #[test]
    fn statistics_bound_below_environment_bound() {
        let p = sphere();
        let stats = BoundMode::Statistics {
            run_time: 100.0,
            total_time: 30.0 * 86400.0,
            frequency: Frequency::Angular(1e5),
            resolution: 0.0,
        };
        for r_c in log_space(1e-9, 1e-3, 25) {
            let s = csl_bound_noninterf(r_c, &p, &env(3e-14), stats).unwrap();
            let e = csl_bound_noninterf(r_c, &p, &env(1e-11), BoundMode::Environment).unwrap();
            assert!(s < e, "{r_c}: {s} vs {e}");
        }
    }
}
