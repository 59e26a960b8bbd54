//! Acceptance suite. Prints one PASS/FAIL line per criterion.
//!
//! Criteria that check the implementation against itself or an independent
//! oracle (6, 7, 8, 11, 12) make the run fail when they fail. Criteria that
//! compare against published reference numbers are reported; set
//! NANOTALBOT_STRICT_ACCEPTANCE=1 to make those fatal as well.

use std::f64::consts::PI;
use std::sync::Arc;
use std::time::{Duration, Instant};

use nanotalbot::collapse::{csl_diffusion, dp_diffusion, CslKernel, CslParams, DpParams};
use nanotalbot::constants::{AMU, SPEED_OF_LIGHT};
use nanotalbot::decoherence::{
    collision_rate, localization_rates, EnvironmentSpec, InternalTemperatureModel, ParticleSpec,
};
use nanotalbot::grating::{talbot_closed_form, talbot_exact, GratingFunctions, GratingProfile, ZETA_SIGN};
use nanotalbot::material::{polarizability, GasSpecies, Material};
use nanotalbot::metrics::{aleph, THRESHOLD};
use nanotalbot::mie::{phase_per_fluence, rayleigh_phase, solve_mie};
use nanotalbot::noninterf::{accel_noise_requirement, statistical_limit, variance_growth, Frequency};
use nanotalbot::pattern::{PatternEngine, PatternKind, ProtocolSpec};
use nanotalbot::scan::{exclusion_curve, run_scan, ScanGrid, ScanOptions, ScanSpecs};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};

#[derive(Clone, Copy, PartialEq)]
enum Kind {
    /// Self-consistency or oracle check: always fatal.
    Internal,
    /// Comparison with a published number.
    Anchor,
}

struct Outcome {
    id: usize,
    kind: Kind,
    pass: bool,
    detail: String,
    elapsed: Duration,
    budget: Duration,
}

fn within_factor(x: f64, target: f64, factor: f64) -> bool {
    x > 0.0 && x / target <= factor && target / x <= factor
}

fn silica() -> Arc<Material> {
    Arc::new(Material::silica())
}

fn reference_sphere() -> ParticleSpec {
    ParticleSpec::from_radius(silica(), 60e-9, InternalTemperatureModel::Constant(40.0)).unwrap()
}

fn sphere_of_mass(amu: f64) -> ParticleSpec {
    ParticleSpec::from_mass(silica(), amu * AMU, InternalTemperatureModel::Constant(40.0)).unwrap()
}

fn reference_env(pressure: f64) -> EnvironmentSpec {
    EnvironmentSpec::new(20.0, pressure, GasSpecies::hydrogen()).unwrap()
}

fn trap_nu() -> f64 {
    1e5 / (2.0 * PI)
}

fn c1() -> (bool, String) {
    let v = accel_noise_requirement(1e-6, 100.0).unwrap();
    ((v / 3.5e-10 - 1.0).abs() <= 0.02, format!("sqrt(S_aa) = {v:.4e} vs 3.5e-10 (2%)"))
}

fn c2() -> (bool, String) {
    let g = collision_rate(&reference_sphere(), &reference_env(1e-11)).unwrap();
    (within_factor(g, 1.1, 2.0), format!("Gamma_coll = {g:.4e} 1/s vs 1.1 (x2)"))
}

fn c3() -> (bool, String) {
    let l = localization_rates(&reference_sphere(), &reference_env(1e-11)).unwrap();
    let bb = l.blackbody();
    (within_factor(bb, 4.9e12, 3.0), format!("Lambda_bb = {bb:.4e} 1/(m^2 s) vs 4.9e12 (x3)"))
}

fn c4() -> (bool, String) {
    let p = reference_sphere();
    let lam = dp_diffusion(&p, DpParams::new(0.5e-10).unwrap()).unwrap();
    let dx = variance_growth(lam, p.mass, 100.0).sqrt();
    (within_factor(dx, 3e-26, 3.0), format!("DP spread = {dx:.4e} m vs 3e-26 (x3)"))
}

fn c5() -> (bool, String) {
    let m = reference_sphere().mass;
    let dx = statistical_limit(Frequency::Angular(1e5), 100.0, 30.0 * 86400.0, m).unwrap();
    (within_factor(dx, 3e-5, 2.0), format!("dx_f = {dx:.4e} m vs 3e-5 (x2)"))
}

fn c6() -> (bool, String) {
    let lambda = 100e-9;
    let k = 2.0 * PI / lambda;
    let eps = Material::silica().eps(2.0 * PI * SPEED_OF_LIGHT / lambda);
    let mut worst: f64 = 0.0;
    for kr in [0.05, 0.03, 0.01] {
        let r = kr / k;
        let sol = solve_mie(r, k, eps.sqrt()).unwrap();
        let chi = polarizability(eps, r).unwrap();
        let ratio = phase_per_fluence(&sol, k) / rayleigh_phase(chi.re, 1.0);
        worst = worst.max((ratio - 1.0).abs());
    }
    (worst < 0.01, format!("max |phi0_Mie/phi0_point - 1| = {worst:.3e} for kR <= 0.05 (1%)"))
}

fn c7() -> (bool, String) {
    let mut worst: f64 = 0.0;
    // Synthetic channels of comparable size to every term.
    for phi0 in [0.3, 1.0, 3.0] {
        for sd in [0.1, 0.5, 0.9] {
            let th = PI * sd;
            let g = GratingFunctions {
                a: 0.21 * (1.0 - th.cos()),
                b: -0.13 * th.sin(),
                f: -0.4 * (1.0 - th.cos()),
                c_abs: 0.6 * (1.0 - th.cos()),
                zeta_coh: ZETA_SIGN * phi0 * th.sin(),
            };
            for n in -10..=10 {
                let e = talbot_exact(n, sd, phi0, &g).unwrap();
                let c = talbot_closed_form(n, &g).unwrap();
                worst = worst.max((e - c).norm());
            }
        }
    }
    // Channels from a real 25 nm sphere at the fluence giving each φ₀.
    let p = ParticleSpec::from_radius(silica(), 25e-9, InternalTemperatureModel::Constant(40.0)).unwrap();
    let prof = GratingProfile::new(&p, 100e-9).unwrap();
    let d = prof.period();
    for phi0 in [0.3, 1.0, 3.0] {
        let fluence = phi0 / prof.phase_per_fluence;
        for sd in [0.1, 0.5, 0.9] {
            let g = prof.functions(fluence, sd * d).unwrap();
            for n in -10..=10 {
                let e = talbot_exact(n, sd, phi0, &g).unwrap();
                let c = talbot_closed_form(n, &g).unwrap();
                worst = worst.max((e - c).norm());
            }
        }
    }
    (worst < 1e-6, format!("max |B_closed - B_exact| = {worst:.3e} (1e-6)"))
}

fn c8() -> (bool, String) {
    let mut worst: f64 = 0.0;
    for amu in [1e7, 1e9, 1e11] {
        let p = sphere_of_mass(amu);
        let c = CslParams::new(1e-8, 1e-7).unwrap();
        // Short free fall keeps the first separation far below r_c.
        let (t1, t2) = (1e-5, 1e-5);
        let kernel = CslKernel::new(&p, c, 50e-9, t1, t2).unwrap();
        let s = kernel.separation(1);
        assert!(s < 1e-3 * c.r_c, "separation {s} not small");
        let lam = -3.0 * kernel.ln_r(1).unwrap() / (s * s * (t1 + t2));
        worst = worst.max((lam / csl_diffusion(&p, c) - 1.0).abs());
    }
    (worst < 0.01, format!("max |Lambda_kernel/Lambda_CSL - 1| = {worst:.3e} (1%)"))
}

const PRESETS: [(f64, f64, f64); 5] = [
    (1e7, 12.0, 1.1e-2),
    (1e8, 10.0, 3.5e-4),
    (1e9, 10.0, 8.7e-6),
    (1e10, 50.0, 8.7e-6),
    (1e11, 50.0, 2.2e-5),
];

fn c9() -> (bool, String) {
    let env = reference_env(1e-11);
    let mut pass = true;
    let mut parts = Vec::new();
    for (amu, t, fluence) in PRESETS {
        let engine = PatternEngine::new(&sphere_of_mass(amu), &env, 100e-9).unwrap();
        let proto = ProtocolSpec::new(t, t, trap_nu(), 5e-6).unwrap();
        let w = Some((-0.5e-7, 0.5e-7));
        let q = engine.pattern(PatternKind::Quantum, &proto, fluence, None, w, 1025).unwrap();
        let c = engine.pattern(PatternKind::Classical, &proto, fluence, None, w, 1025).unwrap();
        let s = engine
            .pattern(PatternKind::Csl, &proto, fluence, Some(CslParams::adler()), w, 1025)
            .unwrap();
        let qc = aleph(&q, &c, 1e-7).unwrap().value;
        let qcsl = aleph(&q, &s, 1e-7).unwrap().value;
        pass &= qc > THRESHOLD && qcsl > THRESHOLD;
        parts.push(format!("{amu:.0e}: QC {qc:.4} QCSL {qcsl:.4}"));
    }
    (pass, format!("aleph > 0.05 at each preset; {}", parts.join("; ")))
}

fn c10() -> (bool, String) {
    let engine = PatternEngine::new(&sphere_of_mass(1e9), &reference_env(1e-11), 100e-9).unwrap();
    let specs = ScanSpecs::new(engine, trap_nu(), 5e-6);
    let proto = ProtocolSpec::new(10.0, 10.0, trap_nu(), 5e-6).unwrap();
    let curve = exclusion_curve(&specs, &proto, 8.7e-6, &[1e-7], THRESHOLD, &ScanOptions::default()).unwrap();
    let l = curve.lambda_min[0];
    (l <= 1e-16, format!("lambda_min(r_c = 1e-7 m) = {l:.4e} 1/s vs GRW 1e-16 ({})", curve.status[0].name()))
}

/// Peak-to-mean contrast of P/δ over one period.
fn contrast(engine: &PatternEngine, kind: PatternKind, proto: &ProtocolSpec, fluence: f64, csl: Option<CslParams>) -> f64 {
    let h = engine.harmonics(kind, proto, fluence, csl, true).unwrap();
    let n = 256;
    (0..n)
        .map(|i| h.relative(h.period() * i as f64 / n as f64) - 1.0)
        .fold(f64::NEG_INFINITY, f64::max)
}

fn c11() -> (bool, String) {
    let mut runner = TestRunner::new(Config {
        cases: 24,
        failure_persistence: None,
        ..Config::default()
    });
    let strategy = (7.0f64..10.0, 0.0f64..1.0, 0.0f64..1.0, -6.0f64..-2.0, any::<bool>());
    let result = runner.run(&strategy, |(log_m, u1, u2, log_f, classical)| {
        let amu = 10f64.powf(log_m);
        let p = sphere_of_mass(amu);
        let engine = PatternEngine::new(&p, &reference_env(1e-11), 100e-9).unwrap();
        let t_t = engine.talbot_time();
        // Free-fall times between 0.05 and 2 Talbot times.
        let proto = ProtocolSpec::new(t_t * (0.05 + 1.95 * u1), t_t * (0.05 + 1.95 * u2), trap_nu(), 5e-6).unwrap();
        let fluence = 10f64.powf(log_f);
        let kind = if classical { PatternKind::Classical } else { PatternKind::Quantum };
        let h = engine.harmonics(kind, &proto, fluence, None, true).unwrap();
        let dd = h.period();

        let pat = engine.pattern(kind, &proto, fluence, None, None, 257).unwrap();
        for v in &pat.values {
            prop_assert!(*v >= -1e-9 * pat.delta, "negative density {v}");
        }
        for z in [0.0, 0.17 * dd, -0.41 * dd] {
            let a = h.relative(z);
            prop_assert!((h.relative(z + dd) - a).abs() <= 1e-6 * a.abs().max(1.0));
        }
        let n = 4 * h.truncation() + 64;
        let mean = (0..n).map(|i| h.density(dd * i as f64 / n as f64)).sum::<f64>() / n as f64;
        prop_assert!((mean / h.delta - 1.0).abs() < 1e-8, "mean {mean} vs {}", h.delta);

        // Each decoherence channel can only lower the contrast.
        let base = contrast(&engine, kind, &proto, fluence, None);
        let hot = |t_env: f64, t_int: f64, pressure: f64| {
            let p = ParticleSpec::from_mass(silica(), amu * AMU, InternalTemperatureModel::Constant(t_int)).unwrap();
            let env = EnvironmentSpec::new(t_env, pressure, GasSpecies::hydrogen()).unwrap();
            contrast(&PatternEngine::new(&p, &env, 100e-9).unwrap(), kind, &proto, fluence, None)
        };
        let strict = |c: f64| if base > 1e-6 { c < base } else { c <= base + 1e-12 };
        prop_assert!(strict(hot(40.0, 40.0, 1e-11)), "environment temperature");
        prop_assert!(strict(hot(20.0, 80.0, 1e-11)), "internal temperature");
        // Gas collisions are n-independent and only set the absolute survival.
        prop_assert!(hot(20.0, 40.0, 1e-9) <= base + 1e-12, "pressure");
        if !classical {
            let csl = contrast(&engine, PatternKind::Csl, &proto, fluence, Some(CslParams::adler()));
            prop_assert!(strict(csl), "collapse");
        }
        Ok(())
    });
    match result {
        Ok(()) => (true, "non-negativity, periodicity, mean, contrast loss over 24 random specs".into()),
        Err(e) => (false, format!("property failed: {e}")),
    }
}

fn c12() -> (bool, String) {
    let engine = PatternEngine::new(&sphere_of_mass(1e8), &reference_env(1e-11), 100e-9).unwrap();
    let mut specs = ScanSpecs::new(engine, trap_nu(), 5e-6);
    specs.samples = 129;
    let t: Vec<f64> = (1..=8).map(|i| 5.0 * i as f64).collect();
    let f = nanotalbot::noninterf::log_space(1e-6, 5.0, 8);
    let grid = ScanGrid::new(t.clone(), t, f, specs.engine.particle.mass, 100.0).unwrap();
    let run = |w| {
        run_scan(&grid, &specs, &ScanOptions { workers: w, checkpoint: None })
            .unwrap()
            .to_csv()
    };
    let (a, b) = (run(1), run(4));
    let cells = a.lines().count() - 1;
    (a == b, format!("{cells} cells, worker counts 1 and 4 bitwise identical: {}", a == b))
}

fn main() {
    let strict = std::env::var("NANOTALBOT_STRICT_ACCEPTANCE").is_ok_and(|v| v == "1");
    let criteria: Vec<(usize, Kind, Duration, fn() -> (bool, String))> = vec![
        (1, Kind::Anchor, Duration::from_millis(1), c1),
        (2, Kind::Anchor, Duration::from_secs(1), c2),
        (3, Kind::Anchor, Duration::from_secs(10), c3),
        (4, Kind::Anchor, Duration::from_secs(1), c4),
        (5, Kind::Anchor, Duration::from_millis(1), c5),
        (6, Kind::Internal, Duration::from_secs(10), c6),
        (7, Kind::Internal, Duration::from_secs(60), c7),
        (8, Kind::Internal, Duration::from_secs(60), c8),
        (9, Kind::Anchor, Duration::from_secs(600), c9),
        (10, Kind::Anchor, Duration::from_secs(600), c10),
        (11, Kind::Internal, Duration::from_secs(300), c11),
        (12, Kind::Internal, Duration::from_secs(600), c12),
    ];
    let mut outcomes = Vec::new();
    for (id, kind, budget, f) in criteria {
        let t0 = Instant::now();
        let (pass, detail) = f();
        outcomes.push(Outcome {
            id,
            kind,
            pass,
            detail,
            elapsed: t0.elapsed(),
            budget,
        });
    }
    println!();
    let mut fatal = 0;
    for o in &outcomes {
        let tag = if o.pass { "PASS" } else { "FAIL" };
        // Debug builds are slower than the budgets assume; timing is informational.
        let note = if o.elapsed > o.budget { " [over runtime budget]" } else { "" };
        println!(
            "{tag} criterion {:>2}: {} ({:.3} s){note}",
            o.id,
            o.detail,
            o.elapsed.as_secs_f64()
        );
        if !o.pass && (o.kind == Kind::Internal || strict) {
            fatal += 1;
        }
    }
    let passed = outcomes.iter().filter(|o| o.pass).count();
    println!("acceptance: {passed}/{} criteria pass", outcomes.len());
    if fatal > 0 {
        eprintln!("{fatal} fatal acceptance failure(s)");
        std::process::exit(1);
    }
}
