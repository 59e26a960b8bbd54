use std::f64::consts::PI;
use std::sync::Arc;

use nanotalbot::constants::AMU;
use nanotalbot::decoherence::{EnvironmentSpec, InternalTemperatureModel, ParticleSpec};
use nanotalbot::material::{GasSpecies, Material};
use nanotalbot::metrics::{aleph, THRESHOLD};
use nanotalbot::pattern::{PatternEngine, PatternKind, ProtocolSpec};

fn engine(amu: f64) -> PatternEngine {
    let p = ParticleSpec::from_mass(
        Arc::new(Material::silica()),
        amu * AMU,
        InternalTemperatureModel::Constant(40.0),
    )
    .unwrap();
    let env = EnvironmentSpec::new(20.0, 1e-11, GasSpecies::hydrogen()).unwrap();
    PatternEngine::new(&p, &env, 100e-9).unwrap()
}

fn nu() -> f64 {
    1e5 / (2.0 * PI)
}

#[test]
fn classical_first_harmonic_is_linear_in_phase() {
    let e = engine(1e8);
    let t = e.talbot_time();
    let proto = ProtocolSpec::new(0.5 * t, 0.5 * t, nu(), 5e-6).unwrap();
    let f = 1e-7 / e.profile.phase_per_fluence;
    let c1 = |fl: f64| {
        e.harmonics(PatternKind::Classical, &proto, fl, None, false).unwrap().coefficients[0].norm()
    };
    assert!((c1(2.0 * f) / c1(f) - 2.0).abs() < 0.04);
}

#[test]
fn quantum_and_classical_carpets_differ() {
    // Undecohered point of comparison at quarter, half and three-quarter Talbot times.
    let e = engine(1e7);
    let t_t = e.talbot_time();
    let fluence = 1.0 / e.profile.phase_per_fluence;
    for tau in [0.25, 0.5, 0.75] {
        let proto = ProtocolSpec::new(t_t, tau * t_t, nu(), 5e-6).unwrap();
        let h = |k| e.harmonics(k, &proto, fluence, None, false).unwrap();
        let (q, c) = (h(PatternKind::Quantum), h(PatternKind::Classical));
        let win = q.period().min(1e-7);
        let grid = Some((-0.5 * win, 0.5 * win));
        let pq = nanotalbot::pattern::Pattern::from_harmonics(PatternKind::Quantum, q, grid, 1025, String::new()).unwrap();
        let pc = nanotalbot::pattern::Pattern::from_harmonics(PatternKind::Classical, c, grid, 1025, String::new()).unwrap();
        let v = aleph(&pq, &pc, win).unwrap().value;
        assert!(v > THRESHOLD, "tau {tau}: {v}");
    }
}

#[test]
fn pattern_is_even_about_origin() {
    let e = engine(1e9);
    let proto = ProtocolSpec::new(10.0, 10.0, nu(), 5e-6).unwrap();
    let h = e.harmonics(PatternKind::Quantum, &proto, 8.7e-6, None, true).unwrap();
    for z in [3e-9, 1.7e-8, 4.1e-8] {
        let (a, b) = (h.relative(z), h.relative(-z));
        assert!((a - b).abs() < 1e-10 * a.abs());
    }
}
