//! Distinguishability between two patterns.

use crate::pattern::{Pattern, PatternKind};
use crate::{Error, Result};

/// ℵ at or above this value counts as distinguishable.
pub const THRESHOLD: f64 = 0.05;
/// Default detection window in meters.
pub const DEFAULT_WINDOW: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricResult {
    pub value: f64,
    pub window: f64,
    pub samples: usize,
    pub pair: (PatternKind, PatternKind),
}

impl MetricResult {
    pub fn distinguishable(&self) -> bool {
        self.value >= THRESHOLD
    }
}

/// (1/L)∫|P₁−P₂|/|P₁+P₂| dz over [−L/2, L/2] by the trapezoid rule.
pub fn aleph(p1: &Pattern, p2: &Pattern, window: f64) -> Result<MetricResult> {
    if p1.z_grid.len() != p2.z_grid.len()
        || p1.z_grid.iter().zip(&p2.z_grid).any(|(a, b)| (a - b).abs() > 1e-12 * a.abs().max(1e-30))
    {
        return Err(Error::Interface("patterns are sampled on different grids".into()));
    }
    let value = aleph_samples(&p1.z_grid, &p1.values, &p2.values, window)?;
    Ok(MetricResult {
        value,
        window,
        samples: p1.z_grid.len(),
        pair: (p1.kind, p2.kind),
    })
}

/// Same metric on raw samples; `z` must be ascending and cover the window.
pub fn aleph_samples(z: &[f64], p1: &[f64], p2: &[f64], window: f64) -> Result<f64> {
    if z.len() < 2 || p1.len() != z.len() || p2.len() != z.len() {
        return Err(Error::Interface(format!(
            "grid of {} points with {} and {} values",
            z.len(),
            p1.len(),
            p2.len()
        )));
    }
    if !(window > 0.0) {
        return Err(Error::Domain(format!("window {window}")));
    }
    let (lo, hi) = (-0.5 * window, 0.5 * window);
    let tol = 1e-9 * window;
    if z[0] > lo + tol || z[z.len() - 1] < hi - tol {
        return Err(Error::Interface(format!(
            "grid [{}, {}] does not cover the window",
            z[0],
            z[z.len() - 1]
        )));
    }
    let f = |i: usize| -> Result<f64> {
        let den = (p1[i] + p2[i]).abs();
        if den == 0.0 || !den.is_finite() {
            return Err(Error::Degenerate(format!("zero total density at z = {}", z[i])));
        }
        Ok((p1[i] - p2[i]).abs() / den)
    };
    // Integrate over the part of each panel that lies inside the window.
    let mut sum = 0.0;
    for i in 0..z.len() - 1 {
        let (a, b) = (z[i], z[i + 1]);
        let (ca, cb) = (a.max(lo), b.min(hi));
        if cb <= ca {
            continue;
        }
        let (fa, fb) = (f(i)?, f(i + 1)?);
        let lerp = |x: f64| fa + (fb - fa) * (x - a) / (b - a);
        sum += 0.5 * (lerp(ca) + lerp(cb)) * (cb - ca);
    }
    Ok(sum / window)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;

    fn grid(n: usize, l: f64) -> Vec<f64> {
        (0..n).map(|i| -0.5 * l + l * i as f64 / (n - 1) as f64).collect()
    }

    fn pattern(z: &[f64], f: impl Fn(f64) -> f64, kind: PatternKind) -> Pattern {
        Pattern {
            z_grid: z.to_vec(),
            values: z.iter().map(|&x| f(x)).collect(),
            kind,
            digest: String::new(),
            truncation: 1,
            magnification: 1e-7,
            talbot_time: 1.0,
            delta: 1.0,
            survival: 1.0,
        }
    }

    #[test]
    fn cosine_pair_matches_fine_quadrature() {
        let l = 1e-7;
        let k = 2.0 * PI / 0.8e-7;
        let z = grid(4001, l);
        let a = pattern(&z, |x| 1.0 + 0.6 * (k * x).cos(), PatternKind::Quantum);
        let b = pattern(&z, |x| 1.0 - 0.6 * (k * x).cos(), PatternKind::Classical);
        let v = aleph(&a, &b, l).unwrap().value;
        // Midpoint rule with 2e5 panels on the closed-form integrand 0.6|cos kx|.
        let n = 200_000;
        let oracle = (0..n)
            .map(|i| {
                let x = -0.5 * l + (i as f64 + 0.5) * l / n as f64;
                0.6 * (k * x).cos().abs()
            })
            .sum::<f64>()
            / n as f64;
        assert!((v - oracle).abs() < 1e-6, "{v} {oracle}");
    }

    #[test]
    fn identical_symmetric_and_scale_free() {
        let z = grid(257, 1e-7);
        let a = pattern(&z, |x| 2.0 + (3e7 * x).sin(), PatternKind::Quantum);
        let b = pattern(&z, |x| 2.0 + (5e7 * x).cos(), PatternKind::Csl);
        assert_eq!(aleph(&a, &a, 1e-7).unwrap().value, 0.0);
        let ab = aleph(&a, &b, 1e-7).unwrap().value;
        assert_eq!(ab, aleph(&b, &a, 1e-7).unwrap().value);
        let mut a3 = a.clone();
        let mut b3 = b.clone();
        a3.values.iter_mut().for_each(|v| *v *= 3.7);
        b3.values.iter_mut().for_each(|v| *v *= 3.7);
        assert!((aleph(&a3, &b3, 1e-7).unwrap().value - ab).abs() < 1e-14);
    }

    #[test]
    fn refinement_is_stable() {
        let f = |x: f64| 1.0 + 0.3 * (6e7 * x).cos();
        let g = |x: f64| 1.0 + 0.1 * (6e7 * x + 0.4).cos();
        let at = |n| {
            let z = grid(n, 1e-7);
            let a = pattern(&z, f, PatternKind::Quantum);
            let b = pattern(&z, g, PatternKind::Classical);
            aleph(&a, &b, 1e-7).unwrap().value
        };
        assert!((at(513) - at(1025)).abs() < 1e-4);
    }

    #[test]
    fn errors() {
        let z = grid(64, 1e-7);
        let a = pattern(&z, |_| 1.0, PatternKind::Quantum);
        let b = pattern(&grid(64, 2e-7), |_| 1.0, PatternKind::Quantum);
        assert!(matches!(aleph(&a, &b, 1e-7), Err(Error::Interface(_))));
        let zero = pattern(&z, |_| 0.0, PatternKind::Classical);
        assert!(matches!(aleph(&zero, &zero, 1e-7), Err(Error::Degenerate(_))));
        assert!(matches!(aleph(&a, &a, 2e-7), Err(Error::Interface(_))));
    }
}
