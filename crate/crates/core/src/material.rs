//! Material and residual-gas properties.
//!
//! Permittivity tables are read from a plain text format:
//!
//! ```text
//! # comment
//! name = silica
//! density = 1850
//! specific_heat = 700
//! ionization_energy = 5e-19
//! 1.0e12  3.80  0.01
//! ```
//!
//! Data rows are `omega eps_re eps_im`, with ω in rad/s strictly increasing.

use std::f64::consts::PI;
use std::path::Path;

use num_complex::Complex64;

use crate::constants::{AMU, BOLTZMANN, EPSILON_0};
use crate::{Error, Result};

const SILICA: &str = include_str!("../data/silica.txt");
const HYDROGEN: &str = include_str!("../data/hydrogen.txt");

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PermittivityNode {
    pub omega: f64,
    pub eps: Complex64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Material {
    pub name: String,
    pub density: f64,
    pub specific_heat: f64,
    pub ionization_energy: f64,
    table: Vec<PermittivityNode>,
}

/// What to do when ω falls outside the tabulated range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Extrapolation {
    #[default]
    Clamp,
    Error,
}

/// An interpolated permittivity; `clamped` is set when ω was outside the table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Permittivity {
    pub value: Complex64,
    pub clamped: bool,
}

fn parse_error(path: &str, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_string(),
        line,
        message: message.into(),
    }
}

/// Splits a property file into `key = value` pairs and numeric rows, keeping line numbers.
fn tokenize(text: &str) -> (Vec<(usize, String, String)>, Vec<(usize, &str)>) {
    let mut header = Vec::new();
    let mut rows = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some((k, v)) = line.split_once('=') {
            header.push((i + 1, k.trim().to_string(), v.trim().to_string()));
        } else {
            rows.push((i + 1, line));
        }
    }
    (header, rows)
}

fn positive(path: &str, line: usize, key: &str, value: &str) -> Result<f64> {
    match value.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        _ => Err(parse_error(path, line, format!("{key} must be a positive number, got '{value}'"))),
    }
}

impl Material {
    /// Build a material directly; the table is validated like a parsed file.
    pub fn new(
        name: impl Into<String>,
        density: f64,
        specific_heat: f64,
        ionization_energy: f64,
        table: Vec<PermittivityNode>,
    ) -> Result<Self> {
        if !(density > 0.0 && specific_heat > 0.0 && ionization_energy > 0.0) {
            return Err(Error::Domain("material constants must be positive".into()));
        }
        if table.is_empty() {
            return Err(Error::Domain("permittivity table is empty".into()));
        }
        for w in table.windows(2) {
            if w[1].omega <= w[0].omega {
                return Err(Error::Domain("table ω must increase strictly".into()));
            }
        }
        if table.iter().any(|n| n.eps.im < 0.0 || n.omega < 0.0) {
            return Err(Error::Domain("table has negative ω or ε_im".into()));
        }
        Ok(Self {
            name: name.into(),
            density,
            specific_heat,
            ionization_energy,
            table,
        })
    }

    pub fn parse(text: &str, path: &str) -> Result<Self> {
        let (header, rows) = tokenize(text);
        let mut name = String::from("unnamed");
        let (mut density, mut heat, mut ion) = (None, None, None);
        for (line, key, value) in header {
            match key.as_str() {
                "name" => name = value,
                "density" => density = Some(positive(path, line, &key, &value)?),
                "specific_heat" => heat = Some(positive(path, line, &key, &value)?),
                "ionization_energy" => ion = Some(positive(path, line, &key, &value)?),
                _ => return Err(parse_error(path, line, format!("unknown key '{key}'"))),
            }
        }
        let mut table: Vec<PermittivityNode> = Vec::with_capacity(rows.len());
        for (line, row) in rows {
            let fields: Vec<&str> = row.split_whitespace().collect();
            if fields.len() != 3 {
                return Err(parse_error(path, line, "expected 'omega eps_re eps_im'"));
            }
            let mut v = [0.0; 3];
            for (slot, f) in v.iter_mut().zip(&fields) {
                *slot = f
                    .parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| parse_error(path, line, format!("not a number: '{f}'")))?;
            }
            if v[0] < 0.0 {
                return Err(parse_error(path, line, "negative frequency"));
            }
            if v[2] < 0.0 {
                return Err(parse_error(path, line, "negative eps_im (active medium)"));
            }
            if let Some(prev) = table.last() {
                if v[0] <= prev.omega {
                    return Err(parse_error(path, line, "omega not strictly increasing"));
                }
            }
            table.push(PermittivityNode {
                omega: v[0],
                eps: Complex64::new(v[1], v[2]),
            });
        }
        let missing = |what: &str| parse_error(path, 0, format!("missing header key '{what}'"));
        let density = density.ok_or_else(|| missing("density"))?;
        let heat = heat.ok_or_else(|| missing("specific_heat"))?;
        let ion = ion.ok_or_else(|| missing("ionization_energy"))?;
        if table.is_empty() {
            return Err(parse_error(path, 0, "no permittivity rows"));
        }
        Ok(Self {
            name,
            density,
            specific_heat: heat,
            ionization_energy: ion,
            table,
        })
    }

    /// Bundled fused-silica properties.
    pub fn silica() -> Self {
        Self::parse(SILICA, "data/silica.txt").expect("bundled silica file is valid")
    }

    pub fn table(&self) -> &[PermittivityNode] {
        &self.table
    }

    pub fn omega_range(&self) -> (f64, f64) {
        (self.table[0].omega, self.table[self.table.len() - 1].omega)
    }

    pub fn permittivity(&self, omega: f64, policy: Extrapolation) -> Result<Permittivity> {
        if !omega.is_finite() {
            return Err(Error::Domain(format!("frequency {omega}")));
        }
        let t = &self.table;
        let (lo, hi) = self.omega_range();
        if omega < lo || omega > hi {
            if policy == Extrapolation::Error {
                return Err(Error::OutOfRange {
                    value: omega,
                    min: lo,
                    max: hi,
                });
            }
            let node = if omega < lo { t[0] } else { t[t.len() - 1] };
            return Ok(Permittivity {
                value: node.eps,
                clamped: true,
            });
        }
        let j = t.partition_point(|n| n.omega <= omega);
        let value = if j == 0 {
            t[0].eps
        } else if j == t.len() || t[j - 1].omega == omega {
            t[j - 1].eps
        } else {
            let (a, b) = (t[j - 1], t[j]);
            let w = (omega - a.omega) / (b.omega - a.omega);
            a.eps * (1.0 - w) + b.eps * w
        };
        Ok(Permittivity {
            value,
            clamped: false,
        })
    }

    /// ε(ω) with clamping outside the table.
    pub fn eps(&self, omega: f64) -> Complex64 {
        let (lo, hi) = self.omega_range();
        self.permittivity(omega.clamp(lo, hi), Extrapolation::Clamp)
            .map(|p| p.value)
            .unwrap_or(self.table[0].eps)
    }

    /// Permittivity at the lowest tabulated frequency, used as the static value.
    pub fn static_permittivity(&self) -> Complex64 {
        self.table[0].eps
    }

    pub fn mass(&self, radius: f64) -> f64 {
        self.density * 4.0 / 3.0 * PI * radius.powi(3)
    }

    /// Radius of a sphere of this material with the given mass.
    pub fn radius_for_mass(&self, mass: f64) -> f64 {
        (3.0 * mass / (4.0 * PI * self.density)).cbrt()
    }
}

pub fn load_material(path: impl AsRef<Path>) -> Result<Material> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    Material::parse(&text, &path.display().to_string())
}

/// Polarizability of a small sphere, 4πε₀R³(ε−1)/(ε+2).
pub fn polarizability(eps: Complex64, radius: f64) -> Result<Complex64> {
    if !(radius > 0.0) {
        return Err(Error::Domain(format!("radius {radius}")));
    }
    let den = eps + 2.0;
    if den.norm() == 0.0 {
        return Err(Error::Numerical {
            module: "material",
            message: "Clausius–Mossotti pole at ε = −2".into(),
        });
    }
    if eps.re.is_infinite() {
        return Ok(Complex64::new(4.0 * PI * EPSILON_0 * radius.powi(3), 0.0));
    }
    Ok(4.0 * PI * EPSILON_0 * radius.powi(3) * (eps - 1.0) / den)
}

pub fn clausius_mossotti(m: &Material, omega: f64, radius: f64) -> Result<Complex64> {
    polarizability(m.eps(omega), radius)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GasSpecies {
    pub name: String,
    pub mass: f64,
    /// α_g/(4πε₀) in m³.
    pub static_polarizability_volume: f64,
    pub ionization_energy: f64,
}

impl GasSpecies {
    pub fn new(
        name: impl Into<String>,
        mass: f64,
        static_polarizability_volume: f64,
        ionization_energy: f64,
    ) -> Result<Self> {
        if !(mass > 0.0 && static_polarizability_volume > 0.0 && ionization_energy > 0.0) {
            return Err(Error::Domain("gas constants must be positive".into()));
        }
        Ok(Self {
            name: name.into(),
            mass,
            static_polarizability_volume,
            ionization_energy,
        })
    }

    pub fn parse(text: &str, path: &str) -> Result<Self> {
        let (header, rows) = tokenize(text);
        if let Some((line, _)) = rows.first() {
            return Err(parse_error(path, *line, "expected 'key = value'"));
        }
        let mut name = String::from("gas");
        let (mut mass, mut pol, mut ion) = (None, None, None);
        for (line, key, value) in header {
            match key.as_str() {
                "name" => name = value,
                "mass" => mass = Some(positive(path, line, &key, &value)?),
                "mass_amu" => mass = Some(positive(path, line, &key, &value)? * AMU),
                "polarizability_volume" => pol = Some(positive(path, line, &key, &value)?),
                "ionization_energy" => ion = Some(positive(path, line, &key, &value)?),
                _ => return Err(parse_error(path, line, format!("unknown key '{key}'"))),
            }
        }
        let missing = |what: &str| parse_error(path, 0, format!("missing key '{what}'"));
        Self::new(
            name,
            mass.ok_or_else(|| missing("mass"))?,
            pol.ok_or_else(|| missing("polarizability_volume"))?,
            ion.ok_or_else(|| missing("ionization_energy"))?,
        )
    }

    /// Bundled residual gas (atomic hydrogen).
    pub fn hydrogen() -> Self {
        Self::parse(HYDROGEN, "data/hydrogen.txt").expect("bundled gas file is valid")
    }

    pub fn polarizability(&self) -> f64 {
        4.0 * PI * EPSILON_0 * self.static_polarizability_volume
    }

    /// √(2 k_B T / m_g).
    pub fn thermal_velocity(&self, temperature: f64) -> f64 {
        (2.0 * BOLTZMANN * temperature / self.mass).sqrt()
    }
}

pub fn load_gas(path: impl AsRef<Path>) -> Result<GasSpecies> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    GasSpecies::parse(&text, &path.display().to_string())
}

/// London coefficient from static polarizabilities and ionization energies.
pub fn c6_from_parts(alpha: f64, ionization: f64, gas: &GasSpecies) -> f64 {
    let ig = gas.ionization_energy;
    3.0 * alpha * gas.polarizability() * ionization * ig
        / (32.0 * PI * PI * EPSILON_0 * EPSILON_0 * (ionization + ig))
}

pub fn c6_coefficient(m: &Material, radius: f64, gas: &GasSpecies) -> Result<f64> {
    let alpha = polarizability(m.static_permittivity(), radius)?.re;
    Ok(c6_from_parts(alpha, m.ionization_energy, gas))
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = "# test\nname = t\ndensity = 2000\nspecific_heat = 500\nionization_energy = 1e-18\n\
                         1.0 2.0 0.0\n2.0 4.0 1.0\n3.0 5.0 0.5\n";

    #[test]
    fn parses_three_rows() {
        let m = Material::parse(SMALL, "small").unwrap();
        assert_eq!(m.table().len(), 3);
        assert_eq!(m.density, 2000.0);
    }

    #[test]
    fn decreasing_omega_names_line() {
        let bad = SMALL.replace("3.0 5.0 0.5", "1.5 5.0 0.5");
        match Material::parse(&bad, "bad") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 8),
            other => panic!("{other:?}"),
        }
        let neg = SMALL.replace("2.0 4.0 1.0", "2.0 4.0 -1.0");
        assert!(matches!(Material::parse(&neg, "n"), Err(Error::Parse { line: 7, .. })));
        let junk = SMALL.replace("1.0 2.0 0.0", "1.0 x 0.0");
        assert!(matches!(Material::parse(&junk, "j"), Err(Error::Parse { line: 6, .. })));
    }

    #[test]
    fn interpolation_and_clamping() {
        let m = Material::parse(SMALL, "small").unwrap();
        let p = m.permittivity(2.0, Extrapolation::Clamp).unwrap();
        assert_eq!(p.value, Complex64::new(4.0, 1.0));
        let mid = m.permittivity(1.5, Extrapolation::Clamp).unwrap();
        assert_eq!(mid.value.re, 3.0);
        assert!(!mid.clamped);
        let hi = m.permittivity(10.0, Extrapolation::Clamp).unwrap();
        assert!(hi.clamped);
        assert_eq!(hi.value, Complex64::new(5.0, 0.5));
        assert!(matches!(
            m.permittivity(0.5, Extrapolation::Error),
            Err(Error::OutOfRange { .. })
        ));
    }

    #[test]
    fn bundled_files() {
        let s = Material::silica();
        assert_eq!(s.density, 1850.0);
        assert_eq!(s.specific_heat, 700.0);
        // Telecom wavelength reads back the table value.
        let w = 2.0 * PI * crate::constants::SPEED_OF_LIGHT / 1550e-9;
        let e = s.eps(w);
        assert!((e.re - 1.444f64.powi(2)).abs() < 1e-6 && e.im == 0.0);
        let h = GasSpecies::hydrogen();
        assert!((h.mass / AMU - 1.00784).abs() < 1e-12);
        assert_eq!(h.static_polarizability_volume, 0.6668e-30);
    }

    #[test]
    fn polarizability_limits() {
        assert_eq!(polarizability(Complex64::new(1.0, 0.0), 1e-7).unwrap().norm(), 0.0);
        let big = polarizability(Complex64::new(1e12, 0.0), 1e-7).unwrap();
        let cond = 4.0 * PI * EPSILON_0 * 1e-21;
        assert!(((big.re - cond) / cond).abs() < 1e-10);
        assert!(polarizability(Complex64::new(-2.0, 0.0), 1e-7).is_err());
        assert!(polarizability(Complex64::new(2.0, 0.0), 0.0).is_err());
    }

    #[test]
    fn c6_scaling() {
        let h = GasSpecies::hydrogen();
        assert_eq!(c6_from_parts(0.0, 1e-18, &h), 0.0);
        let a = c6_from_parts(1e-30, 5e-19, &h);
        let h2 = GasSpecies::new("x", h.mass, h.static_polarizability_volume, 2.0 * h.ionization_energy)
            .unwrap();
        let b = c6_from_parts(1e-30, 1e-18, &h2);
        assert!((b / a - 2.0).abs() < 1e-12);
        let s = Material::silica();
        let c1 = c6_coefficient(&s, 60e-9, &h).unwrap();
        let c2 = c6_coefficient(&s, 120e-9, &h).unwrap();
        assert!(c1 > 0.0 && ((c2 / c1) - 8.0).abs() < 1e-10);
        // Regression value for the reference sphere.
        assert!((c1 / 4.2402e-71 - 1.0).abs() < 1e-4, "C6 = {c1:e}");
    }
}
