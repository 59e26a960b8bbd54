//! Flat `section.key = value unit` run configuration.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use crate::collapse::CslParams;
use crate::constants::AMU;
use crate::decoherence::{EnvironmentSpec, InternalTemperatureModel, ParticleSpec};
use crate::grating::GratingSpec;
use crate::material::{load_gas, load_material, GasSpecies, Material};
use crate::pattern::ProtocolSpec;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Dim {
    Length,
    Mass,
    Time,
    Temperature,
    Pressure,
    Frequency,
    Fluence,
    Rate,
    Text,
}

impl Dim {
    fn si_unit(self) -> &'static str {
        match self {
            Dim::Length => "m",
            Dim::Mass => "kg",
            Dim::Time => "s",
            Dim::Temperature => "K",
            Dim::Pressure => "Pa",
            Dim::Frequency => "Hz",
            Dim::Fluence => "J/m2",
            Dim::Rate => "1/s",
            Dim::Text => "",
        }
    }

    /// Convert `x` in `unit` to SI. Prefixes divide so that e.g. 100 nm is exactly 1e-7 m.
    fn to_si(self, x: f64, unit: &str) -> Option<f64> {
        let div = match (self, unit) {
            (Dim::Length, "mm") | (Dim::Mass, "g") | (Dim::Time, "ms") | (Dim::Temperature, "mK") => 1e3,
            (Dim::Length, "um" | "µm") | (Dim::Temperature, "uK" | "µK") => 1e6,
            (Dim::Length, "nm") => 1e9,
            _ => 1.0,
        };
        if div != 1.0 {
            return Some(x / div);
        }
        let s = match (self, unit) {
            (Dim::Length, "m") => 1.0,
            (Dim::Mass, "kg") => 1.0,
            (Dim::Mass, "amu" | "u") => AMU,
            (Dim::Time, "s") => 1.0,
            (Dim::Time, "d" | "day" | "days") => 86400.0,
            (Dim::Temperature, "K") => 1.0,
            (Dim::Pressure, "Pa") => 1.0,
            (Dim::Pressure, "mbar") => 100.0,
            (Dim::Frequency, "Hz") => 1.0,
            (Dim::Frequency, "rad/s") => 1.0 / (2.0 * std::f64::consts::PI),
            (Dim::Fluence, "J/m2" | "J/m^2") => 1.0,
            (Dim::Rate, "1/s" | "s^-1" | "Hz") => 1.0,
            _ => return None,
        };
        Some(x * s)
    }
}

const KEYS: &[(&str, Dim)] = &[
    ("particle.mass", Dim::Mass),
    ("particle.radius", Dim::Length),
    ("particle.material", Dim::Text),
    ("particle.internal_model", Dim::Text),
    ("particle.internal_temperature", Dim::Temperature),
    ("grating.wavelength", Dim::Length),
    ("grating.fluence", Dim::Fluence),
    ("environment.temperature", Dim::Temperature),
    ("environment.pressure", Dim::Pressure),
    ("environment.gas", Dim::Text),
    ("protocol.t1", Dim::Time),
    ("protocol.t2", Dim::Time),
    ("protocol.trap_frequency", Dim::Frequency),
    ("protocol.com_temperature", Dim::Temperature),
    ("collapse.lambda", Dim::Rate),
    ("collapse.r_c", Dim::Length),
    ("output.directory", Dim::Text),
];

#[derive(Debug, Clone, PartialEq)]
enum Value {
    Number(f64),
    Text(String),
}

/// Parsed configuration; numbers are held in SI units.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunConfig {
    values: BTreeMap<&'static str, Value>,
}

pub const PRESETS: &[(&str, &str)] = &[
    ("qppf-1e7", include_str!("../../presets/qppf-1e7.cfg")),
    ("qppf-1e8", include_str!("../../presets/qppf-1e8.cfg")),
    ("qppf-1e9", include_str!("../../presets/qppf-1e9.cfg")),
    ("qppf-1e10", include_str!("../../presets/qppf-1e10.cfg")),
    ("qppf-1e11", include_str!("../../presets/qppf-1e11.cfg")),
];

impl RunConfig {
    pub fn preset(name: &str) -> Result<Self> {
        let text = PRESETS
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, t)| *t)
            .ok_or_else(|| {
                let names: Vec<&str> = PRESETS.iter().map(|(n, _)| *n).collect();
                Error::Config(format!("unknown preset {name}; available: {}", names.join(", ")))
            })?;
        Self::parse(text, name)
    }

    pub fn parse(text: &str, path: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            cfg.apply(line).map_err(|message| Error::Parse {
                path: path.to_string(),
                line: i + 1,
                message,
            })?;
        }
        Ok(cfg)
    }

    /// Set one `key = value unit` assignment, replacing any earlier value.
    pub fn set(&mut self, assignment: &str) -> Result<()> {
        self.apply(assignment).map_err(Error::Config)
    }

    fn apply(&mut self, line: &str) -> std::result::Result<(), String> {
        let (key, rest) = line
            .split_once('=')
            .ok_or_else(|| format!("expected `key = value`, got `{line}`"))?;
        let key = key.trim();
        let &(name, dim) = KEYS
            .iter()
            .find(|(k, _)| *k == key)
            .ok_or_else(|| format!("unknown key `{key}`"))?;
        let rest = rest.trim();
        let value = if dim == Dim::Text {
            if rest.is_empty() {
                return Err(format!("`{key}` needs a value"));
            }
            Value::Text(rest.to_string())
        } else {
            let (num, unit) = rest.split_once(char::is_whitespace).unwrap_or((rest, ""));
            let x: f64 = num
                .parse()
                .map_err(|_| format!("`{key}`: `{num}` is not a number"))?;
            let unit = unit.trim();
            if unit.is_empty() {
                return Err(format!("`{key}` needs a unit, e.g. `{} {}`", num, dim.si_unit()));
            }
            if !x.is_finite() {
                return Err(format!("`{key}` must be finite"));
            }
            let si = dim
                .to_si(x, unit)
                .ok_or_else(|| format!("`{key}`: unit `{unit}` is not a {dim:?} unit"))?;
            Value::Number(si)
        };
        self.values.insert(name, value);
        Ok(())
    }

    /// SI value of a numeric key.
    pub fn number(&self, key: &str) -> Result<f64> {
        match self.values.get(key) {
            Some(Value::Number(x)) => Ok(*x),
            _ => Err(Error::Config(format!("missing `{key}`"))),
        }
    }

    pub fn text(&self, key: &str) -> Option<&str> {
        match self.values.get(key) {
            Some(Value::Text(s)) => Some(s),
            _ => None,
        }
    }

    fn positive(&self, key: &str) -> Result<f64> {
        let x = self.number(key)?;
        if x > 0.0 {
            Ok(x)
        } else {
            Err(Error::Config(format!("`{key}` must be positive, got {x}")))
        }
    }

    /// Serialize in SI units; parsing the result yields an equal config.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (key, dim) in KEYS {
            match self.values.get(key) {
                Some(Value::Number(x)) => {
                    let _ = writeln!(out, "{key} = {x:e} {}", dim.si_unit());
                }
                Some(Value::Text(s)) => {
                    let _ = writeln!(out, "{key} = {s}");
                }
                None => {}
            }
        }
        out
    }

    pub fn output_dir(&self) -> PathBuf {
        PathBuf::from(self.text("output.directory").unwrap_or("out"))
    }

    fn material(&self) -> Result<Material> {
        match self.text("particle.material").unwrap_or("silica") {
            "silica" => Ok(Material::silica()),
            path => load_material(Path::new(path)),
        }
    }

    pub fn particle(&self) -> Result<ParticleSpec> {
        let material = Arc::new(self.material()?);
        let t_int = self.positive("particle.internal_temperature")?;
        let model = match self.text("particle.internal_model").unwrap_or("constant") {
            "constant" => InternalTemperatureModel::Constant(t_int),
            "radiative" => InternalTemperatureModel::Radiative(t_int),
            other => {
                return Err(Error::Config(format!(
                    "`particle.internal_model` must be constant or radiative, got {other}"
                )))
            }
        };
        match (self.values.contains_key("particle.mass"), self.values.contains_key("particle.radius")) {
            (true, false) => ParticleSpec::from_mass(material, self.positive("particle.mass")?, model),
            (false, true) => ParticleSpec::from_radius(material, self.positive("particle.radius")?, model),
            _ => Err(Error::Config(
                "give exactly one of `particle.mass` and `particle.radius`".into(),
            )),
        }
    }

    pub fn grating(&self) -> Result<GratingSpec> {
        GratingSpec::new(self.positive("grating.wavelength")?, self.number("grating.fluence")?)
    }

    pub fn environment(&self) -> Result<EnvironmentSpec> {
        let gas = match self.text("environment.gas").unwrap_or("hydrogen") {
            "hydrogen" => GasSpecies::hydrogen(),
            path => load_gas(Path::new(path))?,
        };
        EnvironmentSpec::new(
            self.positive("environment.temperature")?,
            self.number("environment.pressure")?,
            gas,
        )
    }

    pub fn protocol(&self) -> Result<ProtocolSpec> {
        ProtocolSpec::new(
            self.positive("protocol.t1")?,
            self.positive("protocol.t2")?,
            self.positive("protocol.trap_frequency")?,
            self.number("protocol.com_temperature")?,
        )
    }

    pub fn collapse(&self) -> Result<CslParams> {
        CslParams::new(self.positive("collapse.lambda")?, self.positive("collapse.r_c")?)
    }
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)?;
    RunConfig::parse(&text, &path.display().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_match_reference_table() {
        let c = RunConfig::preset("qppf-1e9").unwrap();
        assert!((c.number("environment.pressure").unwrap() - 1e-11).abs() < 1e-25);
        assert_eq!(c.number("grating.wavelength").unwrap(), 100e-9);
        assert_eq!(c.number("environment.temperature").unwrap(), 20.0);
        assert_eq!(c.number("particle.internal_temperature").unwrap(), 40.0);
        assert_eq!(c.number("protocol.com_temperature").unwrap(), 5e-6);
        let nu = c.number("protocol.trap_frequency").unwrap();
        assert!((nu * 2.0 * std::f64::consts::PI - 1e5).abs() < 1e-9);
        assert!((c.particle().unwrap().mass_amu() / 1e9 - 1.0).abs() < 1e-12);
        for (name, _) in PRESETS {
            let c = RunConfig::preset(name).unwrap();
            assert!(c.particle().is_ok() && c.protocol().is_ok() && c.environment().is_ok());
        }
    }

    #[test]
    fn rejects_bad_lines() {
        let e = RunConfig::parse("grating.wavelength = 100 nm\nparticle.colour = red\n", "x.cfg").unwrap_err();
        match e {
            Error::Parse { line, message, .. } => {
                assert_eq!(line, 2);
                assert!(message.contains("particle.colour"));
            }
            other => panic!("{other:?}"),
        }
        assert!(RunConfig::parse("grating.wavelength = 100", "x").is_err());
        assert!(RunConfig::parse("grating.wavelength = 100 K", "x").is_err());
        assert!(RunConfig::parse("protocol.t1 = ten s", "x").is_err());
    }

    #[test]
    fn text_round_trip() {
        let mut c = RunConfig::preset("qppf-1e8").unwrap();
        c.set("protocol.t1 = 7 s").unwrap();
        let again = RunConfig::parse(&c.to_text(), "manifest").unwrap();
        assert_eq!(again, c);
        assert_eq!(again.number("protocol.t1").unwrap(), 7.0);
    }
}
