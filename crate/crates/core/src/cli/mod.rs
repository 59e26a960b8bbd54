//! Command-line front end.

mod config;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use config::{load_config, RunConfig, PRESETS};

use crate::collapse::csl_diffusion;
use crate::decoherence::localization_rates;
use crate::metrics::{aleph, THRESHOLD};
use crate::noninterf::{
    accel_noise_requirement, bound_curve, bound_csv, log_space, statistical_limit, BoundMode, Frequency,
};
use crate::pattern::{initial_spreads, PatternEngine, PatternKind};
use crate::scan::{exclusion_curve, optimize_aleph, ScanGrid, ScanOptions, ScanSpecs, Target};
use crate::{Error, Result};

/// Worker count override for scans.
pub const WORKERS_ENV: &str = "NANOTALBOT_WORKERS";

#[derive(Debug, Parser)]
#[command(name = "nanotalbot", version, about = "Near-field interferometry and collapse-model bounds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Config file of `section.key = value unit` lines.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Built-in preset, e.g. qppf-1e9.
    #[arg(long)]
    preset: Option<String>,
    /// Override one key, e.g. --set "protocol.t1 = 5 s".
    #[arg(long = "set")]
    overrides: Vec<String>,
    /// Output directory; overrides output.directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum TargetArg {
    Qc,
    Qcsl,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Interference or shadow patterns.
    Pattern {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', default_value = "quantum,classical")]
        kinds: Vec<String>,
        #[arg(long, default_value_t = 512)]
        samples: usize,
    },
    /// ℵ field over free-fall times and fluence.
    Scan {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 8)]
        nt: usize,
        #[arg(long, default_value_t = 12)]
        nf: usize,
        #[arg(long, default_value_t = 100.0)]
        t_max: f64,
        #[arg(long, value_enum, default_value = "qc")]
        target: TargetArg,
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Smallest excluded λ across correlation lengths.
    Exclusion {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1e-9)]
        rc_min: f64,
        #[arg(long, default_value_t = 1e-3)]
        rc_max: f64,
        #[arg(long, default_value_t = 13)]
        points: usize,
        #[arg(long, default_value_t = THRESHOLD)]
        threshold: f64,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Non-interferometric bounds and the acceleration-noise requirement.
    Noninterf {
        #[command(flatten)]
        common: Common,
        /// Only compute the acceleration-noise requirement.
        #[arg(long)]
        accel_noise: bool,
        #[arg(long, default_value_t = 1e-6)]
        d: f64,
        #[arg(long = "T", default_value_t = 100.0)]
        t: f64,
        /// Single-run duration in s.
        #[arg(long, default_value_t = 100.0)]
        run_time: f64,
        /// Total mission time in s.
        #[arg(long, default_value_t = 30.0 * 86400.0)]
        total_time: f64,
        /// Position resolution in m.
        #[arg(long, default_value_t = 0.0)]
        resolution: f64,
        #[arg(long, default_value_t = 25)]
        points: usize,
    },
    /// Derived quantities for one configuration.
    Props {
        #[command(flatten)]
        common: Common,
    },
}

/// Process exit status for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::Parse { .. } | Error::Domain(_) | Error::OutOfRange { .. } => 2,
        Error::Convergence { .. }
        | Error::Numerical { .. }
        | Error::Consistency(_)
        | Error::Capability(_)
        | Error::Degenerate(_) => 3,
        Error::PartialScan { .. } => 4,
        Error::Interface(_) | Error::Io(_) => 1,
    }
}

/// Parse arguments, run, and return the exit status.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn resolve(common: &Common) -> Result<(RunConfig, PathBuf)> {
    let mut cfg = match (&common.config, &common.preset) {
        (Some(p), None) => load_config(p)?,
        (None, Some(name)) => RunConfig::preset(name)?,
        (None, None) => RunConfig::preset("qppf-1e9")?,
        (Some(_), Some(_)) => return Err(Error::Config("use either --config or --preset".into())),
    };
    for o in &common.overrides {
        cfg.set(o)?;
    }
    let dir = common.out.clone().unwrap_or_else(|| cfg.output_dir());
    std::fs::create_dir_all(&dir)?;
    Ok((cfg, dir))
}

fn workers(flag: Option<usize>) -> Result<usize> {
    if let Some(w) = flag {
        return Ok(w);
    }
    match std::env::var(WORKERS_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("{WORKERS_ENV}={v} is not a count"))),
        Err(_) => Ok(0),
    }
}

fn write(dir: &Path, name: &str, text: &str) -> Result<PathBuf> {
    let path = dir.join(name);
    std::fs::write(&path, text)?;
    println!("wrote {}", path.display());
    Ok(path)
}

fn manifest(dir: &Path, command: &str, cfg: &RunConfig, outputs: &[PathBuf]) -> Result<()> {
    let mut text = format!("# nanotalbot {}\n# command = {command}\n", env!("CARGO_PKG_VERSION"));
    for p in outputs {
        let _ = writeln!(text, "# output = {}", p.display());
    }
    text.push_str(&cfg.to_text());
    write(dir, "manifest.cfg", &text)?;
    Ok(())
}

fn plot_stub(dir: &Path, csv: &str, x: &str, ys: &[&str]) -> Result<PathBuf> {
    let cols = ys.iter().map(|y| format!("\"{y}\"")).collect::<Vec<_>>().join(", ");
    let script = format!(
        "import csv\nimport matplotlib.pyplot as plt\n\n\
         rows = list(csv.DictReader(l for l in open(\"{csv}\") if not l.startswith(\"#\")))\n\
         rows = [{{k.strip(): v.strip() for k, v in r.items()}} for r in rows]\n\
         for col in [{cols}]:\n    plt.plot([float(r[\"{x}\"]) for r in rows], [float(r[col]) for r in rows], label=col)\n\
         plt.xlabel(\"{x}\")\nplt.legend()\nplt.savefig(\"{csv}.png\")\n"
    );
    write(dir, &format!("plot_{}.py", csv.trim_end_matches(".csv")), &script)
}

fn parse_kind(s: &str) -> Result<PatternKind> {
    match s.trim() {
        "quantum" => Ok(PatternKind::Quantum),
        "classical" => Ok(PatternKind::Classical),
        "csl" => Ok(PatternKind::Csl),
        other => Err(Error::Config(format!("unknown pattern kind {other}"))),
    }
}

fn execute(command: Command) -> Result<()> {
    match command {
        Command::Pattern { common, kinds, samples } => {
            let (cfg, dir) = resolve(&common)?;
            let (particle, env, grating) = (cfg.particle()?, cfg.environment()?, cfg.grating()?);
            let protocol = cfg.protocol()?;
            let engine = PatternEngine::new(&particle, &env, grating.wavelength)?;
            let collapse = cfg.collapse().ok();
            let mut outputs = Vec::new();
            let mut patterns = Vec::new();
            for k in &kinds {
                let kind = parse_kind(k)?;
                let p = engine.pattern(kind, &protocol, grating.fluence, collapse, None, samples)?;
                let name = format!("pattern_{}.csv", kind.name());
                outputs.push(write(&dir, &name, &p.to_csv())?);
                patterns.push(p);
            }
            for other in patterns.iter().skip(1) {
                let first = &patterns[0];
                let w = first.magnification.min(crate::metrics::DEFAULT_WINDOW);
                if let Ok(m) = aleph(first, other, w) {
                    println!("aleph({}, {}) = {:.6}", m.pair.0.name(), m.pair.1.name(), m.value);
                }
            }
            if let Some(first) = outputs.first() {
                let name = first.file_name().and_then(|n| n.to_str()).unwrap_or("pattern.csv").to_string();
                outputs.push(plot_stub(&dir, &name, "z_m", &["p_per_m"])?);
            }
            manifest(&dir, "pattern", &cfg, &outputs)
        }
        Command::Scan {
            common,
            nt,
            nf,
            t_max,
            target,
            checkpoint,
            workers: w,
        } => {
            let (cfg, dir) = resolve(&common)?;
            let particle = cfg.particle()?;
            let protocol = cfg.protocol()?;
            let engine = PatternEngine::new(&particle, &cfg.environment()?, cfg.grating()?.wavelength)?;
            let mut specs = ScanSpecs::new(engine, protocol.trap_frequency, protocol.com_temperature);
            if let Ok(c) = cfg.collapse() {
                specs.collapse = c;
            }
            let grid = ScanGrid::uniform(nt, nf, particle.mass, t_max)?;
            let target = match target {
                TargetArg::Qc => Target::Qc,
                TargetArg::Qcsl => Target::Qcsl,
            };
            let opts = ScanOptions {
                workers: workers(w)?,
                checkpoint,
            };
            let out = optimize_aleph(&grid, target, &specs, &opts)?;
            let b = &out.best;
            println!(
                "best: t1 = {} s, t2 = {} s, fluence = {:e} J/m2, aleph_qc = {:?}, aleph_qcsl = {:?}",
                b.t1, b.t2, b.fluence, b.aleph_qc, b.aleph_qcsl
            );
            let csv = write(&dir, "scan.csv", &out.field.to_csv())?;
            let plot = plot_stub(&dir, "scan.csv", "t1_s", &["aleph_qc", "aleph_qcsl"])?;
            manifest(&dir, "scan", &cfg, &[csv, plot])
        }
        Command::Exclusion {
            common,
            rc_min,
            rc_max,
            points,
            threshold,
            workers: w,
        } => {
            let (cfg, dir) = resolve(&common)?;
            let (particle, grating) = (cfg.particle()?, cfg.grating()?);
            let protocol = cfg.protocol()?;
            let engine = PatternEngine::new(&particle, &cfg.environment()?, grating.wavelength)?;
            let specs = ScanSpecs::new(engine, protocol.trap_frequency, protocol.com_temperature);
            let opts = ScanOptions {
                workers: workers(w)?,
                checkpoint: None,
            };
            let r_cs = log_space(rc_min, rc_max, points);
            let curve = exclusion_curve(&specs, &protocol, grating.fluence, &r_cs, threshold, &opts)?;
            let csv = write(&dir, "exclusion.csv", &curve.to_csv())?;
            let plot = plot_stub(&dir, "exclusion.csv", "r_c_m", &["lambda_min_per_s"])?;
            manifest(&dir, "exclusion", &cfg, &[csv, plot])
        }
        Command::Noninterf {
            common,
            accel_noise,
            d,
            t,
            run_time,
            total_time,
            resolution,
            points,
        } => {
            let (cfg, dir) = resolve(&common)?;
            if accel_noise {
                let s = accel_noise_requirement(d, t)?;
                let text = format!("d_m, T_s, sqrt_saa_m_per_s2_per_sqrt_hz\n{d:e}, {t:e}, {s:e}\n");
                print!("{text}");
                let csv = write(&dir, "accel_noise.csv", &text)?;
                return manifest(&dir, "noninterf --accel-noise", &cfg, &[csv]);
            }
            let particle = cfg.particle()?;
            let env = cfg.environment()?;
            let protocol = cfg.protocol()?;
            let r_cs = log_space(1e-9, 1e-3, points);
            let stats = BoundMode::Statistics {
                run_time,
                total_time,
                frequency: Frequency::Cyclic(protocol.trap_frequency),
                resolution,
            };
            let mut text = bound_csv(&bound_curve(&r_cs, &particle, &env, BoundMode::Environment)?, BoundMode::Environment);
            let stat = bound_csv(&bound_curve(&r_cs, &particle, &env, stats)?, stats);
            text.extend(stat.lines().skip(1).map(|l| format!("{l}\n")));
            let dx = statistical_limit(Frequency::Cyclic(protocol.trap_frequency), run_time, total_time, particle.mass)?;
            println!("statistical limit dx_f = {dx:e} m");
            let csv = write(&dir, "noninterf_bounds.csv", &text)?;
            let plot = plot_stub(&dir, "noninterf_bounds.csv", "r_c_m", &["lambda_min_per_s"])?;
            manifest(&dir, "noninterf", &cfg, &[csv, plot])
        }
        Command::Props { common } => {
            let (cfg, dir) = resolve(&common)?;
            let (particle, env, grating) = (cfg.particle()?, cfg.environment()?, cfg.grating()?);
            let protocol = cfg.protocol()?;
            let engine = PatternEngine::new(&particle, &env, grating.wavelength)?;
            let rates = localization_rates(&particle, &env)?;
            let (sz, sp) = initial_spreads(protocol.trap_frequency, protocol.com_temperature, particle.mass);
            let h = engine.harmonics(PatternKind::Quantum, &protocol, grating.fluence, None, true)?;
            let mut text = String::new();
            let mut row = |k: &str, v: f64| {
                let _ = writeln!(text, "{k} = {v:e}");
            };
            row("mass_kg", particle.mass);
            row("mass_amu", particle.mass_amu());
            row("radius_m", particle.radius);
            row("phi0", engine.profile.phi0(grating.fluence));
            row("sigma_abs_m2", engine.profile.sigma_abs);
            row("talbot_time_s", engine.talbot_time());
            row("magnified_period_m", h.magnification);
            row("delta_per_m", h.delta);
            row("sigma_z_m", sz);
            row("sigma_p_kg_m_per_s", sp);
            row("collision_rate_per_s", rates.collision_rate);
            row("collision_survival", h.survival);
            row("lambda_gas_per_m2_s", rates.gas);
            row("lambda_blackbody_per_m2_s", rates.blackbody());
            row("lambda_scattering_per_m2_s", rates.scattering);
            row("lambda_absorption_per_m2_s", rates.absorption);
            row("lambda_emission_per_m2_s", rates.emission);
            if let Ok(c) = cfg.collapse() {
                row("lambda_csl_per_m2_s", csl_diffusion(&particle, c));
            }
            row("harmonics", h.truncation() as f64);
            print!("{text}");
            let out = write(&dir, "props.txt", &text)?;
            manifest(&dir, "props", &cfg, &[out])
        }
    }
}
