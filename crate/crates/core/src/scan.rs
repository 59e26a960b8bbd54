//! Parameter scans over (t₁, t₂, fluence) and exclusion curves over (r_c, λ).

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::PathBuf;
use std::sync::Mutex;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::collapse::{CslKernel, CslParams};
use crate::metrics::{aleph_samples, DEFAULT_WINDOW, THRESHOLD};
use crate::noninterf::log_space;
use crate::pattern::{spec_digest, Harmonics, PatternEngine, PatternKind, ProtocolSpec};
use crate::{Error, Result};

/// Fraction of failed cells above which a scan reports an error.
pub const MAX_FAILURE_FRACTION: f64 = 0.01;
pub const LAMBDA_BRACKET: (f64, f64) = (1e-20, 1e-2);
pub const BISECTION_STEPS: usize = 40;

#[derive(Debug, Clone, PartialEq)]
pub struct ScanGrid {
    pub t1_values: Vec<f64>,
    pub t2_values: Vec<f64>,
    pub fluence_values: Vec<f64>,
    pub mass: f64,
    pub t_max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub index: usize,
    pub t1: f64,
    pub t2: f64,
    pub fluence: f64,
}

impl ScanGrid {
    pub fn new(t1: Vec<f64>, t2: Vec<f64>, fluence: Vec<f64>, mass: f64, t_max: f64) -> Result<Self> {
        for (name, v) in [("t1", &t1), ("t2", &t2), ("fluence", &fluence)] {
            if v.is_empty() || v.windows(2).any(|w| !(w[1] > w[0])) || v.iter().any(|x| !(*x > 0.0)) {
                return Err(Error::Domain(format!("{name} values must be positive and strictly increasing")));
            }
        }
        let g = Self {
            t1_values: t1,
            t2_values: t2,
            fluence_values: fluence,
            mass,
            t_max,
        };
        if g.cells().is_empty() {
            return Err(Error::Domain(format!("no cell satisfies t1 + t2 <= {t_max}")));
        }
        Ok(g)
    }

    /// n_t times per axis spread over (0, t_max) and n_f log-spaced fluences in [1e-6, 5].
    pub fn uniform(n_t: usize, n_f: usize, mass: f64, t_max: f64) -> Result<Self> {
        let step = t_max / (n_t + 1) as f64;
        let t: Vec<f64> = (1..=n_t).map(|i| i as f64 * step).collect();
        Self::new(t.clone(), t, log_space(1e-6, 5.0, n_f.max(1)), mass, t_max)
    }

    /// Cells inside the triangle, ordered by t₁, then t₂, then fluence.
    pub fn cells(&self) -> Vec<Cell> {
        let mut out = Vec::new();
        for &t1 in &self.t1_values {
            for &t2 in &self.t2_values {
                if t1 + t2 > self.t_max * (1.0 + 1e-12) {
                    continue;
                }
                for &fluence in &self.fluence_values {
                    out.push(Cell {
                        index: out.len(),
                        t1,
                        t2,
                        fluence,
                    });
                }
            }
        }
        out
    }
}

/// Everything a cell evaluation needs besides the cell itself.
#[derive(Debug, Clone)]
pub struct ScanSpecs {
    pub engine: PatternEngine,
    pub trap_frequency: f64,
    pub com_temperature: f64,
    pub collapse: CslParams,
    pub window: f64,
    pub samples: usize,
}

impl ScanSpecs {
    pub fn new(engine: PatternEngine, trap_frequency: f64, com_temperature: f64) -> Self {
        Self {
            engine,
            trap_frequency,
            com_temperature,
            collapse: CslParams::adler(),
            window: DEFAULT_WINDOW,
            samples: 257,
        }
    }

    fn grid(&self) -> Vec<f64> {
        let n = self.samples.max(2);
        (0..n)
            .map(|i| self.window * (i as f64 / (n - 1) as f64 - 0.5))
            .collect()
    }

    /// (ℵ_QC, ℵ_QCSL) for one protocol and fluence.
    pub fn alephs(&self, protocol: &ProtocolSpec, fluence: f64) -> Result<(f64, f64)> {
        let e = &self.engine;
        let q = e.harmonics(PatternKind::Quantum, protocol, fluence, None, true)?;
        let c = e.harmonics(PatternKind::Classical, protocol, fluence, None, true)?;
        let kernel = CslKernel::new(&e.particle, self.collapse, e.period(), protocol.t1, protocol.t2)?;
        let s = q.with_kernel(|n| kernel.r(n))?;
        let z = self.grid();
        let pq = sample(&q, &z);
        Ok((
            aleph_samples(&z, &pq, &sample(&c, &z), self.window)?,
            aleph_samples(&z, &pq, &sample(&s, &z), self.window)?,
        ))
    }
}

fn sample(h: &Harmonics, z: &[f64]) -> Vec<f64> {
    z.iter().map(|&x| h.density(x)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub index: usize,
    pub t1: f64,
    pub t2: f64,
    pub fluence: f64,
    pub aleph_qc: Option<f64>,
    pub aleph_qcsl: Option<f64>,
    pub error: Option<String>,
}

impl CellResult {
    fn value(&self, target: Target) -> Option<f64> {
        match target {
            Target::Qc => self.aleph_qc,
            Target::Qcsl => self.aleph_qcsl,
        }
    }
}

pub fn evaluate_cell(cell: Cell, specs: &ScanSpecs) -> CellResult {
    let outcome = ProtocolSpec::new(cell.t1, cell.t2, specs.trap_frequency, specs.com_temperature)
        .and_then(|p| specs.alephs(&p, cell.fluence));
    let (aleph_qc, aleph_qcsl, error) = match outcome {
        Ok((a, b)) => (Some(a), Some(b), None),
        Err(e) => (None, None, Some(e.to_string())),
    };
    CellResult {
        index: cell.index,
        t1: cell.t1,
        t2: cell.t2,
        fluence: cell.fluence,
        aleph_qc,
        aleph_qcsl,
        error,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    Qc,
    Qcsl,
}

#[derive(Debug, Clone, Default)]
pub struct ScanOptions {
    /// Worker threads; 0 uses rayon's default.
    pub workers: usize,
    /// Append-only JSONL file; existing records are reused.
    pub checkpoint: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanField {
    pub cells: Vec<CellResult>,
}

impl ScanField {
    pub fn failures(&self) -> usize {
        self.cells.iter().filter(|c| c.error.is_some()).count()
    }

    /// Argmax; ties go to the earliest cell in (t₁, t₂, fluence) order.
    pub fn best(&self, target: Target) -> Option<&CellResult> {
        let mut best: Option<&CellResult> = None;
        for c in &self.cells {
            if let Some(v) = c.value(target) {
                if best.map_or(true, |b| v > b.value(target).unwrap_or(f64::NEG_INFINITY)) {
                    best = Some(c);
                }
            }
        }
        best
    }

    /// Per (t₁, t₂): the fluence cell maximizing the target.
    pub fn optimized(&self, target: Target) -> Vec<&CellResult> {
        let mut out: Vec<&CellResult> = Vec::new();
        for c in &self.cells {
            match out.last_mut() {
                Some(last) if last.t1 == c.t1 && last.t2 == c.t2 => {
                    let cur = last.value(target).unwrap_or(f64::NEG_INFINITY);
                    if c.value(target).is_some_and(|v| v > cur) {
                        *last = c;
                    }
                }
                _ => out.push(c),
            }
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("t1_s, t2_s, fluence_J_per_m2, aleph_qc, aleph_qcsl\n");
        let fmt = |v: Option<f64>| v.map_or("nan".to_string(), |x| format!("{x:e}"));
        for c in &self.cells {
            let _ = writeln!(
                out,
                "{:e}, {:e}, {:e}, {}, {}",
                c.t1,
                c.t2,
                c.fluence,
                fmt(c.aleph_qc),
                fmt(c.aleph_qcsl)
            );
        }
        out
    }
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::numerical("scan", e.to_string()))
}

fn read_checkpoint(path: &PathBuf, cells: &[Cell]) -> Result<BTreeMap<usize, CellResult>> {
    let mut done = BTreeMap::new();
    let Ok(file) = File::open(path) else {
        return Ok(done);
    };
    for line in BufReader::new(file).lines() {
        let line = line?;
        // A torn final line from an interrupted run is simply recomputed.
        let Ok(rec) = serde_json::from_str::<CellResult>(&line) else {
            continue;
        };
        let matches = cells
            .get(rec.index)
            .is_some_and(|c| c.t1 == rec.t1 && c.t2 == rec.t2 && c.fluence == rec.fluence);
        if !matches {
            return Err(Error::Interface(format!(
                "checkpoint {} record {} does not match this grid",
                path.display(),
                rec.index
            )));
        }
        done.insert(rec.index, rec);
    }
    Ok(done)
}

/// Evaluate every cell; results are ordered by cell index.
pub fn run_scan(grid: &ScanGrid, specs: &ScanSpecs, opts: &ScanOptions) -> Result<ScanField> {
    let cells = grid.cells();
    let mut done = match &opts.checkpoint {
        Some(p) => read_checkpoint(p, &cells)?,
        None => BTreeMap::new(),
    };
    let pending: Vec<Cell> = cells.iter().filter(|c| !done.contains_key(&c.index)).copied().collect();
    let writer = match &opts.checkpoint {
        Some(p) => Some(Mutex::new(OpenOptions::new().create(true).append(true).open(p)?)),
        None => None,
    };
    let fresh: Vec<Result<CellResult>> = pool(opts.workers)?.install(|| {
        pending
            .par_iter()
            .map(|&c| {
                let r = evaluate_cell(c, specs);
                if let Some(w) = &writer {
                    let line = serde_json::to_string(&r).map_err(|e| Error::numerical("scan", e.to_string()))?;
                    let mut f = w.lock().map_err(|_| Error::numerical("scan", "checkpoint lock poisoned"))?;
                    writeln!(f, "{line}")?;
                    f.flush()?;
                }
                Ok(r)
            })
            .collect()
    });
    for r in fresh {
        let r = r?;
        done.insert(r.index, r);
    }
    Ok(ScanField {
        cells: done.into_values().collect(),
    })
}

#[derive(Debug, Clone)]
pub struct ScanOutcome {
    pub best: CellResult,
    pub field: ScanField,
}

/// Scan the grid and return the argmax cell with the full field.
pub fn optimize_aleph(
    grid: &ScanGrid,
    target: Target,
    specs: &ScanSpecs,
    opts: &ScanOptions,
) -> Result<ScanOutcome> {
    let field = run_scan(grid, specs, opts)?;
    let failed = field.failures();
    if failed as f64 > MAX_FAILURE_FRACTION * field.cells.len() as f64 {
        return Err(Error::PartialScan {
            failed,
            total: field.cells.len(),
        });
    }
    let best = field
        .best(target)
        .cloned()
        .ok_or(Error::PartialScan {
            failed,
            total: field.cells.len(),
        })?;
    Ok(ScanOutcome { best, field })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointStatus {
    Bounded,
    /// Threshold already met at the bracket floor.
    Floor,
    Unreachable,
}

impl PointStatus {
    pub fn name(self) -> &'static str {
        match self {
            PointStatus::Bounded => "bounded",
            PointStatus::Floor => "floor",
            PointStatus::Unreachable => "unreachable",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExclusionCurve {
    pub r_c_values: Vec<f64>,
    pub lambda_min: Vec<f64>,
    pub status: Vec<PointStatus>,
    /// Whether ℵ_QCSL rose monotonically with λ on the coarse pre-scan.
    pub monotone: Vec<bool>,
    pub threshold: f64,
    pub digest: String,
}

impl ExclusionCurve {
    pub fn to_csv(&self) -> String {
        let mut out = format!("# threshold = {}\n# digest = {}\n", self.threshold, self.digest);
        out.push_str("r_c_m, lambda_min_per_s, status\n");
        for i in 0..self.r_c_values.len() {
            let _ = writeln!(
                out,
                "{:e}, {:e}, {}",
                self.r_c_values[i],
                self.lambda_min[i],
                self.status[i].name()
            );
        }
        out
    }
}

/// λ_min at one r_c: coarse log pre-scan for the first crossing, then bisection on log λ.
fn lambda_min(
    specs: &ScanSpecs,
    protocol: &ProtocolSpec,
    quantum: &Harmonics,
    r_c: f64,
    threshold: f64,
) -> Result<(f64, PointStatus, bool)> {
    let e = &specs.engine;
    let z = specs.grid();
    let pq = sample(quantum, &z);
    let aleph_at = |log_lambda: f64| -> Result<f64> {
        let c = CslParams::new(log_lambda.exp(), r_c)?;
        let kernel = CslKernel::new(&e.particle, c, e.period(), protocol.t1, protocol.t2)?;
        let s = quantum.with_kernel(|n| kernel.r(n))?;
        aleph_samples(&z, &pq, &sample(&s, &z), specs.window)
    };
    let (lo, hi) = (LAMBDA_BRACKET.0.ln(), LAMBDA_BRACKET.1.ln());
    let coarse = 37;
    let mut prev = (lo, aleph_at(lo)?);
    if prev.1 >= threshold {
        return Ok((LAMBDA_BRACKET.0, PointStatus::Floor, true));
    }
    let mut monotone = true;
    let mut crossing = None;
    for i in 1..coarse {
        let x = lo + (hi - lo) * i as f64 / (coarse - 1) as f64;
        let v = aleph_at(x)?;
        if v < prev.1 - 1e-12 {
            monotone = false;
        }
        if v >= threshold {
            crossing = Some((prev.0, x));
            break;
        }
        prev = (x, v);
    }
    let Some((mut a, mut b)) = crossing else {
        return Ok((LAMBDA_BRACKET.1, PointStatus::Unreachable, monotone));
    };
    for _ in 0..BISECTION_STEPS {
        let m = 0.5 * (a + b);
        if aleph_at(m)? >= threshold {
            b = m;
        } else {
            a = m;
        }
    }
    Ok((b.exp(), PointStatus::Bounded, monotone))
}

pub fn exclusion_curve(
    specs: &ScanSpecs,
    protocol: &ProtocolSpec,
    fluence: f64,
    r_c_values: &[f64],
    threshold: f64,
    opts: &ScanOptions,
) -> Result<ExclusionCurve> {
    let quantum = specs
        .engine
        .harmonics(PatternKind::Quantum, protocol, fluence, None, true)?;
    let points: Vec<Result<(f64, PointStatus, bool)>> = pool(opts.workers)?.install(|| {
        r_c_values
            .par_iter()
            .map(|&r_c| lambda_min(specs, protocol, &quantum, r_c, threshold))
            .collect()
    });
    let mut curve = ExclusionCurve {
        r_c_values: r_c_values.to_vec(),
        lambda_min: Vec::new(),
        status: Vec::new(),
        monotone: Vec::new(),
        threshold,
        digest: spec_digest(&specs.engine, protocol, fluence, None),
    };
    for p in points {
        let (l, s, m) = p?;
        curve.lambda_min.push(l);
        curve.status.push(s);
        curve.monotone.push(m);
    }
    Ok(curve)
}

/// Default exclusion threshold.
pub fn default_threshold() -> f64 {
    THRESHOLD
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::constants::AMU;
    use crate::decoherence::{EnvironmentSpec, InternalTemperatureModel, ParticleSpec};
    use crate::material::{GasSpecies, Material};

    fn specs(mass_amu: f64) -> ScanSpecs {
        let p = ParticleSpec::from_mass(
            Arc::new(Material::silica()),
            mass_amu * AMU,
            InternalTemperatureModel::Constant(40.0),
        )
        .unwrap();
        let env = EnvironmentSpec::new(20.0, 1e-11, GasSpecies::hydrogen()).unwrap();
        let engine = PatternEngine::new(&p, &env, 100e-9).unwrap();
        let mut s = ScanSpecs::new(engine, 1e5 / (2.0 * std::f64::consts::PI), 5e-6);
        s.samples = 129;
        s
    }

    #[test]
    fn triangle_and_ordering() {
        let g = ScanGrid::uniform(4, 3, 1e8 * AMU, 100.0).unwrap();
        let cells = g.cells();
        assert!(cells.iter().all(|c| c.t1 + c.t2 <= 100.0));
        assert_eq!(cells.len(), 10 * 3);
        assert!(ScanGrid::new(vec![2.0, 1.0], vec![1.0], vec![1e-3], 1.0, 100.0).is_err());
    }

    #[test]
    fn single_cell_grid() {
        let s = specs(1e8);
        let g = ScanGrid::new(vec![10.0], vec![10.0], vec![3.5e-4], s.engine.particle.mass, 100.0).unwrap();
        let out = optimize_aleph(&g, Target::Qc, &s, &ScanOptions::default()).unwrap();
        assert_eq!(out.field.cells.len(), 1);
        assert_eq!(out.best.index, 0);
        assert!(out.best.aleph_qc.unwrap() > 0.0);
    }

    #[test]
    fn ties_pick_earliest_cell() {
        let mk = |i, v| CellResult {
            index: i,
            t1: i as f64,
            t2: 1.0,
            fluence: 1.0,
            aleph_qc: Some(v),
            aleph_qcsl: None,
            error: None,
        };
        let f = ScanField {
            cells: vec![mk(0, 0.1), mk(1, 0.3), mk(2, 0.3)],
        };
        assert_eq!(f.best(Target::Qc).unwrap().index, 1);
        assert!(f.best(Target::Qcsl).is_none());
    }

    #[test]
    fn checkpoint_resume_matches() {
        let s = specs(1e8);
        let g = ScanGrid::uniform(3, 2, s.engine.particle.mass, 60.0).unwrap();
        let full = run_scan(&g, &s, &ScanOptions::default()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ck.jsonl");
        // Keep the first three records plus a torn line.
        let mut text = String::new();
        for c in &full.cells[..3] {
            text.push_str(&serde_json::to_string(c).unwrap());
            text.push('\n');
        }
        text.push_str("{\"index\": 4, \"t1\"");
        std::fs::write(&path, text).unwrap();
        let opts = ScanOptions {
            workers: 2,
            checkpoint: Some(path),
        };
        let resumed = run_scan(&g, &s, &opts).unwrap();
        assert_eq!(resumed.to_csv(), full.to_csv());
    }

    #[test]
    fn zero_threshold_hits_floor() {
        let s = specs(1e9);
        let proto = ProtocolSpec::new(10.0, 10.0, s.trap_frequency, s.com_temperature).unwrap();
        let c = exclusion_curve(&s, &proto, 8.7e-6, &[1e-7, 1e-6], 0.0, &ScanOptions::default()).unwrap();
        assert!(c.lambda_min.iter().all(|&l| l == LAMBDA_BRACKET.0));
        assert!(c.status.iter().all(|&st| st == PointStatus::Floor));
        assert!(c.to_csv().contains("r_c_m, lambda_min_per_s, status"));
    }
}
