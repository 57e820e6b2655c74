//! Directory sweeps producing one CSV row per (instance, engine).

use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use serde::Serialize;

use crate::frontend::{apply_order, load_spec, LoadError, VarOrder};
use crate::skolem::{synthesize, CegarConfig, Engine, SkolemVector, SynthError};
use crate::verify::{certify_exhaustive, certify_sat, VerifyError};
use crate::FactoredSpec;

/// Version tag of the CSV layout, documented alongside the column list.
pub const CSV_SCHEMA: &str = "v1";

/// File extensions picked up by [`instances_in`].
pub const INSTANCE_EXTENSIONS: [&str; 4] = ["qdimacs", "qdm", "cnf", "fctr"];

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum VerifyMode {
    #[default]
    None,
    Sat,
    Exhaustive,
}

#[derive(Clone, Debug)]
pub struct BenchOptions {
    pub engines: Vec<Engine>,
    pub config: CegarConfig,
    pub order: VarOrder,
    pub verify: VerifyMode,
    pub jobs: usize,
}

impl Default for BenchOptions {
    fn default() -> BenchOptions {
        BenchOptions {
            engines: vec![Engine::Mono, Engine::Cegar],
            config: CegarConfig::default(),
            order: VarOrder::default(),
            verify: VerifyMode::None,
            jobs: 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchRow {
    pub instance: String,
    pub engine: String,
    pub status: String,
    pub n: Option<usize>,
    pub m: Option<usize>,
    pub r: Option<usize>,
    pub refinements: Option<u64>,
    pub sat_calls: Option<u64>,
    pub sat_time_frac: Option<f64>,
    pub avg_size: Option<f64>,
    pub max_size: Option<usize>,
    pub total_ms: f64,
}

/// One line per instance pairing both engines, for size and time scatter
/// plots.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScatterRow {
    pub instance: String,
    pub mono_status: String,
    pub cegar_status: String,
    pub mono_avg_size: Option<f64>,
    pub cegar_avg_size: Option<f64>,
    pub mono_ms: f64,
    pub cegar_ms: f64,
}

/// Result of verifying a vector, folded into a status string.
pub fn verify_vector(spec: &mut FactoredSpec, v: &SkolemVector, mode: VerifyMode) -> Result<bool, VerifyError> {
    match mode {
        VerifyMode::None => Ok(true),
        VerifyMode::Sat => certify_sat(spec, v),
        VerifyMode::Exhaustive => Ok(certify_exhaustive(spec, v)? && certify_sat(spec, v)?),
    }
}

fn load_status(e: &LoadError) -> &'static str {
    match e {
        LoadError::Io { .. } => "io-error",
        LoadError::Parse { .. } | LoadError::Spec { .. } => "parse-error",
    }
}

fn empty_row(instance: &str, engine: Engine, status: &str, ms: f64) -> BenchRow {
    BenchRow {
        instance: instance.into(),
        engine: engine.name().into(),
        status: status.into(),
        n: None,
        m: None,
        r: None,
        refinements: None,
        sat_calls: None,
        sat_time_frac: None,
        avg_size: None,
        max_size: None,
        total_ms: ms,
    }
}

/// Runs one engine on one file. Never fails; problems become the status.
pub fn run_one(path: &Path, engine: Engine, opts: &BenchOptions) -> BenchRow {
    let start = Instant::now();
    let name = path.file_name().map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned());
    let ms = |t: Instant| t.elapsed().as_secs_f64() * 1e3;
    let mut spec = match load_spec(path, None) {
        Ok(s) => apply_order(s, opts.order),
        Err(e) => return empty_row(&name, engine, load_status(&e), ms(start)),
    };
    let mut row = empty_row(&name, engine, "ok", 0.0);
    row.n = Some(spec.n());
    row.m = Some(spec.m());
    row.r = Some(spec.r());
    match synthesize(&mut spec, engine, &opts.config) {
        Ok((v, stats)) => {
            row.refinements = Some(stats.refinements);
            row.sat_calls = Some(stats.sat_calls);
            row.sat_time_frac = Some(stats.sat_time_frac());
            row.avg_size = Some(stats.avg_size);
            row.max_size = Some(stats.max_size);
            row.status = match verify_vector(&mut spec, &v, opts.verify) {
                Ok(true) => "ok".into(),
                Ok(false) => "verify-failed".into(),
                Err(VerifyError::Bound { .. }) => "verify-skipped".into(),
                Err(_) => "verify-error".into(),
            };
        }
        Err(e) => {
            if let SynthError::Budget { stats, .. } = &e {
                row.refinements = Some(stats.refinements);
                row.sat_calls = Some(stats.sat_calls);
            }
            row.status = e.reason();
        }
    }
    row.total_ms = ms(start);
    row
}

/// Instance files directly inside `dir`, sorted by name.
pub fn instances_in(dir: &Path) -> io::Result<Vec<PathBuf>> {
    let mut out: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.is_file() && p.extension().and_then(|e| e.to_str()).is_some_and(|e| INSTANCE_EXTENSIONS.contains(&e))
        })
        .collect();
    out.sort();
    Ok(out)
}

/// Runs every engine on every instance. Rows come back in (instance,
/// engine) order regardless of `jobs`.
pub fn run_sweep(paths: &[PathBuf], opts: &BenchOptions) -> Vec<BenchRow> {
    let tasks: Vec<(&PathBuf, Engine)> =
        paths.iter().flat_map(|p| opts.engines.iter().map(move |&e| (p, e))).collect();
    let slots: Mutex<Vec<Option<BenchRow>>> = Mutex::new(vec![None; tasks.len()]);
    let next = AtomicUsize::new(0);
    let workers = opts.jobs.clamp(1, tasks.len().max(1));
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let k = next.fetch_add(1, Ordering::Relaxed);
                let Some(&(path, engine)) = tasks.get(k) else { break };
                let row = run_one(path, engine, opts);
                log::info!("{} {} {}", row.instance, row.engine, row.status);
                slots.lock().expect("no worker panicked")[k] = Some(row);
            });
        }
    });
    slots.into_inner().expect("no worker panicked").into_iter().map(|r| r.expect("every task ran")).collect()
}

pub fn scatter(rows: &[BenchRow]) -> Vec<ScatterRow> {
    let mut out: Vec<ScatterRow> = Vec::new();
    for row in rows {
        let idx = match out.iter().position(|s| s.instance == row.instance) {
            Some(i) => i,
            None => {
                out.push(ScatterRow {
                    instance: row.instance.clone(),
                    mono_status: "missing".into(),
                    cegar_status: "missing".into(),
                    mono_avg_size: None,
                    cegar_avg_size: None,
                    mono_ms: 0.0,
                    cegar_ms: 0.0,
                });
                out.len() - 1
            }
        };
        let s = &mut out[idx];
        if row.engine == Engine::Mono.name() {
            s.mono_status = row.status.clone();
            s.mono_avg_size = row.avg_size;
            s.mono_ms = row.total_ms;
        } else {
            s.cegar_status = row.status.clone();
            s.cegar_avg_size = row.avg_size;
            s.cegar_ms = row.total_ms;
        }
    }
    out
}

pub fn write_csv<T: Serialize, W: io::Write>(rows: &[T], out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
