//! Benchmark harness: runs HCP instances of growing size through the
//! incremental driver and records timings and grounding sizes as CSV.

pub mod external;

use std::fmt;
use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use cagasp_core::cag::{cag_rewrite, CagOptions};
use cagasp_core::hcp::{self, batch_facts, gen_instance, InstanceSpec};
use cagasp_core::incremental::{
    incremental_solve_traced, Engine, FactBatch, InternalEngine, IterationTrace, VerifyFinal,
};
use cagasp_core::lang::Program;
use cagasp_core::solve::AnswerSet;
use cagasp_core::Error;

pub use external::{run_external_engine, ExternalEngine, ExternalRun};

/// Default per-size budget.
pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(60);

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("cannot start `{cmd}`: {source}")]
    Spawn { cmd: String, source: io::Error },
    #[error("external engine failed with exit code {code:?}: {stderr}")]
    ExternalEngine { code: Option<i32>, stderr: String },
    #[error("not a model line: {line:?}")]
    ModelLine { line: String },
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    OneShot,
    Incremental,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rewrite {
    Plain,
    Cag,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum EngineSpec {
    Internal,
    /// A shell command line.
    External(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunStatus {
    Sat,
    Unsat,
    Timeout,
    Error,
}

macro_rules! text_enum {
    ($ty:ty { $($variant:path => $text:literal),+ $(,)? }) => {
        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(match self { $($variant => $text),+ })
            }
        }

        impl FromStr for $ty {
            type Err = BenchError;

            fn from_str(s: &str) -> Result<Self, BenchError> {
                match s {
                    $($text => Ok($variant),)+
                    _ => Err(BenchError::Config(format!("unknown {}: {s}", stringify!($ty).to_lowercase()))),
                }
            }
        }
    };
}

text_enum!(Mode { Mode::OneShot => "one-shot", Mode::Incremental => "incremental" });
text_enum!(Rewrite { Rewrite::Plain => "plain", Rewrite::Cag => "cag" });
text_enum!(RunStatus {
    RunStatus::Sat => "sat",
    RunStatus::Unsat => "unsat",
    RunStatus::Timeout => "timeout",
    RunStatus::Error => "error",
});

impl fmt::Display for EngineSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EngineSpec::Internal => f.write_str("internal"),
            EngineSpec::External(cmd) => write!(f, "external:{cmd}"),
        }
    }
}

impl FromStr for EngineSpec {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, BenchError> {
        match s.strip_prefix("external:") {
            _ if s == "internal" => Ok(EngineSpec::Internal),
            Some(cmd) if !cmd.trim().is_empty() => Ok(EngineSpec::External(cmd.to_string())),
            _ => Err(BenchError::Config(format!("unknown engine: {s}"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct BenchConfig {
    /// Person counts, strictly increasing.
    pub sizes: Vec<usize>,
    pub ppi: usize,
    pub mode: Mode,
    pub rewrite: Rewrite,
    pub engine: EngineSpec,
    pub timeout: Duration,
    /// Where to stream CSV rows; `None` keeps the records in memory only.
    pub output: Option<PathBuf>,
    /// Number of sizes run at once.
    pub parallel: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            sizes: vec![1],
            ppi: 5,
            mode: Mode::Incremental,
            rewrite: Rewrite::Plain,
            engine: EngineSpec::Internal,
            timeout: DEFAULT_TIMEOUT,
            output: None,
            parallel: 1,
        }
    }
}

impl BenchConfig {
    pub fn validate(&self) -> Result<(), BenchError> {
        if self.sizes.is_empty() {
            return Err(BenchError::Config("no instance sizes".into()));
        }
        if self.sizes.contains(&0) {
            return Err(BenchError::Config("instance sizes must be positive".into()));
        }
        if self.sizes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(BenchError::Config("instance sizes must be strictly increasing".into()));
        }
        if self.ppi == 0 {
            return Err(BenchError::Config("ppi must be positive".into()));
        }
        if self.parallel == 0 {
            return Err(BenchError::Config("parallel must be positive".into()));
        }
        Ok(())
    }
}

/// One CSV row. Times are in seconds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub persons: usize,
    pub things: usize,
    pub ppi: usize,
    pub mode: Mode,
    pub rewrite: Rewrite,
    pub engine: String,
    pub status: RunStatus,
    pub total_time: f64,
    pub ground_time: f64,
    pub solve_time: f64,
    /// Everything outside grounding and solving: generation, rewriting,
    /// batching and the loop itself.
    pub driver_time: f64,
    pub final_iteration_ground_rules: Option<usize>,
    pub final_iteration_ground_bytes: Option<usize>,
    pub final_iteration_ground_atoms: Option<usize>,
    pub iterations: usize,
    /// Peak resident set of the whole process so far, where available.
    pub peak_rss_kb: Option<u64>,
}

/// Field names in CSV column order.
pub const CSV_HEADER: [&str; 16] = [
    "persons",
    "things",
    "ppi",
    "mode",
    "rewrite",
    "engine",
    "status",
    "total_time",
    "ground_time",
    "solve_time",
    "driver_time",
    "final_iteration_ground_rules",
    "final_iteration_ground_bytes",
    "final_iteration_ground_atoms",
    "iterations",
    "peak_rss_kb",
];

/// A finished run together with what the loop produced.
#[derive(Clone, Debug)]
pub struct SizeOutcome {
    pub record: BenchRecord,
    pub model: Option<AnswerSet>,
    pub traces: Vec<IterationTrace>,
    pub instance: Vec<cagasp_core::lang::Atom>,
    pub error: Option<Error>,
}

/// The encoding a configuration runs.
pub fn encoding_for(rewrite: Rewrite) -> Program {
    match rewrite {
        Rewrite::Plain => hcp::encoding(),
        Rewrite::Cag => cag_rewrite(&hcp::encoding(), &CagOptions::default()),
    }
}

fn batches_for(instance: &[cagasp_core::lang::Atom], mode: Mode, ppi: usize) -> Vec<FactBatch> {
    match mode {
        Mode::Incremental => batch_facts(instance, ppi),
        Mode::OneShot => vec![FactBatch {
            index: 1,
            facts: instance.to_vec(),
        }],
    }
}

/// Run one instance size under `cfg`.
pub fn run_size(cfg: &BenchConfig, persons: usize) -> SizeOutcome {
    let start = Instant::now();
    let deadline = start.checked_add(cfg.timeout);
    let spec = InstanceSpec::new(persons);
    let instance = gen_instance(&spec);
    let batches = batches_for(&instance, cfg.mode, cfg.ppi);
    let encoding = encoding_for(cfg.rewrite);
    let engine: Box<dyn Engine> = match &cfg.engine {
        EngineSpec::Internal => Box::new(InternalEngine::with_deadline(deadline)),
        EngineSpec::External(cmd) => Box::new(ExternalEngine {
            cmd: cmd.clone(),
            deadline,
        }),
    };
    let (traces, outcome) = incremental_solve_traced(&encoding, &batches, engine.as_ref(), VerifyFinal::Off);
    let total = start.elapsed();

    let ground: Duration = traces.iter().map(|t| t.ground_time).sum();
    let solve: Duration = traces.iter().map(|t| t.solve_time).sum();
    let driver = total.saturating_sub(ground + solve);
    let (status, model, error) = match outcome {
        Ok((m, _)) => (RunStatus::Sat, Some(m), None),
        Err(e @ Error::IterationUnsat { .. }) => (RunStatus::Unsat, None, Some(e)),
        Err(e @ Error::EngineTimeout { .. }) => (RunStatus::Timeout, None, Some(e)),
        Err(e) => (RunStatus::Error, None, Some(e)),
    };
    let last = traces.last().and_then(|t| t.stats.as_ref());
    let record = BenchRecord {
        persons,
        things: persons * spec.things_per_person,
        ppi: cfg.ppi,
        mode: cfg.mode,
        rewrite: cfg.rewrite,
        engine: cfg.engine.to_string(),
        status,
        total_time: total.as_secs_f64(),
        ground_time: ground.as_secs_f64(),
        solve_time: solve.as_secs_f64(),
        driver_time: driver.as_secs_f64(),
        final_iteration_ground_rules: last.map(|s| s.rule_count),
        final_iteration_ground_bytes: last.map(|s| s.bytes),
        final_iteration_ground_atoms: last.map(|s| s.atom_occurrences),
        iterations: traces.len(),
        peak_rss_kb: peak_rss_kb(),
    };
    SizeOutcome {
        record,
        model,
        traces,
        instance,
        error,
    }
}

/// Run every size, streaming rows to `cfg.output` as they finish. Records
/// are returned in size order.
pub fn run_bench(cfg: &BenchConfig) -> Result<Vec<BenchRecord>, BenchError> {
    cfg.validate()?;
    let sink: Box<dyn Write + Send> = match &cfg.output {
        Some(path) => Box::new(File::create(path)?),
        None => Box::new(io::sink()),
    };
    let writer = Mutex::new(csv::Writer::from_writer(sink));
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<BenchRecord>> = Mutex::new(Vec::with_capacity(cfg.sizes.len()));
    let failure: Mutex<Option<BenchError>> = Mutex::new(None);

    let worker = || loop {
        let i = next.fetch_add(1, Ordering::SeqCst);
        let Some(&persons) = cfg.sizes.get(i) else { break };
        let record = run_size(cfg, persons).record;
        let mut w = writer.lock().unwrap();
        if let Err(e) = w.serialize(&record).and_then(|_| w.flush().map_err(csv::Error::from)) {
            failure.lock().unwrap().get_or_insert(e.into());
        }
        drop(w);
        results.lock().unwrap().push(record);
    };
    thread::scope(|s| {
        for _ in 0..cfg.parallel.min(cfg.sizes.len()) {
            s.spawn(worker);
        }
    });

    if let Some(e) = failure.into_inner().unwrap() {
        return Err(e);
    }
    let mut records = results.into_inner().unwrap();
    records.sort_by_key(|r| r.persons);
    Ok(records)
}

pub fn read_csv(path: &Path) -> Result<Vec<BenchRecord>, BenchError> {
    let mut reader = csv::Reader::from_path(path)?;
    reader.deserialize().map(|r| r.map_err(BenchError::from)).collect()
}

/// `VmHWM` from `/proc/self/status`, in kilobytes.
pub fn peak_rss_kb() -> Option<u64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    status
        .lines()
        .find_map(|l| l.strip_prefix("VmHWM:"))
        .and_then(|v| v.trim().trim_end_matches("kB").trim().parse().ok())
}
