//! Experiment driver and report emitter for the Curie-Weiss subset
//! estimators: consistency sweeps, CLT variance verification, coverage
//! studies, equivalence audits, approximation-error curves, and the
//! maximum-likelihood-condition comparison, all reproducible from a config
//! file and a seed.

pub mod config;
pub mod estimate;
pub mod experiments;
pub mod io;

pub use config::{ConfigError, ConfigFile, IntervalSettings};

use std::collections::BTreeMap;
use std::path::PathBuf;

/// Where to write, how many workers, which formats.
#[derive(Clone, Debug)]
pub struct RunContext {
    pub out_dir: PathBuf,
    /// 0 means the rayon default.
    pub threads: usize,
    pub write_csv: bool,
    pub write_json: bool,
    /// Flattened config plus CLI overrides; embedded into every report.
    pub meta: BTreeMap<String, String>,
}

impl RunContext {
    pub fn new(out_dir: PathBuf) -> Self {
        Self {
            out_dir,
            threads: 0,
            write_csv: true,
            write_json: true,
            meta: BTreeMap::new(),
        }
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }
}

/// Outcome of one experiment run: reports are written either way; failed
/// assertions surface as exit code 2.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RunOutcome {
    Passed,
    AssertionsFailed,
}

impl RunOutcome {
    pub fn of(passed: bool) -> Self {
        if passed {
            RunOutcome::Passed
        } else {
            RunOutcome::AssertionsFailed
        }
    }

    pub fn passed(self) -> bool {
        self == RunOutcome::Passed
    }
}

/// Run a closure on a dedicated rayon pool of `threads` workers (0 = the
/// global default pool). Results are collected by replication index, so the
/// outputs are identical for every thread count.
pub fn with_pool<R: Send>(threads: usize, f: impl FnOnce() -> R + Send) -> anyhow::Result<R> {
    if threads == 0 {
        Ok(f())
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()?;
        Ok(pool.install(f))
    }
}

/// Sorted-by-index median; averages the middle pair for even counts.
pub(crate) fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    assert!(n > 0);
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

/// Interpolation-free quartile (lower rank convention).
pub(crate) fn quantile(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    assert!(n > 0);
    let idx = ((n as f64 - 1.0) * q).round() as usize;
    sorted[idx.min(n - 1)]
}
