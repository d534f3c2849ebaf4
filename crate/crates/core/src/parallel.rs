//! Worker-pool control.
//!
//! Parallel sections draw from a locally installed rayon pool. Estimates are
//! reduced over pre-assigned task slots, so the numeric output is identical
//! for every worker count.

use crate::{LabError, Result};

/// Environment variable overriding the default worker count.
pub const WORKERS_ENV: &str = "RESOLVENT_LAB_WORKERS";

/// Worker count: explicit request, else `RESOLVENT_LAB_WORKERS`, else the
/// number of logical cores.
pub fn worker_count(requested: Option<usize>) -> usize {
    if let Some(n) = requested {
        return n.max(1);
    }
    if let Ok(v) = std::env::var(WORKERS_ENV) {
        if let Ok(n) = v.trim().parse::<usize>() {
            return n.max(1);
        }
    }
    std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
}

/// Runs `f` inside a rayon pool of `workers` threads.
pub fn with_workers<R: Send>(workers: usize, f: impl FnOnce() -> R + Send) -> Result<R> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| LabError::InvalidConfig(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}
