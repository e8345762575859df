//! Concurrent sweeps. Each size runs on its own worker; results are merged
//! back in size order.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use adiasched_core::harness::{family_instance, sweep_point, validate_sizes, FamilyKind, ScheduleKind, SearchOptions, SweepPoint};

use crate::error::{invalid, CliResult};

pub const THREADS_ENV: &str = "ADIA_THREADS";

/// Worker cap from `ADIA_THREADS`, else the available parallelism.
pub fn thread_cap() -> CliResult<usize> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(n),
            _ => Err(invalid(format!("{THREADS_ENV} must be a positive integer, got {v:?}"))),
        },
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSpec {
    pub kind: FamilyKind,
    pub schedule: ScheduleKind,
    pub p: f64,
    pub epsilon: f64,
    pub dense: bool,
    pub search: SearchOptions,
}

/// Run every size with at most `threads` workers. On failure the error of
/// the smallest failing size is returned.
pub fn run_sweep(spec: &SweepSpec, sizes: &[f64], threads: usize) -> CliResult<Vec<SweepPoint>> {
    validate_sizes(sizes)?;
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<adiasched_core::Result<SweepPoint>>>> = sizes.iter().map(|_| Mutex::new(None)).collect();
    let workers = threads.clamp(1, sizes.len());
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= sizes.len() {
                    break;
                }
                let r = family_instance(spec.kind, sizes[i], spec.dense)
                    .and_then(|inst| sweep_point(&inst, spec.schedule, spec.p, spec.epsilon, &spec.search));
                *slots[i].lock().unwrap_or_else(|e| e.into_inner()) = Some(r);
            });
        }
    });
    slots
        .into_iter()
        .map(|m| {
            m.into_inner()
                .unwrap_or_else(|e| e.into_inner())
                .unwrap_or_else(|| Err(adiasched_core::Error::NonConvergence("sweep worker did not report".into())))
                .map_err(Into::into)
        })
        .collect()
}
