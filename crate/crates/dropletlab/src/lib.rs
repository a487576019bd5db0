//! Experiment runner for `dropletlab-core`: experiment specs, JSON/CSV
//! output, oracle fixture files and a process-wide cache of Riesz constants.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
pub mod fixtures;
pub mod run;
pub mod spec;

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use dropletlab_core::RieszConstants;

pub use run::{run, Outcome, Status};
pub use spec::{Command, ExperimentSpec, SpecInput};

type Key = (usize, u64, u64);

/// `RieszConstants::compute`, memoized on `(d, s, tolerance)`.
pub fn constants(d: usize, s: f64, tolerance: f64) -> dropletlab_core::Result<RieszConstants> {
    static CACHE: OnceLock<Mutex<HashMap<Key, RieszConstants>>> = OnceLock::new();
    let key = (d, s.to_bits(), tolerance.to_bits());
    let cache = CACHE.get_or_init(Default::default);
    if let Some(c) = cache.lock().unwrap_or_else(|e| e.into_inner()).get(&key) {
        return Ok(*c);
    }
    let c = RieszConstants::compute(d, s, tolerance)?;
    cache
        .lock()
        .unwrap_or_else(|e| e.into_inner())
        .insert(key, c);
    Ok(c)
}
