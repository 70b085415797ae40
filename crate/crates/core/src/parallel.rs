// Copyright 2026 The depol Authors
// SPDX-License-Identifier: Apache-2.0

//! Worker pool shared by the parallel loops of the crate.
//!
//! `DEPOL_THREADS` caps the number of workers. Work is always split into
//! fixed-size chunks whose partial results are reduced in chunk order, so
//! results never depend on the worker count.

use std::sync::OnceLock;

use rayon::{ThreadPool, ThreadPoolBuilder};

pub const THREADS_ENV: &str = "DEPOL_THREADS";

fn requested_threads() -> Option<usize> {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
}

/// The process-wide pool, sized from `DEPOL_THREADS` on first use.
pub fn pool() -> &'static ThreadPool {
    static POOL: OnceLock<ThreadPool> = OnceLock::new();
    POOL.get_or_init(|| {
        let mut builder = ThreadPoolBuilder::new().thread_name(|i| format!("depol-{i}"));
        if let Some(n) = requested_threads() {
            builder = builder.num_threads(n);
        }
        builder.build().expect("failed to build worker pool")
    })
}
