//! Worker pools, cached per width.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rayon::{ThreadPool, ThreadPoolBuilder};

fn pool(workers: usize) -> Arc<ThreadPool> {
    static POOLS: OnceLock<Mutex<HashMap<usize, Arc<ThreadPool>>>> = OnceLock::new();
    let mut pools = POOLS.get_or_init(Default::default).lock().unwrap();
    pools
        .entry(workers)
        .or_insert_with(|| {
            Arc::new(
                ThreadPoolBuilder::new()
                    .num_threads(workers)
                    .thread_name(move |i| format!("ffpluq-{workers}-{i}"))
                    .build()
                    .expect("thread pool"),
            )
        })
        .clone()
}

/// Runs `f` on a pool of `workers` threads. Nested calls with the same
/// width stay on the current pool.
pub fn install<R: Send>(workers: usize, f: impl FnOnce() -> R + Send) -> R {
    let workers = workers.max(1);
    if rayon::current_thread_index().is_some() && rayon::current_num_threads() == workers {
        return f();
    }
    pool(workers).install(f)
}
