//! Per-point work over sample sets, data-parallel when the `parallel`
//! feature is enabled.
//!
//! Results always come back in input order, so reductions over them are
//! deterministic regardless of thread count.

use std::sync::atomic::{AtomicU8, Ordering};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    Parallel,
}

const SEQUENTIAL: u8 = 0;
const PARALLEL: u8 = 1;

static MODE: AtomicU8 = AtomicU8::new(if cfg!(feature = "parallel") { PARALLEL } else { SEQUENTIAL });

/// Selects how subsequent sweeps run. Without the `parallel` feature this
/// is a no-op and everything is sequential.
pub fn set_execution(mode: Execution) {
    let v = match mode {
        Execution::Parallel if cfg!(feature = "parallel") => PARALLEL,
        _ => SEQUENTIAL,
    };
    MODE.store(v, Ordering::Relaxed);
}

pub fn execution() -> Execution {
    match MODE.load(Ordering::Relaxed) {
        PARALLEL => Execution::Parallel,
        _ => Execution::Sequential,
    }
}

/// Sizes the global worker pool. Must run before the first parallel sweep;
/// later calls report an error.
pub fn configure_threads(n: usize) -> Result<(), String> {
    #[cfg(feature = "parallel")]
    {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| e.to_string())
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = n;
        Ok(())
    }
}

pub fn map<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    map_with(execution(), items, f)
}

pub fn map_with<T, U, F>(mode: Execution, items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    match mode {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            items.par_iter().map(f).collect()
        }
        _ => items.iter().map(f).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modes_agree() {
        let xs: Vec<u64> = (0..1000).collect();
        let a = map_with(Execution::Sequential, &xs, |x| x * x);
        let b = map_with(Execution::Parallel, &xs, |x| x * x);
        assert_eq!(a, b);
    }
}
