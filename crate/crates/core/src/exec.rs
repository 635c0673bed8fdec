//! Switch between the rayon-backed and sequential evaluation paths.
//!
//! Every parallel loop in the crate goes through [`map_indexed`], which
//! returns results in index order. Reductions are then done sequentially
//! over that vector, so outputs are bit-identical for any worker count and
//! for both execution modes.

/// How the data-parallel loops are evaluated.
///
/// Without the `parallel` feature, [`Execution::Parallel`] silently runs
/// sequentially.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Execution {
    #[default]
    Parallel,
    Sequential,
}

impl Execution {
    /// Whether this build was compiled with rayon support.
    pub const fn parallel_available() -> bool {
        cfg!(feature = "parallel")
    }
}

/// Evaluate `f(0..len)` and collect the results in index order.
pub fn map_indexed<T, F>(exec: Execution, len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            (0..len).into_par_iter().map(f).collect()
        }
        _ => (0..len).map(f).collect(),
    }
}

/// Run `f` on a dedicated pool with `workers` threads.
///
/// `None` uses the global pool. Falls back to a direct call when the crate
/// is built without the `parallel` feature.
pub fn with_workers<R, F>(workers: Option<usize>, f: F) -> R
where
    R: Send,
    F: FnOnce() -> R + Send,
{
    #[cfg(feature = "parallel")]
    if let Some(n) = workers {
        match rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build() {
            Ok(pool) => return pool.install(f),
            Err(_) => return f(),
        }
    }
    let _ = workers;
    f()
}
