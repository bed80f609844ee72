//! Data-parallel helpers with a sequential fallback.

/// Execution strategy for the crate's batch loops.
///
/// `Parallel` uses rayon when the `parallel` feature is compiled in and
/// silently degrades to `Sequential` otherwise. Results never depend on
/// the choice: every parallel loop is split into fixed, index-addressed
/// pieces and merged in index order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Exec {
    Sequential,
    Parallel,
}

impl Default for Exec {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Exec::Parallel
        } else {
            Exec::Sequential
        }
    }
}

/// Evaluates `f(i)` for `i in 0..n` and collects the results in index order.
pub(crate) fn map_indexed<T, F>(exec: Exec, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Exec::Parallel => {
            use rayon::prelude::*;
            (0..n).into_par_iter().map(f).collect()
        }
        _ => (0..n).map(f).collect(),
    }
}

/// True when `f(i)` holds for every `i in 0..n`; stops early on the first failure.
pub(crate) fn all_indexed<F>(exec: Exec, n: usize, f: F) -> bool
where
    F: Fn(usize) -> bool + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Exec::Parallel => {
            use rayon::prelude::*;
            (0..n).into_par_iter().all(f)
        }
        _ => (0..n).all(f),
    }
}
