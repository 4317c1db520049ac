//! Sequential / data-parallel execution of independent work blocks.
//!
//! Work is always split into the same fixed blocks regardless of mode, so any
//! per-block seeding and the final reduction give identical results whether the
//! blocks run on one thread or many.

/// How data-parallel loops are executed.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// Uses rayon when the `parallel` feature is enabled, sequential otherwise.
    #[default]
    Parallel,
}

impl Execution {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

/// Maps `0..n` through `f` and collects the results in index order.
pub fn map_collect<T, F>(n: usize, exec: Execution, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        use rayon::prelude::*;
        return (0..n).into_par_iter().map(f).collect();
    }
    let _ = exec;
    (0..n).map(f).collect()
}

/// Maps `0..n` through `f` and folds with an associative, commutative `reduce`.
pub fn map_reduce<T, F, I, R>(n: usize, exec: Execution, identity: I, f: F, reduce: R) -> T
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
    I: Fn() -> T + Sync + Send,
    R: Fn(T, T) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        use rayon::prelude::*;
        return (0..n).into_par_iter().map(f).reduce(identity, reduce);
    }
    let _ = exec;
    (0..n).map(f).fold(identity(), reduce)
}
