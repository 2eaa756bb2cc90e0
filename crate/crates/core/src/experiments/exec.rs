//! Index-ordered map over trials, parallel when the `parallel` feature is on.
//!
//! Results always come back in index order, and reductions over them happen
//! sequentially in the caller, so floating-point output does not depend on
//! the thread count.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Execution {
    Serial,
    #[default]
    Parallel,
}

/// `(0..n).map(f).collect()` using the default execution mode.
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    map_indexed_with(Execution::default(), n, f)
}

#[cfg(feature = "parallel")]
pub fn map_indexed_with<T, F>(exec: Execution, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    match exec {
        Execution::Serial => (0..n).map(f).collect(),
        Execution::Parallel => (0..n).into_par_iter().map(f).collect(),
    }
}

/// Without the `parallel` feature both modes run on the calling thread.
#[cfg(not(feature = "parallel"))]
pub fn map_indexed_with<T, F>(_exec: Execution, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).map(f).collect()
}
