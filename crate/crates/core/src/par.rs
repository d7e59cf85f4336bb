//! Execution strategy for data-parallel loops.
//!
//! With the `parallel` feature the parallel strategy runs on rayon; without
//! it every strategy runs sequentially. Results are always collected in
//! input order so reductions stay deterministic.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exec {
    Sequential,
    Parallel,
}

impl Default for Exec {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Self::Parallel
        } else {
            Self::Sequential
        }
    }
}

impl Exec {
    /// `items.iter().map(f).collect()`, possibly in parallel.
    pub fn map<T, R, F>(self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Self::Parallel => items.par_iter().map(f).collect(),
            _ => items.iter().map(f).collect(),
        }
    }

    /// `(0..n).map(f).collect()`, possibly in parallel.
    pub fn map_range<R, F>(self, n: usize, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(usize) -> R + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Self::Parallel => (0..n).into_par_iter().map(f).collect(),
            _ => (0..n).map(f).collect(),
        }
    }

    /// `f(a, b)` for every aligned pair with exclusive access to `a`, possibly in parallel.
    pub fn zip_mut<A, B, R, F>(self, a: &mut [A], b: &[B], f: F) -> Vec<R>
    where
        A: Send,
        B: Sync,
        R: Send,
        F: Fn(&mut A, &B) -> R + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Self::Parallel => a.par_iter_mut().zip(b.par_iter()).map(|(x, y)| f(x, y)).collect(),
            _ => a.iter_mut().zip(b).map(|(x, y)| f(x, y)).collect(),
        }
    }
}
