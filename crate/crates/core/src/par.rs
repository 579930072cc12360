//! Execution strategy for the data-parallel inner loops.
//!
//! With the `parallel` feature (on by default) the hot scans run on the
//! rayon global pool; without it every helper degrades to a plain iterator.
//! Results are always collected in input order so output is identical
//! across strategies.

use std::ops::Range;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Exec {
    Sequential,
    #[cfg(feature = "parallel")]
    Parallel,
}

#[allow(clippy::derivable_impls)]
impl Default for Exec {
    fn default() -> Self {
        #[cfg(feature = "parallel")]
        {
            Exec::Parallel
        }
        #[cfg(not(feature = "parallel"))]
        {
            Exec::Sequential
        }
    }
}

impl Exec {
    pub fn map_range<R, F>(self, range: Range<usize>, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(usize) -> R + Sync + Send,
    {
        match self {
            Exec::Sequential => range.map(f).collect(),
            #[cfg(feature = "parallel")]
            Exec::Parallel => range.into_par_iter().map(f).collect(),
        }
    }

    pub fn map_slice<T, R, F>(self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        match self {
            Exec::Sequential => items.iter().map(f).collect(),
            #[cfg(feature = "parallel")]
            Exec::Parallel => items.par_iter().map(f).collect(),
        }
    }

    /// True iff `pred` holds for every index.
    pub fn all_range<F>(self, range: Range<usize>, pred: F) -> bool
    where
        F: Fn(usize) -> bool + Sync + Send,
    {
        match self {
            Exec::Sequential => range.into_iter().all(pred),
            #[cfg(feature = "parallel")]
            Exec::Parallel => range.into_par_iter().all(pred),
        }
    }

    /// Smallest index in `range` satisfying `pred`.
    pub fn find_first<F>(self, range: Range<usize>, pred: F) -> Option<usize>
    where
        F: Fn(usize) -> bool + Sync + Send,
    {
        match self {
            Exec::Sequential => range.into_iter().find(|&i| pred(i)),
            #[cfg(feature = "parallel")]
            Exec::Parallel => range.into_par_iter().find_first(|&i| pred(i)),
        }
    }

    /// Maximum of `f` over `range`; `None` on an empty range.
    pub fn max_f64<F>(self, range: Range<usize>, f: F) -> Option<f64>
    where
        F: Fn(usize) -> f64 + Sync + Send,
    {
        let fold = |a: Option<f64>, b: f64| Some(a.map_or(b, |a| a.max(b)));
        match self {
            Exec::Sequential => range.into_iter().map(f).fold(None, fold),
            #[cfg(feature = "parallel")]
            Exec::Parallel => range.into_par_iter().map(f).map(Some).reduce(
                || None,
                |a, b| match (a, b) {
                    (Some(a), Some(b)) => Some(a.max(b)),
                    (a, None) => a,
                    (None, b) => b,
                },
            ),
        }
    }
}
