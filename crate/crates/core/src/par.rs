//! Execution policy for the data-parallel kernels.
//!
//! Every kernel produces its output in a fixed order, so the choice of policy
//! (and the worker count) never changes a result bit. Without the `parallel`
//! feature, [`Execution::Parallel`] degrades to the sequential path.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Execution {
    Sequential,
    /// Run on rayon. `workers: None` uses the ambient pool.
    Parallel { workers: Option<usize> },
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel { workers: None }
        } else {
            Execution::Sequential
        }
    }
}

impl Execution {
    pub fn with_workers(workers: usize) -> Self {
        Execution::Parallel {
            workers: Some(workers.max(1)),
        }
    }

    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && matches!(self, Execution::Parallel { .. })
    }

    /// Evaluates `f(0..count)` and returns the results in index order.
    pub fn map_indexed<T, F>(self, count: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match self {
            Execution::Sequential => (0..count).map(f).collect(),
            Execution::Parallel { workers } => imp::map_indexed(workers, count, f),
        }
    }

    /// Calls `f(chunk_index, chunk)` on consecutive `chunk`-sized pieces of `data`.
    pub fn for_each_chunk_mut<T, F>(self, data: &mut [T], chunk: usize, f: F)
    where
        T: Send,
        F: Fn(usize, &mut [T]) + Sync + Send,
    {
        assert!(chunk > 0, "chunk size must be positive");
        match self {
            Execution::Sequential => data
                .chunks_mut(chunk)
                .enumerate()
                .for_each(|(i, c)| f(i, c)),
            Execution::Parallel { workers } => imp::for_each_chunk_mut(workers, data, chunk, f),
        }
    }
}

#[cfg(feature = "parallel")]
mod imp {
    use rayon::prelude::*;

    fn with_pool<R: Send>(workers: Option<usize>, op: impl FnOnce() -> R + Send) -> R {
        match workers {
            None => op(),
            Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
                Ok(pool) => pool.install(op),
                Err(_) => op(),
            },
        }
    }

    pub(super) fn map_indexed<T, F>(workers: Option<usize>, count: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        with_pool(workers, || (0..count).into_par_iter().map(f).collect())
    }

    pub(super) fn for_each_chunk_mut<T, F>(workers: Option<usize>, data: &mut [T], chunk: usize, f: F)
    where
        T: Send,
        F: Fn(usize, &mut [T]) + Sync + Send,
    {
        with_pool(workers, || {
            data.par_chunks_mut(chunk)
                .enumerate()
                .for_each(|(i, c)| f(i, c))
        })
    }
}

#[cfg(not(feature = "parallel"))]
mod imp {
    pub(super) fn map_indexed<T, F>(_workers: Option<usize>, count: usize, f: F) -> Vec<T>
    where
        F: Fn(usize) -> T,
    {
        (0..count).map(f).collect()
    }

    pub(super) fn for_each_chunk_mut<T, F>(_workers: Option<usize>, data: &mut [T], chunk: usize, f: F)
    where
        F: Fn(usize, &mut [T]),
    {
        data.chunks_mut(chunk).enumerate().for_each(|(i, c)| f(i, c))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_preserves_order() {
        for exec in [
            Execution::Sequential,
            Execution::Parallel { workers: None },
            Execution::with_workers(3),
        ] {
            let v = exec.map_indexed(1000, |i| i * i);
            assert_eq!(v, (0..1000).map(|i| i * i).collect::<Vec<_>>());
        }
    }

    #[test]
    fn chunk_indices_match_offsets() {
        let mut data = vec![0usize; 103];
        Execution::with_workers(4).for_each_chunk_mut(&mut data, 10, |ci, c| {
            for (k, x) in c.iter_mut().enumerate() {
                *x = ci * 10 + k;
            }
        });
        assert_eq!(data, (0..103).collect::<Vec<_>>());
    }
}
