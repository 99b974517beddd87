//! Execution strategy for independent work items.
//!
//! With the `parallel` feature (default) work items are spread over a rayon
//! pool; without it, or with [`Execution::Sequential`], they run in order on
//! the calling thread. Results always come back in input order, and each work
//! item derives its own random streams, so output never depends on the
//! strategy or the worker count.

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// Rayon pool with `threads` workers, or the global pool when `None`.
    #[default]
    Parallel,
    ParallelWith { threads: usize },
}

impl Execution {
    pub fn with_threads(threads: usize) -> Self {
        if threads <= 1 {
            Execution::Sequential
        } else {
            Execution::ParallelWith { threads }
        }
    }

    /// `items.iter().map(f).collect()`, possibly in parallel.
    pub fn map<T, R, F>(&self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        match self {
            Execution::Sequential => items.iter().map(f).collect(),
            #[cfg(feature = "parallel")]
            Execution::Parallel => {
                use rayon::prelude::*;
                items.par_iter().map(f).collect()
            }
            #[cfg(feature = "parallel")]
            Execution::ParallelWith { threads } => {
                use rayon::prelude::*;
                match rayon::ThreadPoolBuilder::new().num_threads(*threads).build() {
                    Ok(pool) => pool.install(|| items.par_iter().map(&f).collect()),
                    Err(_) => items.iter().map(f).collect(),
                }
            }
            #[cfg(not(feature = "parallel"))]
            _ => items.iter().map(f).collect(),
        }
    }

    /// Same as [`Execution::map`] over `0..len`.
    pub fn map_range<R, F>(&self, len: usize, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(usize) -> R + Sync + Send,
    {
        let indices: Vec<usize> = (0..len).collect();
        self.map(&indices, |&i| f(i))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strategies_agree() {
        let items: Vec<u64> = (0..1000).collect();
        let f = |x: &u64| x.wrapping_mul(0x9e37_79b9).rotate_left(7);
        let reference = Execution::Sequential.map(&items, f);
        assert_eq!(Execution::Parallel.map(&items, f), reference);
        assert_eq!(Execution::with_threads(3).map(&items, f), reference);
        assert_eq!(Execution::with_threads(1), Execution::Sequential);
    }
}
