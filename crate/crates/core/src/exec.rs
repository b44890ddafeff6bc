//! Sample fan-out.
//!
//! Indices `0..count` are split into contiguous shards. Each shard runs
//! sequentially and the shards are concatenated in index order, so the output
//! never depends on the number of workers. With the `parallel` feature the
//! shards run on a rayon pool; without it everything runs on the caller's
//! thread.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backend {
    Sequential,
    #[cfg(feature = "parallel")]
    Rayon,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Executor {
    workers: usize,
    backend: Backend,
}

impl Default for Executor {
    fn default() -> Self {
        Executor::new(1)
    }
}

impl Executor {
    /// `workers == 0` means one per available core.
    pub fn new(workers: usize) -> Self {
        let workers = if workers == 0 {
            std::thread::available_parallelism().map_or(1, |n| n.get())
        } else {
            workers
        };
        #[cfg(feature = "parallel")]
        let backend = if workers > 1 {
            Backend::Rayon
        } else {
            Backend::Sequential
        };
        #[cfg(not(feature = "parallel"))]
        let backend = Backend::Sequential;
        Executor { workers, backend }
    }

    pub fn sequential() -> Self {
        Executor {
            workers: 1,
            backend: Backend::Sequential,
        }
    }

    pub fn workers(&self) -> usize {
        self.workers
    }

    pub fn backend(&self) -> Backend {
        self.backend
    }

    /// `f(k)` for every `k < count`, in index order.
    pub fn map<T, F>(&self, count: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match self.backend {
            Backend::Sequential => (0..count).map(f).collect(),
            #[cfg(feature = "parallel")]
            Backend::Rayon => self.map_rayon(count, f),
        }
    }

    #[cfg(feature = "parallel")]
    fn map_rayon<T, F>(&self, count: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        use rayon::prelude::*;

        let shards = (self.workers * 4).min(count.max(1));
        let bounds: Vec<(usize, usize)> = (0..shards)
            .map(|s| (s * count / shards, (s + 1) * count / shards))
            .collect();
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.workers)
            .build()
            .expect("thread pool");
        let parts: Vec<Vec<T>> = pool.install(|| bounds.par_iter().map(|&(a, b)| (a..b).map(&f).collect()).collect());
        parts.into_iter().flatten().collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_preserved() {
        for w in [1, 2, 3, 7] {
            let out = Executor::new(w).map(1001, |k| k * k);
            assert_eq!(out, (0..1001).map(|k| k * k).collect::<Vec<_>>());
        }
        assert!(Executor::new(4).map(0, |k| k).is_empty());
    }
}
