//! Data-parallel execution with a sequential fallback.
//!
//! Results are always returned in index order, so reductions performed by the
//! caller do not depend on the number of threads.

use crate::error::{Error, Result};

#[derive(Debug)]
pub struct Executor {
    #[cfg(feature = "parallel")]
    pool: Option<rayon::ThreadPool>,
    threads: usize,
}

impl Default for Executor {
    /// Uses every available core when the `parallel` feature is on.
    fn default() -> Self {
        #[cfg(feature = "parallel")]
        {
            Self { pool: None, threads: rayon::current_num_threads() }
        }
        #[cfg(not(feature = "parallel"))]
        {
            Self::sequential()
        }
    }
}

impl Executor {
    pub fn sequential() -> Self {
        Self {
            #[cfg(feature = "parallel")]
            pool: None,
            threads: 1,
        }
    }

    /// Executor with `chains` worker threads; `1` runs inline.
    pub fn with_threads(chains: usize) -> Result<Self> {
        if chains == 0 {
            return Err(Error::Invalid("chain count must be positive".into()));
        }
        if chains == 1 {
            return Ok(Self::sequential());
        }
        #[cfg(feature = "parallel")]
        {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(chains)
                .build()
                .map_err(|e| Error::Invalid(format!("thread pool: {e}")))?;
            Ok(Self { pool: Some(pool), threads: chains })
        }
        #[cfg(not(feature = "parallel"))]
        {
            Ok(Self::sequential())
        }
    }

    pub fn threads(&self) -> usize {
        self.threads
    }

    /// `(0..n).map(f)` collected in order.
    pub fn map<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        if self.threads == 1 {
            return (0..n).map(f).collect();
        }
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            let run = || (0..n).into_par_iter().map(&f).collect();
            match &self.pool {
                Some(pool) => pool.install(run),
                None => run(),
            }
        }
        #[cfg(not(feature = "parallel"))]
        {
            (0..n).map(f).collect()
        }
    }

    /// `items.iter().map(f)` collected in order.
    pub fn map_slice<A, T, F>(&self, items: &[A], f: F) -> Vec<T>
    where
        A: Sync,
        T: Send,
        F: Fn(&A) -> T + Sync + Send,
    {
        self.map(items.len(), |i| f(&items[i]))
    }

    /// Applies `f` to chunks of `chunk` consecutive indices and concatenates
    /// the results in order.
    pub fn map_chunks<T, F>(&self, n: usize, chunk: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(std::ops::Range<usize>) -> Vec<T> + Sync + Send,
    {
        let blocks = n.div_ceil(chunk.max(1));
        self.map(blocks, |b| f(b * chunk..((b + 1) * chunk).min(n))).into_iter().flatten().collect()
    }
}
