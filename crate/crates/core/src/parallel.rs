use std::fmt;

use crate::error::{Error, Result};

/// Execution context: either plain serial code or a dedicated rayon pool.
///
/// A thread count of one never builds a pool.
pub enum Parallelism {
    Serial,
    Pool(rayon::ThreadPool),
}

impl Parallelism {
    pub fn new(threads: usize) -> Result<Self> {
        match threads {
            0 => Err(Error::Validation("thread count must be >= 1".into())),
            1 => Ok(Parallelism::Serial),
            t => rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .thread_name(|i| format!("pdgrass-{i}"))
                .build()
                .map(Parallelism::Pool)
                .map_err(|e| Error::ThreadPool(e.to_string())),
        }
    }

    pub fn serial() -> Self {
        Parallelism::Serial
    }

    pub fn threads(&self) -> usize {
        match self {
            Parallelism::Serial => 1,
            Parallelism::Pool(pool) => pool.current_num_threads(),
        }
    }

    pub fn is_serial(&self) -> bool {
        matches!(self, Parallelism::Serial)
    }

    /// Runs `f` inside the pool, or inline when serial.
    pub fn install<R, F>(&self, f: F) -> R
    where
        F: FnOnce() -> R + Send,
        R: Send,
    {
        match self {
            Parallelism::Serial => f(),
            Parallelism::Pool(pool) => pool.install(f),
        }
    }
}

impl fmt::Debug for Parallelism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Parallelism({})", self.threads())
    }
}

/// Number of hardware threads, falling back to 1.
pub fn available_threads() -> usize {
    std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
}
