//! Data-parallel execution over independent work items.
//!
//! Trajectory ensembles, corpus sweeps and repeated heuristic runs are all
//! embarrassingly parallel. They go through [`Backend::map`], which fans out
//! on rayon when the `parallel` feature is enabled and runs a plain loop
//! otherwise. Results always come back in index order, so any reduction the
//! caller performs afterwards is independent of scheduling.

/// Environment variable read by [`init_threads_from_env`].
pub const THREADS_ENV: &str = "UDMIS_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Backend {
    Sequential,
    #[default]
    Parallel,
}

impl Backend {
    /// Whether this backend will actually fan out in the current build.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Backend::Parallel
    }

    /// Evaluate `f(0..len)` and return results in index order.
    pub fn map<R, F>(self, len: usize, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(usize) -> R + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self == Backend::Parallel {
            use rayon::prelude::*;
            return (0..len).into_par_iter().map(f).collect();
        }
        (0..len).map(f).collect()
    }
}

/// Size the global rayon pool from `UDMIS_THREADS`, if set.
///
/// Returns the thread count that was requested. A pool that was already
/// initialised is left alone.
pub fn init_threads_from_env() -> Option<usize> {
    let threads = std::env::var(THREADS_ENV)
        .ok()?
        .trim()
        .parse::<usize>()
        .ok()?;
    #[cfg(feature = "parallel")]
    {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    Some(threads)
}

/// Pairwise summation of equally sized vectors, in index order.
///
/// The reduction tree depends only on `parts.len()`, never on thread timing.
pub fn pairwise_sum(parts: &[Vec<f64>]) -> Vec<f64> {
    match parts.len() {
        0 => Vec::new(),
        1 => parts[0].clone(),
        len => {
            let (lo, hi) = parts.split_at(len / 2);
            let mut acc = pairwise_sum(lo);
            for (a, b) in acc.iter_mut().zip(pairwise_sum(hi)) {
                *a += b;
            }
            acc
        }
    }
}

/// Derive the seed for work item `index` from a master seed (SplitMix64).
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
