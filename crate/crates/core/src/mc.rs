//! Deterministic parallel Monte Carlo plumbing.
//!
//! Replicate `i` of domain `d` always draws from the same ChaCha8 stream,
//! derived from `(master seed, d)` and selected by `set_stream(i)`. Results are
//! collected in replicate order, so any reduction done afterwards is
//! independent of the thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Stream domains used by the crate, so that e.g. finite-n and limit draws in
/// one run never share a stream.
pub mod domain {
    pub const EWENS: u64 = 1;
    pub const LIMIT: u64 = 2;
    pub const GAP: u64 = 3;
    pub const CONVERGE_FINITE: u64 = 4;
    pub const CONVERGE_LIMIT: u64 = 5;
    pub const CORRELATION: u64 = 6;
}

pub const THREADS_ENV: &str = "PERMSPEC_THREADS";

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StreamFactory {
    master: u64,
}

impl StreamFactory {
    pub fn new(master: u64) -> Self {
        Self { master }
    }

    pub fn master(&self) -> u64 {
        self.master
    }

    pub fn stream(&self, domain: u64, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(self.master ^ splitmix64(domain)));
        rng.set_stream(index);
        rng
    }

    /// Run `reps` replicates in parallel, returning results in replicate order.
    pub fn replicates<T, F>(&self, domain: u64, reps: u64, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(u64, &mut ChaCha8Rng) -> T + Sync,
    {
        (0..reps)
            .into_par_iter()
            .map(|i| {
                let mut rng = self.stream(domain, i);
                f(i, &mut rng)
            })
            .collect()
    }
}

/// Thread cap from `PERMSPEC_THREADS`, if set to a positive integer.
pub fn threads_from_env() -> Option<usize> {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
}

/// Run `f` on a dedicated pool of `threads` workers (rayon's default when
/// `None`).
pub fn with_threads<R, F>(threads: Option<usize>, f: F) -> R
where
    R: Send,
    F: FnOnce() -> R + Send,
{
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    match builder.build() {
        Ok(pool) => pool.install(f),
        Err(_) => f(),
    }
}
