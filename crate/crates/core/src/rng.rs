//! Reproducible random streams and work sharding.
//!
//! Every randomized routine takes a [`SeedPlan`]: a master seed plus a worker count. Worker `k`
//! draws from the ChaCha stream `k` of the master seed, and a job of `total` draws is split into
//! contiguous shards in worker order, so `(seed, workers, job)` fixes the output exactly.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub type StreamRng = ChaCha8Rng;

/// Generator for stream `stream` of `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedPlan {
    pub seed: u64,
    pub workers: usize,
}

impl SeedPlan {
    pub fn new(seed: u64, workers: usize) -> Self {
        SeedPlan {
            seed,
            workers: workers.max(1),
        }
    }

    /// Single worker; handy in tests.
    pub fn serial(seed: u64) -> Self {
        Self::new(seed, 1)
    }

    /// A plan with an independent seed, for a sub-job identified by `tag`.
    pub fn derive(&self, tag: u64) -> SeedPlan {
        let mut rng = stream_rng(self.seed, u64::MAX - tag);
        SeedPlan::new(rand::Rng::random(&mut rng), self.workers)
    }

    /// Shard sizes for `total` draws: the first `total % workers` shards get one extra.
    pub fn shards(&self, total: u64) -> Vec<u64> {
        let w = self.workers as u64;
        (0..w)
            .map(|k| total / w + u64::from(k < total % w))
            .collect()
    }

    /// Runs `job(rng, count)` on every shard in parallel and folds the results in shard order.
    pub fn map_reduce<A, F, M>(&self, total: u64, job: F, merge: M) -> A
    where
        A: Send,
        F: Fn(&mut StreamRng, u64) -> A + Sync,
        M: Fn(A, A) -> A,
    {
        let parts: Vec<A> = self
            .shards(total)
            .into_par_iter()
            .enumerate()
            .map(|(k, count)| job(&mut stream_rng(self.seed, k as u64), count))
            .collect();
        let mut it = parts.into_iter();
        let first = it.next().expect("at least one worker");
        it.fold(first, merge)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn shards_cover_total() {
        let plan = SeedPlan::new(1, 3);
        assert_eq!(plan.shards(10), vec![4, 3, 3]);
        assert_eq!(plan.shards(2), vec![1, 1, 0]);
    }

    #[test]
    fn streams_differ_and_repeat() {
        let a: u64 = stream_rng(7, 0).random();
        let b: u64 = stream_rng(7, 1).random();
        assert_ne!(a, b);
        assert_eq!(a, stream_rng(7, 0).random::<u64>());
    }

    #[test]
    fn map_reduce_is_deterministic() {
        let plan = SeedPlan::new(42, 4);
        let run = || {
            plan.map_reduce(
                1000,
                |rng, c| (0..c).map(|_| rng.random_range(0..10u64)).sum::<u64>(),
                |a, b| a + b,
            )
        };
        assert_eq!(run(), run());
    }
}
