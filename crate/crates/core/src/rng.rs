//! Deterministic random streams.
//!
//! A stream key is derived from the master seed and a path of operation tags;
//! replica `i` of that stream is a ChaCha8 generator seeded with the key and
//! switched to word-stream `i`. Replica results are collected in index order,
//! which makes every estimate independent of how rayon schedules the work.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RngStreams {
    seed: u64,
    key: u64,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

impl RngStreams {
    pub fn new(seed: u64) -> Self {
        RngStreams {
            seed,
            key: splitmix64(seed),
        }
    }

    /// Master seed this stream family descends from.
    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Independent sub-family for the operation or table cell named `tag`.
    pub fn fork(&self, tag: &str) -> Self {
        RngStreams {
            seed: self.seed,
            key: splitmix64(self.key ^ fnv1a(tag.as_bytes())),
        }
    }

    /// Independent sub-family for the `index`-th cell of a grid.
    pub fn fork_index(&self, index: u64) -> Self {
        RngStreams {
            seed: self.seed,
            key: splitmix64(self.key.wrapping_add(splitmix64(index ^ 0x5851_f42d_4c95_7f2d))),
        }
    }

    pub fn replica(&self, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.key);
        rng.set_stream(index);
        rng
    }

    /// Runs `f` once per replica `0..n` on the current rayon pool and returns
    /// the results ordered by replica index.
    pub fn replicate<T, F>(&self, n: u64, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(&mut ChaCha8Rng) -> T + Sync,
    {
        (0..n)
            .into_par_iter()
            .map(|i| {
                let mut rng = self.replica(i);
                f(&mut rng)
            })
            .collect()
    }
}
