//! Independent oracles shared by the integration tests and the acceptance run.
#![allow(dead_code, clippy::needless_range_loop)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use semimarkov::{JumpPath, State};

/// Kolmogorov-Smirnov statistic `sqrt(n) sup |F_n - F|`.
pub fn ks_statistic(samples: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    let mut d: f64 = 0.0;
    for (i, x) in samples.iter().enumerate() {
        let f = cdf(*x);
        d = d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n);
    }
    d * n.sqrt()
}

/// Asymptotic KS critical value at level 0.001.
pub const KS_CRITICAL: f64 = 1.949;

/// Grid unit, a power of two, so grid times are exact in binary.
pub const UNIT: f64 = 1.0 / 16.0;

/// Path on `[0, L · UNIT]` with jumps at integer multiples of [`UNIT`].
#[derive(Clone, Debug)]
pub struct GridPath {
    pub len: i64,
    pub values: Vec<f64>,
    /// Strictly increasing jump positions in `1..len`, in units.
    pub jumps: Vec<i64>,
}

impl GridPath {
    /// Values on the half-integer lattice `{-2, ..., 2}`, so ties are common.
    pub fn random(rng: &mut ChaCha8Rng, len: i64, max_jumps: usize) -> Self {
        Self::random_with(rng, len, max_jumps, |r| f64::from(r.random_range(-4i32..=4)) * 0.5)
    }

    pub fn random_with(
        rng: &mut ChaCha8Rng,
        len: i64,
        max_jumps: usize,
        mut value: impl FnMut(&mut ChaCha8Rng) -> f64,
    ) -> Self {
        let k = rng.random_range(0..=max_jumps.min(len as usize - 1));
        let mut jumps: Vec<i64> = (1..len).collect();
        for i in 0..k {
            let j = rng.random_range(i..jumps.len());
            jumps.swap(i, j);
        }
        jumps.truncate(k);
        jumps.sort_unstable();
        let values = (0..=k).map(|_| value(rng)).collect();
        GridPath { len, values, jumps }
    }

    pub fn horizon(&self) -> f64 {
        self.len as f64 * UNIT
    }

    pub fn to_path(&self) -> JumpPath {
        let jumps = self
            .jumps
            .iter()
            .zip(&self.values[1..])
            .map(|(j, v)| (*j as f64 * UNIT, State::scalar(*v)))
            .collect();
        JumpPath::new(State::scalar(self.values[0]), jumps, self.horizon()).unwrap()
    }

    /// Index of the value the path takes at sub-grid position `p` (units of `1 / k`).
    fn index_at(&self, p: i64, k: i64) -> usize {
        self.jumps.iter().take_while(|j| **j * k <= p).count()
    }

    /// Index of the left limit at `p`.
    fn index_before(&self, p: i64, k: i64) -> usize {
        self.jumps.iter().take_while(|j| **j * k < p).count()
    }
}

/// `w'(d · UNIT; T)` by dynamic programming over every breakpoint on the
/// sub-grid of mesh `UNIT / k`, `k = len + 2`.
///
/// A chain of breakpoints forced just past `jump + m δ` needs an offset per
/// link; with at most `len + 1` links the sub-grid has room for all of them,
/// so the grid infimum equals the real one.
pub fn grid_w_prime(path: &GridPath, d: i64) -> f64 {
    let k = path.len + 2;
    let n = path.len * k;
    let gap = d * k;
    let at: Vec<usize> = (0..=n).map(|p| path.index_at(p, k)).collect();
    let before: Vec<usize> = (0..=n).map(|p| path.index_before(p, k)).collect();
    let m = path.values.len();
    let mut diam = vec![vec![0.0; m]; m];
    for lo in 0..m {
        let (mut min, mut max) = (path.values[lo], path.values[lo]);
        for hi in lo..m {
            min = min.min(path.values[hi]);
            max = max.max(path.values[hi]);
            diam[lo][hi] = max - min;
        }
    }
    let osc = |p: i64, c: i64| diam[at[p as usize]][before[c as usize]];
    let mut best = vec![f64::INFINITY; n as usize + 1];
    best[0] = 0.0;
    for c in 1..n {
        let mut b = f64::INFINITY;
        for p in 0..c - gap {
            if best[p as usize].is_finite() {
                b = b.min(best[p as usize].max(osc(p, c)));
            }
        }
        best[c as usize] = b;
    }
    (0..n)
        .filter(|p| best[*p as usize].is_finite())
        .map(|p| best[p as usize].max(osc(p, n)))
        .fold(f64::INFINITY, f64::min)
}

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
