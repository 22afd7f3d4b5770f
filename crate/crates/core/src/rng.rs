//! Seeded random numbers with a fixed, documented algorithm.
//!
//! Every stochastic component draws from [`SimRng`], a SplitMix64 stream
//! (Steele, Lea & Flood 2014; the `splitmix64.c` reference). The
//! generator state is the seed itself and each output is
//! `mix(state += 0x9E3779B97F4A7C15)`. Derived streams and the sampling
//! helpers below are specified bit-for-bit so that another implementation
//! reproduces the same environments and runs:
//!
//! * `next_f64`: `(next_u64 >> 11) * 2^-53`, uniform on `[0, 1)`.
//! * `below(n)`: draw `x`; reject while `x >= 2^64 - (2^64 mod n)`;
//!   return `x mod n`.
//! * [`derive_seed`]`(master, i)`: the `i`-th output (0-based) of a
//!   SplitMix64 stream seeded with `master`.

use rand_core::{Rng, SeedableRng};
use rand_xoshiro::SplitMix64;

/// Name recorded in environment files.
pub const ALGORITHM: &str = "splitmix64";

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Child seed for stream `index` under `master`, computed in O(1).
pub fn derive_seed(master: u64, index: u64) -> u64 {
    mix64(master.wrapping_add(GOLDEN_GAMMA.wrapping_mul(index.wrapping_add(1))))
}

#[derive(Debug, Clone)]
pub struct SimRng(SplitMix64);

impl SimRng {
    pub fn new(seed: u64) -> Self {
        SimRng(SplitMix64::seed_from_u64(seed))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in `0..n`. `n` must be positive.
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0, "below(0)");
        let rem = (u64::MAX % n + 1) % n;
        let limit = 0u64.wrapping_sub(rem);
        loop {
            let x = self.next_u64();
            if rem == 0 || x < limit {
                return x % n;
            }
        }
    }

    pub fn index(&mut self, n: usize) -> usize {
        self.below(n as u64) as usize
    }

    /// Draws `k` distinct indices from `0..n` (Floyd's algorithm) and
    /// returns them in ascending order.
    pub fn sample_distinct(&mut self, n: usize, k: usize) -> Vec<usize> {
        assert!(k <= n, "cannot draw {k} distinct values from {n}");
        let mut chosen = std::collections::BTreeSet::new();
        for j in (n - k)..n {
            let t = self.index(j + 1);
            if !chosen.insert(t) {
                chosen.insert(j);
            }
        }
        chosen.into_iter().collect()
    }

    /// Index drawn from a discrete distribution given by `cumulative`
    /// (nondecreasing, last entry 1): the first `i` with `u < cumulative[i]`.
    pub fn categorical(&mut self, cumulative: &[f64]) -> usize {
        let u = self.next_f64();
        cumulative
            .iter()
            .position(|&c| u < c)
            .unwrap_or(cumulative.len() - 1)
    }
}
