//! Deterministic seed derivation.
//!
//! Every stochastic component draws from its own ChaCha stream whose seed is
//! mixed from the scenario seed plus purpose and step tags. Streams are
//! therefore independent of each other and of evaluation order: triggering a
//! resample at step k does not shift the sensor noise at step k+1, and
//! batch cells can run in parallel without perturbing each other.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// splitmix64 finalizer; good avalanche for cheap seed mixing.
#[inline]
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Folds a sequence of tags into one seed.
pub fn mix(parts: &[u64]) -> u64 {
    let mut acc = 0x51_7c_c1_b7_27_22_0a_95u64;
    for &p in parts {
        acc = splitmix64(acc ^ splitmix64(p));
    }
    acc
}

/// Purpose tags for per-episode streams.
pub mod tag {
    pub const PRIOR: u64 = 0x01;
    pub const SENSOR: u64 = 0x02;
    pub const PLANNER: u64 = 0x03;
    pub const RESAMPLE: u64 = 0x04;
    pub const MCMC: u64 = 0x05;
    pub const CELL: u64 = 0x06;
}

/// Per-episode stream factory.
#[derive(Debug, Clone, Copy)]
pub struct EpisodeSeeds {
    base: u64,
}

impl EpisodeSeeds {
    pub fn new(base: u64) -> Self {
        Self { base }
    }

    fn stream(&self, parts: &[u64]) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(mix(parts))
    }

    pub fn prior(&self) -> ChaCha8Rng {
        self.stream(&[self.base, tag::PRIOR])
    }

    pub fn sensor(&self, step: usize) -> ChaCha8Rng {
        self.stream(&[self.base, tag::SENSOR, step as u64])
    }

    pub fn planner(&self, step: usize) -> ChaCha8Rng {
        self.stream(&[self.base, tag::PLANNER, step as u64])
    }

    pub fn resample(&self, step: usize) -> ChaCha8Rng {
        self.stream(&[self.base, tag::RESAMPLE, step as u64])
    }

    pub fn mcmc(&self, step: usize, particle: usize) -> ChaCha8Rng {
        self.stream(&[self.base, tag::MCMC, step as u64, particle as u64])
    }
}

/// Seed for one (scenario, strategy, repeat) batch cell.
pub fn cell_seed(base_seed: u64, scenario_idx: usize, strategy_idx: usize, repeat: usize) -> u64 {
    mix(&[
        base_seed,
        tag::CELL,
        scenario_idx as u64,
        strategy_idx as u64,
        repeat as u64,
    ])
}
