//! Deterministic per-trial random streams.
//!
//! Trial `i` of a run seeded with `master_seed` uses the 64-bit seed
//! `splitmix64(master_seed ^ splitmix64(i))`. That seed keys a ChaCha8
//! generator, and independent concerns inside a trial (channel draws,
//! scheduler draws, coding coefficients) read from distinct ChaCha streams
//! of the same key. Trajectories therefore depend only on `(master_seed, i)`
//! and never on execution order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// One step of the SplitMix64 output function.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stream selector within a trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Channel = 0,
    Scheduler = 1,
    Coding = 2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngSpec {
    pub master_seed: u64,
}

impl RngSpec {
    pub fn new(master_seed: u64) -> Self {
        Self { master_seed }
    }

    pub fn trial_seed(&self, trial: u64) -> u64 {
        splitmix64(self.master_seed ^ splitmix64(trial))
    }

    pub fn stream(&self, trial: u64, stream: Stream) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.trial_seed(trial));
        rng.set_stream(stream as u64);
        rng
    }
}
