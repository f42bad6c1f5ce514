//! Randomness plumbing.
//!
//! Every stochastic operation in the engine and the protocol handlers draws
//! from an explicit [`RandomSource`]; nothing keeps hidden global randomness.
//! Two implementations exist: [`RngStream`] (a seeded, splittable PRNG used
//! for Monte Carlo trials) and the replaying enumeration source in
//! [`crate::analysis`], which visits every discrete branch instead of
//! sampling one.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Branches with probability below this are treated as impossible and are
/// never sampled or enumerated.
pub const MIN_BRANCH_PROB: f64 = 1e-12;

/// A sink for discrete random choices.
pub trait RandomSource {
    /// Pick index `i` with probability `probs[i]`. `probs` must be
    /// nonnegative and sum to 1 within numerical tolerance.
    fn choose(&mut self, probs: &[f64]) -> usize;

    /// A fair random bit.
    fn bit(&mut self) -> bool {
        self.choose(&[0.5, 0.5]) == 1
    }

    /// True when this source enumerates branches exhaustively rather than
    /// sampling. Handlers may coalesce outcome-irrelevant draws in that case.
    fn is_enumerating(&self) -> bool {
        false
    }
}

/// Seeded, splittable stream of pseudo-randomness.
///
/// Streams derived via [`RngStream::split`] or [`RngStream::for_trial`] are
/// statistically independent and reproducible from the root seed.
#[derive(Clone, Debug)]
pub struct RngStream {
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn from_seed(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Derive the substream for one Monte Carlo trial.
    pub fn for_trial(seed: u64, index: u64) -> Self {
        Self::from_seed(splitmix64(seed ^ splitmix64(index)))
    }

    /// Split off an independent child stream.
    pub fn split(&mut self) -> Self {
        Self::from_seed(self.rng.next_u64())
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform draw from [0, 1).
    pub fn uniform(&mut self) -> f64 {
        // 53 random mantissa bits.
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

impl RandomSource for RngStream {
    fn choose(&mut self, probs: &[f64]) -> usize {
        let u = self.uniform();
        let mut acc = 0.0;
        let mut last_live = None;
        for (i, &p) in probs.iter().enumerate() {
            if p < MIN_BRANCH_PROB {
                continue;
            }
            last_live = Some(i);
            acc += p;
            if u < acc {
                return i;
            }
        }
        // Rounding left a sliver of probability mass; assign it to the last
        // live branch.
        last_live.expect("choose() called with all-zero probabilities")
    }
}

/// SplitMix64 finalizer; used to derive independent seeds.
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
    x ^ (x >> 31)
}
