//! Reproducible random streams.
//!
//! Every consumer of randomness (a particle, the Fleming-Viot controller, the
//! landscape synthesizer, the ansatz sampler) owns its own [`Stream`]. Streams
//! are ChaCha8 keystreams: the 64-bit seed selects the key and an optional
//! stream id selects one of 2^64 independent counters under that key, so the
//! generated sequence depends only on `(seed, stream id)` and is identical on
//! every platform.
//!
//! Seeds for children are produced by [`derive_seed`], a SplitMix64-style
//! finalizer over `(parent, label)`. A whole experiment therefore unfolds from
//! its master seed as a tree: master → function → replication → particle.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// Mix a parent seed with a label into a child seed.
pub fn derive_seed(parent: u64, label: u64) -> u64 {
    mix64(parent ^ mix64(label.wrapping_add(0x9E37_79B9_7F4A_7C15)))
}

/// Fold a path of labels into a seed, e.g. `derive_path(master, &[fid, rep])`.
pub fn derive_path(parent: u64, labels: &[u64]) -> u64 {
    labels.iter().fold(parent, |acc, &l| derive_seed(acc, l))
}

fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Clone, Debug)]
pub struct Stream {
    inner: ChaCha8Rng,
}

impl Stream {
    pub fn new(seed: u64) -> Self {
        Self::with_stream(seed, 0)
    }

    pub fn with_stream(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        Self { inner }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform in `[0, 1)` with 53 bits of precision.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `[lo, hi)`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Uniform integer in `0..n` (unbiased, Lemire's multiply-and-reject).
    ///
    /// Panics if `n == 0`.
    pub fn index(&mut self, n: usize) -> usize {
        assert!(n > 0, "index range must be nonempty");
        let n = n as u64;
        let threshold = n.wrapping_neg() % n;
        loop {
            let m = (self.next_u64() as u128) * (n as u128);
            if (m as u64) >= threshold {
                return (m >> 64) as usize;
            }
        }
    }

    /// Standard normal draw.
    ///
    /// Fixed transform: Box-Muller cosine branch on two consecutive uniforms,
    /// `sqrt(-2 ln(1 - u1)) * cos(2π u2)`. The sine branch is discarded so the
    /// stream carries no hidden cached state.
    pub fn standard_normal(&mut self) -> f64 {
        let u1 = 1.0 - self.next_f64();
        let u2 = self.next_f64();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    pub fn normal_vec(&mut self, dim: usize) -> Vec<f64> {
        (0..dim).map(|_| self.standard_normal()).collect()
    }

    /// `exp(N(mu, sigma²))`.
    pub fn lognormal(&mut self, mu: f64, sigma: f64) -> f64 {
        (mu + sigma * self.standard_normal()).exp()
    }
}
