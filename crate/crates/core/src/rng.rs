//! Seeded randomness. Every random draw in the protocols goes through a
//! [`SeededRng`]; concurrent users fork their own stream by label.

use rand::{CryptoRng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};

/// ChaCha20 stream that remembers its seed so it can be forked.
#[derive(Clone, Debug)]
pub struct SeededRng {
    seed: [u8; 32],
    inner: ChaCha20Rng,
}

impl SeededRng {
    pub fn from_seed(seed: [u8; 32]) -> Self {
        SeededRng { seed, inner: ChaCha20Rng::from_seed(seed) }
    }

    pub fn from_u64(seed: u64) -> Self {
        let digest = Sha256::new()
            .chain_update(b"seeded-rng/u64")
            .chain_update(seed.to_be_bytes())
            .finalize();
        Self::from_seed(digest.into())
    }

    /// Independent child stream: seed = SHA-256(parent seed || label).
    /// Forking does not advance the parent.
    pub fn fork(&self, label: &str) -> SeededRng {
        let digest = Sha256::new()
            .chain_update(self.seed)
            .chain_update((label.len() as u64).to_be_bytes())
            .chain_update(label.as_bytes())
            .finalize();
        Self::from_seed(digest.into())
    }

    pub fn seed(&self) -> [u8; 32] {
        self.seed
    }

    /// Uniform in `0..bound`. `bound` must be nonzero.
    pub fn below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0, "empty range");
        // rejection sampling keeps the draw unbiased
        let zone = u64::MAX - (u64::MAX % bound);
        loop {
            let v = self.inner.next_u64();
            if v < zone {
                return v % bound;
            }
        }
    }

    /// Bernoulli trial with probability `num / den`.
    pub fn chance(&mut self, num: u64, den: u64) -> bool {
        self.below(den) < num
    }
}

impl RngCore for SeededRng {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.inner.fill_bytes(dest)
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> Result<(), rand::Error> {
        self.inner.try_fill_bytes(dest)
    }
}

impl CryptoRng for SeededRng {}
