//! Seeded randomness. Every stochastic step in the crate draws from a
//! [`SimRng`] constructed here; there is no other entropy source.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// Platform-independent, reproducible generator.
pub type SimRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derives an independent stream from `(seed, label)`, e.g. one per method
/// in a comparison, so runs never share generator state.
pub fn derive_seed(seed: u64, label: &str) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    hasher.update(label.as_bytes());
    let digest = hasher.finalize();
    let mut bytes = [0u8; 8];
    bytes.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(bytes)
}

pub fn derived(seed: u64, label: &str) -> SimRng {
    seeded(derive_seed(seed, label))
}
