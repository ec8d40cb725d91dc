//! Seed derivation and the pinned random generator.
//!
//! Every random draw in the crate comes from a [`ChaCha8Rng`] seeded through
//! [`rng_for`]. Seeds are combined with [`derive_seed`], which hashes a domain
//! tag and a list of 64-bit words with SHA-256 and keeps the first eight bytes
//! (little-endian). Both steps use only integer arithmetic, so streams are
//! identical on every platform.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// The generator used for all sampling.
pub type StreamRng = ChaCha8Rng;

/// Hash a domain tag and a sequence of words into a new 64-bit seed.
pub fn derive_seed(tag: &str, parts: &[u64]) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update((tag.len() as u64).to_le_bytes());
    hasher.update(tag.as_bytes());
    for p in parts {
        hasher.update(p.to_le_bytes());
    }
    let out = hasher.finalize();
    let mut word = [0u8; 8];
    word.copy_from_slice(&out[..8]);
    u64::from_le_bytes(word)
}

/// Hash arbitrary bytes (e.g. a canonical signature) down to one word.
pub fn hash_bytes(tag: &str, bytes: &[u8]) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update((tag.len() as u64).to_le_bytes());
    hasher.update(tag.as_bytes());
    hasher.update(bytes);
    let out = hasher.finalize();
    let mut word = [0u8; 8];
    word.copy_from_slice(&out[..8]);
    u64::from_le_bytes(word)
}

/// ChaCha8 keyed by `seed` (expanded with `seed_from_u64`) on stream `stream`.
pub fn rng_for(seed: u64, stream: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
