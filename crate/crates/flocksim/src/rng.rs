//! Deterministic stream derivation.
//!
//! Every random draw in a run comes from a ChaCha stream derived from
//! `(master_seed, agent_id, tag, round)`. Streams are independent per
//! agent and per purpose, so agents can run in parallel (or in any
//! order) and still produce byte-identical logs.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// FNV-1a 64-bit. Fixed constants, platform-stable; also used for
/// feature token hashing.
pub fn fnv1a64(seed: u64, bytes: &[u8]) -> u64 {
    let mut h = 0xcbf29ce484222325u64 ^ seed.wrapping_mul(0x100000001b3);
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

/// Derive the rng for one (agent, purpose, round) triple.
pub fn stream(master_seed: u64, agent_id: &str, tag: &str, round: u64) -> ChaCha12Rng {
    let mut key = [0u8; 32];
    let mut h = fnv1a64(master_seed, agent_id.as_bytes());
    h = fnv1a64(h, tag.as_bytes());
    h = fnv1a64(h, &round.to_le_bytes());
    // expand the 64-bit digest into a 256-bit key
    for (i, chunk) in key.chunks_mut(8).enumerate() {
        let part = fnv1a64(h, &(i as u64).to_le_bytes());
        chunk.copy_from_slice(&part.to_le_bytes());
    }
    ChaCha12Rng::from_seed(key)
}

/// Run-global stream (shared across agents), e.g. the latent base
/// audience vector.
pub fn global_stream(master_seed: u64, tag: &str) -> ChaCha12Rng {
    stream(master_seed, "", tag, 0)
}
