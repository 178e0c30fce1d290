//! Counter-based random streams.
//!
//! Every stream is a ChaCha8 keystream keyed by `(seed, domain)` and selected by
//! a 64-bit stream index, so the numbers consumed by task `i` depend only on
//! `(seed, domain, i)` and never on scheduling.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Domain tags separating the independent uses of one master seed.
pub mod domain {
    pub const RESAMPLE: u64 = 0x5245_5341_4d50_4c45;
    pub const EM_INIT: u64 = 0x454d_5f49_4e49_5400;
    pub const MC_SAMPLE: u64 = 0x4d43_5f53_414d_504c;
    pub const MC_BOOT: u64 = 0x4d43_5f42_4f4f_5400;
    pub const DRAW: u64 = 0x4452_4157_0000_0000;
    pub const REPLICATE_EM: u64 = 0x5245_505f_454d_0000;
}

/// Returns the generator for stream `index` of `(seed, domain)`.
pub fn stream(seed: u64, domain: u64, index: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&domain.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(index);
    rng
}

/// A 64-bit seed derived from stream `index` of `(seed, domain)`.
pub fn derive_seed(seed: u64, domain: u64, index: u64) -> u64 {
    stream(seed, domain, index).next_u64()
}
