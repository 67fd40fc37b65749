//! Deterministic seed derivation.
//!
//! Reproducibility across worker counts hinges on every unit of work owning
//! a seed that depends only on the master seed and the unit's logical
//! index, never on scheduling. All derivation in this crate goes through
//! [`derive`], built on the splitmix64 finalizer:
//!
//! ```text
//! derive(base, stream) = splitmix64( base XOR splitmix64(stream + GOLDEN) )
//! ```
//!
//! where `GOLDEN = 0x9E37_79B9_7F4A_7C15`. Nested calls fan one seed out
//! into independent streams (cells of a sweep, trials within a cell, the
//! sensing and data stages of one trial) with well-mixed results even for
//! small consecutive indexes.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// The splitmix64 finalizer: a fast, well-mixed u64 -> u64 bijection.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives the seed of logical stream `stream` from `base`.
pub fn derive(base: u64, stream: u64) -> u64 {
    splitmix64(base ^ splitmix64(stream.wrapping_add(GOLDEN)))
}

// ─────────────────────────────────────────────────────────────────────────
