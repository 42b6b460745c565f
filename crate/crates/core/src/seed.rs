//! Deterministic seed derivation for parallel Monte Carlo.
//!
//! A single root seed plus a `(scenario, replication, component)` counter
//! triple identifies every random substream in the crate. Substreams can be
//! drawn on independent workers in any order without changing results.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Component counter for latent intensity paths.
pub const COMPONENT_PATH: u64 = 1;
/// Component counter for event draws of the normal process.
pub const COMPONENT_EVENTS: u64 = 2;
/// Component counter for burst event draws.
pub const COMPONENT_BURST: u64 = 3;
/// Component counter for auxiliary draws (e.g. burst placement).
pub const COMPONENT_AUX: u64 = 4;

/// SplitMix64 finalizer; good avalanche for counter-based derivation.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive an independent substream seed from the root and a counter triple.
pub fn derive_seed(root: u64, scenario: u64, replication: u64, component: u64) -> u64 {
    let mut h = mix(root);
    h = mix(h ^ mix(scenario.wrapping_add(0x5851_f42d_4c95_7f2d)));
    h = mix(h ^ mix(replication.wrapping_add(0x1405_7b7e_f767_814f)));
    h = mix(h ^ mix(component.wrapping_add(0x2545_f491_4f6c_dd1d)));
    h
}

/// Build the crate's standard generator from a 64-bit seed.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
