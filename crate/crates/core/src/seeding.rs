//! Derivation of independent random streams from one master seed.
//!
//! Every random draw in the crate comes from a `ChaCha8Rng` seeded with
//!
//! ```text
//! stream_seed = fold(splitmix64, master, [domain, index_0, index_1, ...])
//! ```
//!
//! where each step xors the next word into the running state and applies the
//! SplitMix64 finaliser. Domains separate unrelated consumers (crowd sampling,
//! examiner synthesis) so that, e.g., adding groups never perturbs the
//! synthesized responses. Streams are fixed per unit of work, which is what
//! makes parallel runs match sequential ones.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Consumer tags mixed into every derived seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Domain {
    CrowdSampling = 0x6372_6f77_6473,
    Examiner = 0x6578_616d,
    Trials = 0x7472_6961_6c73,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn derive_seed(master: u64, domain: Domain, path: &[u64]) -> u64 {
    let mut state = splitmix64(master ^ domain as u64);
    for &word in path {
        state = splitmix64(state ^ word);
    }
    state
}

pub fn stream(master: u64, domain: Domain, path: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, domain, path))
}
