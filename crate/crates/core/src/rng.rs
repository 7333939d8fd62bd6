//! Counter-based random streams.
//!
//! Every (seed, round, agent, stream) tuple maps to an independent generator,
//! so a trace never depends on the order in which agents are processed.

use rand::{Rng, SeedableRng};
use rand_xoshiro::SplitMix64;

use crate::error::{Error, Result};

/// SplitMix64 keyed by a hash of the counters: seeding costs nothing.
pub type AgentRng = SplitMix64;

/// Stream used for sampling targets and the agent's own coin flips.
pub const STREAM_UPDATE: u64 = 0;
/// Stream used by Byzantine display strategies.
pub const STREAM_BYZANTINE: u64 = 1;
/// Stream used during initialization.
pub const STREAM_INIT: u64 = 2;

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes the counter tuple into a single 64-bit key.
#[inline]
pub fn stream_key(seed: u64, round: u64, agent: u64, stream: u64) -> u64 {
    let mut h = splitmix64(seed);
    h = splitmix64(h ^ round);
    h = splitmix64(h ^ agent.rotate_left(17));
    splitmix64(h ^ stream.rotate_left(41))
}

#[inline]
pub fn agent_rng(seed: u64, round: u64, agent: usize, stream: u64) -> AgentRng {
    AgentRng::seed_from_u64(stream_key(seed, round, agent as u64, stream))
}

/// Draws `eta` targets independently and uniformly from `[0, n)`, with
/// replacement. The caller's own id is a legal target.
pub fn sample_targets(rng: &mut AgentRng, n: usize, eta: usize) -> Result<Vec<usize>> {
    if n == 0 {
        return Err(Error::InvalidPopulation("n must be at least 1".into()));
    }
    if eta == 0 {
        return Err(Error::InvalidPopulation("eta must be at least 1".into()));
    }
    Ok((0..eta).map(|_| rng.gen_range(0..n)).collect())
}
