//! Stabilizing binary consensus by 3-majority.

use crate::bits::{maj3, BitString};
use crate::error::{Error, Result};
use crate::protocol::{InitValue, Protocol, Role};
use crate::rng::AgentRng;
use rand::Rng;

/// One maj-consensus step: the majority of the own opinion and two pulled ones.
#[inline]
pub fn maj_consensus_update(own: bool, pulled: [bool; 2]) -> bool {
    maj3(own, pulled[0], pulled[1])
}

/// maj-consensus: η = 2, ℓ = 1, the opinion is the whole visible part.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MajConsensus;

impl Protocol for MajConsensus {
    type Memory = bool;

    fn name(&self) -> String {
        "maj-consensus".into()
    }

    fn eta(&self) -> usize {
        2
    }

    fn ell(&self) -> u32 {
        1
    }

    fn bitwise_independent(&self) -> bool {
        true
    }

    fn init_domain(&self) -> u64 {
        2
    }

    fn init_memory(&self, value: InitValue, _role: Role, rng: &mut AgentRng) -> Result<bool> {
        match value {
            InitValue::Random => Ok(rng.gen()),
            InitValue::Value(v @ (0 | 1)) => Ok(v == 1),
            InitValue::Value(v) => Err(Error::ValueOutOfRange { value: v, width: 1 }),
        }
    }

    fn visible(&self, memory: &bool) -> BitString {
        BitString::truncating(1, u64::from(*memory))
    }

    fn update(&self, memory: &bool, _role: Role, observed: &[BitString], _rng: &mut AgentRng) -> bool {
        maj_consensus_update(*memory, [observed[0].bit(0), observed[1].bit(0)])
    }

    fn output_bit(&self, memory: &bool) -> Option<bool> {
        Some(*memory)
    }
}
