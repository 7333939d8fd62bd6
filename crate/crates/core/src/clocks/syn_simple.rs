//! Bitwise-majority clock followed by an increment.

use rand::Rng;

use crate::bits::{bitwise_majority, mask, maj_word, BitString};
use crate::error::{invalid, Error, Result};
use crate::protocol::{InitValue, Protocol, Role};
use crate::rng::AgentRng;

/// One Syn-Simple step on raw clock strings: bitwise majority, then +1
/// modulo `2^width`.
pub fn syn_simple_update(own: BitString, pulled: [BitString; 2]) -> Result<BitString> {
    let maj = bitwise_majority(own, pulled[0], pulled[1])?;
    Ok(BitString::truncating(own.width(), maj.value().wrapping_add(1)))
}

/// Clock synchronization modulo a power of two, ℓ = log₂ T.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SynSimple {
    modulus: u64,
    bits: u32,
    increment: bool,
}

impl SynSimple {
    pub fn new(t: u64) -> Result<Self> {
        if t < 2 || !t.is_power_of_two() || t > 1 << 63 {
            return Err(invalid("T", "power_of_two", format!("Syn-Simple needs T a power of 2 in [2, 2^63], got {t}")));
        }
        Ok(Self { modulus: t, bits: t.trailing_zeros(), increment: true })
    }

    /// The variant that skips the increment, i.e. plain bitwise
    /// maj-consensus on the clock bits.
    pub fn frozen(t: u64) -> Result<Self> {
        Ok(Self { increment: false, ..Self::new(t)? })
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    #[inline]
    pub(crate) fn step(&self, own: u64, a: u64, b: u64) -> u64 {
        maj_word(own, a, b).wrapping_add(u64::from(self.increment)) & mask(self.bits)
    }
}

impl Protocol for SynSimple {
    type Memory = u64;

    fn name(&self) -> String {
        if self.increment {
            format!("syn-simple(T={})", self.modulus)
        } else {
            format!("syn-simple-frozen(T={})", self.modulus)
        }
    }

    fn eta(&self) -> usize {
        2
    }

    fn ell(&self) -> u32 {
        self.bits
    }

    fn bitwise_independent(&self) -> bool {
        true
    }

    fn init_domain(&self) -> u64 {
        self.modulus
    }

    fn init_memory(&self, value: InitValue, _role: Role, rng: &mut AgentRng) -> Result<u64> {
        match value {
            InitValue::Random => Ok(rng.gen::<u64>() & mask(self.bits)),
            InitValue::Value(v) if v < self.modulus => Ok(v),
            InitValue::Value(v) => Err(Error::ValueOutOfRange { value: v, width: self.bits }),
        }
    }

    fn visible(&self, memory: &u64) -> BitString {
        BitString::truncating(self.bits, *memory)
    }

    fn update(&self, memory: &u64, _role: Role, observed: &[BitString], _rng: &mut AgentRng) -> u64 {
        self.step(*memory, observed[0].value(), observed[1].value())
    }

    fn output_clock(&self, memory: &u64) -> Option<u64> {
        Some(*memory)
    }

    fn clock_modulus(&self) -> Option<u64> {
        Some(self.modulus)
    }
}
