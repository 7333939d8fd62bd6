//! Three-bit clock synchronization through a hierarchy of clocks.
//!
//! Level 0 is the main clock C₁ modulo T. Each deeper level `k` runs a small
//! clock modulo `2^(ℓₖ − 1)` and, next to it, displays one bit `bₖ` of the
//! level above. The message of level `k ≥ 1` is `bₖ` at bit 0 followed by
//! the clock bits; the message of level 0 is just C₁. Only the deepest level
//! is visible: two clock bits plus one data bit.
//!
//! Pulled data bits are filed into per-level slot buffers keyed by the
//! puller's own clocks. When a level's clock wraps to 0 the buffered bits of
//! the level above are popped and fed to a bitwise majority with its own
//! clock, then that clock is incremented. Missing slots are filled with the
//! agent's own bits and counted as underflow.

use rand::Rng;

use super::ell::{ell_sequence, EllSequence};
use crate::bits::{mask, maj_word, BitString};
use crate::error::{invalid, Result};
use crate::protocol::{InitValue, Protocol, Role};
use crate::rng::AgentRng;

/// Enough for every T ≤ 2^63.
pub const MAX_LEVELS: usize = 4;

/// Bits collected for one level's clock from one pull index.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Slots {
    pub bits: u64,
    pub filled: u64,
}

impl Slots {
    #[inline]
    fn set(&mut self, pos: u32, bit: bool) {
        let m = 1u64 << pos;
        self.filled |= m;
        self.bits = (self.bits & !m) | (u64::from(bit) << pos);
    }

    /// Filled bits, with the gaps taken from `own`.
    #[inline]
    fn padded(self, own: u64, width: u32) -> u64 {
        ((self.bits & self.filled) | (own & !self.filled)) & mask(width)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SynIntermediateMemory {
    clocks: [u64; MAX_LEVELS],
    slots: [[Slots; 2]; MAX_LEVELS],
    underflow: u32,
}

impl SynIntermediateMemory {
    /// C₁, C₂, …; only the first τ entries are meaningful.
    pub fn clocks(&self) -> &[u64; MAX_LEVELS] {
        &self.clocks
    }

    pub fn slots(&self) -> &[[Slots; 2]; MAX_LEVELS] {
        &self.slots
    }

    /// Padded slot positions seen so far, saturating.
    pub fn underflow(&self) -> u32 {
        self.underflow
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SynIntermediate {
    modulus: u64,
    seq: EllSequence,
    tau: usize,
    /// Clock bits per level.
    clock_bits: [u32; MAX_LEVELS],
    /// Message width per level.
    widths: [u32; MAX_LEVELS],
    /// Product of the moduli of levels 1..τ, i.e. rounds per tick of C₁.
    super_phase: u64,
}

impl SynIntermediate {
    /// `t` must be a power of two in [2, 2^63].
    pub fn new(t: u64) -> Result<Self> {
        if t > 1 << 63 {
            return Err(invalid("T", "T <= 2^63", format!("got {t}")));
        }
        let seq = ell_sequence(t)?;
        let tau = seq.tau();
        let mut clock_bits = [0; MAX_LEVELS];
        let mut widths = [0; MAX_LEVELS];
        for (k, &l) in seq.lengths().iter().enumerate() {
            clock_bits[k] = if k == 0 { l } else { l - 1 };
            widths[k] = l;
        }
        let super_phase = (1..tau).map(|k| 1u64 << clock_bits[k]).product();
        Ok(Self { modulus: t, seq, tau, clock_bits, widths, super_phase })
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn ell_sequence(&self) -> &EllSequence {
        &self.seq
    }

    pub fn tau(&self) -> usize {
        self.tau
    }

    /// Rounds per tick of C₁ once synchronized.
    pub fn super_phase(&self) -> u64 {
        self.super_phase
    }

    /// Modulus of level `k`'s clock.
    pub fn level_modulus(&self, k: usize) -> u64 {
        1 << self.clock_bits[k]
    }

    /// A memory with the given clocks and empty buffers.
    pub fn memory_from_clocks(&self, clocks: &[u64]) -> Result<SynIntermediateMemory> {
        if clocks.len() != self.tau {
            return Err(invalid("clocks", "len == tau", format!("{} clocks for tau={}", clocks.len(), self.tau)));
        }
        let mut mem = SynIntermediateMemory { clocks: [0; MAX_LEVELS], slots: Default::default(), underflow: 0 };
        for (k, &c) in clocks.iter().enumerate() {
            if c >= self.level_modulus(k) {
                return Err(invalid("clocks", "clock < level modulus", format!("level {k} clock {c}")));
            }
            mem.clocks[k] = c;
        }
        Ok(mem)
    }

    /// Mixed-radix reading of all clocks modulo T·S, which advances by one
    /// every round once synchronized.
    pub fn fine_clock(&self, mem: &SynIntermediateMemory) -> u128 {
        (0..self.tau).fold(0u128, |acc, k| acc * u128::from(self.level_modulus(k)) + u128::from(mem.clocks[k]))
    }

    /// The fine clock modulo `2^bits`. Every modulus is a power of two, so
    /// this is the low end of the concatenated clock bits.
    #[inline]
    pub fn fine_clock_low(&self, mem: &SynIntermediateMemory, bits: u32) -> u64 {
        let mut acc = 0u64;
        let mut shift = 0u32;
        for k in (0..self.tau).rev() {
            if shift >= bits {
                break;
            }
            acc |= mem.clocks[k] << shift;
            shift += self.clock_bits[k];
        }
        acc & mask(bits)
    }

    fn from_fine_clock(&self, mut value: u128) -> SynIntermediateMemory {
        let mut mem = SynIntermediateMemory { clocks: [0; MAX_LEVELS], slots: Default::default(), underflow: 0 };
        for k in (0..self.tau).rev() {
            let m = u128::from(self.level_modulus(k));
            mem.clocks[k] = (value % m) as u64;
            value /= m;
        }
        mem
    }

    /// Message of level `k`: the data bit at position 0, clock bits above;
    /// level 0 is the bare clock.
    pub fn level_message(&self, mem: &SynIntermediateMemory, k: usize) -> BitString {
        let mut msg = mem.clocks[0];
        for level in 1..=k {
            let idx = mem.clocks[level] % u64::from(self.widths[level - 1]);
            let b = (msg >> idx) & 1;
            msg = b | (mem.clocks[level] << 1);
        }
        BitString::truncating(self.widths[k], msg)
    }

    /// Level and clock-bit position that this round's pulled data bits are
    /// filed into, from the pre-round clocks. `None` on idle indices.
    fn collection_target(&self, mem: &SynIntermediateMemory) -> Option<(usize, u32)> {
        let mut k = self.tau - 1;
        loop {
            let idx = mem.clocks[k];
            if idx >= u64::from(self.widths[k - 1]) {
                return None;
            }
            if k - 1 == 0 {
                return Some((0, idx as u32));
            }
            if idx == 0 {
                k -= 1;
            } else {
                return Some((k - 1, idx as u32 - 1));
            }
        }
    }

    /// One round on raw 3-bit observations (data bit at 0, clock bits above).
    pub(crate) fn step(&self, mem: &SynIntermediateMemory, o1: u64, o2: u64) -> SynIntermediateMemory {
        let mut next = *mem;
        let top = self.tau - 1;
        if top == 0 {
            next.clocks[0] = maj_word(mem.clocks[0], o1, o2).wrapping_add(1) & mask(self.clock_bits[0]);
            return next;
        }
        let target = self.collection_target(mem);
        next.clocks[top] = maj_word(mem.clocks[top], o1 >> 1, o2 >> 1).wrapping_add(1) & mask(self.clock_bits[top]);
        if let Some((level, pos)) = target {
            next.slots[level][0].set(pos, o1 & 1 == 1);
            next.slots[level][1].set(pos, o2 & 1 == 1);
        }
        let mut k = top;
        while k >= 1 && next.clocks[k] == 0 {
            let level = k - 1;
            let width = self.clock_bits[level];
            let own = next.clocks[level];
            let [s1, s2] = next.slots[level];
            let missing = (!s1.filled & mask(width)).count_ones() + (!s2.filled & mask(width)).count_ones();
            next.underflow = next.underflow.saturating_add(missing);
            let (a, b) = (s1.padded(own, width), s2.padded(own, width));
            next.slots[level] = Default::default();
            next.clocks[level] = maj_word(own, a, b).wrapping_add(1) & mask(width);
            k -= 1;
        }
        next
    }
}

impl Protocol for SynIntermediate {
    type Memory = SynIntermediateMemory;

    fn name(&self) -> String {
        format!("syn-intermediate(T={})", self.modulus)
    }

    fn eta(&self) -> usize {
        2
    }

    fn ell(&self) -> u32 {
        self.widths[self.tau - 1]
    }

    fn bitwise_independent(&self) -> bool {
        true
    }

    /// Values are fine-clock readings, saturating at `u64::MAX`.
    fn init_domain(&self) -> u64 {
        self.modulus.saturating_mul(self.super_phase)
    }

    fn init_memory(&self, value: InitValue, _role: Role, rng: &mut AgentRng) -> Result<SynIntermediateMemory> {
        match value {
            InitValue::Value(v) => {
                if v >= self.init_domain() {
                    return Err(invalid("init", "value < T*S", format!("got {v}")));
                }
                Ok(self.from_fine_clock(u128::from(v)))
            }
            InitValue::Random => {
                let mut mem = self.from_fine_clock(0);
                for k in 0..self.tau {
                    mem.clocks[k] = rng.gen::<u64>() & mask(self.clock_bits[k]);
                    let w = mask(self.clock_bits[k]);
                    if k + 1 < self.tau {
                        for s in &mut mem.slots[k] {
                            *s = Slots { bits: rng.gen::<u64>() & w, filled: rng.gen::<u64>() & w };
                        }
                    }
                }
                Ok(mem)
            }
        }
    }

    fn visible(&self, memory: &SynIntermediateMemory) -> BitString {
        self.level_message(memory, self.tau - 1)
    }

    fn update(&self, memory: &SynIntermediateMemory, _role: Role, observed: &[BitString], _rng: &mut AgentRng) -> SynIntermediateMemory {
        self.step(memory, observed[0].value(), observed[1].value())
    }

    /// The fine clock reduced modulo T.
    fn output_clock(&self, memory: &SynIntermediateMemory) -> Option<u64> {
        Some(self.fine_clock_low(memory, self.modulus.trailing_zeros()))
    }

    fn clock_modulus(&self) -> Option<u64> {
        Some(self.modulus)
    }
}
