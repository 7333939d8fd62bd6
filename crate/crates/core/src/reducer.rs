//! Message reduction: running a bitwise-independent PULL(η, ℓ) protocol
//! with two pulls and ⌈log₂((η/2)·ℓ)⌉ + 1 visible bits.
//!
//! The emulating agent keeps a small Syn-Simple phase clock C and shows one
//! bit of its hidden message per round, the bit at `C mod ℓ`. Round `z` of a
//! phase, with `z = j·ℓ + i`, collects bit `i` of messages `2j` and `2j + 1`
//! from the two pulls. When C wraps to 0 the inner protocol takes one step
//! on the collected messages and the hidden message is refreshed.

use rand::Rng;

use crate::bits::{mask, maj_word, BitString};
use crate::engine::{ceil_log2, Engine, Population, SamplingMode};
use crate::error::{invalid, Error, Result};
use crate::protocol::{InitValue, Protocol, Role};
use crate::rng::AgentRng;

/// `(phase_len, subphase_count, subphase_len)` for an even `eta`.
pub fn phase_structure(eta: usize, ell: u32) -> Result<(u64, usize, u32)> {
    if eta == 0 || eta % 2 != 0 {
        return Err(invalid("eta", "eta even", format!("got {eta}")));
    }
    if ell == 0 {
        return Err(invalid("ell", "ell >= 1", "got 0"));
    }
    Ok(((eta as u64 / 2) * u64::from(ell), eta / 2, ell))
}

/// Largest η the reducer accepts.
pub const MAX_ETA: usize = 4;

/// One inbox message under construction.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Partial {
    pub bits: u64,
    pub filled: u64,
}

impl Partial {
    #[inline]
    fn set(&mut self, pos: u32, bit: bool) {
        let m = 1u64 << pos;
        self.filled |= m;
        self.bits = (self.bits & !m) | (u64::from(bit) << pos);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmulMemory<M> {
    /// Phase clock C.
    pub clock: u64,
    /// The inner protocol's visible part as of the last wrap of C.
    pub private_message: BitString,
    /// Only the first η (lifted to even) entries are used.
    pub inbox: [Partial; MAX_ETA],
    pub inner: M,
}

/// The emulating protocol for `P`.
#[derive(Debug, Clone, PartialEq)]
pub struct Emulated<P> {
    inner: P,
    /// η after lifting to an even count.
    eta_even: usize,
    inner_ell: u32,
    phase_len: u64,
    clock_bits: u32,
}

impl<P: Protocol> Emulated<P> {
    /// Fails unless `inner` is bitwise independent. An odd η is lifted to
    /// η + 1; the surplus message is never shown to the inner protocol.
    pub fn new(inner: P) -> Result<Self> {
        if !inner.bitwise_independent() {
            return Err(Error::NotBitwiseIndependent(inner.name()));
        }
        let eta = inner.eta();
        if eta == 0 || eta > MAX_ETA {
            return Err(invalid("eta", "1 <= eta <= 4", format!("got {eta}")));
        }
        let eta_even = eta + eta % 2;
        let inner_ell = inner.ell();
        let (phase_len, _, _) = phase_structure(eta_even, inner_ell)?;
        let clock_bits = ceil_log2(phase_len);
        if clock_bits + 1 > 64 {
            return Err(invalid("ell", "emulated width <= 64", format!("phase length {phase_len}")));
        }
        Ok(Self { inner, eta_even, inner_ell, phase_len, clock_bits })
    }

    pub fn inner(&self) -> &P {
        &self.inner
    }

    /// Rounds in which bits are collected, (η/2)·ℓ.
    pub fn phase_len(&self) -> u64 {
        self.phase_len
    }

    /// Modulus of the phase clock: rounds per inner round.
    pub fn slowdown(&self) -> u64 {
        1 << self.clock_bits
    }

    /// Bit of the hidden message on display, `private_message[C mod ℓ]`.
    pub fn displayed_index(&self, mem: &EmulMemory<P::Memory>) -> u32 {
        (mem.clock % u64::from(self.inner_ell)) as u32
    }

    /// Whether the shown bit matches the hidden message.
    pub fn display_invariant_holds(&self, mem: &EmulMemory<P::Memory>, shown: BitString) -> bool {
        shown.width() == self.ell()
            && shown.bit(0) == mem.private_message.bit(self.displayed_index(mem))
            && shown.value() >> 1 == mem.clock
    }

    fn empty_inbox(&self) -> [Partial; MAX_ETA] {
        [Partial::default(); MAX_ETA]
    }
}

impl<P: Protocol> Protocol for Emulated<P> {
    type Memory = EmulMemory<P::Memory>;

    fn name(&self) -> String {
        format!("emul({})", self.inner.name())
    }

    fn eta(&self) -> usize {
        2
    }

    fn ell(&self) -> u32 {
        self.clock_bits + 1
    }

    fn bitwise_independent(&self) -> bool {
        true
    }

    fn init_domain(&self) -> u64 {
        self.inner.init_domain()
    }

    /// `Value(v)` gives an empty inbox and a hidden message matching the
    /// inner state. For inner clocks the phase clock takes `v mod S` and the
    /// inner clock `v div S`, so the output clock reads `v`; otherwise the
    /// phase starts at 0 with the inner state for `v`. `Random` draws every
    /// field independently, so the hidden message need not match the inner
    /// state.
    fn init_memory(&self, value: InitValue, role: Role, rng: &mut AgentRng) -> Result<Self::Memory> {
        match value {
            InitValue::Value(v) => {
                let (clock, inner_value) = match self.inner.clock_modulus() {
                    Some(_) => (v % self.slowdown(), v / self.slowdown()),
                    None => (0, v),
                };
                let inner = self.inner.init_memory(InitValue::Value(inner_value), role, rng)?;
                Ok(EmulMemory {
                    clock,
                    private_message: self.inner.visible(&inner),
                    inbox: self.empty_inbox(),
                    inner,
                })
            }
            InitValue::Random => {
                let inner = self.inner.init_memory(value, role, rng)?;
                let ell_mask = mask(self.inner_ell);
                let mut inbox = self.empty_inbox();
                for p in &mut inbox[..self.eta_even] {
                    *p = Partial { bits: rng.gen::<u64>() & ell_mask, filled: rng.gen::<u64>() & ell_mask };
                }
                Ok(EmulMemory {
                    clock: rng.gen::<u64>() & mask(self.clock_bits),
                    private_message: BitString::truncating(self.inner_ell, rng.gen()),
                    inbox,
                    inner,
                })
            }
        }
    }

    fn visible(&self, mem: &Self::Memory) -> BitString {
        let bit = u64::from(mem.private_message.bit(self.displayed_index(mem)));
        BitString::truncating(self.clock_bits + 1, bit | (mem.clock << 1))
    }

    fn update(&self, mem: &Self::Memory, role: Role, observed: &[BitString], rng: &mut AgentRng) -> Self::Memory {
        let (o1, o2) = (observed[0].value(), observed[1].value());
        let z = mem.clock;
        let clock = maj_word(z, o1 >> 1, o2 >> 1).wrapping_add(1) & mask(self.clock_bits);
        let mut inbox = mem.inbox;
        if z < self.phase_len {
            let ell = u64::from(self.inner_ell);
            let (j, i) = ((z / ell) as usize, (z % ell) as u32);
            inbox[2 * j].set(i, o1 & 1 == 1);
            inbox[2 * j + 1].set(i, o2 & 1 == 1);
        }
        if clock != 0 {
            return EmulMemory { clock, private_message: mem.private_message, inbox, inner: mem.inner.clone() };
        }
        let own = mem.private_message.value();
        let messages = inbox.map(|p| BitString::truncating(self.inner_ell, (p.bits & p.filled) | (own & !p.filled)));
        let inner = self.inner.update(&mem.inner, role, &messages[..self.inner.eta()], rng);
        EmulMemory { clock, private_message: self.inner.visible(&inner), inbox: self.empty_inbox(), inner }
    }

    fn output_bit(&self, mem: &Self::Memory) -> Option<bool> {
        self.inner.output_bit(&mem.inner)
    }

    /// The inner clock scaled by the slowdown plus the phase clock, so the
    /// reading advances once per round when synchronized.
    fn output_clock(&self, mem: &Self::Memory) -> Option<u64> {
        let modulus = self.inner.clock_modulus()?;
        let c = self.inner.output_clock(&mem.inner)?;
        Some(crate::clocks::compose_clock(mem.clock, c, self.slowdown(), modulus))
    }

    fn clock_modulus(&self) -> Option<u64> {
        self.inner.clock_modulus()
    }

    fn speaking(&self, mem: &Self::Memory) -> Option<bool> {
        self.inner.speaking(&mem.inner)
    }
}

/// Runs `rounds` rounds under BIT sampling and returns the memories after
/// each round, starting with the initial ones.
pub fn run_bit_model<P: Protocol>(
    protocol: P,
    pop: &mut Population<P::Memory>,
    seed: u64,
    rounds: u64,
) -> Result<Vec<Vec<P::Memory>>> {
    let engine = Engine::new(protocol, seed).with_mode(SamplingMode::Bit)?;
    let snapshot = |pop: &Population<P::Memory>| pop.agents().iter().map(|a| a.memory.clone()).collect::<Vec<_>>();
    let mut trace = vec![snapshot(pop)];
    for _ in 0..rounds {
        engine.step(pop);
        trace.push(snapshot(pop));
    }
    Ok(trace)
}
