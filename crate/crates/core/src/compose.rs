//! Running a clocked protocol next to a clock.

use crate::bits::BitString;
use crate::error::{invalid, Result};
use crate::protocol::{Clocked, InitValue, Protocol, Role};
use crate::rng::AgentRng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ComposeMemory<C, P> {
    pub clock: C,
    pub proto: P,
}

/// Parallel composition: the clock protocol's bits low, the clocked
/// protocol's bits high. The clocked part reads the clock protocol's output
/// at the start of each round.
#[derive(Debug, Clone, PartialEq)]
pub struct Compose<C, P> {
    clock: C,
    proto: P,
}

impl<C: Protocol, P: Clocked> Compose<C, P> {
    pub fn new(clock: C, proto: P) -> Result<Self> {
        if clock.clock_modulus() != Some(proto.period()) {
            return Err(invalid(
                "T",
                "clock modulus == period",
                format!("clock {:?} vs period {}", clock.clock_modulus(), proto.period()),
            ));
        }
        if clock.eta() != proto.eta() {
            return Err(invalid("eta", "equal pulls", format!("{} vs {}", clock.eta(), proto.eta())));
        }
        Ok(Self { clock, proto })
    }

    pub fn clock(&self) -> &C {
        &self.clock
    }

    pub fn proto(&self) -> &P {
        &self.proto
    }

    fn reading(&self, mem: &C::Memory) -> u64 {
        self.clock.output_clock(mem).expect("clock protocol exposes a clock")
    }
}

impl<C: Protocol, P: Clocked> Protocol for Compose<C, P> {
    type Memory = ComposeMemory<C::Memory, P::Memory>;

    fn name(&self) -> String {
        format!("{}+{}", self.clock.name(), self.proto.name())
    }

    fn eta(&self) -> usize {
        self.clock.eta()
    }

    fn ell(&self) -> u32 {
        self.clock.ell() + self.proto.ell()
    }

    fn bitwise_independent(&self) -> bool {
        self.clock.bitwise_independent() && self.proto.bitwise_independent()
    }

    fn init_domain(&self) -> u64 {
        self.clock.init_domain()
    }

    /// `Value(v)` sets the clock from `v` and the clocked part from
    /// `v mod its domain`.
    fn init_memory(&self, value: InitValue, role: Role, rng: &mut AgentRng) -> Result<Self::Memory> {
        let clock = self.clock.init_memory(value, role, rng)?;
        let proto_value = match value {
            InitValue::Random => InitValue::Random,
            InitValue::Value(v) => InitValue::Value(v % self.proto.init_domain()),
        };
        let proto = self.proto.init_memory(proto_value, role, rng)?;
        Ok(ComposeMemory { clock, proto })
    }

    fn visible(&self, mem: &Self::Memory) -> BitString {
        let low = self.clock.visible(&mem.clock);
        let high = self.proto.visible(&mem.proto, self.reading(&mem.clock));
        low.concat(high).expect("composed width within 64 bits")
    }

    fn update(&self, mem: &Self::Memory, role: Role, observed: &[BitString], rng: &mut AgentRng) -> Self::Memory {
        let low_bits = self.clock.ell();
        let mut low = [BitString::truncating(1, 0); 4];
        let mut high = [BitString::truncating(1, 0); 4];
        let k = observed.len();
        assert!(k <= 4, "at most four pulls");
        for (i, o) in observed.iter().enumerate() {
            low[i] = BitString::truncating(low_bits, o.value());
            high[i] = BitString::truncating(self.proto.ell(), o.value() >> low_bits);
        }
        let reading = self.reading(&mem.clock);
        let clock = self.clock.update(&mem.clock, role, &low[..k], rng);
        let proto = self.proto.update(&mem.proto, role, &high[..k], reading, rng);
        ComposeMemory { clock, proto }
    }

    fn output_bit(&self, mem: &Self::Memory) -> Option<bool> {
        self.proto.output_bit(&mem.proto)
    }

    fn output_clock(&self, mem: &Self::Memory) -> Option<u64> {
        self.clock.output_clock(&mem.clock)
    }

    fn clock_modulus(&self) -> Option<u64> {
        self.clock.clock_modulus()
    }

    fn speaking(&self, mem: &Self::Memory) -> Option<bool> {
        self.proto.speaking(&mem.proto)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleMemory<P> {
    pub clock: u64,
    pub proto: P,
}

/// A clocked protocol driven by a private clock that every agent starts at
/// the same reading. The clock is not part of the visible bits.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleClock<P> {
    proto: P,
    start: u64,
}

impl<P: Clocked> OracleClock<P> {
    pub fn new(proto: P, start: u64) -> Result<Self> {
        if start >= proto.period() {
            return Err(invalid("start", "start < period", format!("got {start}")));
        }
        Ok(Self { proto, start })
    }

    pub fn proto(&self) -> &P {
        &self.proto
    }
}

impl<P: Clocked> Protocol for OracleClock<P> {
    type Memory = OracleMemory<P::Memory>;

    fn name(&self) -> String {
        format!("oracle({})", self.proto.name())
    }

    fn eta(&self) -> usize {
        self.proto.eta()
    }

    fn ell(&self) -> u32 {
        self.proto.ell()
    }

    fn bitwise_independent(&self) -> bool {
        self.proto.bitwise_independent()
    }

    fn init_domain(&self) -> u64 {
        self.proto.init_domain()
    }

    fn init_memory(&self, value: InitValue, role: Role, rng: &mut AgentRng) -> Result<Self::Memory> {
        Ok(OracleMemory { clock: self.start, proto: self.proto.init_memory(value, role, rng)? })
    }

    fn visible(&self, mem: &Self::Memory) -> BitString {
        self.proto.visible(&mem.proto, mem.clock)
    }

    fn update(&self, mem: &Self::Memory, role: Role, observed: &[BitString], rng: &mut AgentRng) -> Self::Memory {
        OracleMemory {
            clock: (mem.clock + 1) % self.proto.period(),
            proto: self.proto.update(&mem.proto, role, observed, mem.clock, rng),
        }
    }

    fn output_bit(&self, mem: &Self::Memory) -> Option<bool> {
        self.proto.output_bit(&mem.proto)
    }

    fn output_clock(&self, mem: &Self::Memory) -> Option<u64> {
        Some(mem.clock)
    }

    fn clock_modulus(&self) -> Option<u64> {
        Some(self.proto.period())
    }

    fn speaking(&self, mem: &Self::Memory) -> Option<bool> {
        self.proto.speaking(&mem.proto)
    }
}
