//! Clocked dissemination baselines that assume a shared clock.

use rand::Rng;

use crate::bits::BitString;
use crate::error::{invalid, Result};
use crate::protocol::{Clocked, InitValue, Role};
use crate::rng::AgentRng;

/// Period ⌈γ log₂ n⌉ used by the baselines, rounded up to even.
pub fn baseline_period(n: usize, gamma: f64) -> Result<u64> {
    if n < 2 || !(gamma > 0.0) {
        return Err(invalid("gamma", "n >= 2, gamma > 0", format!("n={n}, gamma={gamma}")));
    }
    let t = (gamma * (n as f64).log2()).ceil() as u64;
    Ok(t.max(2).next_multiple_of(2))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CertaintyMemory {
    pub output: bool,
    pub certain: bool,
}

/// Two bits, (output, certainty). Non-sources copy the first certain pair
/// they pull and forget their certainty when the clock reads 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CertaintyProtocol {
    period: u64,
}

impl CertaintyProtocol {
    pub fn new(period: u64) -> Result<Self> {
        if period < 2 {
            return Err(invalid("T", "T >= 2", format!("got {period}")));
        }
        Ok(Self { period })
    }
}

pub fn certainty_round(mem: CertaintyMemory, role: Role, pulled: &[(bool, bool)], clock: u64) -> CertaintyMemory {
    if role.is_source {
        return CertaintyMemory { output: role.input_bit, certain: true };
    }
    if clock == 0 {
        return CertaintyMemory { output: mem.output, certain: false };
    }
    match pulled.iter().find(|(_, certain)| *certain) {
        Some(&(output, _)) => CertaintyMemory { output, certain: true },
        None => mem,
    }
}

impl Clocked for CertaintyProtocol {
    type Memory = CertaintyMemory;

    fn name(&self) -> String {
        format!("certainty(T={})", self.period)
    }

    fn eta(&self) -> usize {
        2
    }

    fn ell(&self) -> u32 {
        2
    }

    fn bitwise_independent(&self) -> bool {
        false
    }

    fn period(&self) -> u64 {
        self.period
    }

    fn init_domain(&self) -> u64 {
        4
    }

    fn init_memory(&self, value: InitValue, role: Role, rng: &mut AgentRng) -> Result<CertaintyMemory> {
        if role.is_source {
            return Ok(CertaintyMemory { output: role.input_bit, certain: true });
        }
        let v = match value {
            InitValue::Random => rng.gen_range(0..4),
            InitValue::Value(v) if v < 4 => v,
            InitValue::Value(v) => return Err(invalid("init", "value < 4", format!("got {v}"))),
        };
        Ok(CertaintyMemory { output: v & 1 == 1, certain: v & 2 == 2 })
    }

    fn visible(&self, mem: &CertaintyMemory, _clock: u64) -> BitString {
        BitString::truncating(2, u64::from(mem.output) | (u64::from(mem.certain) << 1))
    }

    fn update(&self, mem: &CertaintyMemory, role: Role, observed: &[BitString], clock: u64, _rng: &mut AgentRng) -> CertaintyMemory {
        let pulled: Vec<(bool, bool)> = observed.iter().map(|o| (o.bit(0), o.bit(1))).collect();
        certainty_round(*mem, role, &pulled, clock)
    }

    fn output_bit(&self, mem: &CertaintyMemory) -> Option<bool> {
        Some(mem.output)
    }
}

/// One bit. In the first half of the period non-sources switch to 0 on
/// seeing a 0, in the second half to 1 on seeing a 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SubphaseProtocol {
    period: u64,
}

impl SubphaseProtocol {
    pub fn new(period: u64) -> Result<Self> {
        if period < 2 || period % 2 != 0 {
            return Err(invalid("T", "T even", format!("got {period}")));
        }
        Ok(Self { period })
    }
}

pub fn subphase_sensitive_round(output: bool, role: Role, pulled: &[bool], clock: u64, period: u64) -> bool {
    if role.is_source {
        return role.input_bit;
    }
    let sensitive_to = clock % period >= period / 2;
    if pulled.contains(&sensitive_to) {
        sensitive_to
    } else {
        output
    }
}

impl Clocked for SubphaseProtocol {
    type Memory = bool;

    fn name(&self) -> String {
        format!("subphase(T={})", self.period)
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

    fn period(&self) -> u64 {
        self.period
    }

    fn init_domain(&self) -> u64 {
        2
    }

    fn init_memory(&self, value: InitValue, role: Role, rng: &mut AgentRng) -> Result<bool> {
        if role.is_source {
            return Ok(role.input_bit);
        }
        match value {
            InitValue::Random => Ok(rng.gen()),
            InitValue::Value(v) if v < 2 => Ok(v == 1),
            InitValue::Value(v) => Err(invalid("init", "value < 2", format!("got {v}"))),
        }
    }

    fn visible(&self, mem: &bool, _clock: u64) -> BitString {
        BitString::truncating(1, u64::from(*mem))
    }

    fn update(&self, mem: &bool, role: Role, observed: &[BitString], clock: u64, _rng: &mut AgentRng) -> bool {
        let pulled = [observed[0].bit(0), observed[1].bit(0)];
        subphase_sensitive_round(*mem, role, &pulled, clock, self.period)
    }

    fn output_bit(&self, mem: &bool) -> Option<bool> {
        Some(*mem)
    }
}
