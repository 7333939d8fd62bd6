//! Clocked majority-bit dissemination in one bit.

use rand::Rng;

use super::schedule::{PhaseKind, PhaseSchedule};
use crate::bits::BitString;
use crate::error::Result;
use crate::protocol::{Clocked, InitValue, Role};
use crate::rng::AgentRng;

/// Bit shown by an agent. On odd clock readings only speakers of 0 show 0;
/// on even readings only speakers of 1 show 1.
pub fn parity_display(speaking: bool, b1: bool, odd: bool) -> bool {
    if odd {
        !(speaking && !b1)
    } else {
        speaking && b1
    }
}

/// The opinion certified by seeing `seen` on a round of the given parity,
/// if any.
pub fn certify(seen: bool, odd: bool) -> Option<bool> {
    match (odd, seen) {
        (true, false) => Some(false),
        (false, true) => Some(true),
        _ => None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PhaseSpreadMemory {
    pub speaking: bool,
    pub b1: bool,
    /// Certified during the current phase; starts speaking at its end.
    pub pending: bool,
    pub c0: u64,
    pub c1: u64,
    pub output: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PhaseSpread {
    schedule: PhaseSchedule,
}

impl PhaseSpread {
    pub fn new(schedule: PhaseSchedule) -> Self {
        Self { schedule }
    }

    pub fn schedule(&self) -> &PhaseSchedule {
        &self.schedule
    }

    /// One round on the first pulled bit with the pre-round clock.
    pub fn round(&self, mem: &PhaseSpreadMemory, role: Role, seen: bool, clock: u64) -> PhaseSpreadMemory {
        let s = &self.schedule;
        let mut m = *mem;
        let cap = s.period();
        if role.is_source {
            m.speaking = true;
            m.b1 = role.input_bit;
            m.pending = false;
        }
        let odd = clock % 2 == 1;
        let kind = s.kind(clock);
        match kind {
            PhaseKind::Boosting | PhaseKind::Spreading(_) => {
                if !m.speaking && !m.pending {
                    if let Some(b) = certify(seen, odd) {
                        m.b1 = b;
                        m.pending = true;
                    }
                }
                m.c0 = 0;
                m.c1 = 0;
            }
            PhaseKind::Polling => match certify(seen, odd) {
                Some(true) => m.c1 = (m.c1 + 1).min(cap),
                Some(false) => m.c0 = (m.c0 + 1).min(cap),
                None => {}
            },
        }
        if s.is_phase_end(clock) {
            if m.pending {
                m.speaking = true;
                m.pending = false;
            }
            if kind == PhaseKind::Polling {
                m.output = m.c1 > m.c0;
                m.c0 = 0;
                m.c1 = 0;
                if !role.is_source {
                    m.speaking = false;
                }
            }
        }
        m
    }
}

impl Clocked for PhaseSpread {
    type Memory = PhaseSpreadMemory;

    fn name(&self) -> String {
        format!("phase-spread(period={})", self.schedule.period())
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
        self.schedule.period()
    }

    fn init_domain(&self) -> u64 {
        2
    }

    /// `Value(v)`: silent, output and `b1` equal to `v`.
    fn init_memory(&self, value: InitValue, role: Role, rng: &mut AgentRng) -> Result<PhaseSpreadMemory> {
        let mut m = match value {
            InitValue::Value(v) => PhaseSpreadMemory {
                speaking: false,
                b1: v % 2 == 1,
                pending: false,
                c0: 0,
                c1: 0,
                output: v % 2 == 1,
            },
            InitValue::Random => {
                let cap = self.schedule.period() + 1;
                PhaseSpreadMemory {
                    speaking: rng.gen(),
                    b1: rng.gen(),
                    pending: rng.gen(),
                    c0: rng.gen_range(0..cap),
                    c1: rng.gen_range(0..cap),
                    output: rng.gen(),
                }
            }
        };
        if role.is_source {
            m.speaking = true;
            m.b1 = role.input_bit;
            m.pending = false;
        }
        Ok(m)
    }

    fn visible(&self, mem: &PhaseSpreadMemory, clock: u64) -> BitString {
        BitString::truncating(1, u64::from(parity_display(mem.speaking, mem.b1, clock % 2 == 1)))
    }

    fn update(&self, mem: &PhaseSpreadMemory, role: Role, observed: &[BitString], clock: u64, _rng: &mut AgentRng) -> PhaseSpreadMemory {
        self.round(mem, role, observed[0].bit(0), clock)
    }

    fn output_bit(&self, mem: &PhaseSpreadMemory) -> Option<bool> {
        Some(mem.output)
    }

    fn speaking(&self, mem: &PhaseSpreadMemory) -> Option<bool> {
        Some(mem.speaking)
    }
}
